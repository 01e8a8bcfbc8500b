"""Non-Hermitian spectra in the one- and two-excitation manifolds."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .effective import effective_eigenvalues, effective_params, resonance_delta2
from .hilbert import SystemParams
from .results import ScanResult

__all__ = [
    "ExcitationSubspace",
    "EigenBranch",
    "DarkDoublet",
    "EigenError",
    "BranchTrackingError",
    "AdiabaticRegimeWarning",
    "SUBSPACE_BASIS",
    "excitation_block",
    "eigendecompose",
    "cubic_eigenvalues",
    "dark_doublet",
    "avoided_crossing_scan",
    "effective_agreement_scan",
]

# (s, n1, n2) with s = 0 ground, 1 excited
SUBSPACE_BASIS = {
    1: ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    2: ((1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)),
}

# |g,1,0> and |g,2,0> etc.: anything with a photon in the lossy mode
_LOSSY_WEIGHT_MIN_N1 = 1
ADIABATIC_RATIO = 5.0


class EigenError(RuntimeError):
    pass


class BranchTrackingError(EigenError):
    pass


class AdiabaticRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ExcitationSubspace:
    n_exc: int
    basis: tuple
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class EigenBranch:
    label: str
    eigenvalue: complex
    vector: np.ndarray

    @property
    def energy(self) -> float:
        return self.eigenvalue.real

    @property
    def linewidth(self) -> float:
        return -2.0 * self.eigenvalue.imag


@dataclass(frozen=True)
class DarkDoublet:
    minus: EigenBranch
    plus: EigenBranch
    adiabatic: bool

    @property
    def E_minus(self) -> complex:
        return self.minus.eigenvalue

    @property
    def E_plus(self) -> complex:
        return self.plus.eigenvalue

    @property
    def splitting(self) -> float:
        return self.plus.energy - self.minus.energy


def excitation_block(p: SystemParams, n_exc: int) -> ExcitationSubspace:
    """Non-Hermitian Hamiltonian restricted to ``n_exc`` total excitations."""
    if n_exc not in SUBSPACE_BASIS:
        raise ValueError(f"only n_exc in (1, 2) is supported, got {n_exc!r}")
    if min(p.n1_cutoff, p.n2_cutoff) < n_exc:
        raise ValueError("Fock cutoffs must be at least n_exc")
    g, J = p.g, p.J
    d1, d2 = p.delta1, p.delta2
    k1, k2, gm = p.kappa1, p.kappa2, p.gamma
    if n_exc == 1:
        m = np.array(
            [
                [-0.5j * gm, g, 0],
                [g, d1 - 0.5j * k1, J],
                [0, J, d2 - 0.5j * k2],
            ],
            dtype=complex,
        )
    else:
        r2 = np.sqrt(2.0)
        # |e10>, |e01>, |g20>, |g11>, |g02>
        m = np.array(
            [
                [d1 - 0.5j * (gm + k1), J, r2 * g, 0, 0],
                [J, d2 - 0.5j * (gm + k2), 0, g, 0],
                [r2 * g, 0, 2 * d1 - 1j * k1, r2 * J, 0],
                [0, g, r2 * J, d1 + d2 - 0.5j * (k1 + k2), r2 * J],
                [0, 0, 0, r2 * J, 2 * d2 - 1j * k2],
            ],
            dtype=complex,
        )
    m.setflags(write=False)
    return ExcitationSubspace(n_exc, SUBSPACE_BASIS[n_exc], m)


def eigendecompose(sub: ExcitationSubspace) -> list[EigenBranch]:
    """Eigenvalues and unit-norm right eigenvectors of a subspace block.

    Branches come back sorted by energy and labelled ``b0, b1, ...``.
    """
    m = np.asarray(sub.matrix)
    if not np.all(np.isfinite(m)):
        raise EigenError("non-finite entries in the subspace matrix")
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge: {exc}") from exc
    tr = np.trace(m)
    if abs(w.sum() - tr) > 1e-10 * max(1.0, abs(tr)):
        raise EigenError("eigenvalue sum does not reproduce the trace")
    v = v / np.linalg.norm(v, axis=0)
    order = np.argsort(w.real, kind="stable")
    return [EigenBranch(f"b{k}", complex(w[i]), v[:, i]) for k, i in enumerate(order)]


def cubic_eigenvalues(m) -> np.ndarray:
    """Roots of the characteristic polynomial of a 3x3 matrix, in closed form.

    Used as an independent check on the general eigensolver.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    # det(m - x) = -(x^3 + a x^2 + b x + c)
    a = -np.trace(m)
    b = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
         + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
         + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    c = -np.linalg.det(m)
    # depressed cubic y^3 + p y + q with x = y - a/3
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    disc = np.sqrt(q * q / 4.0 + p**3 / 27.0 + 0j)
    u3 = -q / 2.0 + disc
    if abs(u3) < abs(-q / 2.0 - disc):
        u3 = -q / 2.0 - disc
    omega = np.exp(2j * np.pi / 3.0)
    if u3 == 0:
        roots = np.zeros(3, dtype=complex)
    else:
        u = u3 ** (1.0 / 3.0)
        roots = np.array([u * omega**k - p / (3.0 * u * omega**k) for k in range(3)])
    x = roots - a / 3.0
    # Cardano loses digits on small roots next to a large one; polish with Newton
    for _ in range(2):
        f = ((x + a) * x + b) * x + c
        df = (3.0 * x + 2.0 * a) * x + b
        ok = df != 0
        x = np.where(ok, x - f / np.where(ok, df, 1.0), x)
    return x[np.argsort(x.real)]


def _lossy_weight(branch: EigenBranch, basis) -> float:
    return float(sum(abs(branch.vector[i]) ** 2
                     for i, (_, n1, _) in enumerate(basis) if n1 >= _LOSSY_WEIGHT_MIN_N1))


def _pick_dark(branches: list[EigenBranch], basis) -> tuple[EigenBranch, EigenBranch]:
    # smallest linewidth first; ties go to the branch with less weight on mode 1
    ranked = sorted(branches, key=lambda b: (round(b.linewidth, 12), _lossy_weight(b, basis)))
    lo, hi = sorted(ranked[:2], key=lambda b: b.energy)
    return (EigenBranch("dark-minus", lo.eigenvalue, lo.vector),
            EigenBranch("dark-plus", hi.eigenvalue, hi.vector))


def _is_adiabatic(p: SystemParams) -> bool:
    return abs(p.delta1) >= ADIABATIC_RATIO * p.kappa1


def dark_doublet(p: SystemParams, n_exc: int = 1) -> DarkDoublet:
    """The two least-damped branches of the ``n_exc`` manifold.

    Warns with :class:`AdiabaticRegimeWarning` when ``|D1| < 5 kappa1``.
    """
    adiabatic = _is_adiabatic(p)
    if not adiabatic:
        warnings.warn(
            f"|delta1| = {abs(p.delta1):g} < {ADIABATIC_RATIO:g} kappa1: outside the "
            "regime where the dark-state picture is expected to hold",
            AdiabaticRegimeWarning,
            stacklevel=2,
        )
    sub = excitation_block(p, n_exc)
    minus, plus = _pick_dark(eigendecompose(sub), sub.basis)
    return DarkDoublet(minus, plus, adiabatic)


def _track(prev: list[np.ndarray], branches: list[EigenBranch],
           min_overlap: float) -> list[EigenBranch]:
    vecs = np.array([b.vector for b in branches])
    overlaps = np.abs(np.conj(np.array(prev)) @ vecs.T)  # (tracked, candidates)
    chosen: list[EigenBranch] = []
    taken: set[int] = set()
    # assign the most confident match first so two branches never share a vector
    for t in np.argsort(-overlaps.max(axis=1)):
        cand = [c for c in np.argsort(-overlaps[t]) if c not in taken]
        best = cand[0]
        if overlaps[t, best] < min_overlap:
            raise BranchTrackingError(
                f"branch overlap {overlaps[t, best]:.3f} below {min_overlap}; refine the grid"
            )
        taken.add(best)
        chosen.append((t, branches[best]))
    return [b for _, b in sorted(chosen, key=lambda tb: tb[0])]


def avoided_crossing_scan(p: SystemParams, delta2_grid, n_exc: int = 1,
                          min_overlap: float = 0.5) -> ScanResult:
    """Dark-doublet energies and linewidths versus ``delta2``.

    The doublet is identified at the first grid point and then followed by
    maximal eigenvector overlap, so ``lower``/``upper`` refer to branch
    identity rather than to energy order at each point.  The ``*_eff``
    columns are the single-excitation eigenvalues of the effective model,
    sorted by energy.
    """
    grid = np.asarray(delta2_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty delta2 grid")
    if not _is_adiabatic(p):
        warnings.warn("scan outside the adiabatic regime", AdiabaticRegimeWarning, stacklevel=2)

    n = grid.size
    cols = {k: np.empty(n) for k in ("E_lower", "E_upper", "width_lower", "width_upper",
                                     "splitting", "E_minus_eff", "E_plus_eff",
                                     "width_minus_eff", "width_plus_eff", "trace_error")}
    tracked = None
    for i, d2 in enumerate(grid):
        q = replace(p, delta2=float(d2))
        sub = excitation_block(q, n_exc)
        branches = eigendecompose(sub)
        if tracked is None:
            pair = list(_pick_dark(branches, sub.basis))
        else:
            pair = _track([b.vector for b in tracked], branches, min_overlap)
        tracked = pair
        lo, hi = pair
        cols["E_lower"][i] = lo.energy
        cols["E_upper"][i] = hi.energy
        cols["width_lower"][i] = lo.linewidth
        cols["width_upper"][i] = hi.linewidth
        cols["splitting"][i] = abs(hi.energy - lo.energy)
        ev = effective_eigenvalues(effective_params(q))
        cols["E_minus_eff"][i], cols["E_plus_eff"][i] = ev.real
        cols["width_minus_eff"][i], cols["width_plus_eff"][i] = -2 * ev.imag
        tr = np.trace(sub.matrix)
        cols["trace_error"][i] = abs(sum(b.eigenvalue for b in branches) - tr) / max(1.0, abs(tr))
    return ScanResult("delta2", grid, cols, {"n_exc": n_exc})


def effective_agreement_scan(p_base: SystemParams, kappa1_grid,
                             detuning_ratio: float = 10.0,
                             fixed_delta1: float | None = None) -> ScanResult:
    """Exact versus effective dark doublet as ``kappa1`` varies.

    By default ``delta1 = detuning_ratio * kappa1`` follows ``kappa1``; with
    ``fixed_delta1`` the detuning stays put instead, so large ``kappa1``
    leaves the ``delta1 >> kappa1`` regime.  ``delta2`` sits on resonance at
    each point and ``J``, ``g`` stay as in ``p_base``.  ``discrepancy`` is
    the relative difference of the exact and effective splittings.
    """
    k1s = np.asarray(kappa1_grid, dtype=float)
    cols = {k: np.empty(k1s.size) for k in (
        "E_minus", "E_plus", "width_minus", "width_plus", "splitting",
        "E_minus_eff", "E_plus_eff", "width_minus_eff", "width_plus_eff", "splitting_eff",
        "discrepancy")}
    for i, k1 in enumerate(k1s):
        d1 = detuning_ratio * float(k1) if fixed_delta1 is None else float(fixed_delta1)
        q = replace(p_base, kappa1=float(k1), delta1=d1)
        q = replace(q, delta2=resonance_delta2(q))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AdiabaticRegimeWarning)
            dd = dark_doublet(q, 1)
        ev = effective_eigenvalues(effective_params(q))
        cols["E_minus"][i] = dd.minus.energy
        cols["E_plus"][i] = dd.plus.energy
        cols["width_minus"][i] = dd.minus.linewidth
        cols["width_plus"][i] = dd.plus.linewidth
        cols["splitting"][i] = dd.splitting
        cols["E_minus_eff"][i] = ev[0].real
        cols["E_plus_eff"][i] = ev[1].real
        cols["width_minus_eff"][i] = -2 * ev[0].imag
        cols["width_plus_eff"][i] = -2 * ev[1].imag
        split_eff = ev[1].real - ev[0].real
        cols["splitting_eff"][i] = split_eff
        cols["discrepancy"][i] = abs(dd.splitting - split_eff) / abs(split_eff)
    meta = {"detuning_ratio": None if fixed_delta1 is not None else detuning_ratio,
            "fixed_delta1": fixed_delta1}
    return ScanResult("kappa1", k1s, cols, meta)
