"""Master-equation time evolution and the vacuum Rabi experiment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .effective import EffectiveParams, effective_params, effective_rabi_pe
from .expm import expm
from .hilbert import (
    ProbeDrive,
    SystemParams,
    basis_index,
    build_hamiltonian,
    collapse_operators,
    composite_operators,
    liouvillian,
    unvec,
    vec,
)
from .integrate import integrate_linear

__all__ = [
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
    "TimeSeries",
    "RabiResult",
    "ReducedModel",
    "basis_projector",
    "check_density_matrix",
    "excitation_truncation",
    "evolve",
    "rabi_experiment",
    "propagator_oracle",
    "decay_rate",
    "expectations",
    "evolve_oracle",
]

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10


@dataclass
class TimeSeries:
    """Observables sampled on a time grid, with per-sample state diagnostics."""

    times: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    pe: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    hermiticity_error: np.ndarray
    states: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_total(self) -> np.ndarray:
        return self.n1 + self.n2 + self.pe


@dataclass
class RabiResult:
    series: TimeSeries
    pe_eff: np.ndarray
    eff: EffectiveParams

    @property
    def max_n1(self) -> float:
        return float(self.series.n1.max())

    @property
    def max_n2(self) -> float:
        return float(self.series.n2.max())

    @property
    def rms_deviation(self) -> float:
        return float(np.sqrt(np.mean((self.series.pe - self.pe_eff) ** 2)))


@dataclass(frozen=True)
class ReducedModel:
    """The dynamics restricted to states with at most ``max_exc`` excitations.

    ``isometry`` has one unit column per kept basis state, so a full-space
    operator ``X`` restricts as ``V^dag X V``.
    """

    params: SystemParams
    max_exc: int
    basis: tuple
    indices: np.ndarray
    isometry: np.ndarray
    hamiltonian: np.ndarray
    c_ops: tuple
    n1: np.ndarray
    n2: np.ndarray
    excited: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis)

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return self.isometry.conj().T @ x @ self.isometry

    def embed(self, x: np.ndarray) -> np.ndarray:
        return self.isometry @ x @ self.isometry.conj().T

    def liouvillian(self) -> np.ndarray:
        return liouvillian(self.hamiltonian, self.c_ops)


def basis_projector(p: SystemParams, s: int, n1: int = 0, n2: int = 0) -> np.ndarray:
    """``|s,n1,n2><s,n1,n2|`` as a full-space density matrix."""
    rho = np.zeros((p.dim, p.dim), dtype=complex)
    i = basis_index(p, s, n1, n2)
    rho[i, i] = 1.0
    return rho


def check_density_matrix(rho, trace_tol=1e-8, herm_tol=1e-10, pos_tol=1e-8):
    """Raise ``ValueError`` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace is {tr!r}")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lam < -pos_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam:.3g}")
    return rho


def _excitation_basis(p: SystemParams, max_exc: int):
    """``|g00>`` first, then each manifold in the subspace order used by ``eigen``."""
    from .eigen import SUBSPACE_BASIS

    basis = [(0, 0, 0)]
    for n in range(1, max_exc + 1):
        if n in SUBSPACE_BASIS:
            basis.extend(SUBSPACE_BASIS[n])
        else:
            basis.extend((s, n1, n - s - n1) for s in (1, 0) for n1 in range(n - s, -1, -1))
    return tuple(basis)


def excitation_truncation(p: SystemParams, rho0, max_exc: int,
                          drive: ProbeDrive | None = None) -> ReducedModel:
    """Restrict an undriven problem to at most ``max_exc`` excitations.

    Exact: the undriven Hamiltonian conserves the excitation number and every
    jump operator lowers it, so nothing ever leaves the kept block.
    """
    if drive is not None and drive.is_driven:
        raise ValueError("excitation truncation requires an undriven system")
    if int(max_exc) != max_exc or max_exc < 0:
        raise ValueError("max_exc must be a non-negative integer")
    if max_exc > min(p.n1_cutoff, p.n2_cutoff):
        raise ValueError("max_exc exceeds the Fock cutoffs")
    basis = _excitation_basis(p, int(max_exc))
    idx = np.array([basis_index(p, *b) for b in basis])

    rho0 = np.asarray(rho0)
    outside = np.ones(p.dim, dtype=bool)
    outside[idx] = False
    if rho0.shape != (p.dim, p.dim):
        raise ValueError("rho0 does not match the full Hilbert space")
    if np.any(np.abs(rho0[outside]) > 1e-12) or np.any(np.abs(rho0[:, outside]) > 1e-12):
        raise ValueError(f"rho0 has weight above {max_exc} excitations")

    V = np.zeros((p.dim, len(basis)), dtype=complex)
    V[idx, np.arange(len(basis))] = 1.0
    ops = composite_operators(p)

    def r(x):
        return V.conj().T @ x @ V

    h = r(build_hamiltonian(p))
    return ReducedModel(
        params=p,
        max_exc=int(max_exc),
        basis=basis,
        indices=idx,
        isometry=V,
        hamiltonian=h,
        c_ops=tuple(r(c) for c in collapse_operators(p)),
        n1=r(ops.n1),
        n2=r(ops.n2),
        excited=r(ops.excited),
    )


def _diagnostics(rhos):
    tr = np.einsum("tii->t", rhos)
    herm = np.abs(rhos - np.conj(np.swapaxes(rhos, 1, 2))).max(axis=(1, 2))
    lam = np.array([np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() for r in rhos])
    return np.abs(tr - 1.0), lam, herm


def evolve(p: SystemParams, drive: ProbeDrive | None, rho0, t_grid,
           rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
           max_exc: int | None = None, keep_states: bool = False) -> TimeSeries:
    """Integrate the master equation and sample ``N1``, ``N2`` and ``P_e``.

    With ``max_exc`` set the undriven problem is solved exactly in the
    reduced excitation space (see :func:`excitation_truncation`); kept states
    are always returned in the full space.
    """
    rho0 = check_density_matrix(np.asarray(rho0, dtype=complex))
    t_grid = np.asarray(t_grid, dtype=float)
    if max_exc is not None:
        red = excitation_truncation(p, rho0, max_exc, drive)
        L = red.liouvillian()
        start = red.restrict(rho0)
        n1_op, n2_op, pe_op = red.n1, red.n2, red.excited
        d = red.dim
    else:
        red = None
        ops = composite_operators(p)
        L = liouvillian(build_hamiltonian(p, drive), collapse_operators(p))
        start = rho0
        n1_op, n2_op, pe_op = ops.n1, ops.n2, ops.excited
        d = p.dim

    ys, stats = integrate_linear(L, vec(start), t_grid, rtol=rtol, atol=atol,
                                 hermitize_dim=d, return_stats=True)
    rhos = ys.reshape(len(t_grid), d, d).transpose(0, 2, 1)  # undo column stacking

    def expect(op):
        return np.einsum("ij,tji->t", op, rhos).real

    trace_err, min_eig, herm_err = _diagnostics(rhos)
    states = None
    if keep_states:
        states = rhos if red is None else np.array([red.embed(r) for r in rhos])
    return TimeSeries(
        times=t_grid,
        n1=expect(n1_op),
        n2=expect(n2_op),
        pe=expect(pe_op),
        trace_error=trace_err,
        min_eigenvalue=min_eig,
        hermiticity_error=herm_err,
        states=states,
        metadata={"rtol": rtol, "atol": atol, "max_exc": max_exc, **stats},
    )


def rabi_experiment(p: SystemParams, t_grid=None, n_periods: float = 3.0,
                    n_samples: int = 601, rtol: float = DEFAULT_RTOL,
                    atol: float = DEFAULT_ATOL) -> RabiResult:
    """Emitter starts excited with both modes empty; no drive.

    The default grid spans ``n_periods`` periods ``pi / g_eff`` of the
    effective Rabi oscillation; pass ``t_grid`` explicitly when ``g_eff`` is
    zero.  The evolution runs in the exact single-excitation space.
    """
    eff = effective_params(p)
    if t_grid is None:
        if eff.g_eff == 0:
            raise ValueError("g_eff = 0: no Rabi period, pass t_grid explicitly")
        t_grid = np.linspace(0.0, n_periods * np.pi / abs(eff.g_eff), n_samples)
    rho0 = basis_projector(p, 1, 0, 0)
    series = evolve(p, None, rho0, t_grid, rtol=rtol, atol=atol, max_exc=1)
    return RabiResult(series=series, pe_eff=effective_rabi_pe(series.times, eff), eff=eff)


def propagator_oracle(L, t: float) -> np.ndarray:
    """``exp(L t)`` by Pade scaling and squaring."""
    if t < 0:
        raise ValueError("t must be non-negative")
    L = np.asarray(L)
    if L.shape[0] > 1024:
        raise ValueError("propagator oracle limited to 1024 x 1024 generators")
    return expm(L * t)


def decay_rate(t, y) -> float:
    """Rate of ``y ~ A exp(-rate t)`` by least squares on ``log y``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    slope, _ = np.polyfit(t[keep], np.log(y[keep]), 1)
    return -slope


def expectations(rho, p: SystemParams) -> dict:
    """``N1``, ``N2`` and ``P_e`` of a full-space density matrix."""
    ops = composite_operators(p)
    rho = np.asarray(rho)
    return {
        "N1": float(np.trace(ops.n1 @ rho).real),
        "N2": float(np.trace(ops.n2 @ rho).real),
        "Pe": float(np.trace(ops.excited @ rho).real),
    }


def evolve_oracle(p: SystemParams, drive: ProbeDrive | None, rho0, times) -> list[np.ndarray]:
    """Full-space states at ``times`` from the matrix-exponential propagator."""
    L = liouvillian(build_hamiltonian(p, drive), collapse_operators(p))
    v0 = vec(np.asarray(rho0, dtype=complex))
    return [unvec(propagator_oracle(L, float(t)) @ v0, p.dim) for t in times]
