"""Driven steady states, excitation spectra and photon-blockade correlations.

A coherent probe of strength ``eps`` drives mode 2 at frequency ``w``; all
calculations happen in the frame rotating at ``w`` so the Liouvillian is
time independent.
"""

from __future__ import annotations

import warnings
from dataclasses import replace

import numpy as np
import scipy.linalg
from scipy.signal import find_peaks

from .effective import effective_params
from .hilbert import (
    ProbeDrive,
    SystemParams,
    build_liouvillian,
    composite_operators,
    unvec,
)
from .results import ScanResult

__all__ = [
    "SteadyStateError",
    "UndefinedCorrelation",
    "SPECTRUM_EPS_FRACTION",
    "G2_EPS_FRACTION",
    "DrivenLiouvillian",
    "steady_state",
    "g2_zero",
    "g2_scan",
    "excitation_spectrum",
    "local_minima",
    "local_maxima",
]

SPECTRUM_EPS_FRACTION = 0.01
G2_EPS_FRACTION = 0.01
G2_CUTOFFS = (3, 3)
G2_CHECK_CUTOFFS = (2, 2)
SPECTRUM_CUTOFFS = (2, 2)
KERNEL_GAP = 1e-10
RESIDUAL_TOL = 1e-10


class SteadyStateError(RuntimeError):
    pass


class UndefinedCorrelation(ValueError):
    pass


class DrivenLiouvillian:
    """``L(detuning_e, eps)`` assembled from precomputed pieces.

    The probe enters the Hamiltonian linearly, ``H = H0 - de * N + eps * X``
    with ``N`` the excitation number and ``X = a2 + a2^dag``, so the
    Liouvillian is the matching linear combination of three superoperators.
    """

    def __init__(self, p: SystemParams):
        self.params = p
        ops = composite_operators(p)
        d = p.dim
        eye = np.eye(d, dtype=complex)
        n_tot = ops.n1 + ops.n2 + ops.excited
        x = ops.a2 + ops.a2.conj().T
        self._base = build_liouvillian(p)
        self._number = -1j * (np.kron(eye, n_tot) - np.kron(n_tot.T, eye))
        self._drive = -1j * (np.kron(eye, x) - np.kron(x.T, eye))

    def __call__(self, drive: ProbeDrive) -> np.ndarray:
        return (self._base - drive.detuning_e * self._number
                + drive.amplitude * self._drive)


def steady_state(L, method: str = "direct") -> np.ndarray:
    """Stationary density matrix of the generator ``L``.

    ``method="direct"`` replaces one equation by the trace condition and
    solves the square system with LU; ``method="svd"`` takes the right
    singular vector of the smallest singular value and also checks that the
    kernel is one dimensional.  Both Hermitize, normalize the trace and
    reject candidates with negative eigenvalues below ``-1e-8``.
    """
    L = np.asarray(L, dtype=complex)
    n = L.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ValueError("L is not a superoperator on square matrices")
    trace_row = np.zeros(n, dtype=complex)
    trace_row[:: d + 1] = 1.0

    if method == "direct":
        M = L.copy()
        M[0, :] = trace_row
        rhs = np.zeros(n, dtype=complex)
        rhs[0] = 1.0
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            try:
                x = scipy.linalg.solve(M, rhs)
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
                raise SteadyStateError(
                    f"steady state is not unique (kernel dimension > 1): {exc}") from exc
    elif method == "svd":
        _, s, vh = np.linalg.svd(L)
        null = int(np.sum(s <= KERNEL_GAP * s[0]))
        if null > 1:
            raise SteadyStateError(f"steady state is not unique (kernel dimension {null})")
        x = vh[-1].conj()
        tr = trace_row @ x
        if abs(tr) < 1e-14:
            raise SteadyStateError("kernel vector is traceless")
        x = x / tr
    else:
        raise ValueError(f"unknown method {method!r}")

    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    lam = np.linalg.eigvalsh(rho).min()
    if lam < -1e-8:
        raise SteadyStateError(f"steady state has negative eigenvalue {lam:.3g}")
    scale = np.linalg.norm(L)
    residual = np.linalg.norm(L @ rho.reshape(-1, order="F"))
    if residual > RESIDUAL_TOL * scale:
        raise SteadyStateError(
            f"steady-state residual {residual:.3g} exceeds {RESIDUAL_TOL:g} * ||L||")
    return rho


def g2_zero(rho, a) -> float:
    """``<a^dag a^dag a a> / <a^dag a>^2`` in the state ``rho``."""
    rho = np.asarray(rho)
    a = np.asarray(a)
    ad = a.conj().T
    n = np.trace(ad @ a @ rho).real
    if n <= 1e-12:
        raise UndefinedCorrelation(f"mean photon number {n:.3g} too small for g2(0)")
    nn = np.trace(ad @ ad @ a @ a @ rho).real
    return max(nn, 0.0) / n**2


def _with_cutoffs(p: SystemParams, cutoffs) -> SystemParams:
    return replace(p, n1_cutoff=int(cutoffs[0]), n2_cutoff=int(cutoffs[1]))


def _default_eps(p: SystemParams, fraction: float) -> float:
    g_eff = abs(effective_params(p).g_eff)
    if g_eff == 0:
        raise ValueError("g_eff = 0: give the probe amplitude explicitly")
    return fraction * g_eff


def _scan_metadata(p, eps, extra):
    return {"params": p, "eps": eps, **extra}


def g2_scan(p: SystemParams, eps: float | None, delta_e_grid,
            cutoffs=G2_CUTOFFS, check_cutoffs=G2_CHECK_CUTOFFS,
            truncation_tol: float = 0.05, drive_tol: float = 0.02) -> ScanResult:
    """Zero-delay intensity correlation of mode 2 versus probe detuning.

    Every point is solved three times: at ``cutoffs``, at ``check_cutoffs``
    and at ``eps/2``.  The ``truncation_ok`` and ``weak_drive_ok`` columns
    flag points whose relative changes exceed ``truncation_tol`` and
    ``drive_tol``; such points are kept, not dropped.  Points where the
    steady state cannot be found get ``NaN`` and ``solved = 0``.
    """
    grid = np.asarray(delta_e_grid, dtype=float)
    if eps is None:
        eps = _default_eps(p, G2_EPS_FRACTION)
    main = _with_cutoffs(p, cutoffs)
    low = _with_cutoffs(p, check_cutoffs)
    fam_main = DrivenLiouvillian(main)
    fam_low = DrivenLiouvillian(low)
    a2_main = composite_operators(main).a2
    a2_low = composite_operators(low).a2
    n2_main = a2_main.conj().T @ a2_main

    n = grid.size
    cols = {k: np.full(n, np.nan) for k in ("g2", "N2", "g2_low_cutoff", "g2_half_eps")}
    solved = np.zeros(n, dtype=bool)
    for i, de in enumerate(grid):
        try:
            rho = steady_state(fam_main(ProbeDrive(eps, de)))
            cols["g2"][i] = g2_zero(rho, a2_main)
            cols["N2"][i] = np.trace(n2_main @ rho).real
            cols["g2_low_cutoff"][i] = g2_zero(steady_state(fam_low(ProbeDrive(eps, de))), a2_low)
            cols["g2_half_eps"][i] = g2_zero(
                steady_state(fam_main(ProbeDrive(0.5 * eps, de))), a2_main)
            solved[i] = True
        except (SteadyStateError, UndefinedCorrelation):
            continue
    with np.errstate(invalid="ignore", divide="ignore"):
        trunc = np.abs(cols["g2"] - cols["g2_low_cutoff"]) / cols["g2"]
        weak = np.abs(cols["g2"] - cols["g2_half_eps"]) / cols["g2"]
    cols["truncation_ok"] = solved & (trunc < truncation_tol)
    cols["weak_drive_ok"] = solved & (weak < drive_tol)
    cols["solved"] = solved
    return ScanResult("delta_e", grid, cols, _scan_metadata(
        main, eps, {"cutoffs": tuple(cutoffs), "check_cutoffs": tuple(check_cutoffs)}))


def excitation_spectrum(p: SystemParams, eps: float | None, delta_e_grid,
                        cutoffs=SPECTRUM_CUTOFFS, linearity_tol: float = 0.01) -> ScanResult:
    """Steady-state emitter population versus probe detuning, peak-normalized.

    ``S_half_eps`` repeats the scan at ``eps/2`` (normalized the same way);
    ``weak_drive_ok`` flags points where the two differ by less than
    ``linearity_tol``.
    """
    grid = np.asarray(delta_e_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty probe grid")
    if eps is None:
        eps = _default_eps(p, SPECTRUM_EPS_FRACTION)
    q = _with_cutoffs(p, cutoffs)
    fam = DrivenLiouvillian(q)
    excited = composite_operators(q).excited

    pop = np.empty(grid.size)
    pop_half = np.empty(grid.size)
    for i, de in enumerate(grid):
        pop[i] = np.trace(excited @ steady_state(fam(ProbeDrive(eps, de)))).real
        pop_half[i] = np.trace(excited @ steady_state(fam(ProbeDrive(0.5 * eps, de)))).real
    s = pop / pop.max()
    s_half = pop_half / pop_half.max()
    return ScanResult("delta_e", grid, {
        "S": s,
        "pop_e": pop,
        "S_half_eps": s_half,
        "weak_drive_ok": np.abs(s - s_half) < linearity_tol,
    }, _scan_metadata(q, eps, {"cutoffs": tuple(cutoffs)}))


def local_minima(x, y, prominence: float | None = None) -> np.ndarray:
    """Abscissae of interior local minima of ``y(x)``."""
    y = np.asarray(y, dtype=float)
    idx, _ = find_peaks(-y, prominence=prominence)
    return np.asarray(x)[idx]


def local_maxima(x, y, prominence: float | None = None) -> np.ndarray:
    """Abscissae of interior local maxima of ``y(x)``."""
    y = np.asarray(y, dtype=float)
    idx, _ = find_peaks(y, prominence=prominence)
    return np.asarray(x)[idx]

