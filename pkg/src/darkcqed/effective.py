"""Closed-form effective model after eliminating the lossy mode.

Eliminating mode 1 leaves the emitter coupled to mode 2 with

    alpha = g / sqrt(D1^2 + k1^2/4),   beta = J / sqrt(D1^2 + k1^2/4)
    g_eff = beta g,    D_eff = D2 + (alpha^2 - beta^2) D1
    k_eff = k2 + beta^2 k1,    gamma_eff = gamma + alpha^2 k1

and level shifts ``-alpha^2 D1`` (emitter) and ``-beta^2 D1`` (mode 2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .hilbert import SystemParams
from .results import MapResult, ScanResult

__all__ = [
    "EffectiveParams",
    "CouplingRatios",
    "OptimalBeta",
    "effective_params",
    "resonance_delta2",
    "at_resonance",
    "coupling_ratios",
    "optimal_beta",
    "effective_rabi_pe",
    "effective_matrix",
    "effective_eigenvalues",
    "effective_spectrum",
    "regime_map",
    "optimal_ratio_map",
]


@dataclass(frozen=True)
class EffectiveParams:
    alpha: float
    beta: float
    g_eff: float
    delta_eff: float
    kappa_eff: float
    gamma_eff: float
    shift_e: float
    shift_2: float

    @property
    def rabi_frequency(self) -> float:
        return 2.0 * self.g_eff

    @property
    def total_decay(self) -> float:
        return self.kappa_eff + self.gamma_eff


class CouplingRatios(NamedTuple):
    g_over_k: float
    g_over_gamma: float
    cooperativity: float


class OptimalBeta(NamedTuple):
    beta_opt: float
    ratio_max: float
    strong_coupling: bool


def _scale(p: SystemParams) -> float:
    s2 = p.delta1**2 + p.kappa1**2 / 4.0
    if s2 <= 0.0:
        raise ValueError("effective model undefined for delta1 = kappa1 = 0")
    return np.sqrt(s2)


def effective_params(p: SystemParams) -> EffectiveParams:
    s = _scale(p)
    alpha = p.g / s
    beta = p.J / s
    return EffectiveParams(
        alpha=alpha,
        beta=beta,
        g_eff=beta * p.g,
        delta_eff=p.delta2 + (alpha**2 - beta**2) * p.delta1,
        kappa_eff=p.kappa2 + beta**2 * p.kappa1,
        gamma_eff=p.gamma + alpha**2 * p.kappa1,
        shift_e=-(alpha**2) * p.delta1,
        shift_2=-(beta**2) * p.delta1,
    )


def resonance_delta2(p: SystemParams) -> float:
    """Mode-2 detuning that makes the effective detuning vanish."""
    s = _scale(p)
    return float((p.J**2 - p.g**2) / s**2 * p.delta1)


def at_resonance(p: SystemParams) -> SystemParams:
    """Copy of ``p`` with ``delta2`` moved onto the effective resonance."""
    return replace(p, delta2=resonance_delta2(p))


def coupling_ratios(p: SystemParams) -> CouplingRatios:
    eff = effective_params(p)
    if eff.kappa_eff <= 0 or eff.gamma_eff <= 0:
        raise ValueError("coupling ratios need strictly positive effective decay rates")
    return CouplingRatios(
        g_over_k=eff.g_eff / eff.kappa_eff,
        g_over_gamma=eff.g_eff / eff.gamma_eff,
        cooperativity=eff.g_eff**2 / (eff.kappa_eff * eff.gamma_eff),
    )


def optimal_beta(g: float, kappa1: float, kappa2: float) -> OptimalBeta:
    """Admixture maximizing ``g_eff / kappa_eff`` when ``gamma_eff`` is negligible.

    ``g beta / (kappa2 + beta^2 kappa1)`` peaks at ``beta = sqrt(kappa2/kappa1)``
    with value ``g / (2 sqrt(kappa1 kappa2))``; that exceeds one exactly when
    ``kappa2 < g^2 / (4 kappa1)``.
    """
    if kappa1 <= 0 or kappa2 <= 0:
        raise ValueError("kappa1 and kappa2 must be positive")
    return OptimalBeta(
        beta_opt=np.sqrt(kappa2 / kappa1),
        ratio_max=g / (2.0 * np.sqrt(kappa1 * kappa2)),
        strong_coupling=bool(kappa2 < g**2 / (4.0 * kappa1)),
    )


def effective_rabi_pe(t, eff: EffectiveParams):
    """Resonant excited-state probability ``exp(-(k+g)t/2) cos^2(g_eff t)``.

    Only meaningful at zero effective detuning.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    out = np.exp(-0.5 * eff.total_decay * t) * np.cos(eff.g_eff * t) ** 2
    return out if out.ndim else float(out)


def effective_matrix(eff: EffectiveParams) -> np.ndarray:
    """Single-excitation block of the effective model, basis ``(|e,0>, |g,1>)``.

    Energies are measured from the undisplaced ground state, so the diagonal
    holds ``-alpha^2 D1`` and ``D2 - beta^2 D1 = -alpha^2 D1 + D_eff``.
    """
    return np.array(
        [
            [eff.shift_e - 0.5j * eff.gamma_eff, eff.g_eff],
            [eff.g_eff, eff.shift_e + eff.delta_eff - 0.5j * eff.kappa_eff],
        ]
    )


def effective_eigenvalues(eff: EffectiveParams) -> np.ndarray:
    """Eigenvalues of :func:`effective_matrix`, sorted by real part."""
    ev = np.linalg.eigvals(effective_matrix(eff))
    return ev[np.argsort(ev.real)]


def effective_spectrum(eff: EffectiveParams, omega_grid) -> ScanResult:
    """Normalized emitter excitation spectrum of the effective model.

    A weak probe on mode 2 at detuning ``w`` gives, to first order, the
    amplitudes ``c = -(M - w)^-1 (0, 1)^T`` with ``|c_e| = g_eff / |det(M - w)|``.
    ``S_eff`` is that shape scaled to unit maximum; it stays defined as
    ``g_eff -> 0``, where it tends to a single line at ``shift_e``.
    ``pop_e`` is the unnormalized ``|c_e|^2``.
    """
    omega = np.asarray(omega_grid, dtype=float)
    if omega.size == 0:
        raise ValueError("empty probe grid")
    m = effective_matrix(eff)
    det = (m[0, 0] - omega) * (m[1, 1] - omega) - eff.g_eff**2
    shape = 1.0 / np.abs(det) ** 2
    return ScanResult("delta_e", omega, {"S_eff": shape / shape.max(),
                                         "pop_e": eff.g_eff**2 * shape})


def regime_map(p: SystemParams, delta1_grid, J_grid) -> MapResult:
    """``g_eff/kappa_eff``, ``g_eff/gamma_eff`` and ``C_eff`` over ``(D1, J)``.

    ``delta2`` is held on resonance at every point.
    """
    d1 = np.asarray(delta1_grid, dtype=float)
    jj = np.asarray(J_grid, dtype=float)
    shape = (d1.size, jj.size)
    cols = {k: np.empty(shape) for k in ("g_eff", "kappa_eff", "gamma_eff",
                                         "g_over_k", "g_over_gamma", "cooperativity")}
    for i, delta1 in enumerate(d1):
        for j, J in enumerate(jj):
            q = at_resonance(replace(p, delta1=delta1, J=J))
            eff = effective_params(q)
            r = coupling_ratios(q)
            cols["g_eff"][i, j] = eff.g_eff
            cols["kappa_eff"][i, j] = eff.kappa_eff
            cols["gamma_eff"][i, j] = eff.gamma_eff
            cols["g_over_k"][i, j] = r.g_over_k
            cols["g_over_gamma"][i, j] = r.g_over_gamma
            cols["cooperativity"][i, j] = r.cooperativity
    return MapResult("delta1", d1, "J", jj, cols)


def optimal_ratio_map(g: float, kappa1_grid, kappa2_grid, detuning_ratio: float = 10.0,
                      gamma: float = 0.0) -> MapResult:
    """``g_eff/kappa_eff`` over ``(kappa1, kappa2)`` with ``beta = sqrt(kappa2/kappa1)``.

    Each point is realized as a full parameter set (``D1 = detuning_ratio *
    kappa1`` and ``J`` chosen to give the optimal admixture) and evaluated
    through :func:`effective_params`.
    """
    k1s = np.asarray(kappa1_grid, dtype=float)
    k2s = np.asarray(kappa2_grid, dtype=float)
    ratio = np.empty((k1s.size, k2s.size))
    for i, k1 in enumerate(k1s):
        for j, k2 in enumerate(k2s):
            delta1 = detuning_ratio * k1
            s = np.sqrt(delta1**2 + k1**2 / 4.0)
            J = np.sqrt(k2 / k1) * s
            eff = effective_params(SystemParams(g, J, delta1, 0.0, k1, k2, gamma))
            ratio[i, j] = eff.g_eff / eff.kappa_eff
    bound = g**2 / (4.0 * k1s[:, None]) * np.ones((1, k2s.size))
    return MapResult("kappa1", k1s, "kappa2", k2s,
                     {"g_over_k": ratio, "kappa2_bound": bound})
