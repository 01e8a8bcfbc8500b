"""Truncated composite Hilbert space, Hamiltonians and the Liouvillian.

Basis states are ``|s> (x) |n1> (x) |n2>`` with the emitter index ``s``
(``g = 0``, ``e = 1``) slowest and mode 2 fastest::

    flat = s * (n1_cutoff + 1) * (n2_cutoff + 1) + n1 * (n2_cutoff + 1) + n2

Density matrices are vectorized by column stacking (Fortran order), so that
``vec(A @ X @ B) = kron(B.T, A) @ vec(X)``.  With this convention the
dissipator ``D[o]`` becomes::

    kron(o.conj(), o) - (kron(I, o^dag o) + kron((o^dag o).T, I)) / 2

Everything is dense; dimensions stay at or below 32 (cutoffs <= 3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "SystemParams",
    "ProbeDrive",
    "Operators",
    "fock_annihilation",
    "composite_operators",
    "basis_index",
    "total_excitation",
    "build_hamiltonian",
    "build_nonhermitian_hamiltonian",
    "collapse_operators",
    "liouvillian",
    "build_liouvillian",
    "vec",
    "unvec",
]


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and detunings, all in units of the emitter coupling.

    Attributes
    ----------
    g : float
        Emitter / mode-1 coupling.
    J : float
        Mode-1 / mode-2 coupling.
    delta1, delta2 : float
        Cavity detunings from the emitter, ``w_i - w_e``.
    kappa1, kappa2, gamma : float
        Energy decay rates of mode 1, mode 2 and the emitter.
    n1_cutoff, n2_cutoff : int
        Highest Fock number kept for each mode.
    """

    g: float
    J: float
    delta1: float
    delta2: float
    kappa1: float
    kappa2: float
    gamma: float
    n1_cutoff: int = 2
    n2_cutoff: int = 2

    def __post_init__(self):
        for name in ("g", "J", "delta1", "delta2", "kappa1", "kappa2", "gamma"):
            value = getattr(self, name)
            if isinstance(value, complex) or not np.isfinite(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
        for name in ("kappa1", "kappa2", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("n1_cutoff", "n2_cutoff"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2, self.n1_cutoff + 1, self.n2_cutoff + 1)

    @property
    def dim(self) -> int:
        return 2 * (self.n1_cutoff + 1) * (self.n2_cutoff + 1)


@dataclass(frozen=True)
class ProbeDrive:
    """Coherent probe on mode 2 with strength ``amplitude`` and frequency
    offset ``detuning_e = w - w_e`` from the emitter."""

    amplitude: float = 0.0
    detuning_e: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.amplitude) or self.amplitude < 0:
            raise ValueError("drive amplitude must be finite and >= 0")
        if not np.isfinite(self.detuning_e):
            raise ValueError("probe detuning must be finite")

    @property
    def is_driven(self) -> bool:
        return self.amplitude > 0


UNDRIVEN = ProbeDrive()


@dataclass(frozen=True)
class Operators:
    """Composite-space operators for one choice of Fock cutoffs."""

    a1: np.ndarray
    a2: np.ndarray
    sigma_minus: np.ndarray
    sigma_z: np.ndarray

    @property
    def sigma_plus(self) -> np.ndarray:
        return self.sigma_minus.conj().T

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.a1.shape[0], dtype=complex)

    @property
    def n1(self) -> np.ndarray:
        return self.a1.conj().T @ self.a1

    @property
    def n2(self) -> np.ndarray:
        return self.a2.conj().T @ self.a2

    @property
    def excited(self) -> np.ndarray:
        """Projector ``sigma_+ sigma_-`` onto the excited emitter state."""
        return self.sigma_plus @ self.sigma_minus


def fock_annihilation(cutoff: int) -> np.ndarray:
    """Bosonic lowering operator on ``{|0>, ..., |cutoff>}``."""
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValueError(f"Fock cutoff must be an integer >= 1, got {cutoff!r}")
    n = np.arange(1, cutoff + 1)
    return np.diag(np.sqrt(n).astype(complex), k=1)


@lru_cache(maxsize=16)
def _operators(n1_cutoff: int, n2_cutoff: int) -> Operators:
    i_e = np.eye(2)
    i_1 = np.eye(n1_cutoff + 1)
    i_2 = np.eye(n2_cutoff + 1)
    sm = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e| with g = 0, e = 1
    sz = np.diag([-1.0, 1.0]).astype(complex)

    ops = Operators(
        a1=np.kron(np.kron(i_e, fock_annihilation(n1_cutoff)), i_2),
        a2=np.kron(np.kron(i_e, i_1), fock_annihilation(n2_cutoff)),
        sigma_minus=np.kron(np.kron(sm, i_1), i_2),
        sigma_z=np.kron(np.kron(sz, i_1), i_2),
    )
    for m in (ops.a1, ops.a2, ops.sigma_minus, ops.sigma_z):
        m.setflags(write=False)
    return ops


def composite_operators(p: SystemParams) -> Operators:
    """``a1``, ``a2``, ``sigma_-`` and ``sigma_z`` embedded in the full space."""
    return _operators(int(p.n1_cutoff), int(p.n2_cutoff))


def basis_index(p: SystemParams, s: int, n1: int, n2: int) -> int:
    """Flat index of ``|s, n1, n2>``; ``s`` is 0 for ground and 1 for excited."""
    if s not in (0, 1) or not 0 <= n1 <= p.n1_cutoff or not 0 <= n2 <= p.n2_cutoff:
        raise ValueError(f"state ({s}, {n1}, {n2}) outside the truncated space")
    return (s * (p.n1_cutoff + 1) + n1) * (p.n2_cutoff + 1) + n2


def total_excitation(p: SystemParams) -> np.ndarray:
    """``N_tot = a1^dag a1 + a2^dag a2 + sigma_+ sigma_-`` (diagonal)."""
    ops = composite_operators(p)
    return ops.n1 + ops.n2 + ops.excited


def build_hamiltonian(p: SystemParams, drive: ProbeDrive | None = None) -> np.ndarray:
    """System Hamiltonian, optionally in the frame of a probe on mode 2.

    Undriven this is ``D1 n1 + D2 n2 + g (a1^dag s- + h.c.) + J (a1^dag a2 + h.c.)``.
    With a probe every detuning is shifted by ``-detuning_e`` and the term
    ``eps (a2 + a2^dag)`` is added.
    """
    drive = UNDRIVEN if drive is None else drive
    ops = composite_operators(p)
    a1, a2, sm = ops.a1, ops.a2, ops.sigma_minus
    de = drive.detuning_e

    h = (p.delta1 - de) * ops.n1 + (p.delta2 - de) * ops.n2
    if de != 0.0:
        h = h - de * ops.excited
    coupling = p.g * (a1.conj().T @ sm) + p.J * (a1.conj().T @ a2)
    h = h + coupling + coupling.conj().T
    if drive.amplitude:
        h = h + drive.amplitude * (a2 + a2.conj().T)
    # the Hermitian parts above are exact; symmetrize away round-off anyway
    return 0.5 * (h + h.conj().T)


def build_nonhermitian_hamiltonian(
    p: SystemParams, drive: ProbeDrive | None = None
) -> np.ndarray:
    """``H - (i/2) (kappa1 n1 + kappa2 n2 + gamma sigma_+ sigma_-)``."""
    ops = composite_operators(p)
    loss = p.kappa1 * ops.n1 + p.kappa2 * ops.n2 + p.gamma * ops.excited
    return build_hamiltonian(p, drive) - 0.5j * loss


def collapse_operators(p: SystemParams) -> list[np.ndarray]:
    """Jump operators ``sqrt(rate) * o`` for the three decay channels.

    Channels with zero rate are dropped.
    """
    ops = composite_operators(p)
    channels = ((p.kappa1, ops.a1), (p.kappa2, ops.a2), (p.gamma, ops.sigma_minus))
    return [np.sqrt(rate) * op for rate, op in channels if rate > 0]


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(dim, dim, order="F")


def liouvillian(h: np.ndarray, c_ops) -> np.ndarray:
    """Superoperator of ``i[rho, H] + sum_k D[c_k] rho`` under column stacking."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    L = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c in c_ops:
        c = np.asarray(c, dtype=complex)
        cdc = c.conj().T @ c
        L += np.kron(c.conj(), c) - 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
    return L


def build_liouvillian(p: SystemParams, drive: ProbeDrive | None = None) -> np.ndarray:
    """Generator ``L`` with ``vec(d rho/dt) = L @ vec(rho)``."""
    return liouvillian(build_hamiltonian(p, drive), collapse_operators(p))
