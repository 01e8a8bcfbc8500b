"""Adaptive Dormand-Prince 5(4) integration of ``dy/dt = L y`` for constant ``L``.

The kernel is compiled with numba: a resonant run at large ``delta1`` needs
close to a million accepted steps, which is out of reach for an
interpreted loop.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["IntegrationError", "integrate_linear"]

# Dormand & Prince (1980), 7 stages, FSAL
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
# 5th order weights minus embedded 4th order weights
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_OK, _MAX_STEPS, _UNDERFLOW = 0, 1, 2


class IntegrationError(RuntimeError):
    """Raised when the step size collapses or the step budget runs out."""

    def __init__(self, message, t_reached):
        super().__init__(f"{message} (reached t = {t_reached:.6g})")
        self.t_reached = t_reached


@njit(cache=True)
def _hermitize(y, d):
    for j in range(d):
        for i in range(j, d):
            a = y[i + j * d]
            b = y[j + i * d]
            m = 0.5 * (a + np.conj(b))
            y[i + j * d] = m
            y[j + i * d] = np.conj(m)


@njit(cache=True)
def _err_norm(err, y, ynew, rtol, atol):
    acc = 0.0
    n = y.shape[0]
    for i in range(n):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        r = abs(err[i]) / sc
        acc += r * r
    return np.sqrt(acc / n)


@njit(cache=True)
def _dopri5(L, y0, t_eval, rtol, atol, h0, max_steps, herm_dim, A, E):
    n = y0.shape[0]
    n_out = t_eval.shape[0]
    out = np.empty((n_out, n), dtype=np.complex128)
    k = np.empty((7, n), dtype=np.complex128)
    y = y0.copy()
    ytmp = np.empty(n, dtype=np.complex128)
    err = np.empty(n, dtype=np.complex128)

    t = t_eval[0]
    out[0] = y
    if n_out == 1:
        return out, _OK, t, 0, 0

    k[0] = L @ y
    h = h0
    steps = 0
    rejected = 0
    idx = 1
    t_end = t_eval[n_out - 1]
    while idx < n_out:
        if steps >= max_steps:
            return out[:idx], _MAX_STEPS, t, steps, rejected
        target = t_eval[idx]
        h_try = h
        landing = False
        if t + h_try >= target:
            h_try = target - t
            landing = True
        if h_try <= 1e-14 * max(abs(t), abs(t_end), 1.0):
            if landing:
                # already on top of the sample point
                out[idx] = y
                idx += 1
                continue
            return out[:idx], _UNDERFLOW, t, steps, rejected

        for s in range(1, 7):
            for i in range(n):
                acc = y[i]
                for r in range(s):
                    if A[s, r] != 0.0:
                        acc += h_try * A[s, r] * k[r, i]
                ytmp[i] = acc
            k[s] = L @ ytmp
        # stage 7 evaluates at the 5th-order solution (FSAL), held in ytmp
        for i in range(n):
            acc = 0.0 + 0.0j
            for r in range(7):
                if E[r] != 0.0:
                    acc += E[r] * k[r, i]
            err[i] = h_try * acc
        en = _err_norm(err, y, ytmp, rtol, atol)

        if en <= 1.0:
            t = target if landing else t + h_try
            y[:] = ytmp
            steps += 1
            if herm_dim > 0:
                _hermitize(y, herm_dim)
                k[0] = L @ y
            else:
                k[0] = k[6]
            if landing:
                out[idx] = y
                idx += 1
            fac = 10.0 if en == 0.0 else min(10.0, max(0.2, 0.9 * en ** -0.2))
            # a clipped landing step says little about the natural step size
            if not landing or h_try >= h:
                h = h_try * fac
        else:
            rejected += 1
            h = h_try * max(0.2, 0.9 * en ** -0.2)
    return out, _OK, t, steps, rejected


def _initial_step(L, y0, rtol, atol):
    f0 = L @ y0
    sc = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / sc) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / sc) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        return 1e-6
    return 0.01 * d0 / d1


def integrate_linear(L, y0, t_eval, rtol=1e-8, atol=1e-10, max_steps=50_000_000,
                     hermitize_dim=0, return_stats=False):
    """Integrate ``dy/dt = L y`` and sample the solution at ``t_eval``.

    Parameters
    ----------
    L : (n, n) complex array
        Constant generator.
    y0 : (n,) complex array
        State at ``t_eval[0]``.
    t_eval : increasing sequence of float
        Sample times; the integration starts at ``t_eval[0]``.
    rtol, atol : float
        Tolerances of the mixed error test, measured in the RMS norm.
    hermitize_dim : int
        If positive, ``y`` is a column-stacked ``d x d`` matrix that is
        projected back onto Hermitian matrices after every accepted step.

    Returns
    -------
    (len(t_eval), n) complex array, plus a stats dict if ``return_stats``.
    """
    L = np.ascontiguousarray(L, dtype=np.complex128)
    y0 = np.ascontiguousarray(y0, dtype=np.complex128)
    t_eval = np.ascontiguousarray(t_eval, dtype=np.float64)
    if t_eval.ndim != 1 or t_eval.size == 0:
        raise ValueError("t_eval must be a non-empty 1-D array")
    if np.any(np.diff(t_eval) <= 0):
        raise ValueError("t_eval must be strictly increasing")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    if hermitize_dim and hermitize_dim**2 != y0.size:
        raise ValueError("hermitize_dim does not match the state size")

    h0 = _initial_step(L, y0, rtol, atol)
    out, status, t_reached, steps, rejected = _dopri5(
        L, y0, t_eval, float(rtol), float(atol), float(h0), int(max_steps),
        int(hermitize_dim), _A, _E)
    if status == _MAX_STEPS:
        raise IntegrationError(f"step budget of {max_steps} exhausted", t_reached)
    if status == _UNDERFLOW:
        raise IntegrationError("step size underflow", t_reached)
    if return_stats:
        return out, {"steps": int(steps), "rejected": int(rejected)}
    return out
