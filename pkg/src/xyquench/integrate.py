"""Batched Dormand-Prince 5(4) integrator with per-element step control.

Every row of the state array advances on its own adaptive step sequence, so a
row's trajectory is bit-identical whether it is integrated alone or inside a
larger batch. That property is what lets the mode evolutions be treated as an
order-independent parallel map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IntegrationError

# Dormand & Prince (1980) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass
class BatchResult:
    y: np.ndarray  # (M, D) state at t_end
    n_steps: np.ndarray  # accepted steps per row
    n_rejected: np.ndarray


def dopri45(
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray],
    t0: np.ndarray,
    y0: np.ndarray,
    t_end: float,
    *,
    rtol: float,
    atol: float,
    max_step: np.ndarray,
    first_step: np.ndarray | None = None,
) -> BatchResult:
    """Integrate ``dy/dt = rhs(t, y)`` row-wise from ``t0`` to ``t_end``.

    ``t0`` and ``max_step`` have shape ``(M,)``; ``y0`` has shape ``(M, D)`` and
    may be complex. ``rhs`` receives per-row times and must act row-wise.
    """
    t = np.array(t0, dtype=float)
    y = np.array(y0)
    M = y.shape[0]
    max_step = np.broadcast_to(np.asarray(max_step, dtype=float), (M,)).copy()
    if np.any(t > t_end):
        raise ValueError("every row must start at or before t_end")

    f = rhs(t, y)
    if first_step is None:
        # Hairer-Norsett-Wanner first guess: h ~ 0.01 |y| / |f|
        scale = atol + rtol * np.abs(y)
        d0 = (np.abs(y) / scale).max(axis=1)
        d1 = (np.abs(f) / scale).max(axis=1)
        h = np.where((d0 > 1e-5) & (d1 > 1e-5), 0.01 * d0 / np.maximum(d1, 1e-300), 1e-6)
    else:
        h = np.broadcast_to(np.asarray(first_step, dtype=float), (M,)).copy()
    h = np.minimum(h, max_step)

    n_steps = np.zeros(M, dtype=np.int64)
    n_rejected = np.zeros(M, dtype=np.int64)
    active = t < t_end

    while np.any(active):
        h = np.where(active, np.minimum(h, t_end - t), 0.0)
        tiny = 16.0 * np.finfo(float).eps * np.maximum(np.abs(t), 1.0)
        if np.any(active & (h < tiny)):
            bad = int(np.flatnonzero(active & (h < tiny))[0])
            raise IntegrationError(f"step size underflow in row {bad} at t={t[bad]!r}")

        hc = h[:, None]
        ks = [f]
        for i in range(1, 7):
            dy = sum(a * kj for a, kj in zip(_A[i], ks) if a != 0.0)
            ks.append(rhs(t + _C[i] * h, y + hc * dy))
        # stage 7 is evaluated at the 5th-order solution (FSAL)
        y_new = y + hc * sum(b * kj for b, kj in zip(_B5, ks[:6]) if b != 0.0)
        err_vec = hc * sum(e * kj for e, kj in zip(_E, ks) if e != 0.0)

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = (np.abs(err_vec) / scale).max(axis=1)
        accept = active & (err <= 1.0)

        with np.errstate(divide="ignore"):
            factor = np.where(
                err == 0.0, _MAX_FACTOR, _SAFETY * err ** (-0.2)
            )
        factor = np.clip(factor, _MIN_FACTOR, _MAX_FACTOR)
        # no growth right after a rejection on the same row
        factor = np.where(active & ~accept, np.minimum(factor, 1.0), factor)

        acc = accept[:, None]
        y = np.where(acc, y_new, y)
        f = np.where(acc, ks[6], f)
        t = np.where(accept, t + h, t)
        # land exactly on t_end
        t = np.where(accept & (t_end - t <= tiny), t_end, t)
        n_steps += accept
        n_rejected += active & ~accept
        h = np.minimum(h * factor, max_step)
        active = t < t_end

    return BatchResult(y=y, n_steps=n_steps, n_rejected=n_rejected)
