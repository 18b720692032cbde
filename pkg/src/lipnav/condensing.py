"""Predicted states as affine functions of the stacked footstep vector.

The decision vector is ``u = (f_x0, f_y0, f_x1, f_y1, ...)``; turning rates are
data taken from the heading schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heading import HeadingSchedule
from .lip import GRAVITY, LipControl, LipState, step_matrices


@dataclass(frozen=True)
class AffineStateMap:
    """Row k of each ``*_coef`` / ``*_off`` pair gives channel(k) = coef @ u + off."""

    px_coef: np.ndarray
    px_off: np.ndarray
    vx_coef: np.ndarray
    vx_off: np.ndarray
    py_coef: np.ndarray
    py_off: np.ndarray
    vy_coef: np.ndarray
    vy_off: np.ndarray
    thetas: tuple[float, ...]  # theta_0 .. theta_N
    rates: tuple[float, ...]

    @property
    def N(self) -> int:
        return len(self.thetas) - 1

    @property
    def n(self) -> int:
        return 2 * self.N

    def position(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(M, m) with p(k) = M @ u + m, M of shape (2, 2N)."""
        return (
            np.vstack([self.px_coef[k], self.py_coef[k]]),
            np.array([self.px_off[k], self.py_off[k]]),
        )

    def velocity(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.vstack([self.vx_coef[k], self.vy_coef[k]]),
            np.array([self.vx_off[k], self.vy_off[k]]),
        )

    def foot(self, k: int) -> np.ndarray:
        """Selector for (f_xk, f_yk) as a (2, 2N) matrix."""
        S = np.zeros((2, self.n))
        S[0, 2 * k] = 1.0
        S[1, 2 * k + 1] = 1.0
        return S

    def evaluate(self, u: np.ndarray) -> list[LipState]:
        """States x_0 .. x_N for the given footsteps."""
        px = self.px_coef @ u + self.px_off
        vx = self.vx_coef @ u + self.vx_off
        py = self.py_coef @ u + self.py_off
        vy = self.vy_coef @ u + self.vy_off
        return [
            LipState(float(px[k]), float(vx[k]), float(py[k]), float(vy[k]), self.thetas[k])
            for k in range(self.N + 1)
        ]

    def controls(self, u: np.ndarray) -> list[LipControl]:
        return [LipControl(float(u[2 * k]), float(u[2 * k + 1]), self.rates[k]) for k in range(self.N)]


def condense(
    x0: LipState, schedule: HeadingSchedule, H: float, T: float, N: int | None = None, g: float = GRAVITY
) -> AffineStateMap:
    N = len(schedule) if N is None else N
    if len(schedule) != N:
        raise ValueError(f"schedule has {len(schedule)} rates, horizon is {N}")
    m = step_matrices(H, T, g)
    A, B = m.A_d, m.B_d
    n = 2 * N
    out = {}
    for ch, (p0, v0) in (("x", (x0.p_x, x0.v_x)), ("y", (x0.p_y, x0.v_y))):
        pc = np.zeros((N + 1, n))
        vc = np.zeros((N + 1, n))
        po = np.zeros(N + 1)
        vo = np.zeros(N + 1)
        po[0], vo[0] = p0, v0
        col = 0 if ch == "x" else 1
        for k in range(N):
            pc[k + 1] = A[0, 0] * pc[k] + A[0, 1] * vc[k]
            vc[k + 1] = A[1, 0] * pc[k] + A[1, 1] * vc[k]
            pc[k + 1, 2 * k + col] += B[0]
            vc[k + 1, 2 * k + col] += B[1]
            po[k + 1] = A[0, 0] * po[k] + A[0, 1] * vo[k]
            vo[k + 1] = A[1, 0] * po[k] + A[1, 1] * vo[k]
        out[ch] = (pc, po, vc, vo)
    thetas = (x0.theta,) + tuple(schedule.headings)
    return AffineStateMap(
        px_coef=out["x"][0], px_off=out["x"][1], vx_coef=out["x"][2], vx_off=out["x"][3],
        py_coef=out["y"][0], py_off=out["y"][1], vy_coef=out["y"][2], vy_off=out["y"][3],
        thetas=thetas, rates=tuple(schedule.rates),
    )
