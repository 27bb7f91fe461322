"""Small derivative-free optimisers for the ISL compiler."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Sinusoid:
    """``offset + a cos(theta) + b sin(theta)``."""

    offset: float
    a: float
    b: float

    def __call__(self, theta):
        return self.offset + self.a * np.cos(theta) + self.b * np.sin(theta)

    @property
    def argmin(self) -> float:
        if self.a == 0.0 and self.b == 0.0:
            return 0.0
        return math.atan2(-self.b, -self.a)

    @property
    def minimum(self) -> float:
        return self.offset - math.hypot(self.a, self.b)


def fit_sinusoid(c0: float, c_half_pi: float, c_pi: float) -> Sinusoid:
    """Exact reconstruction from values at ``0``, ``pi/2`` and ``pi``."""
    offset = 0.5 * (c0 + c_pi)
    return Sinusoid(offset, 0.5 * (c0 - c_pi), c_half_pi - offset)


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fun: float
    n_evals: int
    converged: bool


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    step: float = 0.05,
    f_spread: float = 1e-5,
    max_evals: int = 2000,
    f0: float | None = None,
    alpha: float = 1.0,
    gamma: float = 2.0,
    rho: float = 0.5,
    sigma: float = 0.5,
) -> NelderMeadResult:
    """Standard Nelder-Mead; stops when ``max(f) - min(f)`` over the simplex < ``f_spread``.

    ``f0`` may pass an already known ``f(x0)`` (not counted again). The best
    vertex is returned, so the result never exceeds ``f(x0)``.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    evals = 0

    def call(x):
        nonlocal evals
        evals += 1
        return float(f(x))

    if f0 is None:
        f0 = call(x0)
    simplex = [x0.copy()]
    values = [f0]
    for i in range(dim):
        v = x0.copy()
        v[i] += step
        simplex.append(v)
        values.append(call(v))

    converged = False
    while True:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        if values[-1] - values[0] < f_spread:
            converged = True
            break
        if evals >= max_evals:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = call(xr)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = call(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + rho * (xr - centroid)
            fc = call(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (worst - centroid)
            fc = call(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        best = simplex[0]
        for i in range(1, dim + 1):
            simplex[i] = best + sigma * (simplex[i] - best)
            values[i] = call(simplex[i])
    return NelderMeadResult(simplex[0], values[0], evals, converged)
