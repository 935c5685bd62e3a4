"""Numerical solver for the one-sided nonlinear generalized regulator map.

Given a free path y and a hazard h, produces the constrained pair (z, l)
with z(t) = y(t) - int_0^t H(z(s)) ds + l(t) >= 0, l nondecreasing from 0
and increasing only while z sits at the boundary.  The scheme is explicit
Euler with projection onto [0, inf); jumps of step paths are applied
atomically between Euler steps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
from numba import njit

from ._hazardcore import hz_cumulative
from .hazards import HazardFunction


class ConeConditionError(ValueError):
    pass


@dataclass(frozen=True)
class PathRecord:
    """Discretized path on [0, t_end]; ``interpolation`` is "linear" or "step"."""

    times: np.ndarray
    values: np.ndarray
    interpolation: str = "linear"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 1:
            raise ValueError("times and values must be equal-length 1-d arrays")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("times must start at 0 and increase strictly")
        if self.interpolation not in ("linear", "step"):
            raise ValueError("interpolation must be 'linear' or 'step'")

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def at(self, grid):
        """Evaluate the path on ``grid`` (right-continuous for step paths)."""
        grid = np.asarray(grid, dtype=float)
        if self.interpolation == "linear":
            return np.interp(grid, self.times, self.values)
        idx = np.clip(np.searchsorted(self.times, grid, side="right") - 1, 0, None)
        return self.values[idx]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "value"])
            for t, v in zip(self.times, self.values):
                writer.writerow([repr(float(t)), repr(float(v))])

    @classmethod
    def read_csv(cls, path, interpolation="linear") -> "PathRecord":
        times, values = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                times.append(float(row[0]))
                values.append(float(row[1]))
        return cls(np.array(times), np.array(values), interpolation)


@dataclass(frozen=True)
class RegulatedPair:
    z: PathRecord
    l: PathRecord
    residual: float


@dataclass(frozen=True)
class DrainResult:
    d_hat: float
    passed: bool
    hit_times: Dict[float, float]


@njit(cache=True, nogil=True)
def _euler_regulate(yg, dt, code, coefs, kx, kh, kH, kG, clamp):
    m = yg.shape[0]
    z = np.empty(m)
    l = np.empty(m)
    z[0] = yg[0] if yg[0] > 0.0 else 0.0
    l[0] = -yg[0] if yg[0] < 0.0 else 0.0
    for k in range(m - 1):
        drift = hz_cumulative(code, coefs, kx, kh, kH, kG, clamp, z[k])
        cand = z[k] + (yg[k + 1] - yg[k]) - drift * dt
        if cand >= 0.0:
            z[k + 1] = cand
            l[k + 1] = l[k]
        else:
            z[k + 1] = 0.0
            l[k + 1] = l[k] - cand
    return z, l


def _solve_on_grid(y: PathRecord, h: HazardFunction, n_steps: int):
    grid = np.linspace(0.0, y.t_end, n_steps + 1)
    yg = y.at(grid)
    z, l = _euler_regulate(yg, grid[1] - grid[0], *h.numba_repr())
    if not np.all(np.isfinite(z)):
        raise ValueError("regulator state became nonfinite (hazard evaluation out of range?)")
    return grid, z, l


def apply_regulator(y: PathRecord, h: HazardFunction, dt: float) -> RegulatedPair:
    """Solve the regulator map on a uniform grid of width <= dt.

    The reported residual is a Richardson estimate: the sup difference
    between the solution at the working step and at half the step.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if not np.all(np.isfinite(y.values)):
        raise ValueError("path values must be finite")
    gaps = np.diff(y.times)
    if len(gaps) and dt > np.min(gaps) + 1e-15:
        raise ValueError("dt must not exceed the smallest time gap of the input path")
    n_steps = max(1, math.ceil(y.t_end / dt - 1e-12))
    grid, z, l = _solve_on_grid(y, h, n_steps)
    _, z2, _ = _solve_on_grid(y, h, 2 * n_steps)
    residual = float(np.max(np.abs(z - z2[::2])))
    return RegulatedPair(
        z=PathRecord(grid, z, "linear"),
        l=PathRecord(grid, l, "linear"),
        residual=residual,
    )


def deterministic_trajectory(
    x: float, b: float, h: HazardFunction, t_end: float, dt: float
) -> PathRecord:
    """Regulated trajectory started at x with ramp drift b (free path x + b t)."""
    if not t_end > 0.0:
        raise ValueError("t_end must be positive")
    ramp = PathRecord(np.array([0.0, t_end]), np.array([x, x + b * t_end]), "linear")
    return apply_regulator(ramp, h, dt).z


def estimate_lipschitz(
    h: HazardFunction,
    trials: int,
    t_end: float,
    dt: float,
    rng: np.random.Generator,
    knots: int = 9,
) -> float:
    """Empirical lower bound for the Lipschitz constant of the regulator map.

    Draws pairs of random piecewise-linear paths and returns the largest
    observed ratio sup|z1 - z2| / sup|y1 - y2|.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    best = 0.0
    times = np.linspace(0.0, t_end, knots)
    for _ in range(trials):
        v1 = np.cumsum(rng.normal(0.0, 1.0, size=knots))
        v2 = np.cumsum(rng.normal(0.0, 1.0, size=knots))
        y1 = PathRecord(times, v1, "linear")
        y2 = PathRecord(times, v2, "linear")
        gap = float(np.max(np.abs(y1.at(np.linspace(0, t_end, 512)) - y2.at(np.linspace(0, t_end, 512)))))
        if gap == 0.0:
            continue
        z1 = apply_regulator(y1, h, dt).z
        z2 = apply_regulator(y2, h, dt).z
        diff = float(np.max(np.abs(z1.values - z2.values)))
        best = max(best, diff / gap)
    return best


_HIT_TOL = 1e-9


def drain_check(
    x_grid: Sequence[float],
    b: float,
    h: HazardFunction,
    dt: float,
    *,
    delta: float,
    t_max: Optional[float] = None,
) -> DrainResult:
    """Check the linear-in-x drain of the deterministic trajectories.

    Requires the drift condition b - H(z) <= -delta on [0, max(x_grid)]
    (since H is nondecreasing with H(0) = 0, this amounts to b <= -delta);
    raises if it fails.  Returns the worst hit-time/x ratio and a pass flag
    that additionally demands the ratio be stable within 10% across the two
    largest initial conditions.
    """
    x_grid = sorted(float(x) for x in x_grid)
    if not x_grid or x_grid[0] <= 0.0:
        raise ValueError("x_grid must contain positive values")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    zs = np.linspace(0.0, max(x_grid), 513)
    if np.any(b - np.atleast_1d(h.cumulative(zs)) > -delta + 1e-12):
        raise ConeConditionError("cone condition violated")
    if t_max is None:
        t_max = 4.0 * max(x_grid) / delta + 16.0
    hit_times: Dict[float, float] = {}
    for x in x_grid:
        z = deterministic_trajectory(x, b, h, t_max, dt)
        below = np.nonzero(z.values <= _HIT_TOL)[0]
        hit_times[x] = float(z.times[below[0]]) if len(below) else math.inf
    ratios = [hit_times[x] / x for x in x_grid]
    d_hat = max(ratios)
    finite = all(math.isfinite(t) for t in hit_times.values())
    if len(ratios) >= 2:
        r1, r2 = ratios[-2], ratios[-1]
        stable = abs(r1 - r2) <= 0.1 * max(abs(r1), abs(r2))
    else:
        stable = True
    return DrainResult(d_hat=d_hat, passed=finite and stable, hit_times=hit_times)


def skorokhod_reflection(y: PathRecord, grid) -> np.ndarray:
    """Classical one-sided reflection z(t) = y(t) - min(0, inf_{s<=t} y(s)).

    Exact for piecewise-linear paths (the running infimum is attained at
    knots or at t itself); serves as the h = 0 oracle for apply_regulator.
    """
    grid = np.asarray(grid, dtype=float)
    yg = y.at(grid)
    knot_vals = y.values
    knot_times = y.times
    out = np.empty_like(yg)
    for i, t in enumerate(grid):
        m = np.min(knot_vals[knot_times <= t], initial=np.inf)
        m = min(m, yg[i])
        out[i] = yg[i] - min(0.0, m)
    return out
