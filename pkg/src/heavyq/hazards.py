"""Hazard-rate functions for patience distributions and diffusion drifts.

Each form exposes the hazard value h(u), the cumulative hazard
H(x) = int_0^x h(u) du, its integral G(x) = int_0^x H(u) du, and the
(leftmost) inverse of H.  All of these are closed-form for the constant,
linear, polynomial and piecewise-linear forms; tabulated hazards are
interpolated linearly between grid points, which keeps them nonnegative and
continuous and makes their integrals closed-form as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import _hazardcore as hc


class HazardRangeError(ValueError):
    """Raised when a tabulated hazard is evaluated outside its grid."""


_BRACKET_CAP = 2.0**64


def _vectorized(fn):
    """Apply an array-in/array-out method, preserving scalar inputs."""

    def wrapper(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = fn(self, arr)
        return float(out[0]) if np.ndim(x) == 0 else out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@dataclass(frozen=True)
class HazardFunction:
    """Base class; subclasses fill in the closed forms."""

    growth_bound: Optional[Tuple[float, float]] = field(default=None, kw_only=True)

    def __post_init__(self):
        if self.growth_bound is None:
            object.__setattr__(self, "growth_bound", self._default_growth_bound())
        k, l = self.growth_bound
        if not (k >= 0.0 and l >= 0.0):
            raise ValueError("growth bound (K, l) must be nonnegative")

    # -- required overrides -------------------------------------------------
    def _default_growth_bound(self) -> Tuple[float, float]:
        raise NotImplementedError

    def value(self, u):
        raise NotImplementedError

    def cumulative(self, x):
        raise NotImplementedError

    def double_cumulative(self, x):
        raise NotImplementedError

    def inverse_cumulative(self, y):
        """Leftmost x with H(x) = y; +inf where y exceeds the range of H."""
        raise NotImplementedError

    # -- shared -------------------------------------------------------------
    @property
    def eval_range(self) -> float:
        """Largest u at which the hazard can be evaluated."""
        return np.inf

    def numba_repr(self):
        empty = np.empty(0, dtype=float)
        return (self._code, self._coefs(), empty, empty, empty, empty, True)

    def growth_bound_holds(self, u_max: float = 64.0, num: int = 4097) -> bool:
        k, l = self.growth_bound
        u = np.linspace(0.0, min(u_max, self.eval_range), num)
        return bool(np.all(self.value(u) <= k * (1.0 + u**l) + 1e-9))


@dataclass(frozen=True)
class ConstantHazard(HazardFunction):
    gamma: float = 0.0

    _code = hc.HZ_CONSTANT

    def __post_init__(self):
        if self.gamma < 0.0:
            raise ValueError("constant hazard must be nonnegative")
        super().__post_init__()

    def _coefs(self):
        return np.array([self.gamma], dtype=float)

    def _default_growth_bound(self):
        return (self.gamma, 0.0)

    @_vectorized
    def value(self, u):
        return np.full_like(u, self.gamma)

    @_vectorized
    def cumulative(self, x):
        return self.gamma * np.clip(x, 0.0, None)

    @_vectorized
    def double_cumulative(self, x):
        x = np.clip(x, 0.0, None)
        return 0.5 * self.gamma * x * x

    @_vectorized
    def inverse_cumulative(self, y):
        if self.gamma == 0.0:
            return np.where(y <= 0.0, 0.0, np.inf)
        return np.clip(y, 0.0, None) / self.gamma


@dataclass(frozen=True)
class LinearHazard(HazardFunction):
    slope: float = 1.0

    _code = hc.HZ_LINEAR

    def __post_init__(self):
        if self.slope < 0.0:
            raise ValueError("linear hazard slope must be nonnegative")
        super().__post_init__()

    def _coefs(self):
        return np.array([self.slope], dtype=float)

    def _default_growth_bound(self):
        return (self.slope, 1.0)

    @_vectorized
    def value(self, u):
        return self.slope * np.clip(u, 0.0, None)

    @_vectorized
    def cumulative(self, x):
        x = np.clip(x, 0.0, None)
        return 0.5 * self.slope * x * x

    @_vectorized
    def double_cumulative(self, x):
        x = np.clip(x, 0.0, None)
        return self.slope * x**3 / 6.0

    @_vectorized
    def inverse_cumulative(self, y):
        if self.slope == 0.0:
            return np.where(y <= 0.0, 0.0, np.inf)
        return np.sqrt(2.0 * np.clip(y, 0.0, None) / self.slope)


@dataclass(frozen=True)
class PolynomialHazard(HazardFunction):
    """h(u) = sum_k coeffs[k] * u**k, required nonnegative on [0, check_range]."""

    coeffs: Tuple[float, ...] = (1.0,)
    check_range: float = 64.0

    _code = hc.HZ_POLY

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        u = np.linspace(0.0, self.check_range, 4097)
        if np.any(np.polynomial.polynomial.polyval(u, self.coeffs) < 0.0):
            raise ValueError("polynomial hazard is negative on the evaluation range")
        super().__post_init__()

    def _coefs(self):
        return np.array(self.coeffs, dtype=float)

    def _default_growth_bound(self):
        return (sum(abs(c) for c in self.coeffs), float(len(self.coeffs) - 1))

    @_vectorized
    def value(self, u):
        return np.polynomial.polynomial.polyval(np.clip(u, 0.0, None), self.coeffs)

    @_vectorized
    def cumulative(self, x):
        c = [ck / (k + 1.0) for k, ck in enumerate(self.coeffs)]
        x = np.clip(x, 0.0, None)
        return np.polynomial.polynomial.polyval(x, c) * x

    @_vectorized
    def double_cumulative(self, x):
        c = [ck / ((k + 1.0) * (k + 2.0)) for k, ck in enumerate(self.coeffs)]
        x = np.clip(x, 0.0, None)
        return np.polynomial.polynomial.polyval(x, c) * x * x

    @_vectorized
    def inverse_cumulative(self, y):
        out = np.zeros_like(y)
        pos = y > 0.0
        if not pos.any():
            return out
        target = y[pos]
        # Bracket by doubling, then bisect; H is nondecreasing.
        hi = np.ones_like(target)
        for _ in range(64):
            low = self.cumulative(hi) < target
            if not low.any():
                break
            hi = np.where(low & (hi <= _BRACKET_CAP), hi * 2.0, hi)
        reachable = self.cumulative(hi) >= target
        lo = np.zeros_like(hi)
        for _ in range(110):
            mid = 0.5 * (lo + hi)
            below = self.cumulative(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        res = 0.5 * (lo + hi)
        res[~reachable] = np.inf
        out[pos] = res
        return out


def _pwl_tables(kx: np.ndarray, kh: np.ndarray):
    """Cumulative H and G at the knots of a piecewise-linear hazard."""
    dx = np.diff(kx)
    trap = 0.5 * (kh[:-1] + kh[1:]) * dx
    kH = np.concatenate([[0.0], np.cumsum(trap)])
    slope = np.diff(kh) / dx
    seg = kH[:-1] * dx + 0.5 * kh[:-1] * dx**2 + slope * dx**3 / 6.0
    kG = np.concatenate([[0.0], np.cumsum(seg)])
    return kH, kG


class _PiecewiseBase(HazardFunction):
    """Shared evaluation for piecewise-linear hazard forms."""

    _code = hc.HZ_PWL
    _clamp = True

    def _tables(self):
        return self._kx, self._kh, self._kH, self._kG

    def _coefs(self):
        return np.empty(0, dtype=float)

    def numba_repr(self):
        kx, kh, kH, kG = self._tables()
        return (self._code, self._coefs(), kx, kh, kH, kG, self._clamp)

    def _check_range(self, u):
        if not self._clamp and np.any(u > self._kx[-1] + 1e-12):
            raise HazardRangeError("hazard evaluation out of range")

    def _segments(self, u):
        kx, kh, _, _ = self._tables()
        idx = np.clip(np.searchsorted(kx, u, side="right") - 1, 0, len(kx) - 2)
        d = np.clip(u - kx[idx], 0.0, None)
        slope = (kh[idx + 1] - kh[idx]) / (kx[idx + 1] - kx[idx])
        return idx, d, slope

    @_vectorized
    def value(self, u):
        self._check_range(u)
        kx, kh, _, _ = self._tables()
        idx, d, slope = self._segments(u)
        out = kh[idx] + slope * d
        return np.where(u >= kx[-1], kh[-1], out)

    @_vectorized
    def cumulative(self, x):
        self._check_range(x)
        kx, kh, kH, _ = self._tables()
        idx, d, slope = self._segments(x)
        out = kH[idx] + kh[idx] * d + 0.5 * slope * d * d
        dt = np.clip(x - kx[-1], 0.0, None)
        out = np.where(x >= kx[-1], kH[-1] + kh[-1] * dt, out)
        return np.where(x <= 0.0, 0.0, out)

    @_vectorized
    def double_cumulative(self, x):
        self._check_range(x)
        kx, kh, kH, kG = self._tables()
        idx, d, slope = self._segments(x)
        out = kG[idx] + kH[idx] * d + 0.5 * kh[idx] * d * d + slope * d**3 / 6.0
        dt = np.clip(x - kx[-1], 0.0, None)
        out = np.where(x >= kx[-1], kG[-1] + kH[-1] * dt + 0.5 * kh[-1] * dt * dt, out)
        return np.where(x <= 0.0, 0.0, out)

    @_vectorized
    def inverse_cumulative(self, y):
        kx, kh, kH, _ = self._tables()
        idx = np.clip(np.searchsorted(kH, y, side="left") - 1, 0, len(kH) - 2)
        slope = (kh[idx + 1] - kh[idx]) / (kx[idx + 1] - kx[idx])
        rem = np.clip(y - kH[idx], 0.0, None)
        # Solve kh*d + slope*d^2/2 = rem for d within each segment.
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = kh[idx] ** 2 + 2.0 * slope * rem
            d_quad = (-kh[idx] + np.sqrt(np.clip(disc, 0.0, None))) / slope
            d_lin = rem / kh[idx]
        d = np.where(slope != 0.0, d_quad, d_lin)
        d = np.where(rem <= 0.0, 0.0, d)
        out = kx[idx] + d
        beyond = y > kH[-1]
        if self._clamp and kh[-1] > 0.0:
            out = np.where(beyond, kx[-1] + (y - kH[-1]) / kh[-1], out)
        else:
            out = np.where(beyond, np.inf, out)
        return out


@dataclass(frozen=True)
class PiecewiseLinearHazard(_PiecewiseBase):
    """Knots (u_i, h_i) with linear interpolation; constant beyond the last knot."""

    knots: Tuple[Tuple[float, float], ...] = ((0.0, 1.0), (1.0, 1.0))

    _clamp = True

    def __post_init__(self):
        knots = tuple((float(u), float(h)) for u, h in self.knots)
        object.__setattr__(self, "knots", knots)
        kx = np.array([u for u, _ in knots])
        kh = np.array([h for _, h in knots])
        if len(kx) < 2 or kx[0] != 0.0 or np.any(np.diff(kx) <= 0.0):
            raise ValueError("knots must start at u=0 with strictly increasing abscissae")
        if np.any(kh < 0.0):
            raise ValueError("hazard values must be nonnegative")
        kH, kG = _pwl_tables(kx, kh)
        object.__setattr__(self, "_kx", kx)
        object.__setattr__(self, "_kh", kh)
        object.__setattr__(self, "_kH", kH)
        object.__setattr__(self, "_kG", kG)
        super().__post_init__()

    def _default_growth_bound(self):
        return (float(np.max(self._kh)), 0.0)


@dataclass(frozen=True)
class TabulatedHazard(_PiecewiseBase):
    """Hazard sampled on a grid; evaluation outside the grid is an error."""

    grid: Tuple[float, ...] = (0.0, 1.0)
    values: Tuple[float, ...] = (1.0, 1.0)

    _clamp = False

    def __post_init__(self):
        kx = np.asarray(self.grid, dtype=float)
        kh = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", tuple(kx.tolist()))
        object.__setattr__(self, "values", tuple(kh.tolist()))
        if kx.shape != kh.shape or len(kx) < 2:
            raise ValueError("grid and values must have equal length >= 2")
        if kx[0] != 0.0 or np.any(np.diff(kx) <= 0.0):
            raise ValueError("grid must start at 0 and increase strictly")
        if np.any(kh < 0.0):
            raise ValueError("hazard values must be nonnegative")
        kH, kG = _pwl_tables(kx, kh)
        object.__setattr__(self, "_kx", kx)
        object.__setattr__(self, "_kh", kh)
        object.__setattr__(self, "_kH", kH)
        object.__setattr__(self, "_kG", kG)
        super().__post_init__()

    @property
    def eval_range(self) -> float:
        return float(self._kx[-1])

    def _default_growth_bound(self):
        return (float(np.max(self._kh)), 0.0)


def cumulative_hazard(h: HazardFunction, x):
    """H(x) = int_0^x h(u) du, exact for all closed-form families."""
    return h.cumulative(x)


def double_cumulative_hazard(h: HazardFunction, x):
    """G(x) = int_0^x H(u) du."""
    return h.double_cumulative(x)


def hazard_from_config(cfg: dict) -> HazardFunction:
    """Build a hazard from a tagged record, e.g. {"form": "linear", "slope": 1}."""
    cfg = dict(cfg)
    form = cfg.pop("form").lower()
    if form == "constant":
        return ConstantHazard(gamma=cfg["gamma"])
    if form == "linear":
        return LinearHazard(slope=cfg["slope"])
    if form == "polynomial":
        return PolynomialHazard(coeffs=tuple(cfg["coeffs"]))
    if form == "piecewise_linear":
        return PiecewiseLinearHazard(knots=tuple((u, v) for u, v in cfg["knots"]))
    if form == "tabulated":
        return TabulatedHazard(grid=tuple(cfg["grid"]), values=tuple(cfg["values"]))
    raise ValueError(f"unknown hazard form: {form}")


def hazard_to_config(h: HazardFunction) -> dict:
    if isinstance(h, ConstantHazard):
        return {"form": "constant", "gamma": h.gamma}
    if isinstance(h, LinearHazard):
        return {"form": "linear", "slope": h.slope}
    if isinstance(h, PolynomialHazard):
        return {"form": "polynomial", "coeffs": list(h.coeffs)}
    if isinstance(h, PiecewiseLinearHazard):
        return {"form": "piecewise_linear", "knots": [list(k) for k in h.knots]}
    if isinstance(h, TabulatedHazard):
        return {"form": "tabulated", "grid": list(h.grid), "values": list(h.values)}
    raise TypeError(f"unknown hazard type: {type(h)!r}")
