"""Stationary laws of the two heavy-traffic limits and a reflected SDE simulator.

Both limits are one-dimensional diffusions on [0, inf) with reflection at 0,
drift theta/lambda - D(v) and infinitesimal variance sigma^2, where the
absorption term D is either linear (D(v) = F'(0) v, the reflected OU) or the
cumulative hazard of a scaled patience family (D(v) = int_0^v h).  The
stationary density is pi(x) proportional to
exp((2/sigma^2) [ (theta/lambda) x - int_0^x D(u) du ]); the linear case is a
normal law truncated to [0, inf) whose mean has a closed form in terms of the
standard-normal hazard rate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from numba import njit
from scipy import integrate, special

from ._hazardcore import hz_cumulative
from .hazards import ConstantHazard, HazardFunction
from .regulator import PathRecord


class DensityError(RuntimeError):
    pass


@dataclass(frozen=True)
class LinearROU:
    """Linear absorption F'(0) * v, the reflected Ornstein-Uhlenbeck limit."""

    f_prime_0: float

    def __post_init__(self):
        if not self.f_prime_0 > 0.0:
            raise ValueError("patience required: F'(0) must be positive in LinearROU mode")


@dataclass(frozen=True)
class NonlinearHazard:
    """Absorption through the cumulative hazard of the patience family."""

    h: HazardFunction


DriftMode = Union[LinearROU, NonlinearHazard]


@dataclass(frozen=True)
class DiffusionSpec:
    theta: float
    lam: float
    sigma2: float
    drift_mode: DriftMode

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")
        if not self.sigma2 > 0.0:
            raise ValueError("sigma^2 must be positive")

    @property
    def drift_hazard(self) -> HazardFunction:
        """Hazard whose cumulative equals the absorption term D."""
        if isinstance(self.drift_mode, LinearROU):
            return ConstantHazard(self.drift_mode.f_prime_0)
        return self.drift_mode.h

    def log_unnormalized_density(self, x):
        """log of exp((2/sigma^2)[(theta/lambda) x - G(x)]) with G = int H."""
        x = np.asarray(x, dtype=float)
        g = self.drift_hazard.double_cumulative(x)
        return (2.0 / self.sigma2) * ((self.theta / self.lam) * x - np.asarray(g))


@dataclass(eq=False)
class StationaryLaw:
    grid: np.ndarray
    density: np.ndarray
    log_normalizer: float
    moments: Dict[float, float]
    mean_closed_form: Optional[float] = None
    _cdf_grid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        c = integrate.cumulative_trapezoid(self.density, self.grid, initial=0.0)
        self._cdf_grid = c / c[-1]

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.grid, self._cdf_grid, left=0.0, right=1.0)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        out = np.interp(p, self._cdf_grid, self.grid)
        return float(out) if np.ndim(p) == 0 else out

    def moment(self, order: float) -> float:
        return self.moments[float(order)]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "density"])
            for x, d in zip(self.grid, self.density):
                writer.writerow([repr(float(x)), repr(float(d))])

    def moment_summary(self) -> dict:
        return {
            "moments": {repr(k): v for k, v in sorted(self.moments.items())},
            "log_normalizer": self.log_normalizer,
            "mean_closed_form": self.mean_closed_form,
        }


_TAIL_RTOL = 1e-12
_CAP_LIMIT = 1e9
_DENSITY_CUTOFF = 1e-300


def _find_cap(spec: DiffusionSpec, start: float) -> float:
    """Smallest doubling of ``start`` where the tail criterion holds."""
    cap = max(start, 1.0)
    while cap <= _CAP_LIMIT:
        probe = np.linspace(0.0, cap, 2049)
        logpi = spec.log_unnormalized_density(probe)
        # 0.2 nats of margin so the criterion still holds on the finer grid
        if logpi[-1] - np.max(logpi) <= math.log(_TAIL_RTOL) - 0.2:
            return cap
        cap *= 2.0
    raise DensityError("density not normalizable")


def stationary_density(
    spec: DiffusionSpec,
    grid_cap: Optional[float] = None,
    points: int = 20001,
    moment_orders: Tuple[float, ...] = (),
) -> StationaryLaw:
    """Stationary law of the limit diffusion by quadrature on [0, cap].

    Moments of orders {1, 2} union ``moment_orders`` are computed by
    adaptive quadrature of the normalized density.
    """
    if points < 1000:
        raise ValueError("points must be >= 1000")
    cap = _find_cap(spec, grid_cap if grid_cap is not None else 1.0)
    dense = np.linspace(0.0, cap, 4097)
    shift = float(np.max(spec.log_unnormalized_density(dense)))

    def unnorm(x):
        return math.exp(float(spec.log_unnormalized_density(x)) - shift)

    z, z_err = integrate.quad(unnorm, 0.0, cap, epsabs=1e-13, epsrel=1e-11, limit=400)
    if not (z > 0.0 and np.isfinite(z)):
        raise DensityError("density not normalizable")

    orders = sorted({1.0, 2.0} | {float(m) for m in moment_orders})
    moments: Dict[float, float] = {}
    for m in orders:
        val, _ = integrate.quad(
            lambda x: x**m * unnorm(x), 0.0, cap, epsabs=1e-13, epsrel=1e-11, limit=400
        )
        moments[m] = val / z

    grid = np.linspace(0.0, cap, points)
    log_normalizer = math.log(z) + shift
    density = np.exp(spec.log_unnormalized_density(grid) - log_normalizer)
    # The stored grid density is renormalized by its own trapezoid integral so
    # that the discrete law integrates to 1 exactly; moments use the adaptive
    # quadrature normalizer.
    density /= np.trapezoid(density, grid)
    density[density < _DENSITY_CUTOFF] = 0.0

    mean_cf = mean_rou(spec) if isinstance(spec.drift_mode, LinearROU) else None
    return StationaryLaw(
        grid=grid,
        density=density,
        log_normalizer=log_normalizer,
        moments=moments,
        mean_closed_form=mean_cf,
    )


def normal_hazard_rate(z) -> float:
    """phi(z) / (1 - Phi(z)), evaluated via erfcx to avoid tail cancellation."""
    z = np.asarray(z, dtype=float)
    out = math.sqrt(2.0 / math.pi) / special.erfcx(z / math.sqrt(2.0))
    return float(out) if np.ndim(z) == 0 else out


def mean_rou(spec: DiffusionSpec) -> float:
    """Closed-form stationary mean of the reflected OU limit.

    E[V(inf)] = theta/(lambda F'(0))
              + sigma/sqrt(2 F'(0)) * h_Z(-theta/(lambda sigma) * sqrt(2/F'(0)))
    with h_Z the hazard rate of the standard normal law.
    """
    if not isinstance(spec.drift_mode, LinearROU):
        raise ValueError("mean_rou requires LinearROU drift mode")
    f0 = spec.drift_mode.f_prime_0
    sigma = math.sqrt(spec.sigma2)
    arg = -spec.theta / (spec.lam * sigma) * math.sqrt(2.0 / f0)
    return spec.theta / (spec.lam * f0) + sigma / math.sqrt(2.0 * f0) * normal_hazard_rate(arg)


def abandonment_limit(spec: DiffusionSpec, law: StationaryLaw) -> float:
    """Limit of sqrt(n) P^n_a: E[int_0^{V(inf)} h] in hazard mode, F'(0) E[V(inf)] else."""
    if isinstance(spec.drift_mode, LinearROU):
        return spec.drift_mode.f_prime_0 * law.moment(1.0)
    h = spec.drift_mode.h
    cap = float(law.grid[-1])
    shift = law.log_normalizer

    def integrand(x):
        return math.exp(float(spec.log_unnormalized_density(x)) - shift) * float(h.cumulative(x))

    val, _ = integrate.quad(integrand, 0.0, cap, epsabs=1e-13, epsrel=1e-11, limit=400)
    return val


@njit(cache=True, nogil=True)
def _sde_chunk(v0, dt, mu, sigma_dt, xi, code, coefs, kx, kh, kH, kG, clamp, out, stride, offset):
    v = v0
    for i in range(xi.shape[0]):
        drift = mu - hz_cumulative(code, coefs, kx, kh, kH, kG, clamp, v)
        v = v + drift * dt + sigma_dt * xi[i]
        if v < 0.0:
            v = 0.0
        j = offset + i + 1
        if j % stride == 0:
            out[j // stride] = v
    return v


def simulate_reflected_sde(
    spec: DiffusionSpec,
    x0: float,
    t_end: float,
    dt: float,
    rng: np.random.Generator,
    record_stride: int = 1,
) -> PathRecord:
    """Projected Euler-Maruyama path of the limit diffusion.

    Records every ``record_stride``-th step (plus the initial state), so the
    returned PathRecord has steps ``record_stride * dt`` apart.
    """
    if not dt <= 1e-2:
        raise ValueError("dt must be <= 1e-2")
    if x0 < 0.0:
        raise ValueError("x0 must be nonnegative")
    n_steps = int(round(t_end / dt))
    n_rec = n_steps // record_stride
    out = np.empty(n_rec + 1)
    out[0] = x0
    mu = spec.theta / spec.lam
    sigma_dt = math.sqrt(spec.sigma2) * math.sqrt(dt)
    repr_ = spec.drift_hazard.numba_repr()
    v = float(x0)
    chunk = 1 << 20
    done = 0
    while done < n_steps:
        m = min(chunk, n_steps - done)
        xi = rng.standard_normal(m)
        v = _sde_chunk(v, dt, mu, sigma_dt, xi, *repr_, out, record_stride, done)
        done += m
    times = np.arange(n_rec + 1) * (record_stride * dt)
    return PathRecord(times, out, "linear")
