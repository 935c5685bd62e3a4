"""Primitive random-variable families for inter-arrival, service and patience.

Every family carries analytic mean/variance and support metadata, a
vectorized sampler driven by an externally-owned Generator, and exact (or
very accurate) CDF/quantile pairs.  The hazard-rate-scaled patience sampler
draws from F_n(x) = 1 - exp(-H(sqrt(n) x)/sqrt(n)) by inverting the
cumulative hazard of the base hazard function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import special

from .hazards import HazardFunction


class EmptyEmpiricalError(ValueError):
    pass


class PatienceInversionError(RuntimeError):
    pass


def _scalarize(x, out):
    return float(out[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class Distribution:
    """Base class for the primitive families."""

    # -- metadata -----------------------------------------------------------
    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    @property
    def ess_inf(self) -> float:
        return 0.0

    @property
    def ess_sup(self) -> float:
        return np.inf

    # -- operations ----------------------------------------------------------
    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, p):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError(f"{type(self).__name__} has no density")

    def hazard(self, x):
        """f(x) / (1 - F(x)) where a density exists."""
        x = np.asarray(x, dtype=float)
        surv = 1.0 - np.asarray(self.cdf(x))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(surv > 0.0, np.asarray(self.pdf(x)) / surv, np.inf)
        return _scalarize(x, np.atleast_1d(out))

    def density_at_zero(self) -> float:
        """F'(0), analytic where available, else one-sided finite difference."""
        eps = 1e-6
        return float(self.cdf(eps)) / eps


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError("rate must be positive")

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def variance(self):
        return 1.0 / self.rate**2

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = -np.expm1(-self.rate * np.clip(x, 0.0, None))
        return _scalarize(x, np.atleast_1d(out))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        out = -np.log1p(-p) / self.rate
        return _scalarize(p, np.atleast_1d(out))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0.0, self.rate * np.exp(-self.rate * np.clip(x, 0.0, None)), 0.0)
        return _scalarize(x, np.atleast_1d(out))

    def density_at_zero(self):
        return self.rate


@dataclass(frozen=True)
class Deterministic(Distribution):
    value: float = 1.0

    def __post_init__(self):
        if not (self.value >= 0.0):
            raise ValueError("value must be nonnegative")

    @property
    def mean(self):
        return self.value

    @property
    def variance(self):
        return 0.0

    @property
    def ess_inf(self):
        return self.value

    @property
    def ess_sup(self):
        return self.value

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.value, 1.0, 0.0)
        return _scalarize(x, np.atleast_1d(out))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        out = np.full_like(p, self.value)
        return _scalarize(p, np.atleast_1d(out))

    def density_at_zero(self):
        return 0.0


@dataclass(frozen=True)
class Erlang(Distribution):
    shape: int = 1
    rate: float = 1.0

    def __post_init__(self):
        if not (self.shape >= 1 and self.rate > 0.0):
            raise ValueError("shape must be >= 1 and rate positive")

    @property
    def mean(self):
        return self.shape / self.rate

    @property
    def variance(self):
        return self.shape / self.rate**2

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = special.gammainc(self.shape, self.rate * np.clip(x, 0.0, None))
        return _scalarize(x, np.atleast_1d(out))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        out = special.gammaincinv(self.shape, p) / self.rate
        return _scalarize(p, np.atleast_1d(out))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, 0.0, None)
        k, r = self.shape, self.rate
        out = r**k * xc ** (k - 1) * np.exp(-r * xc) / math.factorial(k - 1)
        return _scalarize(x, np.atleast_1d(np.where(x >= 0.0, out, 0.0)))

    def density_at_zero(self):
        return self.rate if self.shape == 1 else 0.0


@dataclass(frozen=True)
class HyperExponential(Distribution):
    """Mixture of exponentials: with probability probs[i], Exp(rates[i])."""

    probs: Tuple[float, ...] = (1.0,)
    rates: Tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        p = np.array(self.probs)
        r = np.array(self.rates)
        if p.shape != r.shape or len(p) == 0:
            raise ValueError("probs and rates must have equal nonzero length")
        if np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be nonnegative and sum to 1")
        if np.any(r <= 0.0):
            raise ValueError("rates must be positive")

    @property
    def mean(self):
        return float(sum(p / r for p, r in zip(self.probs, self.rates)))

    @property
    def variance(self):
        m2 = sum(2.0 * p / r**2 for p, r in zip(self.probs, self.rates))
        return float(m2 - self.mean**2)

    def sample(self, rng, size=None):
        n = 1 if size is None else int(np.prod(size))
        comp = rng.choice(len(self.probs), size=n, p=self.probs)
        draws = rng.exponential(1.0, size=n) / np.asarray(self.rates)[comp]
        if size is None:
            return float(draws[0])
        return draws.reshape(size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(np.atleast_1d(x), 0.0, None)
        out = np.zeros_like(xc)
        for p, r in zip(self.probs, self.rates):
            out += p * -np.expm1(-r * xc)
        return _scalarize(x, out)

    def quantile(self, p):
        from scipy.optimize import brentq

        p_arr = np.atleast_1d(np.asarray(p, dtype=float))
        rmin = min(self.rates)
        out = np.empty_like(p_arr)
        for i, pi in enumerate(p_arr):
            if pi <= 0.0:
                out[i] = 0.0
            elif pi >= 1.0:
                out[i] = np.inf
            else:
                hi = -math.log1p(-pi) / rmin
                out[i] = brentq(lambda t: self.cdf(t) - pi, 0.0, hi, xtol=1e-14, rtol=1e-15)
        return _scalarize(p, out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(np.atleast_1d(x), 0.0, None)
        out = np.zeros_like(xc)
        for p, r in zip(self.probs, self.rates):
            out += p * r * np.exp(-r * xc)
        return _scalarize(x, np.where(np.atleast_1d(x) >= 0.0, out, 0.0))

    def density_at_zero(self):
        return float(sum(p * r for p, r in zip(self.probs, self.rates)))


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi):
            raise ValueError("need 0 <= lo < hi")

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def variance(self):
        return (self.hi - self.lo) ** 2 / 12.0

    @property
    def ess_inf(self):
        return self.lo

    @property
    def ess_sup(self):
        return self.hi

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.clip((np.atleast_1d(x) - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return _scalarize(x, out)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        out = self.lo + np.atleast_1d(p) * (self.hi - self.lo)
        return _scalarize(p, out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (np.atleast_1d(x) >= self.lo) & (np.atleast_1d(x) <= self.hi)
        out = np.where(inside, 1.0 / (self.hi - self.lo), 0.0)
        return _scalarize(x, out)

    def density_at_zero(self):
        return 1.0 / (self.hi - self.lo) if self.lo == 0.0 else 0.0


@dataclass(frozen=True)
class LogNormal(Distribution):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")

    @property
    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)

    @property
    def variance(self):
        s2 = self.sigma**2
        return (math.exp(s2) - 1.0) * math.exp(2.0 * self.mu + s2)

    def sample(self, rng, size=None):
        return rng.lognormal(self.mu, self.sigma, size=size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xa = np.atleast_1d(x)
        out = np.zeros_like(xa)
        pos = xa > 0.0
        out[pos] = special.ndtr((np.log(xa[pos]) - self.mu) / self.sigma)
        return _scalarize(x, out)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        out = np.exp(self.mu + self.sigma * special.ndtri(np.atleast_1d(p)))
        return _scalarize(p, out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xa = np.atleast_1d(x)
        out = np.zeros_like(xa)
        pos = xa > 0.0
        z = (np.log(xa[pos]) - self.mu) / self.sigma
        out[pos] = np.exp(-0.5 * z * z) / (xa[pos] * self.sigma * math.sqrt(2.0 * math.pi))
        return _scalarize(x, out)

    def density_at_zero(self):
        return 0.0


@dataclass(frozen=True)
class Empirical(Distribution):
    """Resampling distribution over a fixed sample set."""

    samples: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.samples) == 0:
            raise EmptyEmpiricalError("empty empirical distribution")
        arr = np.sort(np.asarray(self.samples, dtype=float))
        if np.any(arr < 0.0):
            raise ValueError("empirical samples must be nonnegative")
        object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
        object.__setattr__(self, "_sorted", arr)

    @property
    def mean(self):
        return float(np.mean(self._sorted))

    @property
    def variance(self):
        return float(np.var(self._sorted))

    @property
    def ess_inf(self):
        return float(self._sorted[0])

    @property
    def ess_sup(self):
        return float(self._sorted[-1])

    def sample(self, rng, size=None):
        idx = rng.integers(0, len(self._sorted), size=size)
        out = self._sorted[idx]
        return float(out) if size is None else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.searchsorted(self._sorted, np.atleast_1d(x), side="right") / len(self._sorted)
        return _scalarize(x, out.astype(float))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        n = len(self._sorted)
        idx = np.clip(np.ceil(np.atleast_1d(p) * n).astype(int) - 1, 0, n - 1)
        return _scalarize(p, self._sorted[idx])


# -- module-level operations -------------------------------------------------


def sample(spec: Distribution, rng: np.random.Generator, size=None):
    """Draw from ``spec`` using the caller-owned stream ``rng``."""
    return spec.sample(rng, size=size)


def cdf(spec: Distribution, x):
    """P(X <= x), right-continuous."""
    return spec.cdf(x)


def quantile(spec: Distribution, p):
    """Leftmost x with F(x) >= p."""
    return spec.quantile(p)


def scaled_patience_cdf(h: HazardFunction, n: int, x):
    """CDF of the scaled patience family: 1 - exp(-H(sqrt(n) x)/sqrt(n))."""
    rn = math.sqrt(n)
    x = np.asarray(x, dtype=float)
    out = -np.expm1(-np.atleast_1d(h.cumulative(rn * np.clip(x, 0.0, None))) / rn)
    return _scalarize(x, out)


def scaled_patience_sample(h: HazardFunction, n: int, rng: np.random.Generator, size=None):
    """Draw d^n with CDF F_n(x) = 1 - exp(-H(sqrt(n) x)/sqrt(n)).

    Uses the inverse-CDF: with E ~ unit exponential, solves
    H(sqrt(n) x) = sqrt(n) E for x, exactly for closed-form hazards and by
    bracketed monotone inversion otherwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rn = math.sqrt(n)
    e = rng.exponential(1.0, size=size)
    w = h.inverse_cumulative(rn * np.asarray(e, dtype=float))
    if np.any(np.isinf(np.atleast_1d(w))):
        raise PatienceInversionError("patience inversion failed: insufficient hazard mass")
    out = np.atleast_1d(w) / rn
    return float(out[0]) if size is None else out


def distribution_from_config(cfg: dict) -> Distribution:
    """Build a primitive family from a tagged record, e.g. {"kind": "erlang", ...}."""
    cfg = dict(cfg)
    kind = cfg.pop("kind").lower()
    if kind == "exponential":
        return Exponential(rate=cfg["rate"])
    if kind == "deterministic":
        return Deterministic(value=cfg["value"])
    if kind == "erlang":
        return Erlang(shape=cfg["shape"], rate=cfg["rate"])
    if kind == "hyperexponential":
        return HyperExponential(probs=tuple(cfg["probs"]), rates=tuple(cfg["rates"]))
    if kind == "uniform":
        return Uniform(lo=cfg["lo"], hi=cfg["hi"])
    if kind == "lognormal":
        return LogNormal(mu=cfg["mu"], sigma=cfg["sigma"])
    if kind == "empirical":
        return Empirical(samples=tuple(cfg["samples"]))
    raise ValueError(f"unknown distribution kind: {kind}")


def distribution_to_config(spec: Distribution) -> dict:
    if isinstance(spec, Exponential):
        return {"kind": "exponential", "rate": spec.rate}
    if isinstance(spec, Deterministic):
        return {"kind": "deterministic", "value": spec.value}
    if isinstance(spec, Erlang):
        return {"kind": "erlang", "shape": spec.shape, "rate": spec.rate}
    if isinstance(spec, HyperExponential):
        return {"kind": "hyperexponential", "probs": list(spec.probs), "rates": list(spec.rates)}
    if isinstance(spec, Uniform):
        return {"kind": "uniform", "lo": spec.lo, "hi": spec.hi}
    if isinstance(spec, LogNormal):
        return {"kind": "lognormal", "mu": spec.mu, "sigma": spec.sigma}
    if isinstance(spec, Empirical):
        return {"kind": "empirical", "samples": list(spec.samples)}
    raise TypeError(f"unknown distribution type: {type(spec)!r}")
