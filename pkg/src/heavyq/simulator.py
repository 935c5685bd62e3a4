"""Event-driven simulation of the n-th single-server queue with abandonment.

The offered waiting time seen by successive arrivals follows the embedded
recursion W_{i+1} = max(W_i + v_i 1[W_i < d_i] - g_{i+1}, 0): an arrival
that would wait at least its patience abandons (weak inequality) and
contributes no work.  Queue length counts everyone present, including
customers that will eventually abandon but have not yet done so; its time
average is integrated exactly between events.

``trace_decomposition`` replays one path while accumulating every term of
the scaled semimartingale decomposition of the waiting-time process
(free input + centering error - absorbed drift + scaled idle time), which
must reproduce the path to floating-point accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import stats

from . import _simkernel as sk
from . import randomness
from .distributions import Distribution, scaled_patience_cdf, scaled_patience_sample
from .hazards import ConstantHazard, HazardFunction

_CHUNK = 1 << 20
_HEAP_CAP = 1 << 20


class SimulationDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class UnscaledPatience:
    """Patience drawn from a fixed distribution F; F'(0) feeds the OU limit."""

    spec: Distribution
    f_prime_0: Optional[float] = None

    def __post_init__(self):
        if self.f_prime_0 is None:
            object.__setattr__(self, "f_prime_0", float(self.spec.density_at_zero()))
        if self.f_prime_0 < 0.0:
            raise ValueError("F'(0) must be nonnegative")


@dataclass(frozen=True)
class HazardScaledPatience:
    """Patience from F_n(x) = 1 - exp(-H(sqrt(n) x)/sqrt(n))."""

    h: HazardFunction


PatienceMode = Union[UnscaledPatience, HazardScaledPatience]


@dataclass(frozen=True)
class SystemConfig:
    """The n-th system: arrival rate n*lam, service rate n*lam - sqrt(n)*theta."""

    n: int
    lam: float
    theta: float
    arrival_spec: Distribution
    service_spec: Distribution
    patience: PatienceMode
    x0: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.lam > 0.0:
            raise ValueError("lambda must be positive")
        if not self.mu_n > 0.0:
            raise ValueError("mu_n not positive; reduce theta or increase n")
        for name, spec in (("arrival", self.arrival_spec), ("service", self.service_spec)):
            if abs(spec.mean - 1.0) > 1e-12:
                raise ValueError(f"{name} primitive must have mean 1, got {spec.mean}")
        if self.x0 < 0.0:
            raise ValueError("x0 must be nonnegative")

    @property
    def lambda_n(self) -> float:
        return self.n * self.lam

    @property
    def mu_n(self) -> float:
        return self.n * self.lam - math.sqrt(self.n) * self.theta

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.n)

    @property
    def v0(self) -> float:
        """Initial offered waiting time V(0) = x0 / sqrt(n)."""
        return self.x0 / self.sqrt_n

    def a3_margin(self) -> float:
        """ess_inf(service)/mu_n - ess_sup(arrival)/lambda_n; stable iff < 0."""
        lo = self.service_spec.ess_inf / self.mu_n
        hi = self.arrival_spec.ess_sup / self.lambda_n
        if math.isinf(hi):
            return -math.inf
        return lo - hi

    def draw_patience(self, rng: np.random.Generator, size=None):
        if isinstance(self.patience, UnscaledPatience):
            return self.patience.spec.sample(rng, size=size)
        return scaled_patience_sample(self.patience.h, self.n, rng, size=size)

    def patience_cdf(self, w):
        """F_n(w): abandonment probability of an arrival seeing waiting time w."""
        if isinstance(self.patience, UnscaledPatience):
            return self.patience.spec.cdf(w)
        return scaled_patience_cdf(self.patience.h, self.n, w)

    @property
    def drift_hazard(self) -> HazardFunction:
        """Hazard whose cumulative is the absorbed drift of the scaled process."""
        if isinstance(self.patience, UnscaledPatience):
            return ConstantHazard(self.patience.f_prime_0)
        return self.patience.h

    @property
    def drift_coefficient(self) -> float:
        """b_n = (n/mu_n)(lambda_n - mu_n)/sqrt(n), -> theta/lambda."""
        return (self.n / self.mu_n) * (self.lambda_n - self.mu_n) / self.sqrt_n


def step_waiting_time(w: float, service: float, patience: float, next_gap: float) -> float:
    """One step of the embedded recursion; the customer abandons iff w >= patience."""
    if not next_gap > 0.0:
        raise ValueError("next_gap must be positive")
    work = w if w >= patience else w + service
    return max(work - next_gap, 0.0)


@dataclass(frozen=True)
class Counts:
    arrivals: int
    served: int
    abandoned: int
    burn_in_discarded: int


@dataclass(eq=False)
class SimResult:
    """Steady-state estimates from one replication.

    Estimates carry 95% half-widths from batch means (32 batches by
    default); ``scaled_wait_samples`` holds sqrt(n) * W at every
    ``sample_stride``-th post-burn-in arrival.
    """

    n: int
    horizon: int
    burn_in: int
    scaled_wait_samples: np.ndarray
    sample_stride: int
    scaled_wait_moment: Dict[float, Tuple[float, float]]
    abandon_prob: Tuple[float, float]
    abandon_prob_scaled: Tuple[float, float]
    abandon_scaled_smoothed: float
    scaled_queue_mean: Tuple[float, float]
    decomposition_residual: float
    counts: Counts
    batch_moment_means: Dict[float, np.ndarray] = field(repr=False, default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "horizon": self.horizon,
            "burn_in": self.burn_in,
            "sample_stride": self.sample_stride,
            "scaled_wait_moment": {
                repr(k): list(v) for k, v in sorted(self.scaled_wait_moment.items())
            },
            "abandon_prob": list(self.abandon_prob),
            "abandon_prob_scaled": list(self.abandon_prob_scaled),
            "abandon_scaled_smoothed": self.abandon_scaled_smoothed,
            "scaled_queue_mean": list(self.scaled_queue_mean),
            "decomposition_residual": self.decomposition_residual,
            "counts": {
                "arrivals": self.counts.arrivals,
                "served": self.counts.served,
                "abandoned": self.counts.abandoned,
                "burn_in_discarded": self.counts.burn_in_discarded,
            },
        }


def write_samples_csv(path, samples, header: str = "scaled_wait") -> None:
    """Single-column CSV of stationary-window samples."""
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for s in np.asarray(samples).ravel():
            fh.write(repr(float(s)) + "\n")


def _batch_ci(batch_means: np.ndarray) -> float:
    """95% half-width of the mean of batch means (t quantile, B-1 dof)."""
    b = len(batch_means)
    if b < 2:
        return math.nan
    tq = stats.t.ppf(0.975, b - 1)
    return float(tq * np.std(batch_means, ddof=1) / math.sqrt(b))


def run_replication(
    cfg: SystemConfig,
    horizon: int,
    burn_in: int,
    seed,
    *,
    moment_orders: Tuple[float, ...] = (1.0, 2.0),
    batches: int = 32,
    max_samples: int = 250_000,
    decomposition_window: int = 10_000,
) -> SimResult:
    """Simulate ``horizon`` arrivals; statistics cover arrivals after ``burn_in``.

    ``seed`` may be an int or a SeedSequence; arrival, service and patience
    sequences each draw from their own substream, so results are
    reproducible bit-for-bit for a fixed (cfg, seed).
    """
    if not horizon > burn_in >= 0:
        raise ValueError("need horizon > burn_in >= 0")
    span = horizon - burn_in
    batches = max(1, min(batches, span))
    orders = np.array(sorted({float(m) for m in moment_orders}), dtype=float)
    stride = max(1, math.ceil(span / max_samples))
    n_keep = (span + stride - 1) // stride

    rng_a = randomness.substream(seed, randomness.ARRIVAL)
    rng_s = randomness.substream(seed, randomness.SERVICE)
    rng_p = randomness.substream(seed, randomness.PATIENCE)

    fstate = np.zeros(4)
    fstate[sk.F_VPREV] = cfg.v0
    istate = np.zeros(8, dtype=np.int64)
    heap = np.empty(_HEAP_CAP)
    batch_sums = np.zeros((batches, len(orders)))
    batch_counts = np.zeros(batches, dtype=np.int64)
    batch_ab = np.zeros(batches, dtype=np.int64)
    batch_qint = np.zeros(batches)
    batch_qdur = np.zeros(batches)
    samples = np.empty(n_keep)

    done = 0
    while done < horizon:
        m = min(_CHUNK, horizon - done)
        gaps = np.asarray(cfg.arrival_spec.sample(rng_a, m), dtype=float) / cfg.lambda_n
        servs = np.asarray(cfg.service_spec.sample(rng_s, m), dtype=float) / cfg.mu_n
        pats = np.asarray(cfg.draw_patience(rng_p, m), dtype=float)
        err = sk.sim_chunk(
            gaps, servs, pats, done, horizon, burn_in, cfg.sqrt_n, orders,
            fstate, istate, heap, batch_sums, batch_counts, batch_ab,
            batch_qint, batch_qdur, samples, stride,
        )
        if err == 1:
            raise SimulationDiverged("simulation diverged: nonfinite waiting time")
        if err == 2:
            raise SimulationDiverged("simulation diverged: exit calendar overflow")
        done += m

    written = int(istate[sk.I_NSAMPLES])
    samples = samples[:written]
    total = int(batch_counts.sum())
    live = batch_counts > 0

    moment_map: Dict[float, Tuple[float, float]] = {}
    batch_mom: Dict[float, np.ndarray] = {}
    for o, m in enumerate(orders):
        est = float(batch_sums[:, o].sum() / total)
        means = batch_sums[live, o] / batch_counts[live]
        moment_map[float(m)] = (est, _batch_ci(means))
        batch_mom[float(m)] = means

    ab_post = int(batch_ab.sum())
    ab_est = ab_post / total
    ab_hw = _batch_ci(batch_ab[live] / batch_counts[live])
    rn = cfg.sqrt_n

    smoothed = float(rn * np.mean(cfg.patience_cdf(samples / rn))) if written else math.nan

    q_live = batch_qdur > 0
    if q_live.any():
        q_est = float(batch_qint.sum() / batch_qdur.sum())
        q_hw = _batch_ci(batch_qint[q_live] / batch_qdur[q_live] / rn)
    else:
        q_est, q_hw = math.nan, math.nan

    residual = 0.0
    if decomposition_window > 0:
        trace = trace_decomposition(
            cfg,
            min(horizon, decomposition_window),
            seed,
            checkpoints=max(2, min(64, horizon)),
            draw_block=min(_CHUNK, horizon),
        )
        residual = trace.residual

    counts = Counts(
        arrivals=horizon,
        served=horizon - int(istate[sk.I_AB_TOTAL]),
        abandoned=int(istate[sk.I_AB_TOTAL]),
        burn_in_discarded=burn_in,
    )
    return SimResult(
        n=cfg.n,
        horizon=horizon,
        burn_in=burn_in,
        scaled_wait_samples=samples,
        sample_stride=stride,
        scaled_wait_moment=moment_map,
        abandon_prob=(ab_est, ab_hw),
        abandon_prob_scaled=(rn * ab_est, rn * ab_hw),
        abandon_scaled_smoothed=smoothed,
        scaled_queue_mean=(q_est / rn, q_hw),
        decomposition_residual=residual,
        counts=counts,
        batch_moment_means=batch_mom,
    )


@dataclass(eq=False)
class DecompositionTrace:
    """Checkpoint samples of every term of the scaled decomposition.

    At each checkpoint time t the identity
    scaled_wait = free_input + centering_error - absorbed_drift + idle_scaled
    holds up to ``residual`` (pure bookkeeping; the identity is algebraic).
    """

    n: int
    times: np.ndarray
    scaled_wait: np.ndarray
    free_input: np.ndarray
    centering_error: np.ndarray
    absorbed_drift: np.ndarray
    idle_scaled: np.ndarray
    abandon_martingale: np.ndarray
    service_sum_centered: np.ndarray
    service_sum_abandoning: np.ndarray
    arrivals_centered: np.ndarray
    arrivals_fluid: np.ndarray
    window_min_wait: np.ndarray
    residual: float

    def idle_increments(self) -> np.ndarray:
        return np.diff(self.idle_scaled)


def trace_decomposition(
    cfg: SystemConfig,
    horizon: int,
    seed,
    checkpoints: int = 64,
    t_end: Optional[float] = None,
    draw_block: Optional[int] = None,
) -> DecompositionTrace:
    """Replay one path, accumulating the scaled decomposition exactly.

    ``draw_block`` sets how many variates are drawn from each stream (the
    first ``horizon`` are used); passing the block size of a larger
    simulation makes the traced path an exact prefix of that simulation's
    path regardless of how the underlying samplers batch their draws.
    """
    if checkpoints < 2:
        raise ValueError("checkpoints must be >= 2")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    block = horizon if draw_block is None else draw_block
    if block < horizon:
        raise ValueError("draw_block must be >= horizon")

    rng_a = randomness.substream(seed, randomness.ARRIVAL)
    rng_s = randomness.substream(seed, randomness.SERVICE)
    rng_p = randomness.substream(seed, randomness.PATIENCE)
    base_u = np.asarray(cfg.arrival_spec.sample(rng_a, block), dtype=float)[:horizon]
    base_v = np.asarray(cfg.service_spec.sample(rng_s, block), dtype=float)[:horizon]
    gaps = base_u / cfg.lambda_n
    servs = base_v / cfg.mu_n
    pats = np.asarray(cfg.draw_patience(rng_p, block), dtype=float)[:horizon]

    epochs = np.cumsum(gaps)
    if t_end is None:
        t_end = float(epochs[-1])
    elif t_end > epochs[-1] + 1e-15:
        raise ValueError("horizon too small to reach the requested t_end")
    cp_times = np.linspace(0.0, t_end, checkpoints)

    drift_hz = cfg.drift_hazard
    rn = cfg.sqrt_n
    n_over_mu = cfg.n / cfg.mu_n
    b_n = cfg.drift_coefficient

    # running accumulators (values at the last processed arrival)
    v_prev = cfg.v0
    t_prev = 0.0
    arrivals = 0
    sum_v_centered = 0.0
    sum_v_centered_ab = 0.0
    martingale = 0.0
    sum_f = 0.0
    idle = 0.0
    drift_int = 0.0
    run_min = v_prev

    out = {
        name: np.empty(checkpoints)
        for name in (
            "scaled_wait", "free_input", "centering_error", "absorbed_drift",
            "idle_scaled", "abandon_martingale", "service_sum_centered",
            "service_sum_abandoning", "arrivals_centered", "arrivals_fluid",
            "window_min_wait",
        )
    }

    def record(c: int, t: float):
        nonlocal run_min
        elapsed = t - t_prev
        v_t = max(v_prev - elapsed, 0.0)
        seg_drift = (
            drift_hz.double_cumulative(rn * v_prev)
            - drift_hz.double_cumulative(rn * v_t)
        ) / rn
        drift_t = drift_int + seg_drift
        idle_t = idle + max(0.0, elapsed - v_prev)
        a_tilde = (arrivals - cfg.lambda_n * t) / rn
        n_tilde = n_over_mu * (
            a_tilde
            + sum_v_centered / rn
            - sum_v_centered_ab / rn
            - martingale / rn
        )
        out["scaled_wait"][c] = rn * v_t
        out["free_input"][c] = cfg.x0 + b_n * t + n_tilde
        out["centering_error"][c] = drift_t - (rn / cfg.mu_n) * sum_f
        out["absorbed_drift"][c] = drift_t
        out["idle_scaled"][c] = rn * idle_t
        out["abandon_martingale"][c] = martingale / rn
        out["service_sum_centered"][c] = sum_v_centered / rn
        out["service_sum_abandoning"][c] = sum_v_centered_ab / rn
        out["arrivals_centered"][c] = a_tilde
        out["arrivals_fluid"][c] = arrivals / cfg.n
        out["window_min_wait"][c] = rn * min(run_min, v_t)
        run_min = v_t

    cp = 0
    for i in range(horizon):
        t_next = epochs[i]
        while cp < checkpoints and cp_times[cp] < t_next:
            record(cp, cp_times[cp])
            cp += 1
        # process arrival i+1 at t_next
        w = max(v_prev - gaps[i], 0.0)
        run_min = min(run_min, w)
        ab = w >= pats[i]
        f_i = float(cfg.patience_cdf(w))
        drift_int += (
            drift_hz.double_cumulative(rn * v_prev) - drift_hz.double_cumulative(rn * w)
        ) / rn
        idle += max(0.0, gaps[i] - v_prev)
        arrivals += 1
        sum_v_centered += base_v[i] - 1.0
        if ab:
            sum_v_centered_ab += base_v[i] - 1.0
            martingale += 1.0 - f_i
            v_prev = w
        else:
            martingale += -f_i
            v_prev = w + servs[i]
        sum_f += f_i
        t_prev = t_next
        if cp >= checkpoints:
            break
    while cp < checkpoints:
        record(cp, cp_times[cp])
        cp += 1

    residual = float(
        np.max(
            np.abs(
                out["scaled_wait"]
                - (
                    out["free_input"]
                    + out["centering_error"]
                    - out["absorbed_drift"]
                    + out["idle_scaled"]
                )
            )
        )
    )
    return DecompositionTrace(
        n=cfg.n,
        times=cp_times,
        residual=residual,
        **out,
    )
