"""Heavy-traffic experiment orchestration and convergence diagnostics.

Builds the n-indexed system sequence from one template, validates the model
assumptions, runs replications, and compares simulated steady-state
quantities (waiting-time law, moments, scaled abandonment probability,
scaled queue length) against the limit laws computed by the diffusion
module.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import randomness
from .diffusion import (
    DiffusionSpec,
    LinearROU,
    NonlinearHazard,
    StationaryLaw,
    abandonment_limit,
    stationary_density,
)
from .simulator import (
    HazardScaledPatience,
    PatienceMode,
    SimResult,
    SystemConfig,
    UnscaledPatience,
    run_replication,
)


class InsufficientSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentPlan:
    """One heavy-traffic experiment: a system template plus an n-sequence.

    ``horizon_per_n`` and ``burn_in_per_n`` are arrival counts per unit of
    n (the horizon at level n is ``horizon_per_n * n``), keeping the
    scaled-time coverage constant along the sequence.
    """

    lam: float
    theta: float
    arrival_spec: object
    service_spec: object
    patience: PatienceMode
    n_sequence: Tuple[int, ...] = (25, 100, 400)
    x0: float = 0.0
    horizon_per_n: int = 50_000
    burn_in_per_n: int = 5_000
    replications: int = 8
    moment_orders: Tuple[float, ...] = (1.0, 2.0)
    seed_root: int = 20240801
    q_moment: float = 4.0
    max_samples_per_rep: int = 250_000
    batches: int = 32

    def __post_init__(self):
        object.__setattr__(self, "n_sequence", tuple(int(n) for n in self.n_sequence))
        object.__setattr__(self, "moment_orders", tuple(float(m) for m in self.moment_orders))
        if len(self.n_sequence) == 0 or any(np.diff(self.n_sequence) <= 0):
            raise ValueError("n_sequence must be strictly increasing and nonempty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.horizon_per_n > self.burn_in_per_n >= 0:
            raise ValueError("need horizon_per_n > burn_in_per_n >= 0")

    def config_for(self, n: int) -> SystemConfig:
        return SystemConfig(
            n=n,
            lam=self.lam,
            theta=self.theta,
            arrival_spec=self.arrival_spec,
            service_spec=self.service_spec,
            patience=self.patience,
            x0=self.x0,
        )

    @property
    def sigma2(self) -> float:
        return self.lam * self.arrival_spec.variance + self.service_spec.variance / self.lam

    def diffusion_spec(self) -> DiffusionSpec:
        if isinstance(self.patience, UnscaledPatience):
            if not self.patience.f_prime_0 > 0.0:
                raise ValueError("patience required: F'(0) = 0 has no abandonment limit")
            mode = LinearROU(self.patience.f_prime_0)
        else:
            mode = NonlinearHazard(self.patience.h)
        return DiffusionSpec(theta=self.theta, lam=self.lam, sigma2=self.sigma2, drift_mode=mode)


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: Tuple[AssumptionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[AssumptionCheck]:
        return [c for c in self.checks if not c.passed]

    def lines(self) -> List[str]:
        return [
            f"{c.name}: {'pass' if c.passed else 'FAIL'} ({c.detail})" for c in self.checks
        ]


def validate_assumptions(plan: ExperimentPlan) -> ValidationReport:
    """Check the model assumptions for every n in the plan's sequence."""
    checks: List[AssumptionCheck] = []
    checks.append(
        AssumptionCheck("A1", plan.lam > 0.0, f"arrival rate n*lam with lam={plan.lam}")
    )

    mu_bad = [n for n in plan.n_sequence if n * plan.lam - math.sqrt(n) * plan.theta <= 0.0]
    checks.append(
        AssumptionCheck(
            "A2",
            not mu_bad,
            "mu_n = n*lam - sqrt(n)*theta positive for all n"
            if not mu_bad
            else f"mu_n not positive at n={mu_bad}",
        )
    )

    if not mu_bad:
        margins = {}
        for n in plan.n_sequence:
            cfg = plan.config_for(n)
            margins[n] = cfg.a3_margin()
        a3_bad = [n for n, m in margins.items() if not m < 0.0]
        checks.append(
            AssumptionCheck(
                "A3",
                not a3_bad,
                "ess_inf(v)/mu_n - ess_sup(u)/lambda_n < 0 for all n"
                if not a3_bad
                else f"stability margin >= 0 at n={a3_bad}",
            )
        )
    else:
        checks.append(AssumptionCheck("A3", False, "not evaluated: mu_n not positive"))

    scaled = isinstance(plan.patience, HazardScaledPatience)
    if scaled:
        h = plan.patience.h
        ok = h.growth_bound_holds()
        k, l = h.growth_bound
        checks.append(
            AssumptionCheck(
                "A4",
                ok,
                f"hazard-rate scaling with growth bound h(u) <= {k}(1+u^{l})"
                if ok
                else "declared growth bound violated on the evaluation grid",
            )
        )

    q = plan.q_moment
    l_exp = plan.patience.h.growth_bound[1] if scaled else 0.0
    q_floor = 2.0 + l_exp if scaled else 2.0
    q_ok = q > q_floor
    m_bad = [m for m in plan.moment_orders if not m < q - 1.0]
    checks.append(
        AssumptionCheck(
            "A5'" if scaled else "A5",
            q_ok and not m_bad,
            f"q={q} > {q_floor} and all moment orders below q-1"
            if q_ok and not m_bad
            else f"q={q} must exceed {q_floor} and moment orders {m_bad or ''} must be < q-1",
        )
    )
    checks.append(
        AssumptionCheck(
            "primitive-moments",
            True,
            "built-in families have finite moments of every order"
            if type(plan.arrival_spec).__name__ != "Empirical"
            else "empirical families are bounded",
        )
    )
    return ValidationReport(tuple(checks))


def ks_distance(samples: Sequence[float], law: StationaryLaw) -> float:
    """sup_x |empirical CDF - law CDF| over the sorted samples."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = len(s)
    if n < 100:
        raise InsufficientSamplesError("insufficient samples")
    f = law.cdf(s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def _mean_ci(values: Sequence[float]) -> Tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if len(v) == 1:
        # a single replication carries no cross-replication CI
        return float(v[0]), math.inf
    tq = stats.t.ppf(0.975, len(v) - 1)
    return float(np.mean(v)), float(tq * np.std(v, ddof=1) / math.sqrt(len(v)))


@dataclass(frozen=True)
class PerNDiagnostics:
    ks_to_limit: float
    moment_estimates: Dict[float, Tuple[float, float]]
    moment_errors: Dict[float, float]
    abandon_scaled: Tuple[float, float]
    abandon_scaled_alt: Tuple[float, float]
    abandon_limit_error: float
    queue_scaled: Tuple[float, float]
    queue_limit_error: float


@dataclass(frozen=True)
class LimitSummary:
    moments: Dict[float, float]
    abandonment_limit: float
    lambda_mean: float
    mean_closed_form: Optional[float] = None


@dataclass(frozen=True)
class ConvergenceReport:
    per_n: Dict[int, PerNDiagnostics]
    limit: LimitSummary
    monotone_flags: Dict[str, bool]

    def to_json_dict(self) -> dict:
        def pair(t):
            return [t[0], t[1]]

        return {
            "per_n": {
                str(n): {
                    "ks_to_limit": d.ks_to_limit,
                    "moment_estimates": {repr(m): pair(v) for m, v in sorted(d.moment_estimates.items())},
                    "moment_errors": {repr(m): v for m, v in sorted(d.moment_errors.items())},
                    "abandon_scaled": pair(d.abandon_scaled),
                    "abandon_scaled_alt": pair(d.abandon_scaled_alt),
                    "abandon_limit_error": d.abandon_limit_error,
                    "queue_scaled": pair(d.queue_scaled),
                    "queue_limit_error": d.queue_limit_error,
                }
                for n, d in sorted(self.per_n.items())
            },
            "limit": {
                "moments": {repr(m): v for m, v in sorted(self.limit.moments.items())},
                "abandonment_limit": self.limit.abandonment_limit,
                "lambda_mean": self.limit.lambda_mean,
                "mean_closed_form": self.limit.mean_closed_form,
            },
            "monotone_flags": dict(sorted(self.monotone_flags.items())),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConvergenceReport":
        per_n = {}
        for n_str, d in data["per_n"].items():
            per_n[int(n_str)] = PerNDiagnostics(
                ks_to_limit=d["ks_to_limit"],
                moment_estimates={float(m): tuple(v) for m, v in d["moment_estimates"].items()},
                moment_errors={float(m): v for m, v in d["moment_errors"].items()},
                abandon_scaled=tuple(d["abandon_scaled"]),
                abandon_scaled_alt=tuple(d["abandon_scaled_alt"]),
                abandon_limit_error=d["abandon_limit_error"],
                queue_scaled=tuple(d["queue_scaled"]),
                queue_limit_error=d["queue_limit_error"],
            )
        lim = data["limit"]
        limit = LimitSummary(
            moments={float(m): v for m, v in lim["moments"].items()},
            abandonment_limit=lim["abandonment_limit"],
            lambda_mean=lim["lambda_mean"],
            mean_closed_form=lim["mean_closed_form"],
        )
        return cls(per_n=per_n, limit=limit, monotone_flags=dict(data["monotone_flags"]))


@dataclass(eq=False)
class ExperimentOutput:
    report: ConvergenceReport
    law: StationaryLaw
    samples_by_n: Dict[int, np.ndarray]
    results_by_n: Dict[int, List[SimResult]]


def _run_level(plan: ExperimentPlan, n_index: int, n: int, threads: int) -> List[SimResult]:
    cfg = plan.config_for(n)
    horizon = plan.horizon_per_n * n
    burn_in = plan.burn_in_per_n * n

    def one(rep: int) -> SimResult:
        seed = randomness.replication_seed(plan.seed_root, n_index, rep)
        try:
            return run_replication(
                cfg,
                horizon,
                burn_in,
                seed,
                moment_orders=plan.moment_orders,
                batches=plan.batches,
                max_samples=plan.max_samples_per_rep,
            )
        except Exception as exc:
            raise RuntimeError(f"replication {rep} at n={n} failed: {exc}") from exc

    reps = range(plan.replications)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, reps))
    return [one(r) for r in reps]


def run_experiment_detailed(plan: ExperimentPlan, threads: Optional[int] = None) -> ExperimentOutput:
    """Run the full n-sequence and compare against the limit law."""
    report_v = validate_assumptions(plan)
    if not report_v.passed:
        names = ", ".join(c.name for c in report_v.failures())
        raise ValueError(f"assumption validation failed: {names}")
    threads = threads if threads is not None else 1

    spec = plan.diffusion_spec()
    law = stationary_density(spec, moment_orders=plan.moment_orders)
    limit_ab = abandonment_limit(spec, law)
    limit = LimitSummary(
        moments={m: law.moment(m) for m in sorted({1.0, 2.0} | set(plan.moment_orders))},
        abandonment_limit=limit_ab,
        lambda_mean=plan.lam * law.moment(1.0),
        mean_closed_form=law.mean_closed_form,
    )

    scaled_mode = isinstance(plan.patience, HazardScaledPatience)
    per_n: Dict[int, PerNDiagnostics] = {}
    samples_by_n: Dict[int, np.ndarray] = {}
    results_by_n: Dict[int, List[SimResult]] = {}
    for n_index, n in enumerate(plan.n_sequence):
        results = _run_level(plan, n_index, n, threads)
        results_by_n[n] = results
        pooled = np.concatenate([r.scaled_wait_samples for r in results])
        samples_by_n[n] = pooled

        ks = ks_distance(pooled, law)
        moment_estimates = {}
        moment_errors = {}
        for m in plan.moment_orders:
            est, hw = _mean_ci([r.scaled_wait_moment[m][0] for r in results])
            if len(results) == 1:
                hw = results[0].scaled_wait_moment[m][1]
            moment_estimates[m] = (est, hw)
            moment_errors[m] = abs(est - limit.moments[m])

        raw = _mean_ci([r.abandon_prob_scaled[0] for r in results])
        if len(results) == 1:
            raw = (raw[0], results[0].abandon_prob_scaled[1])
        smooth = _mean_ci([r.abandon_scaled_smoothed for r in results])
        headline, alt = (smooth, raw) if scaled_mode else (raw, smooth)

        queue = _mean_ci([r.scaled_queue_mean[0] for r in results])
        if len(results) == 1:
            queue = (queue[0], results[0].scaled_queue_mean[1])

        per_n[n] = PerNDiagnostics(
            ks_to_limit=ks,
            moment_estimates=moment_estimates,
            moment_errors=moment_errors,
            abandon_scaled=headline,
            abandon_scaled_alt=alt,
            abandon_limit_error=abs(headline[0] - limit_ab),
            queue_scaled=queue,
            queue_limit_error=abs(queue[0] - limit.lambda_mean),
        )

    ns = list(plan.n_sequence)
    first, last = ns[0], ns[-1]

    def decreased(getter) -> bool:
        return getter(per_n[last]) < getter(per_n[first])

    monotone_flags = {
        "ks_to_limit": decreased(lambda d: d.ks_to_limit),
        "moment_error_1": decreased(lambda d: d.moment_errors.get(1.0, math.nan)),
        "abandon_limit_error": decreased(lambda d: d.abandon_limit_error),
        "queue_limit_error": decreased(lambda d: d.queue_limit_error),
    }
    report = ConvergenceReport(per_n=per_n, limit=limit, monotone_flags=monotone_flags)
    return ExperimentOutput(
        report=report, law=law, samples_by_n=samples_by_n, results_by_n=results_by_n
    )


def run_experiment(plan: ExperimentPlan, threads: Optional[int] = None) -> ConvergenceReport:
    return run_experiment_detailed(plan, threads=threads).report
