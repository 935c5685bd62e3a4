import math

import numpy as np
import pytest

from heavyq import (
    ConeConditionError,
    ConstantHazard,
    LinearHazard,
    PathRecord,
    apply_regulator,
    deterministic_trajectory,
    drain_check,
    estimate_lipschitz,
    skorokhod_reflection,
    substream,
)


def test_zero_input_stays_zero():
    y = PathRecord(np.array([0.0, 5.0]), np.array([0.0, 0.0]))
    pair = apply_regulator(y, ConstantHazard(1.0), 1e-3)
    assert np.all(pair.z.values == 0.0)
    assert np.all(pair.l.values == 0.0)


def test_downward_ramp_pushes_like_identity():
    y = PathRecord(np.array([0.0, 4.0]), np.array([0.0, -4.0]))
    pair = apply_regulator(y, ConstantHazard(0.0), 1e-3)
    assert np.all(pair.z.values == 0.0)
    assert np.max(np.abs(pair.l.values - pair.l.times)) <= 1e-12


@pytest.mark.parametrize("gamma", [1.0, 2.0])
def test_constant_hazard_exponential_decay(gamma):
    dt = 1e-3
    y = PathRecord(np.array([0.0, 5.0]), np.array([1.0, 1.0]))
    pair = apply_regulator(y, ConstantHazard(gamma), dt)
    exact = np.exp(-gamma * pair.z.times)
    assert np.max(np.abs(pair.z.values - exact)) <= 5 * dt
    assert pair.l.values[-1] == 0.0


def test_deterministic_trajectory_cases():
    dt = 1e-3
    z = deterministic_trajectory(0.0, -1.0, LinearHazard(1.0), 3.0, dt)
    assert np.all(z.values == 0.0)

    z = deterministic_trajectory(1.0, 0.0, ConstantHazard(1.0), 5.0, dt)
    assert np.max(np.abs(z.values - np.exp(-z.times))) <= 5 * dt

    z = deterministic_trajectory(1.0, -1.0, LinearHazard(1.0), 3.0, dt)
    tail = z.values[z.times >= 1.0 + 10 * dt]
    assert np.all(tail <= 1e-9)


def test_zero_hazard_reduces_to_skorokhod_formula():
    rng = substream(12, 0)
    dt = 1e-3
    times = np.arange(9.0)
    for _ in range(5):
        vals = rng.uniform(-2.0, 2.0, size=9)  # slopes bounded by 4
        y = PathRecord(times, vals)
        pair = apply_regulator(y, ConstantHazard(0.0), dt)
        ref = skorokhod_reflection(y, pair.z.times)
        assert np.max(np.abs(pair.z.values - ref)) <= 5 * dt


def test_comparison_monotone_in_input():
    rng = substream(13, 0)
    times = np.arange(7.0)
    v1 = np.cumsum(rng.normal(0.0, 0.8, size=7))
    v2 = v1 + rng.uniform(0.0, 1.0, size=7)
    z1 = apply_regulator(PathRecord(times, v1), ConstantHazard(1.0), 1e-3).z
    z2 = apply_regulator(PathRecord(times, v2), ConstantHazard(1.0), 1e-3).z
    assert np.all(z1.values <= z2.values + 1e-12)


def test_grid_convergence_first_order():
    times = np.arange(6.0)
    vals = np.array([1.0, 2.5, 0.2, 1.8, -0.5, 1.0])
    y = PathRecord(times, vals)
    r_coarse = apply_regulator(y, LinearHazard(1.0), 2e-3).residual
    r_fine = apply_regulator(y, LinearHazard(1.0), 1e-3).residual
    assert r_fine <= 0.65 * r_coarse


def test_discrete_complementarity():
    rng = substream(14, 0)
    times = np.arange(9.0)
    vals = np.cumsum(rng.normal(-0.3, 1.0, size=9))
    pair = apply_regulator(PathRecord(times, vals), ConstantHazard(0.5), 1e-3)
    dl = np.diff(pair.l.values)
    comp = float(np.sum(pair.z.values[1:] * dl))
    assert pair.l.values[-1] > 0.0
    assert comp <= 1e-6 * pair.l.values[-1]


def test_step_paths_apply_jumps_atomically():
    y = PathRecord(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 2.0]), "step")
    pair = apply_regulator(y, ConstantHazard(0.0), 0.5)
    # value jumps to 2 at the grid point carrying t=1 and stays
    grid = pair.z.times
    assert np.all(pair.z.values[grid < 1.0] == 0.0)
    assert np.all(pair.z.values[grid >= 1.0] == 2.0)


def test_lipschitz_zero_hazard_bounded_by_two():
    rng = substream(321, 3)
    est = estimate_lipschitz(ConstantHazard(0.0), 200, 10.0, 0.01, rng)
    assert 0.5 < est <= 2.0 + 1e-9


def test_lipschitz_skips_identical_path_pairs():
    class ZeroRng:
        def normal(self, loc, scale, size):
            return np.zeros(size)

    est = estimate_lipschitz(ConstantHazard(0.0), 3, 5.0, 0.01, ZeroRng())
    assert est == 0.0


def test_lipschitz_pinned_regression_value():
    rng = substream(321, 4)
    est = estimate_lipschitz(ConstantHazard(1.0), 1000, 10.0, 0.01, rng)
    assert est == pytest.approx(1.0090490843353463, abs=1e-9)


def test_drain_pure_ramp():
    res = drain_check([1.0, 2.0, 4.0], -1.0, ConstantHazard(0.0), 1e-3, delta=0.5)
    assert res.passed
    for x, hit in res.hit_times.items():
        assert hit == pytest.approx(x, abs=2e-3)
    assert res.d_hat == pytest.approx(1.0, abs=2e-3)


def test_drain_rejects_zero_drift_at_boundary():
    with pytest.raises(ConeConditionError, match="cone condition violated"):
        drain_check([1.0], 0.0, ConstantHazard(1.0), 1e-3, delta=0.1)


def test_drain_nonlinear_hazard_ratios_nonincreasing():
    res = drain_check([1.0, 2.0, 4.0, 8.0], -0.1, LinearHazard(1.0), 2e-3, delta=0.1)
    ratios = [res.hit_times[x] / x for x in sorted(res.hit_times)]
    assert all(math.isfinite(r) for r in ratios)
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))
    res2 = drain_check([1.0, 2.0, 4.0, 8.0], -0.1, LinearHazard(1.0), 1e-3, delta=0.1)
    for x in res.hit_times:
        assert res.hit_times[x] == pytest.approx(res2.hit_times[x], rel=0.01)


def test_dt_validation():
    y = PathRecord(np.array([0.0, 0.5, 5.0]), np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        apply_regulator(y, ConstantHazard(1.0), 0.6)
    with pytest.raises(ValueError):
        apply_regulator(y, ConstantHazard(1.0), -1.0)
    bad = PathRecord(np.array([0.0, 1.0]), np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        apply_regulator(bad, ConstantHazard(1.0), 0.1)


def test_path_record_csv_round_trip(tmp_path):
    y = PathRecord(np.array([0.0, 1.0, 2.5]), np.array([0.5, -1.25, 3.75]))
    f = tmp_path / "path.csv"
    y.write_csv(f)
    again = PathRecord.read_csv(f)
    assert np.array_equal(again.times, y.times)
    assert np.array_equal(again.values, y.values)
