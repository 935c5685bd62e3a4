import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavyq import (
    ConstantHazard,
    HazardRangeError,
    LinearHazard,
    PiecewiseLinearHazard,
    PolynomialHazard,
    TabulatedHazard,
    cumulative_hazard,
    double_cumulative_hazard,
    hazard_from_config,
    hazard_to_config,
)
from heavyq import _hazardcore as hc

FORMS = [
    ConstantHazard(1.5),
    LinearHazard(0.8),
    PolynomialHazard(coeffs=(0.5, 0.0, 3.0)),
    PiecewiseLinearHazard(knots=((0.0, 0.2), (1.0, 1.0), (3.0, 0.5))),
    TabulatedHazard(grid=(0.0, 0.5, 2.0, 4.0), values=(0.1, 0.9, 0.9, 2.0)),
]


@pytest.mark.parametrize(
    "h,x,expected",
    [
        (ConstantHazard(1.0), 3.0, 3.0),
        (LinearHazard(1.0), 2.0, 2.0),
        (PolynomialHazard(coeffs=(0.0, 0.0, 3.0)), 2.0, 8.0),
    ],
)
def test_cumulative_hazard_closed_forms(h, x, expected):
    assert cumulative_hazard(h, x) == pytest.approx(expected, abs=1e-12)


def test_cumulative_matches_numeric_integral():
    grid = np.linspace(0.0, 3.5, 8)
    for h in FORMS:
        for x in grid:
            fine = np.linspace(0.0, x, 20_001)
            numeric = np.trapezoid(h.value(fine), fine) if x > 0 else 0.0
            assert cumulative_hazard(h, x) == pytest.approx(numeric, abs=1e-6)
            numeric_g = (
                np.trapezoid([cumulative_hazard(h, u) for u in fine], fine) if x > 0 else 0.0
            )
            assert double_cumulative_hazard(h, x) == pytest.approx(numeric_g, abs=1e-6)


def test_cumulative_nondecreasing_and_zero_at_origin():
    u = np.linspace(0.0, 4.0, 201)
    for h in FORMS:
        hv = np.atleast_1d(h.value(u))
        cv = np.atleast_1d(h.cumulative(u))
        assert np.all(hv >= 0.0)
        assert cv[0] == 0.0
        assert np.all(np.diff(cv) >= -1e-12)


def test_growth_bound_defaults_hold():
    for h in FORMS:
        assert h.growth_bound_holds()


def test_tabulated_out_of_range():
    h = TabulatedHazard(grid=(0.0, 1.0), values=(1.0, 2.0))
    with pytest.raises(HazardRangeError, match="hazard evaluation out of range"):
        h.cumulative(1.5)
    with pytest.raises(HazardRangeError, match="hazard evaluation out of range"):
        h.value(2.0)


def test_inverse_cumulative_round_trip():
    y = np.linspace(0.0, 3.0, 31)
    for h in FORMS:
        ymax = h.cumulative(min(h.eval_range, 4.0)) * 0.95
        ys = y[y <= ymax]
        x = np.atleast_1d(h.inverse_cumulative(ys))
        assert np.max(np.abs(np.atleast_1d(h.cumulative(x)) - ys)) <= 1e-8


def test_numba_repr_matches_python():
    u = np.linspace(0.0, 3.9, 157)
    for h in FORMS:
        rep = h.numba_repr()
        for ui in u:
            assert hc.hz_value(*rep, ui) == pytest.approx(
                float(h.value(ui)), abs=1e-12, rel=1e-12
            )
            assert hc.hz_cumulative(*rep, ui) == pytest.approx(
                float(h.cumulative(ui)), abs=1e-12, rel=1e-12
            )
            assert hc.hz_double_cumulative(*rep, ui) == pytest.approx(
                float(h.double_cumulative(ui)), abs=1e-12, rel=1e-12
            )


def test_negative_hazards_rejected():
    with pytest.raises(ValueError):
        ConstantHazard(-1.0)
    with pytest.raises(ValueError):
        TabulatedHazard(grid=(0.0, 1.0), values=(0.5, -0.1))
    with pytest.raises(ValueError):
        PolynomialHazard(coeffs=(1.0, -10.0))


@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0))
@settings(max_examples=50, deadline=None)
def test_cumulative_monotone_property(a, b):
    lo, hi = min(a, b), max(a, b)
    for h in (LinearHazard(1.2), PiecewiseLinearHazard(knots=((0.0, 0.0), (2.0, 1.0)))):
        assert h.cumulative(hi) >= h.cumulative(lo) - 1e-12


def test_config_round_trip():
    for h in FORMS:
        assert hazard_from_config(hazard_to_config(h)) == h
