import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vofrac.errors import BandCrossingError, DomainError
from vofrac.fields import (
    DimensionField,
    FunctionSpec,
    GridFunction,
    ScalarField,
    band_of,
    order_index,
)


@pytest.mark.parametrize(
    "lo, hi, n",
    [(-0.7, -0.1, 0), (0.0, 0.9, 1), (0.25, 0.75, 1), (1.0, 1.5, 2), (2.3, 2.9, 3), (-3.0, -2.0, 0)],
)
def test_band_of(lo, hi, n):
    assert band_of(lo, hi) == n


@pytest.mark.parametrize("lo, hi", [(-0.1, 0.2), (0.5, 1.0), (0.9, 1.1), (1.5, 2.0)])
def test_band_crossing(lo, hi):
    with pytest.raises(BandCrossingError):
        band_of(lo, hi)


@given(st.floats(-5, 5), st.floats(0, 0.999))
def test_band_contains_range(lo, width):
    hi = lo + width
    try:
        n = band_of(lo, hi)
    except BandCrossingError:
        return
    if n == 0:
        assert hi < 0
    else:
        assert n - 1 <= lo <= hi < n


def test_expression_field_band_and_range():
    d = DimensionField.expression("1-0.05*exp(-t)", 0.0, 2.0, n_points=257)
    assert d.band == 1
    assert d.d_min == pytest.approx(0.95)
    assert order_index(d) == 1
    with pytest.raises(BandCrossingError):
        DimensionField.expression("t", 0.0, 2.0, n_points=65)


def test_dimension_field_parse_and_integer_order():
    assert DimensionField.parse("2").integer_order == 2
    assert DimensionField.parse("0.5").integer_order is None
    assert DimensionField.parse("0.5+0.1*t", 0, 1).kind == "expression"
    assert not DimensionField.constant(-1.0).integer_order
    assert DimensionField.constant(0.0).integer_order == 0


def test_tabulated_field_interpolates_and_clamps():
    sf = ScalarField.tabulated([0.0, 1.0, 2.0], [0.2, 0.4, 0.3])
    np.testing.assert_allclose(sf(np.array([-1.0, 0.5, 1.5, 5.0])), [0.2, 0.3, 0.35, 0.3])
    assert DimensionField.tabulated([0.0, 1.0, 2.0], [0.2, 0.4, 0.3]).band == 1


def test_grid_function_is_read_only_and_indexable():
    g = GridFunction(0.0, 1.0, np.linspace(0, 1, 11) ** 2)
    with pytest.raises(ValueError):
        g.values[0] = 3.0
    assert g.h == pytest.approx(0.1)
    assert g.index_of(np.array([0.3]))[0] == 3
    with pytest.raises(DomainError):
        g.index_of(np.array([0.35]))
    with pytest.raises(ValueError):
        GridFunction(0.0, 1.0, [0.0, np.nan, 1.0])


@pytest.mark.parametrize(
    "spec, x, expected",
    [
        (FunctionSpec.power(2.0), 3.0, 9.0),
        (FunctionSpec.power(0.5, 2.0), 4.0, 4.0),
        (FunctionSpec.catalog("polynomial", 1.0, 0.0, 3.0), 2.0, 13.0),
        (FunctionSpec.catalog("exp", 2.0), 0.5, np.e),
        (FunctionSpec.catalog("sin"), np.pi / 2, 1.0),
        (FunctionSpec.expression("t^3-t"), 2.0, 6.0),
    ],
)
def test_function_spec_values(spec, x, expected):
    assert float(spec(np.array([x]))[0]) == pytest.approx(expected, rel=1e-14)


def test_sampled_function_only_on_nodes():
    g = GridFunction.sample(np.sin, 0.0, 1.0, 11)
    f = FunctionSpec.sampled(g)
    assert float(f(np.array([0.5]))[0]) == pytest.approx(np.sin(0.5))
    with pytest.raises(DomainError):
        f(np.array([0.55]))
    assert float(f.freeze(np.array([0.4]), np.array([0.5]), "midpoint")[0]) == pytest.approx(
        0.5 * (np.sin(0.4) + np.sin(0.5))
    )


def test_freeze_rules():
    f = FunctionSpec.power(1.0)
    assert f.freeze(np.array([1.0]), np.array([0.8]), "midpoint")[0] == pytest.approx(0.9)
    assert f.freeze(np.array([1.0]), np.array([0.8]), "left")[0] == pytest.approx(0.8)


def test_catalog_domain_error():
    with pytest.raises(DomainError):
        FunctionSpec.power(0.5)(np.array([-1.0]))
