import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vofrac import kernels
from vofrac.errors import BandCrossingError, ExponentError, PoleGuardError, ResolutionError
from vofrac.fields import DimensionField, FunctionSpec, GridFunction
from vofrac.quadrature import QuadratureConfig, kernel_moment, outer_derivative, singular_convolve
from vofrac.special import gamma


@pytest.mark.parametrize("t, lo, hi, beta", [(1.0, 0.0, 1.0, 0.5), (2.0, 0.5, 1.5, 0.9), (3.0, 0.0, 2.99, -1.5), (1.0, 0.2, 0.4, 0.999999)])
def test_kernel_moment_vs_mpmath(t, lo, hi, beta):
    with mpmath.workdps(40):
        ref = float(mpmath.quad(lambda s: (t - s) ** (-beta), [lo, hi], method="tanh-sinh"))
    assert kernel_moment(t, lo, hi, beta) == pytest.approx(ref, rel=1e-12)


def test_kernel_moment_rejects_nonintegrable():
    with pytest.raises(ExponentError):
        kernel_moment(1.0, 0.0, 1.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-12, 1.5), st.floats(0.01, 5.0), st.floats(1e-9, 3.0))
def test_moments_are_additive(near, width, gam):
    # the integral over [near, near+width] splits at the midpoint
    half = 0.5 * width
    whole = kernels.moments(np.array([near]), width, gam)[0]
    parts = kernels.moments(np.array([near, near + half]), half, gam).sum()
    assert whole == pytest.approx(parts, rel=1e-12)


def test_moments_stable_near_zero_exponent():
    m = kernels.moments(np.array([0.5]), 1.0, 1e-12)[0]
    assert m == pytest.approx(math.log(1.5 / 0.5), rel=1e-9)


def test_backends_agree():
    rng = np.random.default_rng(7)
    n = 300
    wmid = rng.uniform(-1, 1, n)
    gam = rng.uniform(0.05, 0.95, n)
    np.testing.assert_allclose(
        kernels.volterra_grid_numba(wmid, gam, 0.01),
        kernels.volterra_grid_numpy(wmid, gam, 0.01),
        rtol=1e-12,
        atol=1e-14,
    )
    near = rng.uniform(0, 2, n)
    width = np.full(n, 0.1)
    np.testing.assert_allclose(kernels.moments_numba(near, width, gam), kernels.moments_numpy(near, width, gam), rtol=1e-13)
    assert kernels.moment_sum_numba(wmid, near, width, gam) == pytest.approx(
        kernels.moment_sum_numpy(wmid, near, width, gam), rel=1e-12
    )


def test_march_backends_agree():
    rng = np.random.default_rng(11)
    n = 200
    gam = rng.uniform(0.1, 0.9, n)
    rg = 1 / gamma(gam)
    rhs = rng.uniform(-1, 1, n + 1)
    u1, bad1 = kernels.march_bdf2_numpy(rg, gam, 0.005, rhs, 0.0)
    u2, bad2 = kernels.march_bdf2_numba(rg, gam, 0.005, rhs, 0.0)
    assert bad1 == bad2 == 0
    np.testing.assert_allclose(u1, u2, rtol=1e-10, atol=1e-12)


def test_dispatch_follows_flag(backend):
    wmid = np.linspace(0.1, 1.0, 50)
    gam = np.full(50, 0.5)
    expected = kernels.volterra_grid_numpy(wmid, gam, 0.02)
    np.testing.assert_allclose(kernels.volterra_grid(wmid, gam, 0.02), expected, rtol=1e-12)


def test_singular_convolve_integral_of_constant():
    # d = -1: the inner integral of 1 over [0, t] with 1/Gamma(1) is t
    cfg = QuadratureConfig(n_points=33)
    d = DimensionField.constant(-1.0)
    val = singular_convolve(FunctionSpec.power(0.0), d, 0.0, 2.0, 0, cfg)
    assert val == pytest.approx(2.0, rel=1e-14)


def test_singular_convolve_power_exact_for_linear_frozen():
    # weak singularity, f = 1: moment integration is exact regardless of N
    cfg = QuadratureConfig(n_points=9)
    d = DimensionField.constant(0.4)
    val = singular_convolve(FunctionSpec.power(0.0), d, 0.0, 1.0, 1, cfg)
    assert val == pytest.approx(1.0 / (0.6 * gamma(0.6)), rel=1e-13)


def test_band_checks():
    cfg = QuadratureConfig(n_points=17)
    d = DimensionField.expression("0.5+t", 0.0, 0.4, n_points=17)
    with pytest.raises(BandCrossingError):
        singular_convolve(FunctionSpec.power(1.0), d, 0.0, 0.4, 2, cfg)
    close = DimensionField.constant(1.0 - 1e-12)
    with pytest.raises(PoleGuardError):
        singular_convolve(FunctionSpec.power(1.0), close, 0.0, 1.0, 1, cfg)


@pytest.mark.parametrize("stencil, order", [("central2", 2), ("central4", 4)])
def test_outer_derivative_order(stencil, order):
    cfg = QuadratureConfig(outer_stencil=stencil)
    errs = []
    for n in (41, 81):
        g = GridFunction.sample(np.sin, 0.0, 1.0, n)
        d = outer_derivative(g, 1, cfg)
        lo, hi = d.trust
        errs.append(np.max(np.abs(d.values - np.cos(g.t))))
    assert math.log2(errs[0] / errs[1]) > order - 0.3


def test_outer_derivative_trust_and_resolution():
    cfg = QuadratureConfig(outer_stencil="central4")
    g = GridFunction.sample(np.exp, 0.0, 1.0, 33)
    d2 = outer_derivative(g, 2, cfg)
    assert d2.trust == (4, 29)
    lo, hi = d2.trust
    np.testing.assert_allclose(d2.values[lo:hi], np.exp(g.t[lo:hi]), rtol=1e-5)
    with pytest.raises(ResolutionError):
        outer_derivative(GridFunction.sample(np.exp, 0, 1, 7), 2, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(n_points=2)
    with pytest.raises(ValueError):
        QuadratureConfig(freeze_rule="right")
    with pytest.raises(ValueError):
        QuadratureConfig(outer_stencil="central6")


@pytest.mark.parametrize("flag, expected", [("0", "False"), ("off", "False"), ("1", "True")])
def test_env_flag_selects_backend(flag, expected):
    import os
    import subprocess
    import sys

    from vofrac import _accel

    if expected == "True" and not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    env = dict(os.environ, VOFRAC_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from vofrac import _accel; print(_accel.USE_NUMBA)"],
        capture_output=True, text=True, env=env, check=True,
    ).stdout.strip()
    assert out == expected
