"""Independent reference values used only by the tests."""
import math

import numpy as np
from scipy import integrate, special


def power_rule(p, d, t):
    """Left operator of s**p from 0, evaluated at t."""
    return special.gamma(p + 1) / special.gamma(p + 1 - d) * t ** (p - d)


def grunwald_letnikov(f, d, a, t, m):
    """Grünwald-Letnikov sum with m steps on [a, t], Richardson-extrapolated once."""

    def gl(mm):
        h = (t - a) / mm
        k = np.arange(mm + 1)
        w = np.empty(mm + 1)
        w[0] = 1.0
        w[1:] = np.cumprod(1.0 - (d + 1.0) / k[1:])
        return float(np.dot(w, f(t - k * h))) / h ** d

    return 2.0 * gl(2 * m) - gl(m)


def _inner_left(f, dfun, a, tau):
    # (tau-s)^(-d(s)) = (tau-s)^(-d(tau)) * (tau-s)^(d(tau)-d(s)); quad takes the first as weight
    dt = dfun(tau)

    def smooth(s):
        u = tau - s
        # u**(d(tau)-d(s)) -> 1 as s -> tau; quadpack may also land a rounding error past tau
        corr = u ** (dt - dfun(s)) if u > 0 else 1.0
        return corr * f(s) / special.gamma(1.0 - dfun(s))

    val, _ = integrate.quad(smooth, a, tau, weight="alg", wvar=(0.0, -dt), epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def variable_order_left(f, dfun, a, t, h=1e-3):
    """Left operator for orders inside (0, 1): quadrature plus a 4th-order central difference."""
    g = [_inner_left(f, dfun, a, t + k * h) for k in (-2, -1, 1, 2)]
    return (g[0] - 8.0 * g[1] + 8.0 * g[2] - g[3]) / (12.0 * h)


def variable_order_right(f, dfun, b, t, h=1e-3):
    """Right operator via the reflection s -> -s of the left one."""
    return variable_order_left(lambda s: f(-s), lambda s: dfun(-s), -b, -t, h)
