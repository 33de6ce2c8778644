"""Product integration of the weakly singular inner integral and the outer
finite-difference derivative.

On each subinterval the order d, the factor f/Gamma(n-d) and the kernel
exponent are frozen at one node while the power weight is integrated exactly,
so the singular endpoint is never sampled. Partitions are anchored at the
evaluation point: subintervals have width h counted back from it, and only the
one touching the far end of the interval may be shorter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BandCrossingError, ExponentError, PoleGuardError, ResolutionError
from .fields import GridFunction
from .special import rgamma

__all__ = [
    "QuadratureConfig",
    "kernel_moment",
    "inner_integral",
    "singular_convolve",
    "outer_derivative",
    "STENCIL_HALF_WIDTH",
]

STENCIL_HALF_WIDTH = {"central2": 1, "central4": 2}


@dataclass(frozen=True)
class QuadratureConfig:
    n_points: int = 4097
    freeze_rule: str = "midpoint"
    outer_stencil: str = "central2"
    outer_step_factor: float = 1.0
    pole_guard: float = 1e-9

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 9:
            raise ValueError("n_points must be an integer >= 9")
        if self.freeze_rule not in ("midpoint", "left"):
            raise ValueError("freeze_rule must be 'midpoint' or 'left'")
        if self.outer_stencil not in STENCIL_HALF_WIDTH:
            raise ValueError("outer_stencil must be 'central2' or 'central4'")
        if not self.outer_step_factor > 0:
            raise ValueError("outer_step_factor must be > 0")
        if not 0 < self.pole_guard < 0.5:
            raise ValueError("pole_guard must lie in (0, 0.5)")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def half_width(self):
        return STENCIL_HALF_WIDTH[self.outer_stencil]


def kernel_moment(t, lower, upper, beta):
    """Exact integral of ``(t - s)**(-beta)`` for s over ``[lower, upper]``.

    Requires ``lower < upper <= t`` and ``beta < 1``.

    >>> kernel_moment(1.0, 0.0, 1.0, 0.9)
    10.000000000000002
    """
    if not beta < 1:
        raise ExponentError(f"kernel exponent beta={beta} >= 1 is not integrable")
    if not lower < upper <= t:
        raise ValueError("kernel_moment requires lower < upper <= t")
    near = t - upper
    width = upper - lower
    return float(kernels.moments(np.array([near]), width, 1.0 - beta)[0])


def _check_band(d, n, guard):
    gam = n - d
    if n >= 1 and np.any(d < n - 1):
        raise BandCrossingError(f"order {d.min()} left band n={n}")
    if np.any(gam <= 0):
        raise BandCrossingError(f"order {d.max()} left band n={n}")
    if np.any(gam < guard):
        raise PoleGuardError(
            f"order within {guard:g} of the Gamma pole at d={n} (min n-d={gam.min():.3g})"
        )
    return gam


def inner_integral(f, d_field, end, tau, h, n, side, cfg, gamma_inside=True):
    """Frozen-exponent quadrature of the inner integral at ``tau``.

    ``side=+1`` integrates over ``[end, tau]`` with kernel ``(tau - s)``;
    ``side=-1`` over ``[tau, end]`` with kernel ``(s - tau)``. Width-h
    subintervals are laid out from ``tau`` toward ``end``. With
    ``gamma_inside=False`` the 1/Gamma factor is left out (caller applies
    it once, for constant order).
    """
    length = side * (tau - end)
    if length <= 0:
        return 0.0
    m = max(int(math.ceil(length / h - 1e-9)), 1)
    near = np.arange(m) * h
    width = np.full(m, h)
    width[-1] = length - near[-1]
    near_pos = tau - side * near
    far_pos = tau - side * (near + width)
    far_pos[-1] = end
    if cfg.freeze_rule == "midpoint":
        node = tau - side * (near + 0.5 * width)
    else:
        node = far_pos
    dvals = d_field(node)
    gam = _check_band(dvals, n, cfg.pole_guard)
    weights = f.freeze(near_pos, far_pos, cfg.freeze_rule)
    if gamma_inside:
        weights = weights * rgamma(gam)
    return kernels.moment_sum(weights, near, width, gam)


def singular_convolve(f, d_field, a, t, n, cfg=None):
    """Inner integral of the left operator at ``t`` on an ``n_points`` grid of [a, t].

    Sums ``f(s*)/Gamma(n - d(s*)) * kernel_moment(t, s_j, s_j+1, d(s*) - n + 1)``
    over the subintervals, with ``s*`` picked by ``cfg.freeze_rule``.
    """
    cfg = cfg or QuadratureConfig()
    if not a < t:
        raise ValueError("singular_convolve requires a < t")
    h = (t - a) / (cfg.n_points - 1)
    return inner_integral(f, d_field, a, t, h, n, +1, cfg)


# -- outer derivative ----------------------------------------------------------

_ONE_SIDED = {
    "central2": (np.array([-3.0, 4.0, -1.0]) / 2.0,),
    "central4": (
        np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
        np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
    ),
}


def _first_derivative(v, h, stencil):
    out = np.empty_like(v)
    if stencil == "central2":
        out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    else:
        out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    rev = v[::-1]
    for i, w in enumerate(_ONE_SIDED[stencil]):
        k = w.size
        out[i] = np.dot(w, v[:k]) / h
        out[v.size - 1 - i] = -np.dot(w, rev[:k]) / h
    return out


def outer_derivative(g, n, cfg=None):
    """n-th derivative of a grid function by repeated first differences.

    Interior nodes use the centred stencil of ``cfg.outer_stencil``; the
    ``half_width`` nodes at each end use one-sided stencils of the same
    order. The trust range shrinks by ``n * half_width`` at each end.
    """
    cfg = cfg or QuadratureConfig()
    if n < 0:
        raise ValueError("derivative order must be >= 0")
    if n == 0:
        return g
    w = cfg.half_width
    if g.n_points < max(2 * n + 5, 4 * w + 1):
        raise ResolutionError(
            f"{g.n_points} points are too few for a {cfg.outer_stencil} derivative of order {n}"
        )
    v = np.array(g.values)
    for _ in range(n):
        v = _first_derivative(v, g.h, cfg.outer_stencil)
    lo, hi = g.trust
    lo = min(lo + n * w, g.n_points)
    hi = max(hi - n * w, lo)
    return GridFunction(g.a, g.b, v, trust=(lo, hi))
