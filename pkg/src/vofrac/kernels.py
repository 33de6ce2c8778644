"""Hot loops of the product-integration scheme.

Every kernel exists twice: an ``@njit`` loop version and a vectorized
numpy version. The public names dispatch on ``_accel.USE_NUMBA``; the
``*_numba`` / ``*_numpy`` names are importable for testing and
benchmarking. Both paths agree to rounding, not bit-for-bit.

Moment of the power weight over one subinterval, with ``near`` the distance
of the subinterval's closer end from the singular point and ``gam = n - d``::

    M = ((near + width)**gam - near**gam) / gam

evaluated as ``near**gam * expm1(gam * log1p(width / near)) / gam`` to keep
relative accuracy when ``gam`` is small.
"""
import math

import numpy as np

from . import _accel
from ._accel import njit, prange

__all__ = [
    "moments",
    "moment_sum",
    "volterra_grid",
    "march_bdf2",
]


# -- subinterval moments ------------------------------------------------------

def moments_numpy(near, width, gam):
    near = np.asarray(near, dtype=float)
    width = np.asarray(width, dtype=float)
    gam = np.asarray(gam, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = near ** gam * np.expm1(gam * np.log1p(width / near)) / gam
    edge = width ** gam / gam
    return np.where(near > 0.0, inner, edge)


@njit(cache=True)
def _moment_scalar(near, width, gam):
    if near > 0.0:
        return near ** gam * math.expm1(gam * math.log1p(width / near)) / gam
    return width ** gam / gam


@njit(cache=True)
def moments_numba(near, width, gam):
    out = np.empty(near.shape[0])
    for j in range(near.shape[0]):
        out[j] = _moment_scalar(near[j], width[j], gam[j])
    return out


def moments(near, width, gam):
    near = np.ascontiguousarray(near, dtype=float)
    width = np.ascontiguousarray(np.broadcast_to(width, near.shape), dtype=float)
    gam = np.ascontiguousarray(np.broadcast_to(gam, near.shape), dtype=float)
    if _accel.USE_NUMBA:
        return moments_numba(near, width, gam)
    return moments_numpy(near, width, gam)


def moment_sum_numpy(weights, near, width, gam):
    return float(np.dot(weights, moments_numpy(near, width, gam)))


@njit(cache=True)
def moment_sum_numba(weights, near, width, gam):
    acc = 0.0
    for j in range(near.shape[0]):
        acc += weights[j] * _moment_scalar(near[j], width[j], gam[j])
    return acc


def moment_sum(weights, near, width, gam):
    """Sum of ``weights[j] * M(near[j], width[j], gam[j])``."""
    weights = np.ascontiguousarray(weights, dtype=float)
    near = np.ascontiguousarray(near, dtype=float)
    width = np.ascontiguousarray(np.broadcast_to(width, near.shape), dtype=float)
    gam = np.ascontiguousarray(np.broadcast_to(gam, near.shape), dtype=float)
    if _accel.USE_NUMBA:
        return moment_sum_numba(weights, near, width, gam)
    return moment_sum_numpy(weights, near, width, gam)


# -- all-node inner integral on a uniform grid ---------------------------------

def _log_tables(n):
    k = np.arange(n, dtype=float)
    logk = np.full(n, -np.inf)
    logk[1:] = np.log(k[1:])
    step = np.empty(n)
    step[0] = np.inf
    step[1:] = np.log1p(1.0 / k[1:])
    return logk, step


def _row_moments_numpy(i, gam, hg, logk, step):
    # moments of subintervals j < i seen from node i: near = (i-1-j) h
    g = gam[:i]
    k = (i - 1) - np.arange(i)
    out = np.empty(i)
    last = k == 0
    out[last] = hg[:i][last] / g[last]
    rest = ~last
    kr = k[rest]
    gr = g[rest]
    out[rest] = hg[:i][rest] * np.exp(gr * logk[kr]) * np.expm1(gr * step[kr]) / gr
    return out


def volterra_grid_numpy(wmid, gam, h):
    m = wmid.shape[0]
    hg = h ** gam
    logk, step = _log_tables(m + 1)
    out = np.zeros(m + 1)
    for i in range(1, m + 1):
        out[i] = np.dot(wmid[:i], _row_moments_numpy(i, gam, hg, logk, step))
    return out


@njit(cache=True, parallel=True)
def _volterra_grid_numba(wmid, gam, h, logk, step):
    m = wmid.shape[0]
    hg = np.empty(m)
    for j in range(m):
        hg[j] = h ** gam[j]
    out = np.zeros(m + 1)
    for i in prange(1, m + 1):
        acc = 0.0
        for j in range(i):
            k = i - 1 - j
            g = gam[j]
            if k == 0:
                mom = hg[j] / g
            else:
                mom = hg[j] * math.exp(g * logk[k]) * math.expm1(g * step[k]) / g
            acc += wmid[j] * mom
        out[i] = acc
    return out


def volterra_grid_numba(wmid, gam, h):
    logk, step = _log_tables(wmid.shape[0] + 1)
    return _volterra_grid_numba(wmid, gam, h, logk, step)


def volterra_grid(wmid, gam, h):
    """Inner integral at every node of a uniform grid.

    ``wmid[j]`` is the frozen integrand factor on subinterval j (already
    including 1/Gamma) and ``gam[j] = n - d`` there. Returns an array of
    length ``len(wmid) + 1`` whose entry i integrates from node 0 to node i.
    """
    wmid = np.ascontiguousarray(wmid, dtype=float)
    gam = np.ascontiguousarray(gam, dtype=float)
    if _accel.USE_NUMBA:
        return volterra_grid_numba(wmid, gam, float(h))
    return volterra_grid_numpy(wmid, gam, float(h))


# -- causal inversion (band n = 1) ---------------------------------------------

_TINY = 1e-300


def march_bdf2_numpy(rgam, gam, h, rhs, u0):
    m = gam.shape[0]
    n = m + 1
    hg = h ** gam
    logk, step = _log_tables(n)
    u = np.zeros(n)
    u[0] = u0
    inner = np.zeros(n)
    for i in range(1, n):
        coef = rgam[:i] * _row_moments_numpy(i, gam, hg, logk, step)
        diag = 0.5 * coef[i - 1]
        if not (diag > _TINY) or not np.isfinite(diag):
            return u, i
        partial = 0.5 * np.dot(coef, u[:i] + np.append(u[1:i], 0.0))
        if i == 1:
            target = h * rhs[1] + inner[0]
        else:
            target = (2.0 * h * rhs[i] + 4.0 * inner[i - 1] - inner[i - 2]) / 3.0
        u[i] = (target - partial) / diag
        inner[i] = partial + diag * u[i]
    return u, 0


@njit(cache=True)
def _march_bdf2_numba(rgam, gam, h, rhs, u0, logk, step):
    m = gam.shape[0]
    n = m + 1
    hg = np.empty(m)
    for j in range(m):
        hg[j] = h ** gam[j]
    u = np.zeros(n)
    u[0] = u0
    inner = np.zeros(n)
    for i in range(1, n):
        partial = 0.0
        diag = 0.0
        for j in range(i):
            k = i - 1 - j
            g = gam[j]
            if k == 0:
                mom = hg[j] / g
            else:
                mom = hg[j] * math.exp(g * logk[k]) * math.expm1(g * step[k]) / g
            c = rgam[j] * mom
            if j < i - 1:
                partial += 0.5 * c * (u[j] + u[j + 1])
            else:
                partial += 0.5 * c * u[j]
                diag = 0.5 * c
        if not (diag > _TINY) or not np.isfinite(diag):
            return u, i
        if i == 1:
            target = h * rhs[1] + inner[0]
        else:
            target = (2.0 * h * rhs[i] + 4.0 * inner[i - 1] - inner[i - 2]) / 3.0
        u[i] = (target - partial) / diag
        inner[i] = partial + diag * u[i]
    return u, 0


def march_bdf2_numba(rgam, gam, h, rhs, u0):
    logk, step = _log_tables(gam.shape[0] + 1)
    return _march_bdf2_numba(rgam, gam, h, rhs, u0, logk, step)


def march_bdf2(rgam, gam, h, rhs, u0=0.0):
    """Forward substitution for the causal (BDF2) discretization.

    Solves ``B[I](t_i) = rhs[i]`` for i >= 1, where I is the
    midpoint-frozen inner integral of u with subinterval factors ``rgam``
    (1/Gamma) and exponents ``gam``, and B is the backward difference
    (first order at node 1, BDF2 afterwards). Returns ``(u, bad_row)``;
    ``bad_row`` is 0 on success or the first row whose pivot underflowed.
    """
    rgam = np.ascontiguousarray(rgam, dtype=float)
    gam = np.ascontiguousarray(gam, dtype=float)
    rhs = np.ascontiguousarray(rhs, dtype=float)
    if _accel.USE_NUMBA:
        return march_bdf2_numba(rgam, gam, float(h), rhs, float(u0))
    return march_bdf2_numpy(rgam, gam, float(h), rhs, float(u0))
