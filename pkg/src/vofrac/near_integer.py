"""Near-integer approximations of the variable-order operator.

For orders ``d = 1 - eps(t)`` and ``d = 1 + eps(t)`` with small ``eps`` the
operator is replaced by ordinary derivatives carrying a regularization
parameter ``alpha``. Every approximation here is affine in ``alpha``, so
calibrating against the direct operator is a one-line least-squares solve.

Inner derivatives are numeric (central differences).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError, SingularCalibration
from .expr import Expr
from .fields import DimensionField, ScalarField
from .operators import OperatorSpec, gfd_left
from .special import digamma, gamma

__all__ = [
    "EpsilonField",
    "ApproxComparison",
    "CovariantForm",
    "approx_below_one",
    "approx_above_one",
    "approx_log_form",
    "affine_parts",
    "fit_alpha",
    "compare_approx",
    "calibrate_alpha",
    "covariant_form",
    "order_field",
]

CALIBRATION_POINTS = 33
_EPS_BOUND = 0.5


@dataclass(frozen=True)
class EpsilonField:
    """Small order offset eps(t), regularization sign ``sign_a`` and ``alpha``."""

    eps: ScalarField
    sign_a: int = -1
    alpha: float = 1.0

    def __post_init__(self):
        if self.sign_a not in (1, -1):
            raise ValueError("sign_a must be +1 or -1")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if self.eps.kind == "constant" and not abs(self.eps.value) < _EPS_BOUND:
            raise DomainError(f"|eps| must stay below {_EPS_BOUND}")

    @classmethod
    def constant(cls, value, sign_a=-1, alpha=1.0):
        return cls(ScalarField.constant(value), sign_a, alpha)

    @classmethod
    def expression(cls, src, sign_a=-1, alpha=1.0, var="t"):
        return cls(ScalarField.expression(src, var=var), sign_a, alpha)

    def __call__(self, t):
        vals = self.eps(t)
        if np.any(np.abs(vals) >= _EPS_BOUND):
            raise DomainError(f"|eps| reaches {np.abs(vals).max():.3g}; must stay below {_EPS_BOUND}")
        return vals


@dataclass(frozen=True)
class ApproxComparison:
    t_grid: np.ndarray
    approx: np.ndarray
    direct: np.ndarray
    abs_err: np.ndarray
    max_rel_err: float
    alpha_used: float
    trusted: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            "t_grid": self.t_grid.tolist(),
            "approx": self.approx.tolist(),
            "direct": self.direct.tolist(),
            "abs_err": self.abs_err.tolist(),
            "max_rel_err": float(self.max_rel_err),
            "alpha_used": float(self.alpha_used),
        }


class CovariantForm(NamedTuple):
    A: float
    B: float
    value: float


def _step(t):
    # power of two near cbrt(machine eps) * scale, so t +- h is exact
    return np.exp2(np.round(np.log2(6e-6 * np.maximum(1.0, np.abs(t)))))


def _ddt(fn, t):
    t = np.asarray(t, dtype=float)
    h = _step(t)
    return (fn(t + h) - fn(t - h)) / (2.0 * h)


def affine_parts(f, eps, t, which):
    """``(base, coef)`` with the approximation equal to ``base + alpha * coef``.

    ``which='below'``: ``f' + sign * d/dt[alpha eps f / Gamma(1 + eps)]``;
    ``which='above'``: ``d/dt[f / Gamma(1 - eps)] + sign * d/dt[alpha eps f / Gamma(1 - eps)]``.
    """
    sign = eps.sign_a
    if which == "below":
        base = _ddt(f, t)
        coef = sign * _ddt(lambda s: eps(s) * f(s) / gamma(1.0 + eps(s)), t)
    elif which == "above":
        base = _ddt(lambda s: f(s) / gamma(1.0 - eps(s)), t)
        coef = sign * _ddt(lambda s: eps(s) * f(s) / gamma(1.0 - eps(s)), t)
    else:
        raise ValueError("which must be 'below' or 'above'")
    return base, coef


def _scalar_or_array(t, out):
    return float(out) if np.ndim(t) == 0 else out


def approx_below_one(f, eps, t):
    """Approximation for order ``1 - eps``: ``f' + sign_a * d/dt[alpha eps f / Gamma(1+eps)]``."""
    base, coef = affine_parts(f, eps, t, "below")
    return _scalar_or_array(t, base + eps.alpha * coef)


def approx_above_one(f, eps, t):
    """Approximation for order ``1 + eps`` with eps > 0."""
    base, coef = affine_parts(f, eps, t, "above")
    return _scalar_or_array(t, base + eps.alpha * coef)


def approx_log_form(f, eps, t, t0):
    """Large-time form with ``alpha = ln t0``: ``f' + d/dt[alpha eps f / Gamma(1+eps)]``.

    Only meaningful for ``t`` close to ``t0`` relative to ``t0``; that is
    not checked. ``t0 <= 1`` gives a non-positive alpha and a RuntimeWarning.
    """
    if not t0 > 0:
        raise DomainError("t0 must be positive (alpha = ln t0)")
    if t0 <= 1:
        warnings.warn(f"t0={t0} <= 1 gives alpha = ln t0 <= 0", RuntimeWarning, stacklevel=2)
    alpha = math.log(t0)
    pos = replace(eps, sign_a=1)
    base, coef = affine_parts(f, pos, t, "below")
    return _scalar_or_array(t, base + alpha * coef)


def order_field(eps, which, lo, hi, n_points=4097):
    """DimensionField for ``1 - eps`` (below) or ``1 + eps`` (above)."""
    sf = eps.eps
    sgn = -1.0 if which == "below" else 1.0
    if sf.kind == "constant":
        return DimensionField.constant(1.0 + sgn * sf.value)
    if sf.kind == "tabulated":
        return DimensionField.tabulated(sf.nodes, 1.0 + sgn * sf.table)
    op = "-" if sgn < 0 else "+"
    node = Expr(op, (Expr("num", (1.0,)), sf.expr), f"1 {op} ({sf.expr})")
    field_ = ScalarField("expression", expr=node, var=sf.var, params=sf.params)
    return DimensionField(field_, lo, hi, n_samples=10 * n_points + 1)


def _direct_spec(eps, which, window, spec):
    lo, hi = window
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    if spec is None:
        spec = OperatorSpec(a=0.0, b=1.5 * hi)
    if not (spec.a < lo and hi < spec.b):
        raise ValueError(f"window {window} must lie inside (a, b) = ({spec.a}, {spec.b})")
    dfield = order_field(eps, which, spec.a, spec.b, spec.cfg.n_points)
    return replace(spec, side="left", d_field=dfield)


def fit_alpha(base, coef, target):
    """Least-squares alpha minimising ``|base + alpha * coef - target|``."""
    base, coef, target = (np.asarray(v, dtype=float) for v in (base, coef, target))
    scale = max(float(np.linalg.norm(base)), float(np.linalg.norm(target)), 1e-300)
    denom = float(np.dot(coef, coef))
    if not denom > (1e-12 * scale) ** 2:
        raise SingularCalibration("alpha does not enter the approximation (eps is zero on the window)")
    return float(np.dot(coef, target - base)) / denom


def _compare(f, eps, window, which, spec, alpha=None, n_grid=CALIBRATION_POINTS):
    spec = _direct_spec(eps, which, window, spec)
    t = np.linspace(window[0], window[1], n_grid)
    results = [gfd_left(f, spec, float(p)) for p in t]
    direct = np.array([r.value for r in results])
    trusted = np.array([r.trust == "interior" for r in results])
    base, coef = affine_parts(f, eps, t, which)
    if alpha is None:
        alpha = fit_alpha(base, coef, direct)
    approx = base + alpha * coef
    abs_err = np.abs(approx - direct)
    rel = abs_err[trusted] / np.abs(direct[trusted])
    max_rel = float(rel.max()) if rel.size else math.nan
    return ApproxComparison(t, approx, direct, abs_err, max_rel, float(alpha), trusted)


def compare_approx(f, eps, window, which, spec=None, alpha=None, n_grid=CALIBRATION_POINTS):
    """Approximation vs direct left operator on ``n_grid`` points of ``window``.

    ``alpha=None`` calibrates it; otherwise ``eps.alpha`` is ignored in
    favour of the given value.
    """
    return _compare(f, eps, window, which, spec, alpha, n_grid)


def calibrate_alpha(f, eps, window, which, spec=None):
    """Least-squares alpha against the direct operator on a 33-point window grid.

    Returns ``(alpha, ApproxComparison)``. Raises SingularCalibration when
    the alpha column vanishes (eps identically zero).
    """
    report = _compare(f, eps, window, which, spec)
    return report.alpha_used, report


def covariant_form(f, eps, t):
    """Coefficients of ``A f' - B f`` for order ``1 + eps``; ``a = eps.sign_a``.

    ``A = 1/Gamma(1-eps) + a eps`` and
    ``B = (1 + a eps) Gamma(1-eps)**-2 dGamma(1-eps)/dt - a deps/dt``, with
    ``dGamma(1-eps)/dt = -Gamma(1-eps) psi(1-eps) deps/dt``.
    """
    a = eps.sign_a
    t = float(t)
    e = float(eps(np.array([t]))[0])
    de = float(_ddt(eps, np.array([t]))[0])
    g = gamma(1.0 - e)
    dg = -g * digamma(1.0 - e) * de
    A = 1.0 / g + a * e
    B = (1.0 + a * e) * dg / (g * g) - a * de
    fp = float(_ddt(f, np.array([t]))[0])
    fv = float(f(np.array([t]))[0])
    return CovariantForm(A, B, A * fp - B * fv)
