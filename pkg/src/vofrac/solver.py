"""Damped fixed-point solver for ``D^{d(f)} f = g`` with a solution-dependent order.

The order at each node is ``d = clamp(d0 + kappa * f)`` (or a clamped table
lookup in f), always inside band n = 1. Each sweep freezes the order from the
current iterate, solves the resulting linear problem by marching, and relaxes.

The left boundary is homogeneous: ``f(a) = 0``. The equation carries no
boundary data of its own, and this is the condition that makes the causal
marching well posed.

Discretization: node grid on [a, b]; the inner integral uses the midpoint-
frozen product rule of the quadrature module (values and orders at midpoints
by linear interpolation between nodes). The outer derivative is causal: a
first-order backward difference at node 1 and BDF2 from node 2 on, so row i
involves unknowns up to i only and the system is lower triangular.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BandCrossingError, PoleGuardError, ZeroPivot
from .fields import DimensionField, FunctionSpec, GridFunction
from .special import rgamma

__all__ = [
    "ModelProblem",
    "SolveReport",
    "apply_forward",
    "march_linear",
    "solve_fixed_point",
    "causal_derivative",
]

POLE_GUARD = 1e-9
TRUST_START = 2


@dataclass(frozen=True)
class ModelProblem:
    """``D^{d(f)}_{+,t} f = g`` on ``[a, b]`` with ``n_points`` nodes."""

    g: FunctionSpec
    a: float = 0.0
    b: float = 1.0
    n_points: int = 1025
    d_of_f: str = "affine"
    d0: float = 0.5
    kappa: float = 0.0
    clamp: tuple = (0.05, 0.95)
    table: tuple = None
    initial_guess: GridFunction = None
    omega: float = 0.5

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")
        lo, hi = self.clamp
        if not 0.0 < lo <= hi < 1.0:
            raise BandCrossingError(f"clamp {self.clamp} must lie inside (0, 1) to stay in band n=1")
        if self.n_points < 5:
            raise ValueError("n_points must be >= 5")
        if self.d_of_f not in ("affine", "tabulated"):
            raise ValueError("d_of_f must be 'affine' or 'tabulated'")
        if self.d_of_f == "tabulated":
            fv, dv = (np.asarray(x, dtype=float) for x in self.table)
            if fv.shape != dv.shape or fv.size < 2 or np.any(np.diff(fv) <= 0):
                raise ValueError("table needs increasing f values with matching d values")
        if not 0.0 < self.omega <= 1.0:
            raise ValueError("relaxation omega must lie in (0, 1]")
        if self.initial_guess is not None:
            ig = self.initial_guess
            if ig.n_points != self.n_points or ig.a != self.a or ig.b != self.b:
                raise ValueError("initial_guess must live on the problem grid")

    @property
    def nodes(self):
        return np.linspace(self.a, self.b, self.n_points)

    @property
    def h(self):
        return (self.b - self.a) / (self.n_points - 1)

    @property
    def is_linear(self):
        return self.d_of_f == "affine" and self.kappa == 0.0

    def order_of(self, f_values):
        if self.d_of_f == "affine":
            raw = self.d0 + self.kappa * np.asarray(f_values, dtype=float)
        else:
            raw = np.interp(f_values, *self.table)
        return np.clip(raw, *self.clamp)

    def rhs(self):
        return self.g(self.nodes)


@dataclass(frozen=True)
class SolveReport:
    solution: GridFunction
    residuals: np.ndarray
    iterations: int
    converged: bool
    d_final: GridFunction

    def to_dict(self):
        return {
            "t": self.solution.t.tolist(),
            "solution": self.solution.values.tolist(),
            "d_final": self.d_final.values.tolist(),
            "residuals": [float(r) for r in self.residuals],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


def _subinterval_orders(d_field, nodes):
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    d = d_field(mid)
    if np.any(d < 0) or np.any(d >= 1):
        raise BandCrossingError("solver orders must stay in [0, 1)")
    gam = 1.0 - d
    if np.any(gam < POLE_GUARD):
        raise PoleGuardError(f"order within {POLE_GUARD:g} of 1")
    return gam


def causal_derivative(values, h):
    """Backward first difference at node 1, BDF2 after; node 0 one-sided forward."""
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[1] = (v[1] - v[0]) / h
    out[2:] = (3.0 * v[2:] - 4.0 * v[1:-1] + v[:-2]) / (2.0 * h)
    return out


def _forward(values, d_field, a, b):
    nodes = np.linspace(a, b, values.size)
    h = (b - a) / (values.size - 1)
    gam = _subinterval_orders(d_field, nodes)
    wmid = rgamma(gam) * 0.5 * (values[:-1] + values[1:])
    inner = kernels.volterra_grid(wmid, gam, h)
    return GridFunction(a, b, causal_derivative(inner, h), trust=(TRUST_START, values.size))


def _order_grid(f, problem):
    return GridFunction(f.a, f.b, problem.order_of(f.values))


def apply_forward(f, problem):
    """``D^{d(f)} f`` on the problem grid, order frozen from ``f`` itself.

    Values at nodes 0 and 1 use lower-order one-sided differences; the
    returned trust range starts at node 2.
    """
    d_grid = _order_grid(f, problem)
    d_field = DimensionField.tabulated(d_grid.t, d_grid.values)
    return _forward(np.asarray(f.values), d_field, f.a, f.b)


def march_linear(d_field, g):
    """Solve ``D^{d} u = g`` on g's grid with ``u(a) = 0`` by forward substitution.

    Uses the same weights as :func:`apply_forward`, so marching a forward
    image recovers the input to rounding (for inputs with ``f(a) = 0``).
    """
    if d_field.band != 1:
        raise BandCrossingError(f"march_linear needs band n=1 (got n={d_field.band})")
    nodes = g.t
    gam = _subinterval_orders(d_field, nodes)
    u, bad = kernels.march_bdf2(rgamma(gam), gam, g.h, np.asarray(g.values), 0.0)
    if bad:
        raise ZeroPivot(f"diagonal weight underflowed at row {bad}; refine the grid or move d away from 1")
    if not np.all(np.isfinite(u)):
        raise ZeroPivot("marching produced non-finite values")
    return GridFunction(g.a, g.b, u)


def solve_fixed_point(problem, tol=1e-10, max_iter=50):
    """Damped fixed-point iteration; non-convergence is reported, not raised.

    Each step sets ``d_k = clamp(d0 + kappa f_k)``, marches
    ``D^{d_k} u = g`` and relaxes ``f_{k+1} = (1 - omega) f_k + omega u``.
    Stops when ``max|f_{k+1} - f_k| <= tol``. A problem whose order does not
    depend on f is solved by a single march.
    """
    if not tol > 0 or max_iter < 1:
        raise ValueError("need tol > 0 and max_iter >= 1")
    g = GridFunction(problem.a, problem.b, problem.rhs())
    if problem.initial_guess is not None:
        f = np.array(problem.initial_guess.values, dtype=float)
    else:
        f = np.zeros(problem.n_points)
    nodes = g.t
    omega = 1.0 if problem.is_linear else problem.omega
    residuals = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        d_vals = problem.order_of(f)
        u = march_linear(DimensionField.tabulated(nodes, d_vals), g).values
        f_next = (1.0 - omega) * f + omega * u
        res = float(np.max(np.abs(f_next - f)))
        residuals.append(res)
        f = f_next
        if res <= tol or (problem.is_linear and it == 1):
            converged = res <= tol or problem.is_linear
            break
    sol = GridFunction(problem.a, problem.b, f)
    return SolveReport(sol, np.array(residuals), it, converged, _order_grid(sol, problem))
