"""Grid functions, scalar fields, dimension (order) fields and function specs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from .errors import BandCrossingError, DomainError
from .expr import Expr, parse_expression

__all__ = [
    "GridFunction",
    "ScalarField",
    "DimensionField",
    "FunctionSpec",
    "order_index",
    "band_of",
]

INTEGER_TOL = 1e-14


def _frozen_array(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridFunction:
    """Uniform samples ``values[k] = f(a + k*h)`` on ``[a, b]``.

    ``trust`` is the half-open index range ``(lo, hi)`` of nodes with full
    stated accuracy; it defaults to every node.
    """

    a: float
    b: float
    values: np.ndarray
    trust: tuple = None

    def __post_init__(self):
        vals = _frozen_array(self.values)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("GridFunction needs a 1-D array of at least 2 values")
        if not self.a < self.b:
            raise ValueError(f"GridFunction requires a < b (got a={self.a}, b={self.b})")
        if not np.all(np.isfinite(vals)):
            raise DomainError("GridFunction values must be finite")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "values", vals)
        lo, hi = self.trust if self.trust is not None else (0, vals.size)
        if not 0 <= lo <= hi <= vals.size:
            raise ValueError(f"bad trust range {self.trust}")
        object.__setattr__(self, "trust", (int(lo), int(hi)))

    @property
    def n_points(self):
        return self.values.size

    @property
    def h(self):
        return (self.b - self.a) / (self.n_points - 1)

    @property
    def t(self):
        return np.linspace(self.a, self.b, self.n_points)

    @property
    def trusted(self):
        lo, hi = self.trust
        return self.t[lo:hi], self.values[lo:hi]

    def index_of(self, points, tol=1e-7):
        """Node indices for ``points``; DomainError if any is off-grid."""
        pos = (np.asarray(points, dtype=float) - self.a) / self.h
        idx = np.rint(pos)
        if np.any(np.abs(pos - idx) > tol) or np.any(idx < 0) or np.any(idx > self.n_points - 1):
            raise DomainError("sampled function evaluated off its grid nodes")
        return idx.astype(np.intp)

    @classmethod
    def sample(cls, fn, a, b, n_points):
        t = np.linspace(a, b, n_points)
        return cls(a, b, np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape))


@dataclass(frozen=True)
class ScalarField:
    """A real function of one coordinate: constant, expression or table.

    Expressions vary along ``var`` ("t" or "x"); the other variable is held at
    its value in ``params`` (default 0). Tables interpolate linearly and clamp
    to the end values outside their abscissae.
    """

    kind: str
    value: float = 0.0
    expr: Expr = None
    nodes: np.ndarray = None
    table: np.ndarray = None
    var: str = "t"
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "expression", "tabulated"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.var not in ("t", "x"):
            raise ValueError("var must be 't' or 'x'")
        if self.kind == "constant" and not math.isfinite(self.value):
            raise DomainError("constant field must be finite")
        if self.kind == "tabulated":
            nodes = _frozen_array(self.nodes)
            table = _frozen_array(self.table)
            if nodes.shape != table.shape or nodes.size < 2:
                raise ValueError("tabulated field needs matching node/value arrays (>= 2)")
            if np.any(np.diff(nodes) <= 0):
                raise ValueError("tabulated abscissae must be strictly increasing")
            object.__setattr__(self, "nodes", nodes)
            object.__setattr__(self, "table", table)

    @classmethod
    def constant(cls, value):
        return cls("constant", value=float(value))

    @classmethod
    def expression(cls, src, var="t", **params):
        node = src if isinstance(src, Expr) else parse_expression(src)
        if node.is_constant():
            return cls("constant", value=float(node.evaluate({})))
        return cls("expression", expr=node, var=var, params=tuple(sorted(params.items())))

    @classmethod
    def tabulated(cls, nodes, values):
        return cls("tabulated", nodes=nodes, table=values)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.full(s.shape, self.value)
        if self.kind == "tabulated":
            return np.interp(s, self.nodes, self.table)
        env = {"t": np.zeros(()), "x": np.zeros(())}
        env.update({k: np.asarray(v, dtype=float) for k, v in self.params})
        env[self.var] = s
        out = np.broadcast_to(self.expr.evaluate(env), s.shape).astype(float)
        if not np.all(np.isfinite(out)):
            raise DomainError(f"expression {self.expr} is not finite on the requested points")
        return out

    def describe(self):
        if self.kind == "constant":
            return repr(self.value)
        if self.kind == "expression":
            return str(self.expr)
        return f"tabulated[{self.nodes.size}]"


def band_of(d_min, d_max):
    """Integer n with n-1 <= d_min <= d_max < n, or 0 when d_max < 0."""
    if d_max < 0:
        return 0
    if d_min < 0:
        raise BandCrossingError(f"order range [{d_min}, {d_max}] mixes signs")
    n = math.floor(d_min) + 1
    if d_max >= n:
        raise BandCrossingError(f"order range [{d_min}, {d_max}] crosses the integer {n}")
    return n


@dataclass(frozen=True)
class DimensionField:
    """Order function d(s) confined to one band ``[n-1, n)`` (or d < 0).

    Non-constant fields are checked by dense sampling over ``[lo, hi]``;
    ``band``, ``d_min`` and ``d_max`` are filled in at construction.
    """

    field: ScalarField
    lo: float = None
    hi: float = None
    n_samples: int = 40971
    d_min: float = dc_field(init=False)
    d_max: float = dc_field(init=False)
    band: int = dc_field(init=False)

    def __post_init__(self):
        f = self.field
        if f.kind == "constant":
            d_min = d_max = f.value
        else:
            if f.kind == "tabulated":
                lo = f.nodes[0] if self.lo is None else self.lo
                hi = f.nodes[-1] if self.hi is None else self.hi
            else:
                if self.lo is None or self.hi is None:
                    raise ValueError("expression dimension fields need a sampling interval [lo, hi]")
                lo, hi = self.lo, self.hi
            if not lo < hi:
                raise ValueError("sampling interval must satisfy lo < hi")
            object.__setattr__(self, "lo", float(lo))
            object.__setattr__(self, "hi", float(hi))
            s = np.linspace(lo, hi, max(int(self.n_samples), 2))
            vals = f(s)
            if f.kind == "tabulated":
                inside = f.nodes[(f.nodes >= lo) & (f.nodes <= hi)]
                vals = np.concatenate([vals, f(inside)])
            d_min, d_max = float(vals.min()), float(vals.max())
        object.__setattr__(self, "d_min", d_min)
        object.__setattr__(self, "d_max", d_max)
        object.__setattr__(self, "band", band_of(d_min, d_max))

    @classmethod
    def constant(cls, value):
        return cls(ScalarField.constant(value))

    @classmethod
    def expression(cls, src, lo, hi, n_points=4097, var="t", **params):
        sf = ScalarField.expression(src, var=var, **params)
        return cls(sf, lo, hi, n_samples=10 * n_points + 1)

    @classmethod
    def tabulated(cls, nodes, values):
        return cls(ScalarField.tabulated(nodes, values))

    @classmethod
    def parse(cls, text, lo=None, hi=None, n_points=4097, var="t"):
        """Constant if ``text`` has no free variable, else an expression field."""
        sf = ScalarField.expression(text, var=var)
        if sf.kind == "constant":
            return cls(sf)
        return cls(sf, lo, hi, n_samples=10 * n_points + 1)

    @property
    def kind(self):
        return self.field.kind

    @property
    def var(self):
        return self.field.var

    @property
    def is_constant(self):
        return self.field.kind == "constant"

    @property
    def integer_order(self):
        """The order m when the field is the constant non-negative integer m."""
        if not self.is_constant:
            return None
        v = self.field.value
        m = round(v)
        if m >= 0 and abs(v - m) <= INTEGER_TOL:
            return int(m)
        return None

    def covers(self, a, b):
        if self.is_constant:
            return True
        return self.lo <= a and b <= self.hi

    def __call__(self, s):
        return self.field(s)

    def describe(self):
        return self.field.describe()


def order_index(d_field: DimensionField) -> int:
    """Number of outer derivatives n for the field's band."""
    return band_of(d_field.d_min, d_field.d_max)


_CATALOG = ("power", "polynomial", "exp", "sin", "cos")


@dataclass(frozen=True)
class FunctionSpec:
    """The function being differintegrated.

    kinds
        ``catalog``: ``name`` in power (scale*s**p), polynomial (ascending
        coefficients), exp/sin/cos (of scale*s); ``expression``: parsed
        expression along ``field.var``; ``sampled``: a GridFunction, evaluable
        only on its own nodes.
    """

    kind: str
    name: str = ""
    params: tuple = ()
    field: ScalarField = None
    grid: GridFunction = None

    def __post_init__(self):
        if self.kind == "catalog" and self.name not in _CATALOG:
            raise ValueError(f"unknown catalog function {self.name!r}; choose from {_CATALOG}")
        if self.kind == "expression" and self.field is None:
            raise ValueError("expression FunctionSpec needs a field")
        if self.kind == "sampled" and self.grid is None:
            raise ValueError("sampled FunctionSpec needs a grid")
        if self.kind not in ("catalog", "expression", "sampled"):
            raise ValueError(f"unknown function kind {self.kind!r}")

    @classmethod
    def catalog(cls, name, *params):
        return cls("catalog", name=name, params=tuple(float(p) for p in params))

    @classmethod
    def power(cls, p, scale=1.0):
        return cls.catalog("power", p, scale)

    @classmethod
    def expression(cls, src, var="t", **params):
        sf = ScalarField.expression(src, var=var, **params)
        return cls("expression", field=sf)

    @classmethod
    def sampled(cls, grid):
        return cls("sampled", grid=grid)

    @property
    def is_sampled(self):
        return self.kind == "sampled"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "expression":
            return self.field(s)
        if self.kind == "sampled":
            return self.grid.values[self.grid.index_of(s)].reshape(s.shape)
        with np.errstate(all="ignore"):
            out = self._catalog(s)
        if not np.all(np.isfinite(out)):
            raise DomainError(f"catalog function {self.name}{self.params} undefined on requested points")
        return out

    def _catalog(self, s):
        name, p = self.name, self.params
        if name == "power":
            expo = p[0]
            scale = p[1] if len(p) > 1 else 1.0
            return scale * np.power(s, expo)
        if name == "polynomial":
            return np.polynomial.polynomial.polyval(s, np.asarray(p)) + 0.0 * s
        k = p[0] if p else 1.0
        return {"exp": np.exp, "sin": np.sin, "cos": np.cos}[name](k * s)

    def freeze(self, near, far, rule):
        """Representative value on each subinterval [near, far] (either order).

        ``midpoint`` samples the centre (sampled functions average the two
        end nodes); ``left`` takes the end away from the singular point.
        """
        if rule == "left":
            return self(far)
        if self.kind == "sampled":
            return 0.5 * (self(near) + self(far))
        return self(0.5 * (np.asarray(near) + np.asarray(far)))

    def describe(self):
        if self.kind == "expression":
            return self.field.describe()
        if self.kind == "sampled":
            return f"sampled[{self.grid.n_points}]"
        return f"{self.name}{self.params}"
