"""``vofrac`` command line: differint, compare, sweep, calibrate, solve.

Exit status: 0 ok, 1 invalid input, 2 numerical failure (band, pole guard,
resolution, domain), 3 solver did not converge under ``--strict``.
Diagnostics go to stderr as single lines prefixed ``E:<code>:``.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _accel
from .errors import (
    BandCrossingError,
    DomainError,
    ExponentError,
    FormatError,
    ParseError,
    PoleGuardError,
    ResolutionError,
    SingularCalibration,
    VofracError,
    ZeroPivot,
)
from .fields import DimensionField, FunctionSpec, ScalarField
from .io import dumps_json, fmt, ingest_csv, write_csv
from .near_integer import EpsilonField, compare_approx
from .operators import OperatorSpec, apply, rl_left
from .quadrature import QuadratureConfig
from .solver import ModelProblem, solve_fixed_point

__all__ = ["run", "main"]

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_NONCONVERGED = 0, 1, 2, 3

_COMPUTE_ERRORS = (
    BandCrossingError,
    PoleGuardError,
    ResolutionError,
    DomainError,
    ExponentError,
    ZeroPivot,
    SingularCalibration,
)


class UsageError(Exception):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p, *, t_args=True):
    p.add_argument("--func", help="expression in t (or x), a constant, or @file.csv")
    p.add_argument("--dim", help="order d: constant or expression")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=None)
    if t_args:
        p.add_argument("--t", type=float, nargs="+", default=None)
        p.add_argument("--t-range", type=float, nargs=3, metavar=("LO", "HI", "N"))
        p.add_argument("--side", choices=("left", "right", "sym"), default="left")
        p.add_argument("--axis", choices=("time", "space"), default="time")
    p.add_argument("--n-points", type=int, default=4097)
    p.add_argument("--stencil", choices=("central2", "central4"), default="central2")
    p.add_argument("--freeze", choices=("midpoint", "left"), default="midpoint")
    p.add_argument("--step-factor", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-9, help="pole guard")
    p.add_argument("--sign", choices=("+1", "-1", "1"), default="-1")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--strict", action="store_true")


def _add_near(p):
    p.add_argument("--eps", help="eps(t) directly, instead of deriving it from --dim")
    p.add_argument("--which", choices=("below", "above"), required=True)
    p.add_argument("--window", type=float, nargs=2, required=True, metavar=("LO", "HI"))


def build_parser():
    parser = _Parser(prog="vofrac", description="Variable-order Riemann-Liouville differintegration.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("differint", help="evaluate an operator at points")
    _add_common(p)

    p = sub.add_parser("compare", help="near-integer approximation vs direct operator")
    _add_common(p, t_args=False)
    _add_near(p)

    p = sub.add_parser("calibrate", help="fit the regularization parameter alpha")
    _add_common(p, t_args=False)
    _add_near(p)

    p = sub.add_parser("sweep", help="vary one axis and emit long-format rows")
    _add_common(p)
    p.add_argument("--vary", choices=("t", "eps-scale", "n-points"), required=True)
    p.add_argument("--values", type=float, nargs="+", default=None)
    p.add_argument("--eps", default=None)
    p.add_argument("--which", choices=("below", "above"), default=None)
    p.add_argument("--window", type=float, nargs=2, default=None)

    p = sub.add_parser("solve", help="solve D^{d(f)} f = g by damped fixed point")
    _add_common(p, t_args=False)
    p.add_argument("--g", help="right-hand side (alias of --func)")
    p.add_argument("--d0", type=float, default=0.5)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--clamp", type=float, nargs=2, default=(0.05, 0.95))
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=50)
    return parser


# -- resolution of specs -------------------------------------------------------

def _var(args):
    return "x" if getattr(args, "axis", "time") == "space" else "t"


def _function(text, var):
    if text is None:
        raise UsageError("--func is required")
    if text.startswith("@"):
        return FunctionSpec.sampled(ingest_csv(text[1:]))
    return FunctionSpec.expression(text, var=var)


def _cfg(args):
    return QuadratureConfig(
        n_points=args.n_points,
        freeze_rule=args.freeze,
        outer_stencil=args.stencil,
        outer_step_factor=args.step_factor,
        pole_guard=args.delta,
    )


def _points(args):
    if args.t_range is not None:
        lo, hi, n = args.t_range
        if n < 1 or n != int(n):
            raise UsageError("--t-range N must be a positive integer")
        return np.linspace(lo, hi, int(n)).tolist()
    if args.t:
        return list(args.t)
    raise UsageError("one of --t or --t-range is required")


def _config_record(args):
    rec = {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items()) if k != "out"}
    return rec


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_comment(args):
    return "config: " + dumps_json(_config_record(args), indent=0).replace("\n", "")


def _threads():
    return _accel.thread_cap()


def _ordered_map(fn, items):
    threads = _threads()
    if not threads or threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class _Evaluator:
    """Resolved differint setup: one callable from t to EvalResult."""

    def __init__(self, args, cfg=None):
        var = _var(args)
        self.f = _function(args.func, var)
        if args.dim is None:
            raise UsageError("--dim is required")
        self.cfg = cfg or _cfg(args)
        self.side = {"sym": "symmetric"}.get(args.side, args.side)
        pts = _points(args)
        self.points = pts
        probe = ScalarField.expression(args.dim, var=var)
        self.constant = probe.kind == "constant"
        b = args.b
        self.a = args.a
        if self.constant and b is None and self.side == "left":
            # no right end needed: classical operator from a
            self.spec = None
            self.d = probe.value
            return
        if b is None:
            if self.side != "left":
                raise UsageError("--b is required for right/sym operators")
            b = max(pts)
        if args.a >= b:
            raise UsageError("need a < b")
        axis = "space" if var == "x" else "time"
        dfield = DimensionField.parse(args.dim, args.a, b, args.n_points, var=var)
        self.spec = OperatorSpec(self.side, axis, args.a, b, dfield, self.cfg)

    def __call__(self, t):
        if self.spec is None:
            return rl_left(self.f, self.d, self.a, t, self.cfg)
        return apply(self.f, self.spec, t)


def _cmd_differint(args):
    ev = _Evaluator(args)
    results = _ordered_map(ev, ev.points)
    if (args.format or "csv") == "json":
        payload = {
            "command": "differint",
            "config": _config_record(args),
            "results": [
                {"t": r.t, "value": r.value, "trust": r.trust, "scheme_id": r.scheme_id} for r in results
            ],
        }
        return dumps_json(payload)
    rows = [(float(r.t), float(r.value), r.trust) for r in results]
    return write_csv(("t", "value", "trust"), rows, [_config_comment(args)])


def _eps_field(args, which, scale=1.0):
    if args.eps is not None:
        src = args.eps
    elif args.dim is not None:
        src = f"1-({args.dim})" if which == "below" else f"({args.dim})-1"
    else:
        raise UsageError("give --eps or --dim")
    if scale != 1.0:
        src = f"{scale!r}*({src})"
    alpha = 1.0 if args.alpha is None else args.alpha
    return EpsilonField(ScalarField.expression(src, var=_var(args)), int(args.sign), alpha)


def _near_spec(args, window):
    b = args.b if args.b is not None else 1.5 * window[1]
    return OperatorSpec("left", "time", args.a, b, None, _cfg(args))


def _comparison(args, which, window, scale=1.0):
    eps = _eps_field(args, which, scale)
    return compare_approx(_function(args.func, _var(args)), eps, tuple(window), which,
                          _near_spec(args, window), alpha=args.alpha)


def _cmd_compare(args):
    rep = _comparison(args, args.which, args.window)
    if (args.format or "json") == "csv":
        rows = zip(rep.t_grid.tolist(), rep.approx.tolist(), rep.direct.tolist(), rep.abs_err.tolist())
        comments = [_config_comment(args), f"max_rel_err={fmt(rep.max_rel_err)} alpha_used={fmt(rep.alpha_used)}"]
        return write_csv(("t", "approx", "direct", "abs_err"), rows, comments)
    out = {"command": "compare", "config": _config_record(args)}
    out.update(rep.to_dict())
    return dumps_json(out)


def _cmd_calibrate(args):
    if args.alpha is not None:
        raise UsageError("calibrate fits alpha; do not pass --alpha")
    rep = _comparison(args, args.which, args.window)
    if (args.format or "json") == "csv":
        return write_csv(("alpha", "max_rel_err"), [(rep.alpha_used, rep.max_rel_err)], [_config_comment(args)])
    return dumps_json({"command": "calibrate", "config": _config_record(args),
                       "alpha": rep.alpha_used, "report": rep.to_dict()})


def _cmd_sweep(args):
    rows = []
    if args.vary == "t":
        ev = _Evaluator(args)
        for r in _ordered_map(ev, ev.points):
            rows.append(("t", float(r.t), "value", float(r.value)))
    elif args.vary == "n-points":
        if not args.values:
            raise UsageError("--values is required for --vary n-points")
        if args.t is None or len(args.t) != 1:
            raise UsageError("--vary n-points needs a single --t")
        def one(n):
            if n != int(n):
                raise UsageError("n-points values must be integers")
            args_n = argparse.Namespace(**{**vars(args), "n_points": int(n)})
            ev = _Evaluator(args_n)
            return ev(args.t[0])
        for n, r in zip(args.values, _ordered_map(one, list(args.values))):
            rows.append(("n_points", float(n), "value", float(r.value)))
    else:
        if not args.values or args.which is None or args.window is None:
            raise UsageError("--vary eps-scale needs --values, --which and --window")
        reps = _ordered_map(lambda s: _comparison(args, args.which, args.window, s), list(args.values))
        for s, rep in zip(args.values, reps):
            rows.append(("eps_scale", float(s), "max_rel_err", float(rep.max_rel_err)))
            rows.append(("eps_scale", float(s), "alpha_used", float(rep.alpha_used)))
    if (args.format or "csv") == "json":
        return dumps_json({"command": "sweep", "config": _config_record(args),
                           "rows": [dict(zip(("axis", "axis_value", "quantity", "value"), r)) for r in rows]})
    return write_csv(("axis", "axis_value", "quantity", "value"), rows, [_config_comment(args)])


def _cmd_solve(args):
    text = args.g if args.g is not None else args.func
    if text is None:
        raise UsageError("--g (or --func) is required")
    g = _function(text, "t")
    b = 1.0 if args.b is None else args.b
    n_points = args.n_points
    if g.is_sampled:
        n_points = g.grid.n_points
        args.a, b = g.grid.a, g.grid.b
    problem = ModelProblem(g=g, a=args.a, b=b, n_points=n_points, d0=args.d0, kappa=args.kappa,
                           clamp=tuple(args.clamp), omega=args.omega)
    rep = solve_fixed_point(problem, tol=args.tol, max_iter=args.max_iter)
    if (args.format or "csv") == "json":
        out = {"command": "solve", "config": _config_record(args)}
        out.update(rep.to_dict())
        text_out = dumps_json(out)
    else:
        rows = zip(rep.solution.t.tolist(), rep.solution.values.tolist(), rep.d_final.values.tolist())
        comments = [_config_comment(args),
                    f"iterations={rep.iterations} converged={str(rep.converged).lower()} "
                    f"last_residual={fmt(rep.residuals[-1])}"]
        text_out = write_csv(("t", "f", "d"), rows, comments)
    return text_out, rep.converged


_COMMANDS = {
    "differint": _cmd_differint,
    "compare": _cmd_compare,
    "calibrate": _cmd_calibrate,
    "sweep": _cmd_sweep,
}


def _diag(code, message):
    msg = " ".join(str(message).split())
    sys.stderr.write(f"E:{code}:{msg}\n")


def run(argv=None):
    """Run one command; returns the process exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    _accel.apply_thread_cap()
    try:
        args = build_parser().parse_args(argv)
        if args.command == "solve":
            text, converged = _cmd_solve(args)
            _emit(args, text)
            if args.strict and not converged:
                _diag("nonconvergence", "fixed-point iteration did not reach --tol within --max-iter")
                return EXIT_NONCONVERGED
            return EXIT_OK
        _emit(args, _COMMANDS[args.command](args))
        return EXIT_OK
    except (UsageError, ParseError, FormatError) as exc:
        _diag(getattr(exc, "code", "usage"), exc)
        return EXIT_INPUT
    except _COMPUTE_ERRORS as exc:
        _diag(exc.code, exc)
        return EXIT_COMPUTE
    except VofracError as exc:
        _diag(exc.code, exc)
        return EXIT_COMPUTE
    except (ValueError, OSError) as exc:
        _diag("input", exc)
        return EXIT_INPUT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
