"""Command line front-end.

Tabular results are CSV preceded by one ``#``-prefixed JSON line holding
the command, its full configuration and the library version; scalar reports
are a single JSON object.  Identical arguments give identical bytes.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
Errors are written to stderr as one JSON line.

Grids (``--t-grid``, ``--rho-grid``, ...) accept ``a:b:step`` (inclusive
arithmetic grid), ``a:b:log`` or ``a:b:log:N`` (``N`` log-spaced points,
default 50) and comma lists ``v1,v2,...``.

The environment variable ``RATIOTAIL_THREADS`` sets the default for
``--threads``; results never depend on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__, kernels
from .dist import gamma, joint_cdf, norming, norms, ratio_joint, ratio_tail, ratio_tail_index, tail_dependence
from .errors import ModelError, NumericalError
from .estimate import default_k, hill
from .gammatest import VARIANTS, gamma_test, power_simulation
from .sampler import sample_batch, threshold_ratios
from .spectral import check_ratio_order, from_spec

EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 2, 3, 4
THREADS_ENV = "RATIOTAIL_THREADS"


class UsageError(ModelError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(v) -> str:
    """Shortest round-trip text for a float."""
    return repr(float(v))


def parse_grid(text: str) -> np.ndarray:
    """Parse ``a:b:step``, ``a:b:log[:N]`` or a comma list into an array."""
    try:
        parts = text.split(":")
        if len(parts) == 1:
            vals = [float(v) for v in text.split(",") if v.strip()]
            if not vals:
                raise ValueError
            return np.array(vals)
        if len(parts) in (3, 4) and parts[2] == "log":
            a, b = float(parts[0]), float(parts[1])
            num = int(parts[3]) if len(parts) == 4 else 50
            if not (0 < a <= b) or num < 2:
                raise ValueError
            return np.geomspace(a, b, num)
        if len(parts) == 3:
            a, b, step = map(float, parts)
            if not step > 0 or b < a:
                raise ValueError
            m = int(math.floor((b - a) / step + 1e-9))
            return np.round(a + step * np.arange(m + 1), 12)
    except ValueError:
        pass
    raise UsageError(f"bad grid {text!r}; use a:b:step, a:b:log[:N] or v1,v2,...")


def _model(text: str):
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"model is not valid JSON: {exc}") from None
    return from_spec(spec), spec


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def read_pairs(path: str) -> np.ndarray:
    """Read data as an ``(n, 1)`` or ``(n, 2)`` array.

    ``#`` lines are skipped.  With a header naming ``x`` and ``y`` those two
    columns are used (so ``sample`` output reads back directly); otherwise
    the file must hold one or two numeric columns.
    """
    fh = sys.stdin if path == "-" else open(path, newline="")
    try:
        recs = [rec for rec in csv.reader(line for line in fh if not line.startswith("#")) if rec]
    finally:
        if fh is not sys.stdin:
            fh.close()
    if not recs:
        raise UsageError(f"{path}: no data rows")
    cols = None
    try:
        [float(v) for v in recs[0]]
    except ValueError:
        names = [v.strip() for v in recs.pop(0)]
        if "x" in names and "y" in names:
            cols = [names.index("x"), names.index("y")]
    try:
        rows = np.array([[float(v) for v in rec] for rec in recs], dtype=float)
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric data ({exc})") from None
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise UsageError(f"{path}: rows must all have the same number of columns")
    if cols is not None:
        return rows[:, cols]
    if rows.shape[1] not in (1, 2):
        raise UsageError(f"{path}: expected one or two numeric columns or an x,y header")
    return rows


class Output:
    def __init__(self, path: str | None):
        self.path = path
        self.buf = io.StringIO()

    def table(self, header: dict, columns, rows):
        self.buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        self.buf.write(",".join(columns) + "\n")
        for row in rows:
            self.buf.write(",".join(v if isinstance(v, str) else fmt(v) if isinstance(v, float) else str(v) for v in row))
            self.buf.write("\n")

    def report(self, header: dict, body: dict):
        self.buf.write(json.dumps({**header, "result": body}, sort_keys=True) + "\n")

    def flush(self):
        text = self.buf.getvalue()
        if self.path in (None, "-"):
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with open(self.path, "w", newline="") as fh:
                fh.write(text)


def _header(args, **config) -> dict:
    return {"command": args.command, "config": config, "version": __version__}


# -- commands -----------------------------------------------------------------


def cmd_sample(args, out: Output):
    model, spec = _model(args.model)
    batch = sample_batch(model, args.n, args.seed, u=args.u, workers=args.threads)
    x, y = np.maximum(batch.x, args.u), np.maximum(batch.y, args.u)
    out.table(
        _header(args, model=spec, n=args.n, seed=args.seed, u=args.u),
        ["i", "x", "y"],
        zip(range(args.n), x.tolist(), y.tolist()),
    )


def cmd_cdf(args, out: Output):
    model, spec = _model(args.model)
    if args.t_grid is not None:
        ts = parse_grid(args.t_grid)
        rows = []
        for t in ts:
            tail = fmt(ratio_tail(model, t, args.u)) if t >= 1 else ""
            rows.append((float(t), ratio_joint(model, t, args.u), tail))
        out.table(_header(args, model=spec, t_grid=args.t_grid, u=args.u), ["t", "ratio_joint", "ratio_tail"], rows)
    else:
        xs, ys = parse_grid(args.x_grid), parse_grid(args.y_grid)
        rows = [(float(x), float(y), joint_cdf(model, x, y)) for x in xs for y in ys]
        out.table(_header(args, model=spec, x_grid=args.x_grid, y_grid=args.y_grid), ["x", "y", "joint_cdf"], rows)


def cmd_gamma_fn(args, out: Output):
    model, spec = _model(args.model)
    ts = parse_grid(args.t_grid)
    rows = []
    for t in ts:
        nm = norms(model, float(t), args.method)
        rows.append((float(t), gamma(model, "plus", t, args.method), gamma(model, "minus", t, args.method), nm.f_E, nm.g_D))
    out.table(
        _header(args, model=spec, t_grid=args.t_grid, method=args.method),
        ["t", "gamma_plus", "gamma_minus", "norm_f_Et", "norm_g_Dt"],
        rows,
    )


def cmd_hill(args, out: Output):
    data = read_pairs(args.input)
    values = data[:, 0] if data.shape[1] == 1 else threshold_ratios(data, args.u)
    if args.side == "minus" and data.shape[1] == 2:
        values = 1.0 / values
    k = default_k(values.size) if args.k is None else args.k
    est = hill(values, k)
    out.report(_header(args, input=args.input, k=args.k, u=args.u, side=args.side), est.as_dict())


def cmd_gamma_test(args, out: Output):
    data = read_pairs(args.input)
    if data.shape[1] != 2:
        raise UsageError("gamma-test needs two columns x,y")
    rep = gamma_test(data, args.level, args.u, args.variant)
    out.report(
        _header(args, input=args.input, level=args.level, u=args.u, variant=args.variant, seed=args.seed),
        rep.as_dict(),
    )


def cmd_power_curve(args, out: Output):
    grid = parse_grid(args.rho_grid)
    pc = power_simulation(grid, args.n, args.reps, args.level, args.seed, workers=args.threads)
    out.table(
        _header(args, rho_grid=args.rho_grid, n=args.n, reps=args.reps, level=args.level, seed=args.seed),
        ["rho", "empirical_power", "limit_power", "reps"],
        pc.rows(),
    )


def cmd_check(args, out: Output):
    model, spec = _model(args.model)
    a, b = model.totals()
    body = {
        "form": model.form_tag,
        "total_f": a,
        "total_g": b,
        "ratio_order": check_ratio_order(model),
        "tail_dependence": tail_dependence(model),
        "closed_form": model.has_closed_form,
        "backend": kernels.BACKEND,
    }
    for side in ("plus", "minus"):
        m = model if side == "plus" else model.mirror
        body[f"ratio_unbounded_{side}"] = m.ratio_unbounded()
        idx = ratio_tail_index(model, side) if m.ratio_unbounded() else None
        body[f"ratio_tail_index_{side}"] = idx if idx is None or math.isfinite(idx) else "inf"
    if model.has_closed_form:
        ts = np.geomspace(1.0, 1e3, 50)
        dev = 0.0
        for t in ts:
            c, q = norms(model, t, "closed"), norms(model, t, "quad")
            dev = max(dev, abs(c.f_E - q.f_E), abs(c.g_D - q.g_D))
        body["closed_vs_quad_max_abs"] = dev
    if args.n is not None:
        for side in ("plus", "minus"):
            m = model if side == "plus" else model.mirror
            body[f"norming_{side}"] = norming(model, side, args.n, args.u, args.u_n) if m.ratio_unbounded() else None
    out.report(_header(args, model=spec, n=args.n, u=args.u, u_n=args.u_n), body)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ratiotail", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help='model JSON, e.g. \'{"form":"logistic","alpha":2}\'')
        sp.add_argument("-o", "--output", default=None, help="output file (default stdout)")
        return sp

    threads = dict(type=int, default=_default_threads(), help=f"worker threads (default ${THREADS_ENV} or 1)")

    sp = common(sub.add_parser("sample", help="draw i.i.d. pairs"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--u", type=float, default=0.0, help="threshold: emit max(X, u), max(Y, u)")
    sp.add_argument("--threads", **threads)
    sp.set_defaults(func=cmd_sample)

    sp = common(sub.add_parser("cdf", help="ratio law on a t-grid, or joint CDF on an x/y grid"))
    sp.add_argument("--t-grid")
    sp.add_argument("--u", type=float, default=0.0)
    sp.add_argument("--x-grid")
    sp.add_argument("--y-grid")
    sp.set_defaults(func=cmd_cdf)

    sp = common(sub.add_parser("gamma-fn", help="gamma_plus and gamma_minus on a t-grid"))
    sp.add_argument("--t-grid", required=True)
    sp.add_argument("--method", choices=("auto", "closed", "quad"), default="auto")
    sp.set_defaults(func=cmd_gamma_fn)

    sp = common(sub.add_parser("hill", help="Hill estimate from sampled pairs or one column"), model=False)
    sp.add_argument("--input", required=True, help="CSV path or - for stdin")
    sp.add_argument("--k", type=int, default=None, help="order statistics used (default floor(n^0.3))")
    sp.add_argument("--u", type=float, default=0.0)
    sp.add_argument("--side", choices=("plus", "minus"), default="plus")
    sp.set_defaults(func=cmd_hill)

    sp = common(sub.add_parser("gamma-test", help="gamma independence test on pairs"), model=False)
    sp.add_argument("--input", required=True, help="CSV path or - for stdin")
    sp.add_argument("--level", type=float, default=0.05)
    sp.add_argument("--u", type=float, default=0.0)
    sp.add_argument("--variant", choices=VARIANTS, default="modified")
    sp.add_argument("--seed", type=int, default=0, help="recorded in the header; the test itself is deterministic")
    sp.set_defaults(func=cmd_gamma_test)

    sp = common(sub.add_parser("power-curve", help="Monte Carlo power against the rho-model"), model=False)
    sp.add_argument("--rho-grid", required=True)
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--level", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", **threads)
    sp.set_defaults(func=cmd_power_curve)

    sp = common(sub.add_parser("check", help="validate a model and report its summary quantities"))
    sp.add_argument("--n", type=int, default=None, help="also report norming constants for sample size n")
    sp.add_argument("--u", type=float, default=0.0, help="threshold used by the norming constants")
    sp.add_argument("--u-n", type=float, default=None, help="diverging threshold u_n; norming targets n/u_n")
    sp.set_defaults(func=cmd_check)
    return p


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        if args.command == "cdf" and args.t_grid is None and (args.x_grid is None or args.y_grid is None):
            raise UsageError("cdf needs --t-grid or both --x-grid and --y-grid")
        out = Output(args.output)
        args.func(args, out)
        out.flush()
    except (ModelError, ValueError) as exc:
        return _fail(EXIT_INPUT, exc)
    except (NumericalError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
