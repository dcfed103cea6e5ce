"""Command-line front end: each verb runs one library operation and emits a table.

Output is CSV (comma separated, '#' metadata lines first) or JSON
({"meta": ..., "rows": [...]}).  Floats use the shortest round-trip repr.
Exit status: 0 success, 2 bad parameters, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from . import kl, moments, slp, tails
from .errors import ConvergenceError, GreentailError, ParameterError
from .expressions import GRAMMAR_HELP
from .orthopoly import FAMILY_NAMES, FamilyKind

SCHEMA_VERSION = 1
THREADS_ENV = "GREENTAIL_THREADS"
EXIT_OK, EXIT_PARAMETER, EXIT_CONVERGENCE = 0, 2, 3


class Table:
    """Rows with fixed columns plus metadata; ``converged`` drives the exit status."""

    def __init__(self, columns: Sequence[str], rows: Iterable[Sequence] = (), meta: dict | None = None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.meta = dict(meta or {})
        self.converged = True


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render(table: Table, fmt: str) -> str:
    meta = {"tool": "greentail", "version": __version__, "schema": SCHEMA_VERSION, **table.meta}
    if fmt == "json":
        doc = {
            "meta": {k: _json_value(v) for k, v in meta.items()},
            "rows": [{c: _json_value(v) for c, v in zip(table.columns, r)} for r in table.rows],
        }
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    out = io.StringIO()
    out.write(f"# greentail {__version__} schema {SCHEMA_VERSION}\n")
    for k, v in meta.items():
        if k not in ("tool", "version", "schema"):
            out.write(f"# {k}={_cell(v)}\n")
    out.write(",".join(table.columns) + "\n")
    for r in table.rows:
        out.write(",".join(_cell(v) for v in r) + "\n")
    return out.getvalue()


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def ordered_map(func: Callable, items: Sequence) -> list:
    """map() over items, threaded per GREENTAIL_THREADS; results keep input order."""
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def _floats(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one number")
    return vals


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _bc(text: str) -> tuple[float, float, float, float]:
    vals = _floats(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("--bc takes alpha1,alpha2,beta1,beta2")
    return tuple(vals)


def _pairs(xs: list[float], ys: list[float] | None) -> list[tuple[float, float]]:
    if ys is None:
        return [(x, x) for x in xs]
    if len(ys) == 1:
        return [(x, ys[0]) for x in xs]
    if len(ys) != len(xs):
        raise ParameterError("--y needs one value or as many values as --x")
    return list(zip(xs, ys))


def _kind(args) -> FamilyKind:
    return FamilyKind.from_name(args.family, args.alpha, args.beta, args.general)


def _problem(args) -> slp.SLProblem:
    return slp.SLProblem.from_expressions(args.p, args.q, args.w, args.a, args.b, args.bc)


def _family_meta(args) -> dict:
    return {"family": _kind(args).label()}


def _problem_meta(args) -> dict:
    return {"p": args.p, "q": args.q, "w": args.w, "a": args.a, "b": args.b,
            "bc": ",".join(_cell(v) for v in args.bc)}


# verbs

def cmd_tail(args) -> Table:
    kind = _kind(args)
    pairs = _pairs(args.x, args.y)

    def one(xy):
        x, y = xy
        gamma = args.gamma
        if gamma is None:
            gamma = tails.diagonal_gamma(kind) if x == y else tails.offdiagonal_exponent(kind)
        t = tails.tail(kind, x, y, args.N, args.rtol, args.method)
        s = args.N ** gamma
        return [x, y, args.N, gamma, s * t.value, s * t.remainder_bound, s * t.error_estimate,
                t.value, t.cutoff, t.method, t.status]

    table = Table(["x", "y", "N", "gamma", "value", "remainder_bound", "error_estimate",
                   "tail", "cutoff", "method", "status"], ordered_map(one, pairs),
                  {**_family_meta(args), "N": args.N, "rtol": args.rtol})
    table.converged = all(r[-1] != "unconverged" for r in table.rows)
    return table


def cmd_limit(args) -> Table:
    kind = _kind(args)

    def one(xy):
        x, y = xy
        return [x, y, tails.diagonal_limit(kind, x) if x == y else 0.0]

    return Table(["x", "y", "limit"], ordered_map(one, _pairs(args.x, args.y)), _family_meta(args))


def cmd_converge(args) -> Table:
    kind = _kind(args)
    y = args.x if args.y is None else args.y
    gamma = args.gamma
    if gamma is None:
        gamma = tails.diagonal_gamma(kind) if args.x == y else tails.offdiagonal_exponent(kind)
    study = tails.convergence_study(kind, args.x, y, gamma, args.N, args.method, args.rtol)
    rows = [[n, v, t.status] for (n, v), t in zip(study.rows, study.tails)]
    meta = {**_family_meta(args), "x": args.x, "y": y, "gamma": gamma,
            "exponent": study.exponent, "extrapolated": study.extrapolated,
            "diagnostic": study.diagnostic}
    if args.x == y:
        meta["limit"] = tails.diagonal_limit(kind, args.x)
    table = Table(["N", "rescaled_error", "status"], rows, meta)
    table.converged = all(r[-1] != "unconverged" for r in rows)
    return table


def cmd_cd_check(args) -> Table:
    kind = _kind(args)
    pairs = _pairs(args.x, args.y)
    if any(x == y for x, y in pairs):
        raise ParameterError("cd-check needs x != y")
    rows = ordered_map(lambda xy: [xy[0], xy[1], args.N,
                                   tails.cd_partial_identity_check(kind, xy[0], xy[1], args.N)], pairs)
    return Table(["x", "y", "N", "relative_residual"], rows, _family_meta(args))


def cmd_slp_eig(args) -> Table:
    problem = _problem(args)
    form = slp.liouville_transform(problem, args.tol)

    def one(n):
        lam = slp.prufer_eigenvalue(form, None, n, args.tol)
        pred = slp.asymptotic_predictions(problem.bc, form.c, n)
        return [n, lam, math.sqrt(lam) * form.c if lam > 0 else math.nan,
                pred.sqrt_lambda_times_c, pred.efun_form]

    rows = ordered_map(one, list(range(args.n_max + 1)))
    return Table(["n", "lambda", "sqrt_lambda_times_c", "predicted_sqrt_lambda_times_c", "efun_form"],
                 rows, {**_problem_meta(args), "c": form.c, "tol": args.tol})


def cmd_slp_green(args) -> Table:
    problem = _problem(args)
    rows = ordered_map(lambda xy: [xy[0], xy[1], slp.greens_function(problem, xy[0], xy[1], args.tol)],
                       _pairs(args.x, args.y))
    return Table(["x", "y", "green"], rows, _problem_meta(args))


def cmd_slp_fluct(args) -> Table:
    problem = _problem(args)
    pairs = _pairs(args.x, args.y)
    # one expansion object serves every point; warm it before threading
    slp.expansion(problem, args.tol).pair(args.N)

    def one(xy):
        x, y = xy
        limit = slp.regular_limit(problem, x) if x == y else 0.0
        return [x, y, args.N, slp.sl_rescaled_error(problem, x, y, args.N, args.tol), limit]

    return Table(["x", "y", "N", "rescaled_error", "limit"], ordered_map(one, pairs),
                 {**_problem_meta(args), "N": args.N})


def cmd_kl_cov(args) -> Table:
    rows = ordered_map(lambda st: [st[0], st[1], args.N, kl.kl_covariance_exact(st[0], st[1], args.N),
                                   kl.theoretical_variance(st[0]) if st[0] == st[1] else 0.0],
                       _pairs(args.s, args.t))
    return Table(["s", "t", "N", "covariance", "limit"], rows, {"N": args.N})


def cmd_kl_sim(args) -> Table:
    cfg = kl.KLConfig(N=args.N, M=args.M, t_grid=tuple(args.t_grid), paths=args.paths,
                      seed=args.seed, tail=args.tail, block=args.block)
    res = kl.simulate_fluctuation(cfg)
    rows = []
    G = res.t_grid.size
    for i in range(G):
        for j in range(i, G):
            rows.append([res.t_grid[i], res.t_grid[j], res.empirical_cov[i, j], res.cov_se[i, j],
                         res.exact_cov[i, j], res.empirical_mean[i], res.mean_se[i]])
    meta = {**res.meta, "paths": res.paths, "t_grid": ",".join(_cell(v) for v in res.t_grid)}
    return Table(["s", "t", "empirical_cov", "cov_se", "exact_cov", "mean_s", "mean_se_s"], rows, meta)


def cmd_moments(args) -> Table:
    kind = _kind(args)
    columns = ["k", "coeff_k", "coeff_k1", "coeff_k2", "weighted_moment", "relative_residual"]
    if args.N is not None:
        columns.append(f"tail_moment_N{args.N}")

    def one(k):
        tri = moments.moment_recurrence_coeffs(kind, k)
        row = [k, tri.coeff_k, tri.coeff_k1, tri.coeff_k2, moments.weighted_moment(kind, k, args.tol),
               moments.weighted_moment_residual(kind, k, args.tol)]
        if args.N is not None:
            row.append(moments.tail_moment_estimate(kind, k, args.N))
        return row

    return Table(columns, ordered_map(one, list(range(args.k_max + 1))), _family_meta(args))


def cmd_figure1(args) -> Table:
    problem = slp.exponential_weight_problem()
    xs = np.arange(1, args.points + 1) / (args.points + 1.0)
    err = np.atleast_1d(slp.sl_rescaled_error(problem, xs, xs, args.N, args.tol))
    limit = np.exp(-3.0 * xs) / math.pi ** 2
    rows = [[x, e, lim] for x, e, lim in zip(xs, err, limit)]
    return Table(["x", f"rescaled_error_N{args.N}", "limit_curve"], rows,
                 {"problem": problem.label, "N": args.N, "points": args.points})


# parser

def _add_family(p):
    p.add_argument("--family", required=True, choices=FAMILY_NAMES)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--general", action="store_true",
                   help="admit any real Jacobi parameters")


def _add_problem(p):
    p.add_argument("--p", default="exp(3*x)", help="see --help problems")
    p.add_argument("--q", default="-2*exp(3*x)")
    p.add_argument("--w", default="exp(3*x)")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--bc", type=_bc, default=(1.0, 0.0, 1.0, 0.0),
                   help="alpha1,alpha2,beta1,beta2 (default Dirichlet 1,0,1,0)")
    p.add_argument("--tol", type=float, default=1e-12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greentail",
        description="Truncation tails of Green's function eigenfunction expansions.",
        epilog="Use 'greentail --help problems' for the coefficient expression grammar.")
    parser.add_argument("--version", action="version", version=f"greentail {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    p = verb("tail", cmd_tail, "rescaled tail N^gamma sum_{n>N} Y_n(x) Y_n(y) / (M_n lambda_n)")
    _add_family(p)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--y", type=_floats)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--gamma", type=float, help="default: diagonal or off-diagonal scaling")
    p.add_argument("--rtol", type=float, default=1e-6)
    p.add_argument("--method", choices=("direct", "cd"))

    p = verb("limit", cmd_limit, "limit of the rescaled tail (0 off the diagonal)")
    _add_family(p)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--y", type=_floats)

    p = verb("converge", cmd_converge, "rescaled tails over N with a power-law extrapolation")
    _add_family(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float)
    p.add_argument("--N", type=_ints, default=[1024, 2048, 4096])
    p.add_argument("--gamma", type=float)
    p.add_argument("--rtol", type=float, default=1e-6)
    p.add_argument("--method", choices=("direct", "cd"))

    p = verb("cd-check", cmd_cd_check, "residual of the finite Christoffel-Darboux type identity")
    _add_family(p)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--y", type=_floats, required=True)
    p.add_argument("--N", type=int, default=25)

    p = verb("slp-eig", cmd_slp_eig, "Pruefer eigenvalues of a Sturm-Liouville problem")
    _add_problem(p)
    p.add_argument("--n-max", type=int, default=10)

    p = verb("slp-green", cmd_slp_green, "Green's function of a Sturm-Liouville problem")
    _add_problem(p)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--y", type=_floats)

    p = verb("slp-fluct", cmd_slp_fluct, "N times the Green's function minus its truncated expansion")
    _add_problem(p)
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--y", type=_floats)
    p.add_argument("--N", type=int, default=100)

    p = verb("kl-cov", cmd_kl_cov, "exact covariance of the Brownian-motion truncation fluctuation")
    p.add_argument("--s", type=_floats, required=True)
    p.add_argument("--t", type=_floats)
    p.add_argument("--N", type=int, required=True)

    p = verb("kl-sim", cmd_kl_sim, "Monte-Carlo moments of the truncation fluctuation")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int)
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--seed", type=int, default=kl.DEFAULT_SEED)
    p.add_argument("--t-grid", type=_floats, default=[0.25, 0.5, 0.75, 1.0])
    p.add_argument("--tail", choices=("gaussian", "none"), default="gaussian")
    p.add_argument("--block", type=int, default=1024)

    p = verb("moments", cmd_moments, "moment recurrence coefficients and weighted moments")
    _add_family(p)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--N", type=int, help="also estimate tail moments at this N (Hermite, Laguerre)")
    p.add_argument("--tol", type=float, default=1e-13)

    p = verb("figure1", cmd_figure1, "rescaled error of the exponential-weight example on a grid")
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--tol", type=float, default=1e-12)
    return parser


def _write(text: str, target: str) -> None:
    if target == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    """Parse argv, run the verb, write its table; returns the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:2] in (["--help", "problems"], ["-h", "problems"], ["help", "problems"]):
        sys.stdout.write(GRAMMAR_HELP)
        return EXIT_OK
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_PARAMETER
    try:
        table = args.func(args)
        table.meta = {"verb": args.verb, "argv": " ".join(argv), **table.meta}
        _write(render(table, args.format), args.output)
    except ConvergenceError as exc:
        print(f"greentail: not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (GreentailError, ValueError, OSError) as exc:
        print(f"greentail: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    return EXIT_OK if table.converged else EXIT_CONVERGENCE


def main() -> None:
    sys.exit(run())
