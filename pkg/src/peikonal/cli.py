"""Batch command line interface.

Every subcommand writes a JSON summary (resolved config, tool version and
results) to ``--out-dir`` and echoes it on stdout. Exit status: 0 success,
1 usage or parameter error, 2 data error, 3 solver error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io
from .analysis import (
    BetaMatrix,
    beta_star_cycles,
    beta_star_minmax,
    convergence_experiment,
    verify_robustness,
)
from .datasets import sample_ball, sample_gaussian_mixture, sample_manifold, sample_two_moons
from .density import DensityParams, knn_density, rhs_from_density
from .depth import compute_depth, extremal_points, median_search
from .errors import DataError, ParameterError, SolverError
from .graph import KernelSpec, build_knn_graph, build_proximity_graph, inject_corrupted_edges
from .solver import SolverParams, solve_graph_eikonal, solve_peikonal
from .ssl import (
    accuracy,
    class_distances,
    fit_class_priors,
    labeled_sets_from_labels,
    predict_labels,
)

GLOBAL_KEYS = ("seed", "out_dir", "threads")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- argument parsing helpers ---------------------------------------------------

def _int_list(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _matrix(text):
    """Rows separated by ';', entries by ','; 'x' marks an unused (diagonal) entry."""
    rows = []
    for row in str(text).split(";"):
        vals = []
        for tok in row.split(","):
            tok = tok.strip()
            vals.append(np.nan if tok.lower() in ("x", "") else float(tok))
        rows.append(vals)
    if len({len(r) for r in rows}) != 1:
        raise argparse.ArgumentTypeError("matrix rows have different lengths")
    return np.array(rows)


def _boundary(args, n):
    if args.boundary is not None:
        return np.asarray(args.boundary, dtype=np.int64)
    if args.boundary_labels is not None:
        if args.boundary_class is None:
            raise ParameterError("--boundary-labels needs --boundary-class")
        labels = io.read_labels(args.boundary_labels)
        if labels.size != n:
            raise DataError(f"label file has {labels.size} rows, graph has {n} nodes")
        idx = np.flatnonzero(labels == args.boundary_class)
        if idx.size == 0:
            raise DataError(f"no node carries class {args.boundary_class}")
        return idx
    raise ParameterError("give --boundary or --boundary-labels")


def _rhs(text, n, args):
    kind, _, arg = str(text).partition(":")
    if kind == "const":
        try:
            return float(arg)
        except ValueError:
            raise ParameterError(f"bad constant in --f {text!r}")
    if kind == "file":
        f = io.read_vector(arg)
        if f.size != n:
            raise DataError(f"rhs file has {f.size} rows, graph has {n} nodes")
        return f
    if kind == "density":
        if getattr(args, "points", None) is None:
            raise ParameterError("--f density:<alpha> needs --points")
        X = io.read_points(args.points)
        if len(X) != n:
            raise DataError(f"points file has {len(X)} rows, graph has {n} nodes")
        rho = knn_density(X, DensityParams(k=args.density_k))
        return rhs_from_density(rho, float(arg))
    raise ParameterError(f"--f must be const:<v>, file:<path> or density:<alpha>, got {text!r}")


def _out(args, name):
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def _summary(args, results):
    payload = {"command": args.command, "version": __version__, "config": _config(args)}
    payload.update(results)
    text = io.write_json(_out(args, f"{args.command}.json"), payload)
    print(text)
    return payload


def _solver_params(args):
    return SolverParams(p=args.p, bisection_tol=args.tol)


# -- subcommands --------------------------------------------------------------

def cmd_generate(args):
    kind = args.dataset
    if kind == "ball":
        cloud = sample_ball(args.n, args.d, seed=args.seed)
    elif kind == "two-moons":
        cloud = sample_two_moons(args.n, args.noise, seed=args.seed)
    elif kind == "gaussian-mixture":
        if args.centers is None or args.counts is None:
            raise ParameterError("gaussian-mixture needs --centers and --counts")
        cloud = sample_gaussian_mixture(args.centers, args.counts, args.stddev, seed=args.seed)
    else:
        cloud = sample_manifold(kind, args.n, seed=args.seed, noise=args.noise)
    io.write_points(_out(args, "points.csv"), cloud.points)
    res = {"n": len(cloud), "dim": cloud.points.shape[1], "points": "points.csv"}
    if cloud.labels is not None:
        io.write_labels(_out(args, "labels.csv"), cloud.labels)
        res["labels"] = "labels.csv"
    return _summary(args, res)


def cmd_graph_build(args):
    X = io.read_points(args.points)
    if args.kind == "knn":
        G = build_knn_graph(X, args.k, symmetrize=not args.no_symmetrize)
    else:
        if args.eps is None:
            raise ParameterError("proximity graphs need --eps")
        G = build_proximity_graph(X, args.eps, KernelSpec(args.kernel), p=args.p,
                                  normalization=args.normalization)
    io.write_graph(_out(args, "graph.tsv"), G)
    return _summary(args, {"n": G.n, "num_edges": G.num_edges, "graph": "graph.tsv"})


def _field_summary(args, field, name):
    io.write_field(_out(args, name), field.values)
    io.write_labels(_out(args, "visit_order.csv"), field.visit_order)
    v = field.values
    fin = v[np.isfinite(v)]
    return _summary(args, {
        "field": name,
        "visit_order": "visit_order.csv",
        "unreached": field.unreached_count,
        "max_value": float(fin.max()) if fin.size else float("nan"),
    })


def cmd_solve(args):
    G = io.read_graph(args.graph)
    u = solve_peikonal(G, _boundary(args, G.n), _rhs(args.f, G.n, args), _solver_params(args))
    return _field_summary(args, u, "solution.csv")


def cmd_dijkstra(args):
    G = io.read_graph(args.graph)
    u = solve_graph_eikonal(G, _boundary(args, G.n), _rhs(args.f, G.n, args))
    return _field_summary(args, u, "distance.csv")


def cmd_depth(args):
    G = io.read_graph(args.graph)
    f = _rhs(args.f, G.n, args)
    params = _solver_params(args)
    search = median_search(G, f, params, args.fraction, seed=args.seed, threads=args.threads)
    res = compute_depth(G, f, params, search.median, len(search.candidates))
    io.write_field(_out(args, "depth.csv"), res.depth)
    shallow, deep = extremal_points(res)
    return _summary(args, {
        "median": res.median,
        "objective": res.objective,
        "candidates_evaluated": res.candidates_evaluated,
        "flagged_candidates": int(search.flagged.sum()),
        "shallowest": shallow,
        "deepest": deep,
        "depth": "depth.csv",
    })


def _train_ids(args, labels):
    if args.train is not None:
        return np.asarray(args.train, dtype=np.int64)
    rng = np.random.default_rng(args.seed)
    ids = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        take = min(args.train_per_class, members.size)
        ids.extend(rng.choice(members, size=take, replace=False).tolist())
    return np.sort(np.asarray(ids, dtype=np.int64))


def cmd_ssl(args):
    G = io.read_graph(args.graph)
    labels = io.read_labels(args.labels)
    if labels.size != G.n:
        raise DataError(f"label file has {labels.size} rows, graph has {G.n} nodes")
    train = _train_ids(args, labels)
    k = int(labels.max()) + 1
    sets = labeled_sets_from_labels(labels, train, k)
    D = class_distances(G, sets, _rhs(args.f, G.n, args), _solver_params(args), threads=args.threads)
    out = {}
    weights = None
    if args.priors is not None:
        pw = fit_class_priors(D, args.priors, tol=args.prior_tol)
        weights = pw
        out.update(prior_weights=pw.s, prior_iterations=pw.iterations_used,
                   achieved_fractions=pw.achieved_fractions, priors_converged=pw.converged)
    pred = predict_labels(D, weights, sets)
    io.write_labels(_out(args, "predictions.csv"), pred.labels)
    out.update(
        predictions="predictions.csv",
        train=train,
        accuracy=accuracy(pred, labels, sets),
    )
    return _summary(args, out)


def cmd_robustness(args):
    G = io.read_graph(args.graph)
    bnd = _boundary(args, G.n)
    f = _rhs(args.f, G.n, args)
    _, pert = inject_corrupted_edges(G, args.corrupt, args.weight, seed=args.seed)
    rep = verify_robustness(G, pert, bnd, f, _solver_params(args))
    io.write_field(_out(args, "relative_error.csv"), rep.relative_error)
    return _summary(args, {
        "bound": rep.bound,
        "violations": rep.violations,
        "max_relative_error": rep.max_relative_error,
        "median_relative_error": rep.median_relative_error,
        "relative_error": "relative_error.csv",
    })


def cmd_convergence(args):
    cfg = {"d": args.d, "p": args.p, "kernel": args.kernel, "n_list": args.n_list,
           "eps_rule": args.eps_rule, "seed": args.seed, "seeds": args.repeats}
    rows = convergence_experiment(cfg, threads=args.threads)
    with _out(args, "convergence.csv").open("w") as fh:
        fh.write("n,eps,p,sup_error,runtime_s\n")
        for r in rows:
            fh.write(f"{r.n},{r.eps:.17g},{r.p:.17g},{r.sup_error:.17g},{r.runtime:.17g}\n")
    return _summary(args, {"rows": [r.as_dict() for r in rows], "table": "convergence.csv"})


def cmd_betastar(args):
    B = BetaMatrix(args.beta)
    value, s = beta_star_minmax(B)
    return _summary(args, {"beta_star": beta_star_cycles(B), "beta_star_minmax": value, "s": s})


# -- parser -------------------------------------------------------------------

def _add_boundary(sp):
    sp.add_argument("--boundary", type=_int_list, help="comma-separated node ids")
    sp.add_argument("--boundary-labels", help="single-column label CSV")
    sp.add_argument("--boundary-class", type=int)


def _add_solver(sp, with_f=True):
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-9)
    if with_f:
        _add_rhs(sp)


def _add_rhs(sp):
    sp.add_argument("--f", default="const:1", help="const:<v>, file:<path> or density:<alpha>")
    sp.add_argument("--points", help="point CSV, needed by --f density:<alpha>")
    sp.add_argument("--density-k", type=int, default=30)


def build_parser():
    parser = _Parser(prog="peikonal", description="p-eikonal distances on weighted graphs")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--threads", type=int, default=1)
    # the same flags are accepted after the subcommand; SUPPRESS keeps the
    # top-level values unless they are given there
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out-dir", default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.add_argument("--config", help="file of key=value lines used as defaults")
        sp.set_defaults(func=func)
        return sp

    sp = add("generate", cmd_generate, "sample a synthetic point cloud")
    sp.add_argument("dataset", choices=["ball", "two-moons", "gaussian-mixture", "helix", "half_sphere", "swiss_roll"])
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--noise", type=float, default=0.1)
    sp.add_argument("--centers", type=_matrix)
    sp.add_argument("--counts", type=_int_list)
    sp.add_argument("--stddev", type=float, default=1.0)

    sp = add("graph-build", cmd_graph_build, "build a kNN or proximity graph")
    sp.add_argument("--points", required=True)
    sp.add_argument("--kind", choices=["knn", "proximity"], default="knn")
    sp.add_argument("--k", type=int, default=20)
    sp.add_argument("--no-symmetrize", action="store_true")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--kernel", choices=["constant", "bump"], default="constant")
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--normalization", choices=["rgg", "raw"], default="rgg")

    for name, func, help_ in (("solve", cmd_solve, "fast marching p-eikonal solve"),
                              ("dijkstra", cmd_dijkstra, "density weighted graph distance")):
        sp = add(name, func, help_)
        sp.add_argument("--graph", required=True)
        _add_boundary(sp)
        if name == "solve":
            _add_solver(sp)
        else:
            _add_rhs(sp)

    sp = add("depth", cmd_depth, "p-eikonal median and data depth")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--fraction", type=float, default=0.05)
    _add_solver(sp)

    sp = add("ssl", cmd_ssl, "semi-supervised classification")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--labels", required=True, help="label CSV; only training rows are used for fitting")
    sp.add_argument("--train", type=_int_list, help="comma-separated training node ids")
    sp.add_argument("--train-per-class", type=int, default=1)
    sp.add_argument("--priors", type=_float_list)
    sp.add_argument("--prior-tol", type=float, default=0.01)
    _add_solver(sp)

    sp = add("robustness", cmd_robustness, "perturbation bound check with random corrupted edges")
    sp.add_argument("--graph", required=True)
    _add_boundary(sp)
    sp.add_argument("--corrupt", type=int, default=10)
    sp.add_argument("--weight", type=float, default=1.0)
    _add_solver(sp)

    sp = add("convergence", cmd_convergence, "error against the unit cone on random geometric graphs")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--kernel", choices=["constant", "bump"], default="constant")
    sp.add_argument("--n-list", type=_int_list, default=[2000, 5000])
    sp.add_argument("--eps-rule", default="log-power")
    sp.add_argument("--repeats", type=int, default=1)

    sp = add("betastar", cmd_betastar, "clusterability index of a beta matrix")
    sp.add_argument("--beta", type=_matrix, required=True, help="e.g. 'x,2;0.125,x'")
    return parser


def _read_config(path):
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    for no, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParameterError(f"{path}:{no}: expected key=value")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _apply_config(parser, argv, args):
    """Re-parse with config-file values as defaults; explicit flags still win."""
    sub = parser._subparsers._group_actions[0].choices[args.command]
    cfg = _read_config(args.config)
    known = {a.dest: a for a in sub._actions} | {a.dest: a for a in parser._actions}
    unknown = sorted(set(cfg) - set(known) - {"help", "config"})
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    for key, raw in cfg.items():
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes")
        else:
            value = action.type(raw) if action.type else raw
        target = parser if key in GLOBAL_KEYS else sub
        target.set_defaults(**{key: value})
    return parser.parse_args(argv)


def run(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args)
        if args.threads < 1:
            raise ParameterError("--threads must be >= 1")
        args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
