"""Command-line entry point: ``mqrank <command> [options]``.

Failures print one line ``error[<kind>]: <message>`` to stderr and exit with
status 2 (usage) or 1 (everything else).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from . import io as mio
from .estimators import EstimatorKind, estimate_all
from .experiments import SETTINGS, default_base, run_setting, setting_config, write_csv
from .metrics import mrr, normalized_mrr, recall_at_k
from .ranking import DissimilarityStack, as_alpha, rank
from .solvers import ENGINES, DEFAULT_NODE_BUDGET, build_instance, objective_at

GRID_FLAGS = {"pointmass": "k", "variance": "beta", "sizeS": "size_s"}
DEFAULT_GRIDS = {
    "pointmass": "1..10",
    "variance": "1e-4,1e-3,1e-2,1e-1,1,10,100,1000,1e4",
    "sizeS": "1..10",
}


class UsageError(Exception):
    pass


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_grid(text: str, integer: bool) -> list:
    """``"a..b"`` (inclusive integer range) or a comma-separated list."""
    text = text.strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            values = list(range(lo, hi + 1))
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
            if integer:
                if any(v != int(v) for v in values):
                    raise ValueError
                values = [int(v) for v in values]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use 'a..b' or a comma-separated list") from None
    if not values:
        raise UsageError(f"empty grid {text!r}")
    return values


def _split_matrix_arg(arg: str) -> tuple[str, str]:
    label, sep, path = arg.partition("=")
    if not sep:
        return Path(arg).stem, arg
    if not label:
        raise UsageError(f"empty label in --matrix {arg!r}")
    return label, path


def load_stack(args) -> DissimilarityStack:
    pairs = [_split_matrix_arg(m) for m in args.matrix]
    labels = [label for label, _ in pairs]
    if len(set(labels)) != len(labels):
        raise UsageError(f"--matrix labels must be unique, got {labels}")
    mats = [mio.load_dissimilarity_matrix(p, args.format, args.symmetrize, label) for label, p in pairs]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise CliError("validation", "matrices differ in size: " + ", ".join(f"{l}={m.shape[0]}" for l, m in zip(labels, mats)))
    return DissimilarityStack.from_matrices(mats, labels)


def _load_names(args, n: int) -> list[str] | None:
    if not args.names:
        return None
    names = mio.load_names(args.names)
    if len(names) != n:
        raise CliError("validation", f"{args.names}: {len(names)} names for {n} vertices")
    return names


@contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _add_matrix_options(p):
    p.add_argument("--matrix", action="append", required=True, metavar="[LABEL=]PATH",
                   help="dissimilarity matrix; repeat once per layer")
    p.add_argument("--format", choices=mio.FORMATS, help="matrix format (default: from the file suffix)")
    p.add_argument("--symmetrize", choices=["avg"], help="average asymmetric matrices with their transpose")
    p.add_argument("--names", help="vertex-name manifest, one name per line")


def cmd_simulate(args) -> int:
    setting = args.setting
    own = GRID_FLAGS[setting]
    for other in set(GRID_FLAGS.values()) - {own}:
        if getattr(args, other) is not None:
            raise UsageError(f"--{other.replace('_', '-')} does not apply to --setting {setting}")
    grid = parse_grid(getattr(args, own) or DEFAULT_GRIDS[setting], integer=setting != "variance")
    overrides = {"trials": args.trials, "master_seed": args.seed, "engine": args.engine,
                 "shared_graph": args.shared_graph}
    if args.n is not None:
        overrides["n"] = args.n
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    try:
        base = default_base(setting, **overrides)
        # validate every grid point before any work starts
        for value in grid:
            setting_config(setting, base, value)
    except ValueError as exc:
        raise CliError("validation", str(exc)) from None
    results = run_setting(setting, grid, base, workers=args.workers)
    with _output(args.out) as fh:
        count = write_csv(results, fh, args.engine)
    logging.getLogger(__name__).info("wrote %d rows", count)
    return 0


def _solver_options(args) -> dict:
    opts = {"node_budget": args.node_budget}
    if args.resolution is not None:
        opts["resolution"] = args.resolution
    return opts


def cmd_solve(args) -> int:
    stack = load_stack(args)
    names = _load_names(args, stack.n)
    spec = mio.load_task(args.task, names)
    engine = args.engine or ("sweep2d" if stack.J == 2 else "bnb")
    if engine == "sweep2d" and stack.J != 2:
        raise UsageError(f"--engine sweep2d needs exactly 2 matrices, got {stack.J}")
    est = estimate_all(stack, spec.task, engine, **_solver_options(args))
    kind = EstimatorKind(args.estimator)
    alpha = est.alpha(kind)
    target = spec.task.target
    ranked = rank(alpha @ stack.rows(target.q), target.q, exclude=target.S)
    reports = {}
    if kind in (EstimatorKind.SINGLE, EstimatorKind.COMBINED):
        reports["single"] = est.single.as_dict()
    if kind in (EstimatorKind.MULTI, EstimatorKind.COMBINED):
        reports["multi"] = est.multi.as_dict()
    summary = {
        "estimator": kind.value,
        "engine": engine,
        "labels": list(stack.labels),
        "alpha": [float(a) for a in alpha],
        "objective": objective_at(build_instance(stack, spec.task), alpha),
        "K": spec.task.K,
        "n": stack.n,
        "reports": reports,
    }
    if spec.evalset is not None:
        summary["metrics"] = _metrics(ranked, spec.evalset, (1, 5, 10))
    if args.out:
        with _output(args.out) as fh:
            mio.write_ranked_list(ranked, fh, names)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_rank(args) -> int:
    stack = load_stack(args)
    names = _load_names(args, stack.n)
    try:
        alpha = as_alpha([float(a) for a in args.alpha.split(",")], stack.J)
    except ValueError as exc:
        raise CliError("validation", f"--alpha: {exc}") from None
    name_map = {nm: i for i, nm in enumerate(names)} if names else None
    q = mio.resolve_refs([args.query], name_map)[0]
    stack.check_vertex(q)
    exclude = mio.resolve_refs([r for r in args.exclude.split(",") if r], name_map) if args.exclude else ()
    for v in exclude:
        stack.check_vertex(v)
    ranked = rank(alpha @ stack.rows(q), q, exclude=exclude)
    with _output(args.out) as fh:
        mio.write_ranked_list(ranked, fh, names)
    return 0


def _metrics(ranked, evalset, ks) -> dict:
    out = {"mrr": mrr(ranked, evalset), "normalized_mrr": normalized_mrr(ranked, evalset)}
    for k in ks:
        if k <= len(ranked):
            out[f"recall_at_{k}"] = recall_at_k(ranked, evalset, k)
    return out


def cmd_eval(args) -> int:
    ranked, name_map = mio.read_ranked_list(args.ranked)
    if (args.evalset is None) == (args.members is None):
        raise UsageError("give exactly one of --evalset or --members")
    refs = mio.read_vertex_list(args.evalset) if args.evalset else [r for r in args.members.split(",") if r]
    evalset = mio.resolve_refs(refs, name_map)
    ks = parse_grid(args.k, integer=True)
    for k in ks:
        if not 1 <= k <= len(ranked):
            raise CliError("validation", f"--k {k} is outside 1..{len(ranked)}")
    for key, value in _metrics(ranked, evalset, ks).items():
        print(f"{key}={value!r}")
    return 0


def cmd_embed(args) -> int:
    emb = mio.load_edgelist_and_embed(args.edgelist, args.kind, args.dim, lcc=args.lcc, undirected=args.undirected)
    mio.save_dissimilarity_matrix(emb.D, args.out, args.format)
    if args.names_out:
        mio.save_names(emb.names, args.names_out)
    print(json.dumps({"n": int(emb.D.shape[0]), "kind": args.kind.upper(), "dim": args.dim, "out": args.out}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mqrank", description="Learn convex combinations of dissimilarities for ranking.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo setting and write per-trial rows")
    p.add_argument("--setting", choices=SETTINGS, required=True)
    p.add_argument("--k", help="grid of K values (pointmass), e.g. 1..7")
    p.add_argument("--beta", help="grid of Beta parameters (variance), e.g. 0.01,1,100")
    p.add_argument("--size-s", dest="size_s", help="grid of |S| values (sizeS), e.g. 1..10")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    p.add_argument("--engine", choices=ENGINES, default="sweep2d")
    p.add_argument("--n", type=int, help="vertices per graph (default 200)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--shared-graph", action="store_true", help="reuse one graph for all trials")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve", help="learn weights for a task file and rank for its target query")
    _add_matrix_options(p)
    p.add_argument("--task", required=True, help="JSON task file")
    p.add_argument("--engine", choices=ENGINES, help="default: sweep2d for 2 matrices, bnb otherwise")
    p.add_argument("--estimator", choices=[k.value for k in EstimatorKind], default="multi")
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--resolution", type=int, help="lattice resolution for --engine grid")
    p.add_argument("--out", help="ranked-list CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("rank", help="rank candidates for a query under fixed weights")
    _add_matrix_options(p)
    p.add_argument("--alpha", required=True, help="comma-separated weights, one per matrix")
    p.add_argument("--query", required=True, help="query vertex (index or name)")
    p.add_argument("--exclude", help="comma-separated vertices to leave out")
    p.add_argument("--out", help="ranked-list CSV (default stdout)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="score a ranked list against an evaluation set")
    p.add_argument("--ranked", required=True, help="ranked-list CSV")
    p.add_argument("--evalset", help="file of evaluation vertices")
    p.add_argument("--members", help="comma-separated evaluation vertices")
    p.add_argument("--k", default="1,5,10", help="recall cutoffs")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("embed", help="embed an edge list and write its distance matrix")
    p.add_argument("--edgelist", required=True)
    p.add_argument("--kind", type=str.upper, choices=["ASE", "LSE"], default="ASE")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--lcc", action="store_true", help="keep only the largest connected component")
    p.add_argument("--undirected", action="store_true", help="each line is an undirected edge")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=mio.FORMATS, help="output format (default: from the suffix)")
    p.add_argument("--names-out", help="write the kept vertex names here")
    p.set_defaults(func=cmd_embed)
    return parser


def _fail(kind: str, message: str, status: int) -> int:
    message = " ".join(str(message).split())
    print(f"error[{kind}]: {message}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except CliError as exc:
        return _fail(exc.kind, exc, 1)
    except mio.FormatError as exc:
        return _fail("format", exc, 1)
    except OSError as exc:
        return _fail("io", f"{exc.filename or ''}: {exc.strerror or exc}", 1)
    except (ValueError, KeyError, IndexError) as exc:
        return _fail("validation", exc.args[0] if exc.args else exc, 1)
    except RuntimeError as exc:
        return _fail("solver", exc, 1)


if __name__ == "__main__":
    sys.exit(main())
