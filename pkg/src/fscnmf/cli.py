"""Command-line entry point: ``fscnmf {synth,embed,eval,sweep}``.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .content import TFIDF_VARIANT, read_stopwords
from .exceptions import ConvergenceError, FSCNMFError, NumericalFailureError, SingularMatrixError
from .factor import Hyperparams
from .graph import write_node_order
from .io import read_json, read_matrix_tsv, sha256_file, write_json, write_matrix_tsv
from .pipeline import classify_embedding, cluster_embedding, embed, load_dataset
from .synth import SynthConfig, edge_pairs, generate

logger = logging.getLogger("fscnmf")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


class UsageError(Exception):
    pass


def _fmt(x):
    return f"{x:.17g}" if isinstance(x, float) else str(x)


# --- argument parsing ----------------------------------------------------------------


def _add_hyperparams(p):
    g = p.add_argument_group("factorization")
    g.add_argument("--k", type=int, default=None, help="embedding dimension (default 10 x #labels)")
    for name in ("alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3"):
        g.add_argument(f"--{name}", type=float, default=1.0)
    g.add_argument("--gamma", type=float, default=0.5)
    g.add_argument("--order", type=int, default=1, help="proximity order m")
    g.add_argument("--variant", choices=["als", "mult", "mult-l1"], default="als")
    g.add_argument("--line-search", action="store_true")
    g.add_argument("--inner", type=int, default=3)
    g.add_argument("--max-outer", type=int, default=100)
    g.add_argument("--tol", type=float, default=1e-4)
    g.add_argument("--init", choices=["nndsvd", "random"], default="nndsvd")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-jobs", type=int, default=1)


def _add_inputs(p):
    g = p.add_argument_group("inputs")
    g.add_argument("--edges", required=True)
    g.add_argument("--docs")
    g.add_argument("--content-matrix")
    g.add_argument("--labels")
    g.add_argument("--nodes", help="node-order file; line i is node index i")
    g.add_argument("--directed", action="store_true")
    g.add_argument("--min-df", type=int, default=1)
    g.add_argument("--stopwords")


def build_parser():
    parser = argparse.ArgumentParser(prog="fscnmf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a planted-partition benchmark")
    p.add_argument("--config", help="JSON file with flat keys matching the flags")
    defaults = SynthConfig()
    p.add_argument("--n", type=int, default=defaults.n)
    p.add_argument("--K", type=int, default=defaults.K)
    p.add_argument("--p-in", type=float, default=defaults.p_in)
    p.add_argument("--p-out", type=float, default=defaults.p_out)
    p.add_argument("--vocab-size", type=int, default=defaults.vocab_size)
    p.add_argument("--q", type=float, default=defaults.q)
    p.add_argument("--doc-len", type=int, default=defaults.doc_len)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--out", required=True)

    p = sub.add_parser("embed", help="factorize a graph with node content")
    p.add_argument("--config", help="JSON file with flat keys matching the flags")
    _add_inputs(p)
    _add_hyperparams(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="cluster or classify an embedding")
    p.add_argument("--config", help="JSON file with flat keys matching the flags")
    p.add_argument("--embedding", required=True)
    p.add_argument("--labels")
    p.add_argument("--task", choices=["cluster", "classify"], required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--knn", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for report.json and report.tsv")

    p = sub.add_parser("sweep", help="embed + cluster over a parameter grid")
    p.add_argument("--config", help="JSON file with flat keys matching the flags")
    _add_inputs(p)
    _add_hyperparams(p)
    p.add_argument("--param", choices=["gamma", "alpha1,beta1", "order"], required=True)
    p.add_argument("--values", nargs="*", default=[], help="grid values; pairs as a:b")
    p.add_argument("--K", type=int)
    p.add_argument("--out", required=True)
    return parser


def parse_args(argv):
    """Parse ``argv``; values from ``--config`` act as defaults that flags override."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            values = read_json(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        values = {k.replace("-", "_"): v for k, v in values.items()}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {unknown}")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def hyperparams_from_args(args):
    return Hyperparams(
        k=args.k,
        alpha1=args.alpha1,
        alpha2=args.alpha2,
        alpha3=args.alpha3,
        beta1=args.beta1,
        beta2=args.beta2,
        beta3=args.beta3,
        gamma=args.gamma,
        m_order=args.order,
        inner_iters=args.inner,
        max_outer=args.max_outer,
        rel_tol=args.tol,
        variant=args.variant,
        line_search=args.line_search,
        seed=args.seed,
        init=args.init,
    )


def _resolve_node_order(args):
    # A nodes.txt written next to the edge list (as ``synth`` does) fixes the
    # document alignment and keeps isolated nodes; use it unless told otherwise.
    if args.nodes is None:
        sibling = os.path.join(os.path.dirname(os.path.abspath(args.edges)), "nodes.txt")
        if os.path.exists(sibling):
            logger.info("using node order from %s", sibling)
            args.nodes = sibling


def _dataset_from_args(args):
    _resolve_node_order(args)
    stopwords = read_stopwords(args.stopwords) if args.stopwords else None
    return load_dataset(
        args.edges,
        docs=args.docs,
        content_matrix=args.content_matrix,
        labels=args.labels,
        nodes=args.nodes,
        directed=args.directed,
        min_df=args.min_df,
        stopwords=stopwords,
    )


def _input_checksums(args):
    out = {}
    for name in ("edges", "docs", "content_matrix", "labels", "nodes", "stopwords"):
        path = getattr(args, name, None)
        if path:
            out[name] = {"path": path, "sha256": sha256_file(path)}
    return out


# --- subcommands ---------------------------------------------------------------------


def cmd_synth(args):
    cfg = SynthConfig(
        n=args.n,
        K=args.K,
        p_in=args.p_in,
        p_out=args.p_out,
        vocab_size=args.vocab_size,
        q=args.q,
        doc_len=args.doc_len,
        seed=args.seed,
    ).validate()
    g, docs = generate(cfg)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "edges.tsv"), "w", encoding="utf-8") as fh:
        for i, j in edge_pairs(g):
            fh.write(f"{g.node_ids[i]}\t{g.node_ids[j]}\n")
    with open(os.path.join(args.out, "labels.tsv"), "w", encoding="utf-8") as fh:
        for node, label in zip(g.node_ids, g.labels):
            fh.write(f"{node}\t{g.label_names[label]}\n")
    with open(os.path.join(args.out, "docs.txt"), "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(" ".join(doc) + "\n")
    write_node_order(os.path.join(args.out, "nodes.txt"), g.node_ids)
    with open(os.path.join(args.out, "config.json"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_json())
    return EXIT_OK


def cmd_embed(args):
    g, content = _dataset_from_args(args)
    hp = hyperparams_from_args(args)
    os.makedirs(args.out, exist_ok=True)
    try:
        result = embed(g, content, hp, n_jobs=args.n_jobs)
    except NumericalFailureError as exc:
        if exc.trace is not None:
            exc.trace.to_csv(os.path.join(args.out, "trace.csv"))
        raise

    state, trace, hp = result.state, result.trace, result.hyperparams
    write_matrix_tsv(os.path.join(args.out, "embedding.tsv"), g.node_ids, result.embedding())
    write_matrix_tsv(os.path.join(args.out, "b1.tsv"), g.node_ids, state.B1)
    write_matrix_tsv(os.path.join(args.out, "u.tsv"), g.node_ids, state.U)
    trace.to_csv(os.path.join(args.out, "trace.csv"))
    write_node_order(os.path.join(args.out, "nodes.txt"), g.node_ids)
    last = trace.records[-1]
    meta = {
        "version": __version__,
        "command": "embed",
        "hyperparams": hp.to_dict(),
        "inputs": _input_checksums(args),
        "directed": args.directed,
        "min_df": args.min_df,
        "content_weighting": content.variant if content.variant else TFIDF_VARIANT,
        "n_nodes": g.n,
        "n_features": int(content.matrix.shape[1]),
        "self_loops_dropped": g.self_loops_dropped,
        "n_outer": trace.n_outer,
        "converged": trace.converged,
        "final_d1": last[3],
        "final_d2": last[4],
    }
    write_json(os.path.join(args.out, "meta.json"), meta)
    return EXIT_OK


def _read_labels_for(path, node_ids):
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) != 2:
                raise UsageError(f"malformed label line {line!r}")
            labels[parts[0]] = parts[1]
    missing = [node for node in node_ids if node not in labels]
    if missing:
        raise UsageError(f"{len(missing)} embedded node(s) have no label, e.g. {missing[:3]}")
    names = sorted(set(labels[node] for node in node_ids))
    code = {name: i for i, name in enumerate(names)}
    return np.array([code[labels[node]] for node in node_ids], dtype=np.int64)


def evaluate(X, labels, task, K=None, seed=0, train_fraction=0.5, knn=5):
    """Metrics dict for one embedding; shared by ``eval`` and ``sweep``."""
    if task == "cluster":
        if K is None and labels is None:
            raise UsageError("--task cluster needs --K or --labels")
        result = cluster_embedding(X, labels, K, seed)
        metrics = {"K": int(K if K is not None else np.unique(labels).size), "inertia": result.inertia}
        if result.accuracy is not None:
            metrics["accuracy"] = result.accuracy
        return metrics, result.assignments
    if labels is None:
        raise UsageError("--task classify needs --labels")
    report = classify_embedding(X, labels, train_fraction, seed, knn)
    metrics = {
        "train_fraction": train_fraction,
        "knn": knn,
        "macro_f1": report.macro_f1,
        "micro_f1": report.micro_f1,
    }
    return metrics, None


def cmd_eval(args):
    node_ids, X = read_matrix_tsv(args.embedding)
    labels = _read_labels_for(args.labels, node_ids) if args.labels else None
    metrics, assignments = evaluate(
        X, labels, args.task, args.K, args.seed, args.train_fraction, args.knn
    )
    meta_path = os.path.join(os.path.dirname(os.path.abspath(args.embedding)), "meta.json")
    report = {
        "task": args.task,
        "seed": args.seed,
        "metrics": metrics,
        "embedding": {"path": args.embedding, "sha256": sha256_file(args.embedding)},
        "hyperparams": read_json(meta_path).get("hyperparams") if os.path.exists(meta_path) else None,
    }
    print(json.dumps(report, sort_keys=True))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_json(os.path.join(args.out, "report.json"), report)
        with open(os.path.join(args.out, "report.tsv"), "w", encoding="utf-8") as fh:
            fields = [args.task, str(args.seed)] + [f"{k}={_fmt(v)}" for k, v in sorted(metrics.items())]
            fh.write("\t".join(fields) + "\n")
        if assignments is not None:
            write_matrix_tsv(os.path.join(args.out, "clusters.tsv"), node_ids, assignments[:, None].astype(float))
    return EXIT_OK


def _grid(param, values):
    if not values:
        raise UsageError("empty sweep grid")
    try:
        if param == "gamma":
            grid = sorted({float(v) for v in values})
            return [{"gamma": v} for v in grid]
        if param == "order":
            grid = sorted({int(v) for v in values})
            return [{"order": v} for v in grid]
        pairs = sorted({tuple(float(x) for x in v.split(":")) for v in values})
    except ValueError as exc:
        raise UsageError(f"bad grid value: {exc}") from exc
    if any(len(p) != 2 for p in pairs):
        raise UsageError("alpha1,beta1 grid values must look like a:b")
    return [{"alpha1": a, "beta1": b} for a, b in pairs]


def cmd_sweep(args):
    grid = _grid(args.param, args.values)
    g, content = _dataset_from_args(args)
    labels = g.labels
    if labels is None:
        raise UsageError("sweep needs --labels to score clustering accuracy")
    base = hyperparams_from_args(args)
    os.makedirs(args.out, exist_ok=True)

    rows, timing = [], []
    fitted = None
    for point in grid:
        start = time.perf_counter()
        if args.param == "gamma":
            if fitted is None:
                fitted = embed(g, content, base, n_jobs=args.n_jobs)
            X = fitted.embedding(point["gamma"])
        else:
            values = dict(base.to_dict())
            if "order" in point:
                values["m_order"] = point["order"]
            else:
                values.update(point)
            X = embed(g, content, Hyperparams(**values), n_jobs=args.n_jobs).embedding()
        metrics, _ = evaluate(X, labels, "cluster", args.K, args.seed)
        rows.append([point[key] for key in point] + [metrics["accuracy"]])
        timing.append([point[key] for key in point] + [time.perf_counter() - start])

    header = list(grid[0]) + ["accuracy"]
    with open(os.path.join(args.out, "sweep.tsv"), "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")
    with open(os.path.join(args.out, "sweep_timing.tsv"), "w", encoding="utf-8") as fh:
        fh.write("\t".join(list(grid[0]) + ["seconds"]) + "\n")
        for row in timing:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "embed": cmd_embed, "eval": cmd_eval, "sweep": cmd_sweep}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    except UsageError as exc:
        print(f"fscnmf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (NumericalFailureError, SingularMatrixError, ConvergenceError) as exc:
        print(f"fscnmf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, FSCNMFError, ValueError, KeyError, OSError) as exc:
        print(f"fscnmf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
