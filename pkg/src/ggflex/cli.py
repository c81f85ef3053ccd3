"""Command-line entry point: ``ggflex <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on data or model errors.
Diagnostics go to stderr; results go to ``--out`` files or stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import __version__
from .chipclass import load_model, predict, predict_proba, save_model, train, train_fixed
from .dataset import DataError, deduplicate, load_csv, normalize_zscore
from .evaluation import load_score_table, rank_summary, run_benchmark
from .graph import build_gabriel, vertex_degrees
from .margin import log_grid, margin_curve, margin_surface
from .quality import class_thresholds, quality_index, removal_mask
from .tuner import TuningError, cv_objective, h_search_space, tune

log = logging.getLogger("ggflex")

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    subcommand: str
    data: Optional[str] = None
    seed: int = 0
    normalize: bool = True
    h_bounds: tuple = (0.1, 10.0)
    budget: int = 50
    folds: dict = field(default_factory=dict)
    out: Optional[str] = None


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _dump_json(obj, path):
    with _output(path) as fh:
        fh.write(json.dumps(obj, indent=2) + "\n")


def _load_dataset(args):
    data = load_csv(args.data, _label_column(args.label_column), args.positive_label,
                    delimiter=args.delimiter, header=not args.no_header)
    if args.dedup:
        data, kept = deduplicate(data)
        log.info("dedup kept %d rows", len(kept))
    return data


def _label_column(v):
    try:
        return int(v)
    except ValueError:
        return v


def _prepared(args):
    data = _load_dataset(args)
    if args.normalize:
        data, _ = normalize_zscore(data)
    return data


def _parse_range(text: str):
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return v


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_graph(args):
    data = _prepared(args)
    g = build_gabriel(data.X)
    payload = json.loads(g.to_json())
    payload["degrees"] = [int(v) for v in vertex_degrees(g)]
    payload["dataset_hash"] = data.digest()
    _dump_json(payload, args.out)
    if args.edges:
        with open(args.edges, "w") as fh:
            g.write_edge_list(fh)


def cmd_quality(args):
    data = _prepared(args)
    g = build_gabriel(data.X)
    q = quality_index(g, data.y)
    theta = class_thresholds(q, data.y)
    removed = removal_mask(q, data.y, theta, args.h)
    labels = (data.negative_label, data.positive_label)
    with _output(args.out) as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        fh.write(f"# theta_pos: {float(theta[0])!r}\n# theta_neg: {float(theta[1])!r}\n")
        fh.write(f"# h_pos: {args.h[0]!r}\n# h_neg: {args.h[1]!r}\n")
        fh.write("index\tlabel\tdegree\tq\tremoved\n")
        deg = vertex_degrees(g)
        for i in range(data.m):
            fh.write(f"{i}\t{labels[data.y[i]]}\t{deg[i]}\t{float(q[i])!r}\t{int(removed[i])}\n")


def _fit(data, args, h):
    if args.fixed:
        return train_fixed(data, normalize=args.normalize)
    return train(data, h, enable_filter=not args.no_filter, normalize=args.normalize)


def _with_meta(model, args, **extra):
    return replace(model, metadata=dict(model.metadata, seed=args.seed, **extra))


def cmd_train(args):
    data = _load_dataset(args)
    model = _with_meta(_fit(data, args, args.h), args)
    save_model(model, args.out)
    log.info("model with %d support edges written to %s", model.n_edges, args.out)


def cmd_predict(args):
    model = load_model(args.model)
    data = _load_dataset(args)
    p = predict_proba(data.X, model)
    yhat = predict(data.X, model)
    labels = (data.negative_label, data.positive_label)
    with _output(args.out) as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        fh.write(f"# model_dataset_hash: {model.metadata.get('dataset_hash', '')}\n")
        fh.write("index\tp_positive\tpredicted\n")
        for i in range(data.m):
            fh.write(f"{i}\t{float(p[i])!r}\t{labels[yhat[i]]}\n")


def cmd_tune(args):
    data = _load_dataset(args)
    objective = cv_objective(data, args.inner_k, args.seed, normalize=args.normalize)
    space = h_search_space(args.h_low, args.h_high, budget=args.budget, seed=args.seed)
    with _output(args.history) as fh:
        result = tune(objective, space,
                      callback=lambda r: fh.write(json.dumps(dict(r.to_dict(), schema_version=SCHEMA_VERSION)) + "\n"))
    h = (result.best.params["h_pos"], result.best.params["h_neg"])
    log.info("best h=(%.6g, %.6g) validation AUC=%.6f", h[0], h[1], result.best.score)
    if args.out:
        model = train(data, h, normalize=args.normalize)
        model = _with_meta(model, args, validation_auc=result.best.score, budget=args.budget)
        save_model(model, args.out)


def cmd_bench(args):
    data = _load_dataset(args)

    def progress(fold, flex, fixed):
        log.info("fold %d: flexible AUC %.4f, fixed AUC %.4f", fold, flex, fixed)

    report = run_benchmark(data, args.outer_k, args.inner_k, args.budget, args.seed,
                           normalize=args.normalize, h_low=args.h_low, h_high=args.h_high,
                           progress=progress)
    payload = report.to_dict()
    payload["config"]["dedup"] = bool(args.dedup)
    _dump_json(payload, args.out)


def cmd_margin_curve(args):
    rows = margin_curve(args.var, seed=args.seed, n_per_class=args.n_per_class)
    with _output(args.out) as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n# seed: {args.seed}\n")
        fh.write("variance\tmean_unfiltered\tmean_filtered\tmean_q\n")
        for v, mu, mf, mq in rows:
            fh.write(f"{v!r}\t{mu!r}\t{mf!r}\t{mq!r}\n")


def cmd_margin_surface(args):
    if args.data:
        data = _prepared(args)
    else:
        from .dataset import gen_gaussian_pair
        data = gen_gaussian_pair(variance=args.variance, n_per_class=args.n_per_class, seed=args.seed)
    grid = log_grid(args.h_range[0], args.h_range[1], args.grid)
    surf = margin_surface(data, grid, grid)
    with _output(args.out) as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n# dataset_hash: {data.digest()}\n")
        fh.write("h1\th2\tmean_margin\tkept_count\n")
        for hp, hn, mm, kc in surf.rows():
            fh.write(f"{hp!r}\t{hn!r}\t{mm!r}\t{kc}\n")


def cmd_stats(args):
    table = load_score_table(args.table, delimiter=args.delimiter)
    summary = rank_summary(table, alpha=args.alpha, q_alpha=args.q, f_critical=args.f_critical)
    if args.json:
        _dump_json(summary.to_dict(), args.json)
    sys.stdout.write(summary.to_text() + "\n")
    if not args.json:
        sys.stdout.write(json.dumps(summary.to_dict()) + "\n")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _data_args(p, required=True):
    p.add_argument("--data", required=required, help="delimited text file")
    p.add_argument("--label-column", default="-1", help="label column name or 0-based index (default: last)")
    p.add_argument("--positive-label", default=None, help="label value of the positive class")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true", help="file has no header row")
    p.add_argument("--dedup", action="store_true",
                   help="drop repeated rows and rows whose features occur with both labels")


def _norm_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--normalize", dest="normalize", action="store_true", default=True,
                   help="z-score features (default)")
    g.add_argument("--no-normalize", dest="normalize", action="store_false")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ggflex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=fn)
        return p

    p = add("graph", cmd_graph, "build the Gabriel graph; JSON adjacency")
    _data_args(p); _norm_args(p)
    p.add_argument("--out", help="JSON output (default stdout)")
    p.add_argument("--edges", help="also write a two-column edge list here")

    p = add("quality", cmd_quality, "per-sample quality, thresholds and removal decisions")
    _data_args(p); _norm_args(p)
    p.add_argument("--h", nargs=2, type=_positive_float, default=[1.0, 1.0], metavar=("H_POS", "H_NEG"))
    p.add_argument("--out")

    p = add("train", cmd_train, "train a Chipclass model")
    _data_args(p); _norm_args(p)
    p.add_argument("--h", nargs=2, type=_positive_float, default=[1.0, 1.0], metavar=("H_POS", "H_NEG"))
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--no-filter", action="store_true", help="keep every sample")
    mode.add_argument("--fixed", action="store_true", help="fixed class-mean thresholds (ignores --h)")
    p.add_argument("--out", required=True, help="model JSON")

    p = add("predict", cmd_predict, "score a dataset with a saved model")
    _data_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out")

    for name, fn, help_ in (("tune", cmd_tune, "tune (h_pos, h_neg) by inner cross-validation"),
                            ("bench", cmd_bench, "nested cross-validation benchmark")):
        p = add(name, fn, help_)
        _data_args(p); _norm_args(p)
        p.add_argument("--budget", type=int, default=50)
        p.add_argument("--h-low", type=_positive_float, default=0.1)
        p.add_argument("--h-high", type=_positive_float, default=10.0)
        p.add_argument("--inner-k", type=int, default=5)
        if name == "tune":
            p.add_argument("--history", help="JSON-lines trial history (default stdout)")
            p.add_argument("--out", help="write the model refitted with the best h")
        else:
            p.add_argument("--outer-k", type=int, default=10)
            p.add_argument("--out", help="JSON report (default stdout)")

    p = add("margin-curve", cmd_margin_curve, "mean margin and quality against Gaussian variance")
    p.add_argument("--var", type=_parse_range, default=_parse_range("0:1:0.1"), metavar="START:STOP:STEP")
    p.add_argument("--n-per-class", type=int, default=500)
    p.add_argument("--out")

    p = add("margin-surface", cmd_margin_surface, "kept-sample mean margin over an (h1, h2) grid")
    _data_args(p, required=False); _norm_args(p)
    p.set_defaults(normalize=False)
    p.add_argument("--variance", type=float, default=0.3, help="Gaussian variance when --data is absent")
    p.add_argument("--n-per-class", type=int, default=500)
    p.add_argument("--h-range", nargs=2, type=_positive_float, default=[0.25, 4.0], metavar=("LO", "HI"))
    p.add_argument("--grid", type=int, default=17)
    p.add_argument("--out")

    p = add("stats", cmd_stats, "average ranks, Friedman test and Bonferroni-Dunn CD")
    p.add_argument("--table", required=True, help="CSV: dataset, classifier columns")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--q", type=float, default=None, help="override the Bonferroni-Dunn q value")
    p.add_argument("--f-critical", type=float, default=None,
                   help="critical F value (default: F quantile at 1 - alpha)")
    p.add_argument("--json", help="write the JSON report here")
    return parser


def run_config(args) -> RunConfig:
    return RunConfig(
        subcommand=args.command,
        data=getattr(args, "data", None),
        seed=args.seed,
        normalize=getattr(args, "normalize", False),
        h_bounds=(getattr(args, "h_low", 0.1), getattr(args, "h_high", 10.0)),
        budget=getattr(args, "budget", 0),
        folds={k: getattr(args, k) for k in ("outer_k", "inner_k") if hasattr(args, k)},
        out=getattr(args, "out", None),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.debug("run config: %s", asdict(run_config(args)))
    try:
        args.func(args)
    except (DataError, TuningError, ValueError, OSError) as exc:
        print(f"ggflex {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
