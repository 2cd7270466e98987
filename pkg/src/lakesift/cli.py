"""Command-line entry point: ``index``, ``query``, ``eval`` and ``bench``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .config import Config, ConfigError, format_weights, load_config, parse_weights_text
from .eval.bench import generate_benchmark, read_domains, write_benchmark
from .eval.metrics import GroundTruth
from .eval.runner import evaluate, labeled_pairs, sample_targets, write_metrics
from .eval.weights import FitError, fit_weights
from .index.forest import IndexFormatError
from .index.store import WEIGHTS_FILE, LakeIndex
from .ingest import LoadError, load_lake, load_lake_with_report
from .query import discover, load_model, load_target
from .relatedness import EvidenceWeights, RelatednessError

logger = logging.getLogger("lakesift")


class CommandError(Exception):
    pass


def _config(args, **overrides) -> Config:
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return load_config(getattr(args, "config", None), **overrides)


def _weights(index_dir: Path, config: Config, path: str | None) -> EvidenceWeights:
    if path:
        return EvidenceWeights(parse_weights_text(Path(path).read_text(encoding="utf-8")))
    if config.eq3_weights == "fitted":
        f = index_dir / WEIGHTS_FILE
        if not f.exists():
            raise CommandError(f"eq3_weights = fitted but {f} does not exist")
        return EvidenceWeights(parse_weights_text(f.read_text(encoding="utf-8")))
    return EvidenceWeights(tuple(config.eq3_weights))


def _open_index(args) -> tuple[LakeIndex, Path]:
    index_dir = Path(args.index)
    # With --config, loading refuses an index built with different parameters;
    # query-time settings (eq3 weights, join length) come from the file.
    config = _config(args) if getattr(args, "config", None) else None
    return LakeIndex.load(index_dir, config), index_dir


def cmd_index(args) -> int:
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        raise CommandError(f"{out} exists and is not empty (use --force to overwrite)")
    config = _config(args, seed=args.seed, embedding_path=args.embeddings)
    start = time.perf_counter()
    datasets, report = load_lake_with_report(args.lake, config.ingest)
    index = LakeIndex.build(datasets, config, load_model(config))
    index.save(out)
    elapsed = time.perf_counter() - start
    print(f"tables\t{len(index.datasets)}")
    print(f"attributes\t{len(index.attributes)}")
    print(f"warnings\t{report.warning_count}")
    print(f"elapsed_s\t{elapsed:.2f}")
    return 0


def _emit(records: list[dict], as_json: bool, stream) -> None:
    for rec in records:
        if as_json:
            stream.write(json.dumps(rec) + "\n")
        else:
            stream.write("\t".join(_cell(v) for v in rec.values()) + "\n")


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    if isinstance(v, list):
        return ";".join(_cell(x) if not isinstance(x, list) else ",".join(map(str, x)) for x in v)
    return str(v)


def _table(records: list[dict], stream) -> None:
    rows = [r for r in records if r["record"] == "result"]
    stream.write(f"{'rank':>4}  {'distance':>8}  {'m':>3}  {'cov':>5}  dataset\n")
    for r in rows:
        stream.write(f"{r['rank']:>4}  {r['distance']:8.4f}  {r['m']:>3}  "
                     f"{r['coverage']:5.2f}  {r['dataset']}\n")
    for r in records:
        if r["record"] == "path":
            stream.write("path  " + " -> ".join(r["nodes"]) + "\n")
        elif r["record"] == "join_coverage":
            stream.write(f"join coverage  {r['dataset']}  {r['coverage']:.2f} -> "
                         f"{r['join_coverage']:.2f}\n")


def cmd_query(args) -> int:
    if args.k <= 0:
        raise CommandError("k must be >= 1")
    index, index_dir = _open_index(args)
    config = index.config
    weights = _weights(index_dir, config, args.weights)
    target = load_target(args.target, config)
    result = discover(index, target, args.k, weights, join_paths=args.join_paths,
                      model=load_model(config))
    records = result.records()
    if args.table:
        _table(records, sys.stdout)
    else:
        _emit(records, args.json, sys.stdout)
    return 0


def cmd_eval(args) -> int:
    index, index_dir = _open_index(args)
    config = index.config
    ks = sorted({int(k) for part in args.k for k in str(part).split(",") if k})
    if not ks or ks[0] < 1:
        raise CommandError("k values must be >= 1")
    truth = GroundTruth.read(args.truth)
    targets = load_lake(args.targets, config.ingest)
    seed = args.seed if args.seed is not None else config.seed
    targets = sample_targets(targets, args.sample, seed)
    model = load_model(config)
    weights = _weights(index_dir, config, args.weights)
    if args.fit_weights:
        pairs = labeled_pairs(index, targets, truth, args.pairs, seed, model)
        fit = fit_weights(pairs, seed)
        Path(args.fit_weights).write_text(format_weights(fit.weights.w), encoding="utf-8")
        shown = ", ".join(f"{w:.4g}" for w in fit.weights.w)
        print(f"fitted weights N,V,F,E,D = {shown}; held-out accuracy {fit.accuracy:.3f}",
              file=sys.stderr)
        weights = fit.weights
    rows, _, skipped = evaluate(index, targets, truth, ks, weights, model)
    for t in skipped:
        print(f"skipped target not in truth: {t}", file=sys.stderr)
    if args.out:
        write_metrics(rows, args.out)
    else:
        write_metrics(rows, sys.stdout)
    return 0


def cmd_bench(args) -> int:
    config = _config(args)
    bases = load_lake(args.base_dir, config.ingest)
    domains = read_domains(args.domains) if args.domains else None
    seed = args.seed if args.seed is not None else config.seed
    lake, truth = generate_benchmark(bases, args.n, seed, domains, config=config.ingest)
    out = write_benchmark(lake, truth, args.out)
    print(f"wrote {len(lake)} tables to {out / 'lake'} and truth to {out / 'truth.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lakesift", description="Related-table discovery in data lakes.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="profile a lake and build the four indexes")
    p.add_argument("lake")
    p.add_argument("out")
    p.add_argument("--config")
    p.add_argument("--force", action="store_true")
    p.add_argument("--embeddings", help="word-vector file")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="rank lake tables related to a target table")
    p.add_argument("index")
    p.add_argument("target")
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--config")
    p.add_argument("--join-paths", action="store_true")
    p.add_argument("--weights", help="file with five evidence weights")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--table", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="precision, recall and coverage over targets")
    p.add_argument("index")
    p.add_argument("targets")
    p.add_argument("truth")
    p.add_argument("-k", nargs="+", default=["10"], help="k values (space or comma separated)")
    p.add_argument("--config")
    p.add_argument("--weights")
    p.add_argument("--out")
    p.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--fit-weights", metavar="FILE", help="fit weights first and write them here")
    p.add_argument("--pairs", type=int, default=200)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="derive a benchmark lake with ground truth")
    p.add_argument("base_dir")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--domains", help="CSV mapping base columns to shared domains")
    p.add_argument("--config")
    p.add_argument("out")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CommandError, ConfigError, LoadError, IndexFormatError, RelatednessError,
            FitError, ValueError, OSError) as exc:
        print(f"lakesift: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
