"""Averaged discovery metrics over a set of targets, and labeled pairs for weight fitting."""

from __future__ import annotations

import csv
import logging
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from ..index.store import LakeCatalog
from ..ingest import Dataset
from ..joins import build_join_graph, find_join_paths, paths_from
from ..profile import EmbeddingModel
from ..query import discover
from ..relatedness import EvidenceWeights, rank
from .metrics import (
    GroundTruth,
    attribute_precision,
    coverage,
    join_attribute_precision,
    join_coverage,
    precision_recall,
    split_attr_id,
)
from .weights import LabeledPair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricRow:
    k: int
    precision: float
    recall: float
    coverage: float
    join_coverage: float
    attribute_precision: float
    join_attribute_precision: float
    targets: int


METRIC_FIELDS = tuple(f.name for f in fields(MetricRow))


def _mean(xs: Sequence[float]) -> float:
    return float(np.mean(xs)) if len(xs) else 0.0


def sample_targets(datasets: Sequence[Dataset], n: int | None, seed: int) -> list[Dataset]:
    """Seeded sample without replacement, returned in id order."""
    ordered = sorted(datasets, key=lambda d: d.id)
    if n is None or n >= len(ordered):
        return ordered
    idx = np.random.default_rng(seed).choice(len(ordered), size=n, replace=False)
    return [ordered[i] for i in sorted(idx)]


@dataclass
class TargetMetrics:
    """Per-target metric values, one entry per k."""

    target: str
    precision: list[float]
    recall: list[float]
    coverage: list[float]
    join_coverage: list[float]
    attribute_precision: list[float]
    join_attribute_precision: list[float]


def evaluate_target(lake: LakeCatalog, target: Dataset, truth: GroundTruth, ks: Sequence[int],
                    weights: EvidenceWeights | None = None, model: EmbeddingModel | None = None,
                    graph=None) -> TargetMetrics:
    """Metrics for one target at every k.

    The ranking is computed once at the largest k and cut to each prefix, so
    recall can only grow with k. The target itself is excluded from its own
    answer.
    """
    ks = sorted(set(ks))
    graph = graph if graph is not None else build_join_graph(lake)
    res = discover(lake, target, ks[-1], weights, model=model, exclude=[target.id])
    related = res.evidence.related_datasets() - {target.id}
    names = {p.attr_id: p.name for p in res.profiles}

    def triples(ds):
        return {(names[ta], ds, split_attr_id(ca)[1]) for ta, ca in res.evidence.alignments(ds)}

    out = TargetMetrics(target.id, [], [], [], [], [], [])
    for k in ks:
        top = res.ids()[:k]
        p, r = precision_recall(top, truth, target.id)
        paths = find_join_paths(graph, top, related, lake.config.max_join_len)
        cov, jcov, ap, jap = [], [], [], []
        for ds in top:
            base = res.covered_names(ds)
            nodes = sorted({n for pth in paths_from(paths, ds) for n in pth.nodes[1:]})
            cov.append(coverage(target.arity, base))
            jcov.append(join_coverage(target.arity, base, [res.covered_names(n) for n in nodes]))
            ap.append(attribute_precision(triples(ds), truth, target.id))
            groups: dict[str, set] = {}
            for n in [ds, *nodes]:
                for ta, d, a in triples(n):
                    groups.setdefault(ta, set()).add((d, a))
            jap.append(join_attribute_precision(groups, truth, target.id))
        out.precision.append(p)
        out.recall.append(r)
        out.coverage.append(_mean(cov))
        out.join_coverage.append(_mean(jcov))
        out.attribute_precision.append(_mean(ap))
        out.join_attribute_precision.append(_mean(jap))
    return out


def evaluate(lake: LakeCatalog, targets: Sequence[Dataset], truth: GroundTruth,
             ks: Sequence[int], weights: EvidenceWeights | None = None,
             model: EmbeddingModel | None = None
             ) -> tuple[list[MetricRow], list[TargetMetrics], list[str]]:
    """Average the metrics over targets; targets missing from the truth are skipped."""
    ks = sorted(set(ks))
    if not ks or ks[0] < 1:
        raise ValueError("k values must be >= 1")
    graph = build_join_graph(lake)
    per_target, skipped = [], []
    for t in targets:
        if not truth.covers(t.id):
            logger.warning("target %s not in ground truth; skipped", t.id)
            skipped.append(t.id)
            continue
        per_target.append(evaluate_target(lake, t, truth, ks, weights, model, graph))
    rows = []
    for i, k in enumerate(ks):
        rows.append(MetricRow(k, *(
            _mean([getattr(m, name)[i] for m in per_target])
            for name in METRIC_FIELDS[1:-1]), len(per_target)))
    return rows, per_target, skipped


def write_metrics(rows: Sequence[MetricRow], path_or_file) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_FIELDS)
        for r in rows:
            w.writerow(f"{x:.6f}" if isinstance(x, float) else x for x in astuple(r))

    if isinstance(path_or_file, (str, Path)):
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
    else:
        emit(path_or_file)


def labeled_pairs(lake: LakeCatalog, targets: Sequence[Dataset], truth: GroundTruth,
                  n: int = 200, seed: int = 42, model: EmbeddingModel | None = None,
                  budget: int | None = None) -> list[LabeledPair]:
    """Balanced sample of (target, table) distance vectors labeled from the truth.

    Candidates come from each target's index evidence. A table with no
    evidence at all has every aggregate at 1; such pairs top up the negative
    side when evidence-bearing negatives run short.
    """
    budget = budget or lake.config.graph_budget
    pos, neg, silent = [], [], []
    for t in targets:
        if not truth.covers(t.id):
            continue
        res = discover(lake, t, 1, model=model, exclude=[t.id], budget=budget)
        related = truth.related(t.id)
        seen = set()
        for v in rank(res.evidence, exclude=[t.id]):
            seen.add(v.dataset_id)
            pair = LabeledPair(v.dv, int(v.dataset_id in related), t.id, v.dataset_id)
            (pos if pair.label else neg).append(pair)
        for ds in lake.dataset_ids():
            if ds != t.id and ds not in seen and ds not in related:
                silent.append(LabeledPair((1.0,) * 5, 0, t.id, ds))
    rng = np.random.default_rng(seed)
    half = n // 2

    def take(items, m):
        if len(items) <= m:
            return list(items)
        return [items[i] for i in sorted(rng.choice(len(items), size=m, replace=False))]

    positives = take(pos, half)
    negatives = take(neg, n - len(positives))
    if len(negatives) < n - len(positives):
        negatives += take(silent, n - len(positives) - len(negatives))
    return positives + negatives
