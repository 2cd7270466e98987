"""Attribute distance rows, their per-table aggregation and top-k ranking.

For a target table every attribute is looked up in the four indexes. Hits
are merged into one row of five distances per (target attribute, candidate
attribute) pair, numeric pairs get a KS distance when the guards allow it,
and rows are then aggregated per candidate table: a weighted mean per
evidence type (weights from the complementary CDF of the lookup
population), then a weighted l2-norm across types.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import EVIDENCE_TYPES
from .index.store import LakeCatalog
from .profile import AttributeProfile

N, V, F, E, D = range(5)
LOOKUP_TYPES = ("N", "V", "F", "E")


class RelatednessError(ValueError):
    pass


@dataclass(frozen=True)
class EvidenceWeights:
    w: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.w)
        if len(w) != 5:
            raise RelatednessError("need one weight per evidence type (5)")
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise RelatednessError("weights must be finite and non-negative")
        if not any(x > 0 for x in w):
            raise RelatednessError("weights must not all be zero")
        object.__setattr__(self, "w", w)

    def scaled(self, factor: float) -> "EvidenceWeights":
        return EvidenceWeights(tuple(x * factor for x in self.w))


@dataclass(frozen=True)
class DistanceRow:
    target_attr: str
    candidate_attr: str
    d: tuple[float, float, float, float, float]
    # Which evidence types can exist for this pair (D only for two numeric
    # columns, V and E only for two text columns).
    applicable: tuple[bool, bool, bool, bool, bool] = (True,) * 5

    @property
    def mean(self) -> float:
        return sum(self.d) / 5.0


@dataclass(frozen=True)
class DistanceVector:
    dataset_id: str
    dv: tuple[float, float, float, float, float]
    combined: float
    m: int
    mask: tuple[bool, bool, bool, bool, bool] = (True,) * 5


@dataclass
class CandidateEvidence:
    """Everything one target's lookups produced."""

    rows: dict[str, list[DistanceRow]] = field(default_factory=dict)
    populations: dict[tuple[str, str], list[float]] = field(default_factory=dict)
    target_attrs: list[str] = field(default_factory=list)

    def related_datasets(self) -> set[str]:
        return set(self.rows)

    def covered(self, dataset_id: str) -> set[str]:
        return {r.target_attr for r in self.rows.get(dataset_id, ())}

    def alignments(self, dataset_id: str) -> set[tuple[str, str]]:
        return {(r.target_attr, r.candidate_attr) for r in self.rows.get(dataset_id, ())}


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sample KS statistic: the largest gap between the empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if len(a) == 0 or len(b) == 0:
        return 1.0
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def numeric_distance(a: Sequence[float], b: Sequence[float], *, subjects_related: bool,
                     name_related: bool, format_related: bool) -> float:
    if not (subjects_related or name_related or format_related):
        return 1.0
    if len(a) < 2 or len(b) < 2:
        return 1.0
    return ks_statistic(a, b)


def column_weights(population: Sequence[float], observed: float) -> float:
    """Share of the population strictly farther than ``observed``."""
    if not population:
        return 0.0
    return sum(d > observed for d in population) / len(population)


def aggregate_column(values: Sequence[float], weights: Sequence[float]) -> float:
    if not values:
        raise RelatednessError("cannot aggregate an empty column")
    total = float(sum(weights))
    if total <= 0.0:
        return float(sum(values)) / len(values)
    return float(sum(w * v for w, v in zip(weights, values))) / total


def combine(dv: Sequence[float], weights: EvidenceWeights | Sequence[float],
            mask: Sequence[bool] | None = None) -> float:
    w = weights.w if isinstance(weights, EvidenceWeights) else tuple(weights)
    if not any(x > 0 for x in w):
        raise RelatednessError("weights must not all be zero")
    if mask is None:
        mask = (True,) * len(dv)
    num = sum((wt * x) ** 2 for wt, x, keep in zip(w, dv, mask) if keep)
    den = sum(wt for wt, keep in zip(w, mask) if keep)
    if den <= 0.0:
        return 1.0
    return min(1.0, max(0.0, math.sqrt(num / den)))


def _applicable(target: AttributeProfile, cand_numeric: bool, cand_has_embedding: bool
                ) -> tuple[bool, bool, bool, bool, bool]:
    both_text = not target.is_numeric and not cand_numeric
    both_numeric = target.is_numeric and cand_numeric
    has_e = both_text and target.embedding is not None and cand_has_embedding
    return (True, both_text, True, has_e, both_numeric)


def collect_rows(target: Sequence[AttributeProfile], lake: LakeCatalog, budget: int
                 ) -> CandidateEvidence:
    if not target:
        raise RelatednessError("target has no profiled attributes")
    evidence = CandidateEvidence(target_attrs=[p.attr_id for p in target])
    merged: dict[tuple[str, str], dict[str, float]] = defaultdict(dict)
    for prof in target:
        for t in LOOKUP_TYPES:
            hits = lake.lookup(t, prof, budget)
            evidence.populations[(prof.attr_id, t)] = [d for _, d in hits]
            for cand, d in hits:
                merged[(prof.attr_id, cand)][t] = d

    subject = next((p for p in target if p.is_subject), None)
    subject_hits: set[str] = set()
    if subject is not None:
        subject_hits = {c for (a, c) in merged if a == subject.attr_id}
    related_subject_tables = {
        ds for ds in lake.dataset_ids()
        if lake.subject_of(ds) is not None and lake.subject_of(ds) in subject_hits
    }

    for prof in target:
        if not prof.is_numeric:
            continue
        partners = {c for (a, c) in merged if a == prof.attr_id and lake.attribute(c).is_numeric}
        for ds in sorted(related_subject_tables):
            partners.update(c for c in lake.dataset(ds).attributes if lake.attribute(c).is_numeric)
        kss = []
        for cand in sorted(partners):
            hit = merged.get((prof.attr_id, cand), {})
            dd = numeric_distance(
                prof.numeric_extent, lake.numeric_extent(cand),
                subjects_related=lake.attribute(cand).dataset_id in related_subject_tables,
                name_related="N" in hit, format_related="F" in hit)
            merged[(prof.attr_id, cand)]["D"] = dd
            kss.append(dd)
        evidence.populations[(prof.attr_id, "D")] = kss

    by_target = {p.attr_id: p for p in target}
    best: dict[tuple[str, str], DistanceRow] = {}
    for (tattr, cand), found in merged.items():
        meta = lake.attribute(cand)
        row = DistanceRow(
            tattr, cand,
            tuple(found.get(t, 1.0) for t in EVIDENCE_TYPES),
            _applicable(by_target[tattr], meta.is_numeric, meta.has_embedding))
        key = (meta.dataset_id, tattr)
        cur = best.get(key)
        if cur is None or (row.mean, row.candidate_attr) < (cur.mean, cur.candidate_attr):
            best[key] = row
    order = {a: i for i, a in enumerate(evidence.target_attrs)}
    for (ds, _), row in sorted(best.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        evidence.rows.setdefault(ds, []).append(row)
    return evidence


def table_distance(dataset_id: str, rows: Sequence[DistanceRow],
                   populations: dict[tuple[str, str], list[float]],
                   weights: EvidenceWeights) -> DistanceVector:
    dv, mask = [], []
    for t, name in enumerate(EVIDENCE_TYPES):
        values, ws = [], []
        for r in rows:
            if not r.applicable[t]:
                continue
            values.append(r.d[t])
            ws.append(column_weights(populations.get((r.target_attr, name), ()), r.d[t]))
        if values:
            dv.append(aggregate_column(values, ws))
            mask.append(True)
        else:
            dv.append(1.0)
            mask.append(False)
    return DistanceVector(dataset_id, tuple(dv), combine(dv, weights, mask), len(rows),
                          tuple(mask))


def rank(evidence: CandidateEvidence, weights: EvidenceWeights | None = None,
         exclude: Iterable[str] = ()) -> list[DistanceVector]:
    weights = weights or EvidenceWeights()
    skip = set(exclude)
    vectors = [
        table_distance(ds, rows, evidence.populations, weights)
        for ds, rows in evidence.rows.items() if ds not in skip
    ]
    vectors.sort(key=lambda v: (v.combined, -v.m, v.dataset_id))
    return vectors


def top_k(evidence: CandidateEvidence, k: int, weights: EvidenceWeights | None = None,
          exclude: Iterable[str] = ()) -> list[DistanceVector]:
    if k < 1:
        raise RelatednessError("k must be >= 1")
    return rank(evidence, weights, exclude)[:k]
