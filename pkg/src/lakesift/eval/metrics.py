"""Ground truth, precision/recall, coverage and attribute precision."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

TRUTH_FIELDS = ("kind", "target", "target_attr", "related", "related_attr")


class TruthError(KeyError):
    pass


def split_attr_id(attr_id: str) -> tuple[str, str]:
    dataset_id, _, name = attr_id.rpartition("::")
    return dataset_id, name


@dataclass
class GroundTruth:
    tables: dict[str, set[str]] = field(default_factory=dict)
    attributes: dict[tuple[str, str], set[tuple[str, str]]] = field(default_factory=dict)

    def add_table_pair(self, a: str, b: str) -> None:
        self.tables.setdefault(a, set()).add(b)
        self.tables.setdefault(b, set()).add(a)

    def add_attribute_pair(self, a: tuple[str, str], b: tuple[str, str]) -> None:
        self.attributes.setdefault(a, set()).add(b)
        self.attributes.setdefault(b, set()).add(a)
        self.add_table_pair(a[0], b[0])

    def covers(self, target: str) -> bool:
        return target in self.tables

    def related(self, target: str) -> set[str]:
        if target not in self.tables:
            raise TruthError(f"target {target!r} not in ground truth")
        return self.tables[target]

    def attribute_related(self, target: str, target_attr: str, dataset: str, attr: str) -> bool:
        return (dataset, attr) in self.attributes.get((target, target_attr), ())

    def write(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRUTH_FIELDS)
            for t in sorted(self.tables):
                for r in sorted(self.tables[t]):
                    w.writerow(("table", t, "", r, ""))
            for (t, ta) in sorted(self.attributes):
                for (r, ra) in sorted(self.attributes[(t, ta)]):
                    w.writerow(("attribute", t, ta, r, ra))

    @classmethod
    def read(cls, path: str | Path) -> "GroundTruth":
        truth = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                if rec["kind"] == "table":
                    truth.tables.setdefault(rec["target"], set()).add(rec["related"])
                elif rec["kind"] == "attribute":
                    key = (rec["target"], rec["target_attr"])
                    truth.attributes.setdefault(key, set()).add((rec["related"], rec["related_attr"]))
                    truth.tables.setdefault(rec["target"], set()).add(rec["related"])
                else:
                    raise ValueError(f"unknown truth record kind {rec['kind']!r}")
        return truth


def precision_recall(result: Sequence[str], truth: GroundTruth, target: str
                     ) -> tuple[float, float]:
    related = truth.related(target)
    returned = list(dict.fromkeys(result))
    tp = sum(r in related for r in returned)
    precision = tp / len(returned) if returned else 0.0
    recall = tp / len(related) if related else 0.0
    return precision, recall


def coverage(arity: int, covered: Iterable[str]) -> float:
    if arity < 1:
        raise ValueError("target arity must be >= 1")
    return len(set(covered)) / arity


def join_coverage(arity: int, base_covered: Iterable[str],
                  path_covered: Iterable[Iterable[str]]) -> float:
    """Coverage of the union of a top-k table and every node on its join paths."""
    union = set(base_covered)
    for covered in path_covered:
        union.update(covered)
    return coverage(arity, union)


def attribute_precision(alignments: Iterable[tuple[str, str, str]], truth: GroundTruth,
                        target: str) -> float:
    """alignments: (target attribute, dataset id, attribute) triples."""
    items = set(alignments)
    if not items:
        return 0.0
    tp = sum(truth.attribute_related(target, ta, ds, a) for ta, ds, a in items)
    return tp / len(items)


def join_attribute_precision(groups: Mapping[str, Iterable[tuple[str, str]]],
                             truth: GroundTruth, target: str) -> float:
    """Each target attribute's aligned set counts once; it is correct if any member is."""
    groups = {ta: set(g) for ta, g in groups.items() if g}
    if not groups:
        return 0.0
    tp = sum(any(truth.attribute_related(target, ta, ds, a) for ds, a in g)
             for ta, g in groups.items())
    return tp / len(groups)


def group_alignments(alignments: Iterable[tuple[str, str, str]]) -> dict[str, set[tuple[str, str]]]:
    groups: dict[str, set[tuple[str, str]]] = defaultdict(set)
    for ta, ds, a in alignments:
        groups[ta].add((ds, a))
    return dict(groups)
