"""Synthetic lakes derived from base tables by projection and selection."""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..ingest import Dataset, IngestConfig, dataset_from_rows, write_dataset
from ..profile import detect_subject_attribute
from .metrics import GroundTruth

logger = logging.getLogger(__name__)

Domains = Mapping[tuple[str, str], str]


def generate_benchmark(base_tables: Sequence[Dataset], n: int, seed: int = 42,
                       column_domains: Domains | None = None, *, project: bool = True,
                       select: bool = True, subject_keep: float = 0.8, min_rows: int = 10,
                       min_cols: int = 2, config: IngestConfig | None = None
                       ) -> tuple[list[Dataset], GroundTruth]:
    """Derive ``n`` tables from the bases and record which ones are related.

    Tables derived from the same base are related. Two derived columns are
    attribute-related when they descend from columns in the same domain;
    by default every base column is its own domain, and ``column_domains``
    can merge columns of different bases, keyed by (base id, column name).
    """
    if n < len(base_tables):
        raise ValueError(f"n={n} is smaller than the number of base tables ({len(base_tables)})")
    config = config or IngestConfig()
    column_domains = column_domains or {}
    usable = []
    for base in base_tables:
        if project and base.arity < min_cols or select and base.row_count < min_rows:
            logger.warning("base table %s too small to derive from; skipped", base.id)
            continue
        usable.append(base)
    if not usable:
        raise ValueError("no base table is large enough")

    rng = np.random.default_rng(seed)
    extra = rng.integers(0, len(usable), size=n - len(usable))
    assignment = rng.permutation(np.concatenate([np.arange(len(usable)), extra]))

    lake: list[Dataset] = []
    lineage: list[tuple[int, list[str]]] = []
    width = max(4, len(str(n)))
    for j, bi in enumerate(assignment):
        base = usable[int(bi)]
        cols = list(range(base.arity))
        if project:
            c = int(rng.integers(min_cols, base.arity + 1))
            subject = detect_subject_attribute(base)
            if subject is not None and rng.random() < subject_keep:
                others = [p for p in cols if p != subject]
                cols = sorted([subject, *rng.choice(others, size=c - 1, replace=False).tolist()])
            else:
                cols = sorted(rng.choice(cols, size=c, replace=False).tolist())
        rows = list(range(base.row_count))
        if select:
            r = int(rng.integers(min_rows, base.row_count + 1))
            rows = sorted(rng.choice(base.row_count, size=r, replace=False).tolist())
        attrs = [base.attributes[p] for p in cols]
        header = [a.name for a in attrs]
        body = [["" if a.cells[i] is None else a.cells[i] for a in attrs] for i in rows]
        table_id = f"table_{j:0{width}d}.csv"
        lake.append(dataset_from_rows(table_id, header, body, config))
        lineage.append((int(bi), header))

    truth = GroundTruth()
    by_base: dict[int, list[str]] = defaultdict(list)
    by_domain: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for ds, (bi, header) in zip(lake, lineage):
        truth.tables.setdefault(ds.id, set())
        by_base[bi].append(ds.id)
        base_id = usable[bi].id
        for col in header:
            domain = column_domains.get((base_id, col), f"{base_id}::{col}")
            by_domain[domain].append((ds.id, col))
    for members in by_base.values():
        for a in members:
            for b in members:
                if a != b:
                    truth.add_table_pair(a, b)
    for members in by_domain.values():
        for a in members:
            for b in members:
                if a[0] != b[0]:
                    truth.add_attribute_pair(a, b)
    return lake, truth


def write_benchmark(lake: Sequence[Dataset], truth: GroundTruth, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    for ds in lake:
        write_dataset(ds, out / "lake" / ds.id)
    truth.write(out / "truth.csv")
    return out


def read_domains(path: str | Path) -> dict[tuple[str, str], str]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {(r["base"], r["column"]): r["domain"] for r in csv.DictReader(fh)}


def write_domains(domains: Domains, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("base", "column", "domain"))
        for (base, col), dom in sorted(domains.items()):
            w.writerow((base, col, dom))
