"""Loading delimiter-separated files into datasets with typed attributes."""

from __future__ import annotations

import csv
import io
import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .config import IngestConfig

logger = logging.getLogger(__name__)

DELIMITERS = (",", "\t", ";", "|")
SNIFF_LINES = 10

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_GROUPED = re.compile(r"^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$")


class LoadError(Exception):
    """A single file could not be turned into a dataset."""


class EmptyLakeError(LoadError):
    pass


class Kind(str, Enum):
    TEXT = "text"
    NUMERIC = "numeric"


def parse_number(cell: str) -> float | None:
    """Parse a cell as a finite number, accepting thousands separators."""
    s = cell.strip()
    if _GROUPED.match(s):
        s = s.replace(",", "")
    if not _NUMBER.match(s):
        return None
    value = float(s)
    return value if math.isfinite(value) else None


def infer_kind(column_values: Sequence[str], theta_num: float = 0.9,
               null_markers: Iterable[str] = IngestConfig.null_markers) -> Kind:
    markers = set(null_markers)
    present = [v for v in column_values if v.strip().lower() not in markers]
    if not present:
        return Kind.TEXT
    parsed = sum(parse_number(v) is not None for v in present)
    return Kind.NUMERIC if parsed / len(present) >= theta_num else Kind.TEXT


@dataclass(frozen=True)
class Attribute:
    """One column. ``cells`` is row-aligned; ``None`` marks a null."""

    name: str
    position: int
    kind: Kind
    cells: tuple[str | None, ...]

    @property
    def raw_values(self) -> list[str]:
        return [c for c in self.cells if c is not None]

    @property
    def extent(self) -> list:
        if self.kind is Kind.NUMERIC:
            return [parse_number(c) for c in self.cells if c is not None]
        return self.raw_values

    @property
    def null_count(self) -> int:
        return sum(c is None for c in self.cells)


@dataclass(frozen=True)
class Dataset:
    id: str
    name: str
    attributes: tuple[Attribute, ...]
    row_count: int
    skipped_rows: int = 0

    @property
    def arity(self) -> int:
        return len(self.attributes)

    def attribute(self, name: str) -> Attribute:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise KeyError(name)

    def attribute_id(self, attr: Attribute | str) -> str:
        name = attr if isinstance(attr, str) else attr.name
        return f"{self.id}::{name}"


@dataclass
class LoadReport:
    loaded: list[str] = field(default_factory=list)
    failed: dict[str, str] = field(default_factory=dict)
    skipped_rows: dict[str, int] = field(default_factory=dict)

    @property
    def warning_count(self) -> int:
        return len(self.failed)


def make_attribute(name: str, position: int, raw: Sequence[str],
                   config: IngestConfig) -> Attribute:
    cells = [c.strip() for c in raw]
    kind = infer_kind(cells, config.theta_num, config.null_markers)
    out: list[str | None] = []
    for c in cells:
        if config.is_null(c):
            out.append(None)
        elif kind is Kind.NUMERIC and parse_number(c) is None:
            # stray text in a numeric column counts as a null
            out.append(None)
        else:
            out.append(c)
    return Attribute(name=name, position=position, kind=kind, cells=tuple(out))


def dataset_from_rows(dataset_id: str, header: Sequence[str], rows: Sequence[Sequence[str]],
                      config: IngestConfig | None = None, name: str | None = None,
                      skipped_rows: int = 0) -> Dataset:
    config = config or IngestConfig()
    names = disambiguate(header)
    attributes = tuple(
        make_attribute(n, i, [row[i] for row in rows], config) for i, n in enumerate(names)
    )
    if name is None:
        name = Path(dataset_id).stem
    return Dataset(id=dataset_id, name=name, attributes=attributes,
                   row_count=len(rows), skipped_rows=skipped_rows)


def disambiguate(header: Sequence[str]) -> list[str]:
    names: list[str] = []
    seen: set[str] = set()
    for pos, raw in enumerate(header):
        base = raw.strip() or f"column_{pos + 1}"
        candidate, ordinal = base, 1
        while candidate in seen:
            ordinal += 1
            candidate = f"{base}_{ordinal}"
        seen.add(candidate)
        names.append(candidate)
    return names


def sniff_delimiter(lines: Sequence[str]) -> str:
    best, best_score = ",", (-1.0, 0)
    for delim in DELIMITERS:
        counts = [len(r) for r in csv.reader(lines, delimiter=delim) if r]
        if not counts or counts[0] < 2:
            continue
        consistent = sum(c == counts[0] for c in counts) / len(counts)
        score = (consistent, counts[0])
        if score > best_score:
            best, best_score = delim, score
    return best


def _read_text(path: Path) -> str:
    data = path.read_bytes()
    if b"\x00" in data:
        raise LoadError("binary content")
    try:
        return data.decode("utf-8-sig")
    except UnicodeDecodeError:
        return data.decode("latin-1")


def load_table(path: str | Path, config: IngestConfig | None = None,
               dataset_id: str | None = None) -> Dataset:
    config = config or IngestConfig()
    path = Path(path)
    try:
        text = _read_text(path)
    except OSError as exc:
        raise LoadError(str(exc)) from exc
    lines = text.splitlines()
    if not any(line.strip() for line in lines):
        raise LoadError("no header row")
    delim = sniff_delimiter([l for l in lines if l.strip()][:SNIFF_LINES])
    reader = csv.reader(io.StringIO(text), delimiter=delim)
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    header = rows[0]
    if all(parse_number(c) is not None for c in header):
        raise LoadError("no header row")
    body, skipped = [], 0
    for r in rows[1:]:
        if len(r) != len(header):
            skipped += 1
            continue
        body.append(r)
    if skipped:
        logger.warning("%s: skipped %d malformed row(s)", path, skipped)
    return dataset_from_rows(dataset_id or path.name, header, body, config,
                             name=path.stem, skipped_rows=skipped)


def lake_files(root: str | Path, config: IngestConfig | None = None) -> list[Path]:
    config = config or IngestConfig()
    root = Path(root)
    files = [
        p for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in config.extensions
        and not any(part.startswith((".", "_")) for part in p.relative_to(root).parts)
    ]
    return sorted(files, key=lambda p: p.relative_to(root).as_posix())


def load_lake_with_report(root: str | Path, config: IngestConfig | None = None
                          ) -> tuple[list[Dataset], LoadReport]:
    config = config or IngestConfig()
    root = Path(root)
    if not root.is_dir():
        raise LoadError(f"lake directory {root} does not exist")
    report = LoadReport()
    datasets = []
    for path in lake_files(root, config):
        rel = path.relative_to(root).as_posix()
        try:
            ds = load_table(path, config, dataset_id=rel)
        except LoadError as exc:
            logger.warning("skipping %s: %s", rel, exc)
            report.failed[rel] = str(exc)
            continue
        datasets.append(ds)
        report.loaded.append(rel)
        if ds.skipped_rows:
            report.skipped_rows[rel] = ds.skipped_rows
    if not datasets:
        raise EmptyLakeError(f"empty lake: no readable tables under {root}")
    return datasets, report


def load_lake(root: str | Path, config: IngestConfig | None = None) -> list[Dataset]:
    return load_lake_with_report(root, config)[0]


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([a.name for a in dataset.attributes])
        columns = [a.cells for a in dataset.attributes]
        for i in range(dataset.row_count):
            writer.writerow(["" if col[i] is None else col[i] for col in columns])
