"""Synthetic base tables for desk-scale benchmarks.

Bases are grouped into topic families. Every family draws its entities from
one universe, so two bases of a family describe overlapping entities with
columns from shared domains (a practice name in one base and a practice name
in another are the same domain). A small word-vector file clusters the words
of each domain, standing in for pretrained embeddings.

Run ``python3 -m lakesift.eval.synth OUT`` to write ``OUT/bases``,
``OUT/domains.csv`` and ``OUT/embeddings.vec``.
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..ingest import Dataset, IngestConfig, dataset_from_rows, write_dataset
from ..profile import value_parts
from .bench import write_domains

logger = logging.getLogger(__name__)

_ONSETS = ("b", "br", "c", "ch", "d", "dr", "f", "g", "gr", "h", "k", "l", "m", "n",
           "p", "pr", "r", "s", "st", "t", "tr", "v", "w", "th", "sh", "bl", "cr")
_VOWELS = ("a", "e", "i", "o", "u", "ai", "ea", "ou", "y", "ie")
_CODAS = ("", "n", "r", "l", "s", "th", "ck", "m", "nd", "rt", "ld", "x")


def pseudo_words(rng: np.random.Generator, n: int, taken: set[str] | None = None) -> list[str]:
    """``n`` distinct capitalised made-up words of two or three syllables."""
    taken = taken if taken is not None else set()
    out: list[str] = []
    while len(out) < n:
        syl = int(rng.integers(2, 4))
        w = "".join(str(rng.choice(_ONSETS)) + str(rng.choice(_VOWELS)) for _ in range(syl))
        w = (w + str(rng.choice(_CODAS))).capitalize()
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


Gen = Callable[[np.random.Generator, int], str]


@dataclass
class Family:
    name: str
    subject: str
    columns: dict[str, Gen] = field(default_factory=dict)


def _pick(rng: np.random.Generator, items) -> str:
    return str(items[int(rng.integers(len(items)))])


def _date(rng: np.random.Generator, fmt: str) -> str:
    y, m, d = int(rng.integers(1950, 2020)), int(rng.integers(1, 13)), int(rng.integers(1, 29))
    return fmt.format(y=y, m=m, d=d)


def _families(rng: np.random.Generator, universe: int) -> list[Family]:
    taken: set[str] = set()

    def names(n):
        return pseudo_words(rng, n, taken)

    fams = []

    surnames, towns, streets = names(universe), names(30), names(60)
    practice = [f"{s} {_pick(rng, ('Medical Centre', 'Surgery', 'Health Centre', 'Clinic'))}"
                for s in surnames]
    fams.append(Family("health", "Practice Name", {
        "Practice Name": lambda r, i: practice[i],
        "Address": lambda r, i: f"{r.integers(1, 300)} {_pick(r, streets)} "
                                f"{_pick(r, ('Street', 'Road', 'Lane', 'Avenue'))}",
        "City": lambda r, i: towns[i % len(towns)],
        "Postcode": lambda r, i: f"{_pick(r, ('BT', 'NE', 'LS', 'YO'))}{r.integers(1, 40)} "
                                 f"{r.integers(1, 10)}{_pick(r, 'ABDEFGHJ')}{_pick(r, 'LNPQRSTU')}",
        "Patients": lambda r, i: str(int(max(300, r.normal(6500, 2500)))),
        "Payment": lambda r, i: f"{r.lognormal(11, 0.6):.2f}",
        "Opening Hours": lambda r, i: f"{r.integers(7, 10):02d}:00-{r.integers(17, 21):02d}:00",
    }))

    places, districts, heads = names(universe), names(20), names(80)
    school = [f"{p} {_pick(rng, ('Primary School', 'Academy', 'High School', 'Grammar School'))}"
              for p in places]
    fams.append(Family("schools", "School Name", {
        "School Name": lambda r, i: school[i],
        "District": lambda r, i: districts[i % len(districts)],
        "Head Teacher": lambda r, i: f"{_pick(r, ('Mr', 'Mrs', 'Ms', 'Dr'))} {_pick(r, heads)}",
        "Pupils": lambda r, i: str(int(r.integers(80, 1600))),
        "Rating": lambda r, i: _pick(r, ("Outstanding", "Good", "Requires Improvement",
                                         "Inadequate")),
        "Phone": lambda r, i: f"0{r.integers(100, 999)} {r.integers(100, 999)} "
                              f"{r.integers(1000, 9999)}",
        "Founded": lambda r, i: str(int(r.integers(1850, 2015))),
    }))

    stops, lines, operators = names(universe), names(12), names(10)
    station = [f"{s} {_pick(rng, ('Central', 'Parkway', 'Junction', 'Halt', 'Bridge'))}"
               for s in stops]
    fams.append(Family("transport", "Station", {
        "Station": lambda r, i: station[i],
        "Line": lambda r, i: f"{lines[i % len(lines)]} Line",
        "Operator": lambda r, i: f"{operators[i % len(operators)]} "
                                 f"{_pick(r, ('Rail', 'Trains', 'Railways'))}",
        "Daily Riders": lambda r, i: str(int(r.lognormal(8.5, 1.0))),
        "Opened": lambda r, i: _date(r, "{y:04d}-{m:02d}-{d:02d}"),
        "Platforms": lambda r, i: str(int(r.integers(1, 13))),
        "Station Code": lambda r, i: "".join(_pick(r, "ABCDEFGHKLMNPRSTW") for _ in range(3)),
    }))

    firsts, seconds, webs = names(universe), names(40), names(60)
    sectors = names(12)
    company = [f"{a} {_pick(rng, seconds)} {_pick(rng, ('Ltd', 'Limited', 'PLC', 'LLP'))}"
               for a in firsts]
    fams.append(Family("business", "Company Name", {
        "Company Name": lambda r, i: company[i],
        "Sector": lambda r, i: f"{sectors[i % len(sectors)]} Services",
        "Company Number": lambda r, i: f"{_pick(r, ('SC', 'NI', '0'))}{r.integers(100000, 999999)}",
        "Employees": lambda r, i: str(int(r.lognormal(3.5, 1.2))),
        "Turnover": lambda r, i: f"{r.lognormal(14, 1.5):.1f}",
        "Website": lambda r, i: f"www.{firsts[i].lower()}{_pick(r, webs).lower()}.co.uk",
        "Incorporated": lambda r, i: _date(r, "{d:02d}/{m:02d}/{y:04d}"),
    }))

    rivers, sites, regions = names(25), names(universe), names(9)
    monitoring = [f"{_pick(rng, rivers)} at {s}" for s in sites]
    fams.append(Family("environment", "Monitoring Site", {
        "Monitoring Site": lambda r, i: monitoring[i],
        "River": lambda r, i: f"River {monitoring[i].split(' at ')[0]}",
        "Region": lambda r, i: f"{regions[i % len(regions)]} {_pick(r, ('North', 'South'))}",
        "pH": lambda r, i: f"{r.uniform(6.0, 9.0):.2f}",
        "Temperature": lambda r, i: f"{r.uniform(2.0, 22.0):.1f}",
        "Sample Date": lambda r, i: _date(r, "{y:04d}.{m:02d}.{d:02d}"),
        "Dissolved Oxygen": lambda r, i: f"{r.uniform(4.0, 14.0):.1f}",
    }))
    return fams


@dataclass
class SyntheticBases:
    tables: list[Dataset]
    domains: dict[tuple[str, str], str]
    vectors: dict[str, np.ndarray]


def make_base_tables(n_bases: int = 32, seed: int = 7, universe: int = 400,
                     rows: tuple[int, int] = (150, 300), null_rate: float = 0.02,
                     dim: int = 32) -> SyntheticBases:
    """Generate ``n_bases`` bases spread round-robin over five topic families."""
    rng = np.random.default_rng(seed)
    families = _families(rng, universe)
    config = IngestConfig()
    tables, domains = [], {}
    domain_values: dict[str, list[str]] = {}
    for b in range(n_bases):
        fam = families[b % len(families)]
        base_id = f"{fam.name}_{b // len(families):02d}.csv"
        others = [c for c in fam.columns if c != fam.subject]
        n_other = int(rng.integers(2, len(others) + 1))
        picked = set(rng.choice(others, size=n_other, replace=False).tolist())
        header = [fam.subject] + [c for c in others if c in picked]
        n_rows = int(rng.integers(rows[0], rows[1] + 1))
        entities = rng.choice(universe, size=n_rows, replace=False)
        body = []
        for i in entities:
            row = []
            for c in header:
                if c != fam.subject and rng.random() < null_rate:
                    row.append("")
                else:
                    row.append(fam.columns[c](rng, int(i)))
            body.append(row)
        tables.append(dataset_from_rows(base_id, header, body, config))
        for j, c in enumerate(header):
            dom = f"{fam.name}:{c}"
            domains[(base_id, c)] = dom
            domain_values.setdefault(dom, []).extend(r[j] for r in body)
    return SyntheticBases(tables, domains, _domain_vectors(domain_values, dim, seed))


def _domain_vectors(domain_values: dict[str, list[str]], dim: int, seed: int
                    ) -> dict[str, np.ndarray]:
    """One vector per alphabetic word, clustered around a per-domain centre."""
    rng = np.random.default_rng([seed, dim])
    vectors: dict[str, np.ndarray] = {}
    for dom in sorted(domain_values):
        centre = rng.normal(size=dim)
        words = sorted({w for v in domain_values[dom] for part in value_parts(v)
                        for w in part if w.isalpha()})
        for w in words:
            if w not in vectors:
                vectors[w] = centre + 0.35 * rng.normal(size=dim)
    return vectors


def write_vectors(vectors: dict[str, np.ndarray], path: str | Path) -> None:
    words = sorted(vectors)
    dim = len(vectors[words[0]]) if words else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {dim}\n")
        for w in words:
            fh.write(w + " " + " ".join(f"{x:.5f}" for x in vectors[w]) + "\n")


def write_base_tables(bases: SyntheticBases, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    for ds in bases.tables:
        write_dataset(ds, out / "bases" / ds.id)
    write_domains(bases.domains, out / "domains.csv")
    write_vectors(bases.vectors, out / "embeddings.vec")
    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="python3 -m lakesift.eval.synth",
                                 description="Write synthetic base tables, domains and vectors.")
    ap.add_argument("out")
    ap.add_argument("--bases", type=int, default=32)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    out = write_base_tables(make_base_tables(args.bases, args.seed), args.out)
    print(f"wrote {args.bases} base tables to {out / 'bases'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
