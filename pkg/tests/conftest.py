import csv
from pathlib import Path

import pytest

from lakesift.config import Config
from lakesift.eval.bench import generate_benchmark
from lakesift.eval.synth import make_base_tables
from lakesift.index import LakeIndex
from lakesift.ingest import IngestConfig, dataset_from_rows
from lakesift.profile import EmbeddingModel

# The four example tables of the running GP scenario.
GP_TABLES = {
    "S1.csv": (
        ["Practice Name", "Address", "City", "Postcode", "Patients"],
        [["Dr E Cullen", "51 Botanic Av", "Belfast", "BT7 1JL", "1202"],
         ["Blackfriars", "1a Chapel St", "Salford", "M3 6AF", "3572"]],
    ),
    "S2.csv": (
        ["Practice", "City", "Postcode", "Payment"],
        [["The London Clinic", "London", "W1G 6BW", "73648"],
         ["Blackfriars", "Salford", "M3 6AF", "15530"]],
    ),
    "S3.csv": (
        ["GP", "Location", "Opening hours"],
        [["Blackfriars", "Salford", "08:00-18:00"],
         ["Radclife Care", "-", "07:00-20:00"]],
    ),
    "T.csv": (
        ["Practice", "Street", "City", "Postcode", "Hours"],
        [["Radclife", "69 Church St", "Manchester", "M26 2SP", "07:00-20:00"],
         ["Bolton Medical", "21 Rupert St", "Bolton", "BL3 6PY", "08:00-16:00"]],
    ),
}


def write_csv(path, header, rows, delimiter=","):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def gp_dataset(name):
    header, rows = GP_TABLES[name]
    return dataset_from_rows(name, header, rows, IngestConfig())


def bridging_tables(n=30):
    """A scaled-up GP scenario in which only S3 carries opening hours.

    S1 and S2 describe the same practices as T under matching column names;
    S3 names its columns differently and is joinable with S1 on the practice
    names, so it is reachable only through a join path.
    """
    practices = [f"{w} Surgery" for w in (
        "Blackfriars Alder Birch Cedar Dunmore Elmwood Fairview Glenside Hawthorn Ivybridge "
        "Juniper Kingsway Larchfield Meadowbank Northgate Oakwood Parkview Queensway Riverside "
        "Southfield Thornbury Upland Valleyside Westbrook Yewtree Ashgrove Beechwood Clover "
        "Daisyfield Elmstead").split()[:n]]
    towns = ["Salford", "Bolton", "Bury", "Wigan", "Oldham", "Stockport"]
    streets = ["Church St", "Chapel St", "Rupert St", "Botanic Av", "Mill Lane", "High St"]
    postcodes = [f"M{i % 40 + 1} {i % 9 + 1}{'ABDEFGHJ'[i % 8]}{'LNPQRSTU'[(i * 3) % 8]}"
                 for i in range(n)]
    hours = [f"{7 + i % 3:02d}:00-{17 + i % 4:02d}:00" for i in range(n)]
    tables = {
        "S1.csv": (["Practice Name", "Address", "City", "Postcode", "Patients"],
                   [[practices[i], f"{i + 1} {streets[i % 6]}", towns[i % 6], postcodes[i],
                     str(1000 + 97 * i)] for i in range(n)]),
        "S2.csv": (["Practice", "City", "Postcode", "Payment"],
                   [[practices[i], towns[i % 6], postcodes[i], str(15000 + 311 * i)]
                    for i in range(n)]),
        "S3.csv": (["GP", "Location", "Opening hours"],
                   [[practices[i], towns[i % 6], hours[i]] for i in range(n)]),
        "T.csv": (["Practice", "Street", "City", "Postcode", "Hours"],
                  [[practices[i], f"{i + 1} {streets[i % 6]}", towns[i % 6], postcodes[i],
                    hours[i]] for i in range(n - 4)]),
    }
    return tables


@pytest.fixture(scope="session")
def synthetic():
    return make_base_tables(32, seed=7)


@pytest.fixture(scope="session")
def bench(synthetic):
    return generate_benchmark(synthetic.tables, 200, seed=42, column_domains=synthetic.domains)


@pytest.fixture(scope="session")
def bench_model(synthetic):
    return EmbeddingModel(synthetic.vectors)


@pytest.fixture(scope="session")
def bench_index(bench, bench_model):
    lake, _ = bench
    return LakeIndex.build(lake, Config(), bench_model)
