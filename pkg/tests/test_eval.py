import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lakesift.config import Config
from lakesift.eval import (
    FitError,
    GroundTruth,
    LabeledPair,
    TruthError,
    attribute_precision,
    coverage,
    fit_weights,
    generate_benchmark,
    group_alignments,
    join_attribute_precision,
    join_coverage,
    precision_recall,
    read_domains,
    write_benchmark,
    write_domains,
)
from lakesift.eval.runner import (
    METRIC_FIELDS,
    evaluate,
    labeled_pairs,
    sample_targets,
    write_metrics,
)
from lakesift.eval.synth import make_base_tables
from lakesift.index import ExactLake
from lakesift.ingest import IngestConfig, dataset_from_rows, load_lake

from conftest import bridging_tables

# -- metrics ----------------------------------------------------------------


def _truth(target, related):
    t = GroundTruth()
    t.tables.setdefault(target, set())
    for r in related:
        t.add_table_pair(target, r)
    return t


def test_precision_recall_examples():
    truth = _truth("T", [f"r{i}" for i in range(14)])
    returned = [f"r{i}" for i in range(7)] + ["x1", "x2", "x3"]
    assert precision_recall(returned, truth, "T") == (0.7, 0.5)
    exact = _truth("T", ["a", "b"])
    assert precision_recall(["a", "b"], exact, "T") == (1.0, 1.0)
    assert precision_recall([], truth, "T") == (0.0, 0.0)
    with pytest.raises(TruthError):
        precision_recall(["a"], truth, "missing")


def test_coverage_examples():
    assert coverage(5, {"a", "b", "c"}) == 0.6
    assert coverage(5, []) == 0.0
    assert join_coverage(5, {"a", "b", "c"}, [{"d"}, {"a"}]) == 0.8
    assert join_coverage(5, {"a", "b", "c"}, [{"a", "b"}]) == 0.6
    assert join_coverage(5, {"a", "b", "c"}, []) == 0.6
    with pytest.raises(ValueError):
        coverage(0, [])


@settings(max_examples=100, deadline=None)
@given(st.sets(st.sampled_from("abcdef")),
       st.lists(st.sets(st.sampled_from("abcdef")), max_size=4))
def test_join_coverage_never_below_coverage(base, extra):
    assert join_coverage(6, base, extra) >= coverage(6, base)


def _attr_truth():
    t = GroundTruth()
    for ta, a in [("Practice", "Practice Name"), ("City", "City"), ("Postcode", "Postcode")]:
        t.add_attribute_pair(("T", ta), ("S1", a))
    t.add_attribute_pair(("T", "Hours"), ("S3", "Opening hours"))
    return t


def test_attribute_precision_examples():
    t = _attr_truth()
    right = [("Practice", "S1", "Practice Name"), ("City", "S1", "City"),
             ("Postcode", "S1", "Postcode")]
    assert attribute_precision(right, t, "T") == 1.0
    assert attribute_precision(right + [("Street", "S1", "City")], t, "T") == 0.75
    assert attribute_precision([], t, "T") == 0.0


def test_join_set_counts_once_if_any_member_is_right():
    t = _attr_truth()
    groups = group_alignments([("Hours", "S1", "Patients"), ("Hours", "S2", "Payment"),
                               ("Hours", "S3", "Opening hours")])
    assert join_attribute_precision(groups, t, "T") == 1.0
    groups["Street"] = {("S1", "City")}
    assert join_attribute_precision(groups, t, "T") == 0.5


def test_truth_round_trip(tmp_path):
    t = _attr_truth()
    t.add_table_pair("T", "S9")
    t.tables.setdefault("lonely", set())
    t.write(tmp_path / "truth.csv")
    again = GroundTruth.read(tmp_path / "truth.csv")
    assert again.attributes == t.attributes
    assert {k: v for k, v in again.tables.items() if v} == {k: v for k, v in t.tables.items() if v}
    (tmp_path / "bad.csv").write_text("kind,target,target_attr,related,related_attr\nrow,a,,b,\n")
    with pytest.raises(ValueError):
        GroundTruth.read(tmp_path / "bad.csv")


# -- benchmark generation ---------------------------------------------------

def _base(name, n_rows=20, cols=("Name", "City", "Count")):
    rows = [[f"{name}{i}x", f"town{i % 4}", str(i)] for i in range(n_rows)]
    return dataset_from_rows(f"{name}.csv", list(cols), rows, IngestConfig())


def test_identity_projections_give_singleton_groups():
    bases = [_base("alpha"), _base("beta"), _base("gamma")]
    lake, truth = generate_benchmark(bases, 3, seed=1, project=False, select=False)
    assert len(lake) == 3
    assert all(truth.related(ds.id) == set() for ds in lake)
    assert truth.attributes == {}
    assert sorted(ds.row_count for ds in lake) == [20, 20, 20]


def test_projections_of_one_base_share_lineage():
    lake, truth = generate_benchmark([_base("alpha")], 5, seed=3)
    ids = [ds.id for ds in lake]
    for ds in lake:
        assert truth.related(ds.id) == set(ids) - {ds.id}
        assert ds.arity >= 2 and ds.row_count >= 10
    a, b = lake[0], lake[1]
    for name in {x.name for x in a.attributes} & {x.name for x in b.attributes}:
        assert truth.attribute_related(a.id, name, b.id, name)


def test_benchmark_errors_and_skips(caplog):
    bases = [_base("alpha"), _base("beta")]
    with pytest.raises(ValueError):
        generate_benchmark(bases, 1)
    tiny = _base("tiny", n_rows=4)
    with caplog.at_level("WARNING"):
        lake, truth = generate_benchmark([*bases, tiny], 6, seed=2)
    assert "tiny.csv" in caplog.text
    assert len(lake) == 6


def test_benchmark_is_deterministic_and_truth_is_grouped(synthetic, bench):
    lake, truth = bench
    again, truth2 = generate_benchmark(synthetic.tables, 200, seed=42,
                                       column_domains=synthetic.domains)
    assert [d.id for d in again] == [d.id for d in lake]
    assert all(a == b for a, b in zip(again, lake))
    assert truth2.tables == truth.tables and truth2.attributes == truth.attributes
    for t, rel in truth.tables.items():
        assert t not in rel
        for r in rel:
            assert t in truth.tables[r]
    sizes = [len(r) for r in truth.tables.values()]
    assert 25 <= np.mean(sizes) <= 60


def test_synthetic_bases_are_deterministic():
    a, b = make_base_tables(4, seed=3), make_base_tables(4, seed=3)
    assert [t.id for t in a.tables] == [t.id for t in b.tables]
    assert all(x == y for x, y in zip(a.tables, b.tables))
    assert a.domains == b.domains
    assert all(np.array_equal(a.vectors[w], b.vectors[w]) for w in a.vectors)


def test_benchmark_files_round_trip(tmp_path, synthetic):
    lake, truth = generate_benchmark(synthetic.tables[:4], 8, seed=5,
                                     column_domains=synthetic.domains)
    write_benchmark(lake, truth, tmp_path)
    loaded = load_lake(tmp_path / "lake")
    assert [d.id for d in loaded] == [d.id for d in lake]
    assert GroundTruth.read(tmp_path / "truth.csv").attributes == truth.attributes
    write_domains(synthetic.domains, tmp_path / "domains.csv")
    assert read_domains(tmp_path / "domains.csv") == dict(synthetic.domains)


# -- weight fitting ---------------------------------------------------------

def _pairs(label_fn, n=200, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        dv = tuple(float(x) for x in rng.random(5))
        out.append(LabeledPair(dv, int(label_fn(dv, rng))))
    return out


def test_value_separable_pairs_put_most_weight_on_value_evidence():
    fit = fit_weights(_pairs(lambda dv, _: dv[1] < 0.5))
    assert int(np.argmax(fit.weights.w)) == 1
    assert fit.accuracy >= 0.9
    assert fit.n_train + fit.n_test == 200


def test_random_labels_fit_near_chance():
    fit = fit_weights(_pairs(lambda dv, rng: rng.random() < 0.5, n=400, seed=4))
    assert 0.3 <= fit.accuracy <= 0.7


def test_fit_is_deterministic_and_weights_positive():
    pairs = _pairs(lambda dv, _: dv[0] + dv[2] < 1.0)
    a, b = fit_weights(pairs), fit_weights(pairs)
    assert a == b
    assert all(w >= 1e-6 for w in a.weights.w)


def test_fit_errors():
    with pytest.raises(FitError):
        fit_weights(_pairs(lambda dv, _: 1))
    with pytest.raises(FitError):
        fit_weights(_pairs(lambda dv, _: dv[0] < 0.5, n=10))
    with pytest.raises(FitError):
        LabeledPair((0.1, 0.2), 1)
    with pytest.raises(FitError):
        LabeledPair((0.1, 0.2, 0.3, 0.4, 1.5), 1)


# -- runner -----------------------------------------------------------------

def _bridging_lake():
    tables = bridging_tables()
    ds = {k: dataset_from_rows(k, *v, IngestConfig()) for k, v in tables.items()}
    return ds, ExactLake.build([ds["S1.csv"], ds["S2.csv"], ds["S3.csv"]], Config())


def test_sample_targets_is_seeded_and_unique(bench):
    lake, _ = bench
    a = sample_targets(lake, 20, seed=42)
    assert [d.id for d in a] == [d.id for d in sample_targets(lake, 20, seed=42)]
    assert len({d.id for d in a}) == 20
    assert [d.id for d in a] == sorted(d.id for d in a)
    assert len(sample_targets(lake, None, 1)) == len(lake)


def test_evaluate_on_benchmark_sample(bench, bench_index, bench_model):
    lake, truth = bench
    targets = sample_targets(lake, 3, seed=1)
    rows, per_target, skipped = evaluate(bench_index, targets, truth, [5, 10, 40],
                                         model=bench_model)
    assert skipped == []
    assert [r.k for r in rows] == [5, 10, 40]
    for m in per_target:
        assert m.recall == sorted(m.recall)
        for c, j in zip(m.coverage, m.join_coverage):
            assert j >= c
    for r in rows:
        for name in METRIC_FIELDS[1:-1]:
            assert 0.0 <= getattr(r, name) <= 1.0
    a, b = io.StringIO(), io.StringIO()
    write_metrics(rows, a)
    write_metrics(evaluate(bench_index, targets, truth, [5, 10, 40], model=bench_model)[0], b)
    assert a.getvalue() == b.getvalue()
    assert a.getvalue().splitlines()[0] == ",".join(METRIC_FIELDS)


def test_evaluate_skips_targets_outside_truth():
    ds, lake = _bridging_lake()
    truth = GroundTruth(tables={"T.csv": {"S1.csv", "S2.csv", "S3.csv"}})
    rows, per_target, skipped = evaluate(lake, [ds["T.csv"], ds["S2.csv"]], truth, [2])
    assert skipped == ["S2.csv"] and rows[0].targets == 1
    assert per_target[0].join_coverage[0] > per_target[0].coverage[0]
    with pytest.raises(ValueError):
        evaluate(lake, [ds["T.csv"]], truth, [0])


def test_labeled_pairs_are_balanced(bench, bench_index, bench_model):
    lake, truth = bench
    pairs = labeled_pairs(bench_index, sample_targets(lake, 10, seed=3), truth, n=60,
                          model=bench_model)
    labels = [p.label for p in pairs]
    assert len(pairs) == 60 and sum(labels) == 30
    assert all(p.target != p.candidate for p in pairs)
