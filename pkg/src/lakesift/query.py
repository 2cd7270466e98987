"""One discovery query: profile a target, rank lake tables, follow join paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .config import Config
from .eval.metrics import coverage, join_coverage
from .index.store import LakeCatalog
from .ingest import Dataset, load_table
from .joins import JoinGraph, JoinPath, build_join_graph, find_join_paths, paths_from
from .profile import AttributeProfile, EmbeddingModel, profile_dataset
from .relatedness import (
    CandidateEvidence,
    DistanceVector,
    EvidenceWeights,
    RelatednessError,
    collect_rows,
    rank,
)

RESULT_KEYS = ("record", "rank", "dataset", "distance", "d_N", "d_V", "d_F", "d_E", "d_D",
               "m", "coverage")
PATH_KEYS = ("record", "start", "nodes", "joins", "covered")
COVERAGE_KEYS = ("record", "dataset", "coverage", "join_coverage")


@dataclass
class QueryResult:
    target: Dataset
    profiles: list[AttributeProfile]
    evidence: CandidateEvidence
    ranking: list[DistanceVector]
    paths: list[JoinPath] = field(default_factory=list)
    graph: JoinGraph | None = None

    def ids(self) -> list[str]:
        return [v.dataset_id for v in self.ranking]

    def covered_names(self, dataset_id: str) -> set[str]:
        by_id = {p.attr_id: p.name for p in self.profiles}
        return {by_id[a] for a in self.evidence.covered(dataset_id)}

    def coverage(self, dataset_id: str) -> float:
        return coverage(self.target.arity, self.covered_names(dataset_id))

    def join_coverage(self, dataset_id: str) -> float:
        nodes = {n for p in paths_from(self.paths, dataset_id) for n in p.nodes[1:]}
        return join_coverage(self.target.arity, self.covered_names(dataset_id),
                             [self.covered_names(n) for n in sorted(nodes)])

    def records(self) -> list[dict]:
        out = []
        for i, v in enumerate(self.ranking, 1):
            out.append(dict(zip(RESULT_KEYS, (
                "result", i, v.dataset_id, v.combined, *v.dv, v.m, self.coverage(v.dataset_id)))))
        if self.graph is None:
            return out
        for p in self.paths:
            joins = []
            for a, b in zip(p.nodes, p.nodes[1:]):
                e = self.graph.edge(a, b)
                joins.append([e.left_attr, e.right_attr] if e.left == a
                             else [e.right_attr, e.left_attr])
            out.append(dict(zip(PATH_KEYS, (
                "path", p.start, list(p.nodes), joins,
                [sorted(self.covered_names(n)) for n in p.nodes]))))
        for v in self.ranking:
            out.append(dict(zip(COVERAGE_KEYS, (
                "join_coverage", v.dataset_id, self.coverage(v.dataset_id),
                self.join_coverage(v.dataset_id)))))
        return out


def load_target(path: str | Path, config: Config) -> Dataset:
    return load_table(path, config.ingest)


def load_model(config: Config) -> EmbeddingModel | None:
    return EmbeddingModel.load(config.embedding_path) if config.embedding_path else None


def discover(lake: LakeCatalog, target: Dataset, k: int, weights: EvidenceWeights | None = None,
             *, join_paths: bool = False, model: EmbeddingModel | None = None,
             exclude: Iterable[str] = (), graph: JoinGraph | None = None,
             budget: int | None = None) -> QueryResult:
    """Top-k related tables for ``target``, optionally with their join paths."""
    if k < 1:
        raise RelatednessError("k must be >= 1")
    config = lake.config
    profiles = profile_dataset(target, config, model)
    budget = budget or config.lookup_budget_factor * k
    evidence = collect_rows(profiles, lake, budget)
    ranking = rank(evidence, weights, exclude)[:k]
    result = QueryResult(target, profiles, evidence, ranking)
    if join_paths:
        result.graph = graph or build_join_graph(lake)
        result.paths = find_join_paths(result.graph, result.ids(),
                                       evidence.related_datasets() - set(exclude),
                                       config.max_join_len)
    return result
