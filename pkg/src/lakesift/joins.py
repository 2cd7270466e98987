"""SA-join graph over the lake and join-path enumeration from top-k tables."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .index.store import LakeCatalog


@dataclass(frozen=True)
class JoinEdge:
    left: str
    right: str
    left_attr: str
    right_attr: str
    overlap_bound: float
    distance: float = 0.0


@dataclass
class JoinGraph:
    nodes: list[str]
    edges: dict[tuple[str, str], JoinEdge] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._adj: dict[str, list[str]] = defaultdict(list)
        for a, b in self.edges:
            self._adj[a].append(b)
            self._adj[b].append(a)
        for n in self._adj:
            self._adj[n].sort()

    @classmethod
    def from_pairs(cls, nodes: Iterable[str], pairs: Iterable[tuple[str, str]]) -> "JoinGraph":
        edges = {}
        for a, b in pairs:
            if a == b:
                continue
            a, b = sorted((a, b))
            edges[(a, b)] = JoinEdge(a, b, "", "", 1.0)
        return cls(sorted(set(nodes)), edges)

    def neighbours(self, node: str) -> list[str]:
        return self._adj.get(node, [])

    def has_edge(self, a: str, b: str) -> bool:
        return tuple(sorted((a, b))) in self.edges

    def edge(self, a: str, b: str) -> JoinEdge:
        return self.edges[tuple(sorted((a, b)))]


@dataclass(frozen=True, order=True)
class JoinPath:
    nodes: tuple[str, ...]

    @property
    def start(self) -> str:
        return self.nodes[0]

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1


def overlap_lower_bound(size_a: int, size_b: int, tau: float) -> float:
    """Lower bound on the overlap coefficient of two tsets with Jaccard >= tau."""
    if size_a < 1 or size_b < 1:
        raise ValueError("tset sizes must be >= 1")
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    return min(1.0, tau * (size_a + size_b) / ((1.0 + tau) * min(size_a, size_b)))


def build_join_graph(lake: LakeCatalog, budget: int | None = None) -> JoinGraph:
    """Connect tables sharing V-related attributes where one side is a subject."""
    budget = budget or lake.config.graph_budget
    tau = lake.config.lsh_threshold
    best: dict[tuple[str, str], JoinEdge] = {}
    for attr_id in sorted(lake.attributes):
        a = lake.attribute(attr_id)
        if a.is_numeric or a.tset_size == 0:
            continue
        for cand_id, d in lake.lookup_id("V", attr_id, budget):
            c = lake.attribute(cand_id)
            if c.dataset_id == a.dataset_id or not (a.is_subject or c.is_subject):
                continue
            if a.dataset_id < c.dataset_id:
                edge = JoinEdge(a.dataset_id, c.dataset_id, attr_id, cand_id,
                                overlap_lower_bound(a.tset_size, c.tset_size, tau), d)
            else:
                edge = JoinEdge(c.dataset_id, a.dataset_id, cand_id, attr_id,
                                overlap_lower_bound(c.tset_size, a.tset_size, tau), d)
            key = (edge.left, edge.right)
            cur = best.get(key)
            if cur is None or (d, edge.left_attr, edge.right_attr) < (
                    cur.distance, cur.left_attr, cur.right_attr):
                best[key] = edge
    return JoinGraph(lake.dataset_ids(), dict(sorted(best.items())))


def find_join_paths(graph: JoinGraph, top_k: Iterable[str], related: Iterable[str],
                    max_len: int = 3) -> list[JoinPath]:
    """Depth-first enumeration of simple paths leaving the top-k set.

    A path starts at a top-k table; every later node lies outside the top-k,
    appears once, and has index evidence of relatedness to the target.
    """
    tops = set(top_k)
    eligible = set(related) - tops
    found: set[tuple[str, ...]] = set()

    def extend(path: tuple[str, ...]) -> None:
        for nb in graph.neighbours(path[-1]):
            if nb in eligible and nb not in path:
                longer = path + (nb,)
                found.add(longer)
                if len(longer) - 1 < max_len:
                    extend(longer)

    if max_len >= 1:
        for start in sorted(tops):
            extend((start,))
    return [JoinPath(p) for p in sorted(found)]


def paths_from(paths: Iterable[JoinPath], start: str) -> list[JoinPath]:
    return [p for p in paths if p.start == start]
