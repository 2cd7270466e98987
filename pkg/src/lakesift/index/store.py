"""The four evidence indexes over a lake, plus the metadata queries need."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..config import Config, ConfigError, config_from_params
from ..ingest import Dataset, Kind
from ..profile import AttributeProfile, EmbeddingModel, profile_dataset
from .forest import IndexFormatError, LSHForest
from .sketch import (
    exact_cosine_distance,
    exact_jaccard_distance,
    minhash,
    random_projection,
)

logger = logging.getLogger(__name__)

INDEX_TYPES = ("N", "V", "F", "E")
MANIFEST = "manifest.json"
NUMERIC_SIDECAR = "numeric.json"
WEIGHTS_FILE = "weights.txt"


@dataclass(frozen=True)
class AttributeMeta:
    attr_id: str
    dataset_id: str
    name: str
    position: int
    kind: Kind
    is_subject: bool
    tset_size: int
    has_embedding: bool

    @property
    def is_numeric(self) -> bool:
        return self.kind is Kind.NUMERIC


@dataclass(frozen=True)
class DatasetMeta:
    id: str
    name: str
    row_count: int
    attributes: tuple[str, ...]
    subject: str | None

    @property
    def arity(self) -> int:
        return len(self.attributes)


class LakeCatalog:
    """Dataset and attribute metadata shared by the sketch and exact indexes."""

    def __init__(self, config: Config):
        self.config = config
        self.datasets: dict[str, DatasetMeta] = {}
        self.attributes: dict[str, AttributeMeta] = {}
        self.numeric: dict[str, np.ndarray] = {}

    def _register(self, dataset: Dataset, profiles: Sequence[AttributeProfile]) -> None:
        if dataset.id in self.datasets:
            raise ValueError(f"duplicate dataset id {dataset.id}")
        subject = None
        for attr, prof in zip(dataset.attributes, profiles):
            self.attributes[prof.attr_id] = AttributeMeta(
                prof.attr_id, dataset.id, attr.name, attr.position, attr.kind,
                prof.is_subject, prof.tset_size, prof.embedding is not None)
            if prof.is_subject:
                subject = prof.attr_id
            if prof.numeric_extent is not None:
                self.numeric[prof.attr_id] = prof.numeric_extent
        self.datasets[dataset.id] = DatasetMeta(
            dataset.id, dataset.name, dataset.row_count,
            tuple(p.attr_id for p in profiles), subject)

    def attribute(self, attr_id: str) -> AttributeMeta:
        return self.attributes[attr_id]

    def dataset(self, dataset_id: str) -> DatasetMeta:
        return self.datasets[dataset_id]

    def subject_of(self, dataset_id: str) -> str | None:
        return self.datasets[dataset_id].subject

    def numeric_extent(self, attr_id: str) -> np.ndarray:
        return self.numeric[attr_id]

    def dataset_ids(self) -> list[str]:
        return sorted(self.datasets)

    def lookup(self, evidence: str, profile: AttributeProfile, budget: int
               ) -> list[tuple[str, float]]:
        raise NotImplementedError

    def lookup_id(self, evidence: str, attr_id: str, budget: int) -> list[tuple[str, float]]:
        raise NotImplementedError


def profile_signatures(profile: AttributeProfile, config: Config) -> dict:
    h, seed = config.minhash_size, config.seed
    sigs = {"N": minhash(profile.qset, h, seed), "F": minhash(profile.rset, h, seed)}
    if not profile.is_numeric:
        sigs["V"] = minhash(profile.tset or (), h, seed)
        if profile.embedding is not None:
            sigs["E"] = random_projection(profile.embedding, config.rp_bits, seed)
    return sigs


class LakeIndex(LakeCatalog):
    """Four LSH forests I_N, I_V, I_F, I_E with their manifest."""

    def __init__(self, config: Config, embedding_dim: int | None = None):
        super().__init__(config)
        self.embedding_dim = embedding_dim
        self.forests = {t: self._new_forest(t) for t in INDEX_TYPES}

    def _new_forest(self, evidence: str) -> LSHForest:
        c = self.config
        if evidence == "E":
            return LSHForest("rp", c.rp_bits, c.seed, c.forest_trees, c.forest_depth,
                             c.lsh_threshold, dim=self.embedding_dim)
        return LSHForest("minhash", c.minhash_size, c.seed, c.forest_trees, c.forest_depth,
                         c.lsh_threshold)

    @classmethod
    def build(cls, datasets: Iterable[Dataset], config: Config | None = None,
              model: EmbeddingModel | None = None) -> "LakeIndex":
        config = config or Config()
        index = cls(config, model.dimension if model is not None else None)
        for ds in datasets:
            index.add(ds, profile_dataset(ds, config, model))
        return index

    def add(self, dataset: Dataset, profiles: Sequence[AttributeProfile]) -> None:
        self._register(dataset, profiles)
        for prof in profiles:
            for evidence, sig in profile_signatures(prof, self.config).items():
                self.forests[evidence].insert(prof.attr_id, sig)

    def lookup(self, evidence: str, profile: AttributeProfile, budget: int
               ) -> list[tuple[str, float]]:
        sig = profile_signatures(profile, self.config).get(evidence)
        if sig is None:
            return []
        forest = self.forests[evidence]
        if evidence == "E" and forest.dim is not None and len(profile.embedding) != forest.dim:
            raise ConfigError("target embedding dimension differs from the indexed model")
        return forest.lookup(sig, budget, prefer=profile.attr_id)

    def lookup_id(self, evidence: str, attr_id: str, budget: int) -> list[tuple[str, float]]:
        forest = self.forests[evidence]
        sig = forest.entries.get(attr_id)
        return forest.lookup(sig, budget, prefer=attr_id) if sig is not None else []

    # -- persistence -------------------------------------------------------

    def forest_params(self, evidence: str) -> dict:
        return self._new_forest(evidence).params

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for evidence, forest in self.forests.items():
            forest.save(directory / f"{evidence}.idx")
        manifest = {
            "format": "lakesift-index",
            "version": 1,
            "config": self.config.index_params(),
            "embedding_dim": self.embedding_dim,
            "datasets": [
                {"id": d.id, "name": d.name, "row_count": d.row_count,
                 "attributes": list(d.attributes), "subject": d.subject}
                for d in (self.datasets[i] for i in sorted(self.datasets))
            ],
            "attributes": [
                {**asdict(a), "kind": a.kind.value}
                for a in (self.attributes[i] for i in sorted(self.attributes))
            ],
        }
        (directory / MANIFEST).write_text(
            json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        numeric = {k: self.numeric[k].tolist() for k in sorted(self.numeric)}
        (directory / NUMERIC_SIDECAR).write_text(
            json.dumps(numeric, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path, config: Config | None = None) -> "LakeIndex":
        directory = Path(directory)
        try:
            manifest = json.loads((directory / MANIFEST).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise IndexFormatError(f"{directory} has no {MANIFEST}") from None
        if manifest.get("format") != "lakesift-index":
            raise IndexFormatError("manifest is not a lakesift index manifest")
        stored = manifest["config"]
        if config is not None:
            wanted = config.index_params()
            diff = {k: (stored.get(k), wanted[k]) for k in wanted if stored.get(k) != wanted[k]}
            if diff:
                raise IndexFormatError(f"index was built with different parameters: {diff}")
        config = config_from_params(stored, config)
        index = cls(config, manifest.get("embedding_dim"))
        for evidence in INDEX_TYPES:
            index.forests[evidence] = LSHForest.load(
                directory / f"{evidence}.idx", expected=index.forest_params(evidence))
        for d in manifest["datasets"]:
            index.datasets[d["id"]] = DatasetMeta(
                d["id"], d["name"], d["row_count"], tuple(d["attributes"]), d["subject"])
        for a in manifest["attributes"]:
            a = dict(a, kind=Kind(a["kind"]))
            index.attributes[a["attr_id"]] = AttributeMeta(**a)
        numeric = json.loads((directory / NUMERIC_SIDECAR).read_text(encoding="utf-8"))
        index.numeric = {k: np.asarray(v, dtype=np.float64) for k, v in numeric.items()}
        return index


class ExactLake(LakeCatalog):
    """Brute-force twin of :class:`LakeIndex` using exact set and vector distances.

    Lookups scan every stored profile, so results carry the true Jaccard and
    cosine distances instead of sketch estimates. Used to check the ranking
    pipeline independently of sketching error.
    """

    def __init__(self, config: Config):
        super().__init__(config)
        self.profiles: dict[str, AttributeProfile] = {}

    @classmethod
    def build(cls, datasets: Iterable[Dataset], config: Config | None = None,
              model: EmbeddingModel | None = None) -> "ExactLake":
        config = config or Config()
        lake = cls(config)
        for ds in datasets:
            profiles = profile_dataset(ds, config, model)
            lake._register(ds, profiles)
            lake.profiles.update((p.attr_id, p) for p in profiles)
        return lake

    @staticmethod
    def exact_distance(evidence: str, a: AttributeProfile, b: AttributeProfile) -> float | None:
        if evidence == "N":
            return exact_jaccard_distance(a.qset, b.qset)
        if evidence == "F":
            return exact_jaccard_distance(a.rset, b.rset)
        if a.is_numeric or b.is_numeric:
            return None
        if evidence == "V":
            return exact_jaccard_distance(a.tset, b.tset)
        if a.embedding is None or b.embedding is None:
            return None
        return exact_cosine_distance(a.embedding, b.embedding)

    def lookup(self, evidence: str, profile: AttributeProfile, budget: int
               ) -> list[tuple[str, float]]:
        limit = 1.0 - self.config.lsh_threshold + 1e-12
        hits = []
        for attr_id in sorted(self.profiles):
            d = self.exact_distance(evidence, profile, self.profiles[attr_id])
            if d is not None and d <= limit:
                hits.append((d, attr_id != profile.attr_id, attr_id))
        hits.sort()
        return [(i, d) for d, _, i in hits[:budget]]

    def lookup_id(self, evidence: str, attr_id: str, budget: int) -> list[tuple[str, float]]:
        return self.lookup(evidence, self.profiles[attr_id], budget)
