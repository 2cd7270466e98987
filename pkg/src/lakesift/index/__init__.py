from .forest import IndexFormatError, LSHForest
from .sketch import (
    MinHashSignature,
    ParameterError,
    RPSignature,
    estimate_cosine_distance,
    estimate_jaccard_distance,
    exact_cosine_distance,
    exact_jaccard_distance,
    minhash,
    random_projection,
)
from .store import (
    INDEX_TYPES,
    AttributeMeta,
    DatasetMeta,
    ExactLake,
    LakeCatalog,
    LakeIndex,
    profile_signatures,
)


def forest_insert(index: LSHForest, item_id: str, sig) -> LSHForest:
    index.insert(item_id, sig)
    return index


def forest_lookup(index: LSHForest, probe, budget: int) -> list[tuple[str, float]]:
    return index.lookup(probe, budget)


__all__ = [
    "AttributeMeta",
    "DatasetMeta",
    "ExactLake",
    "INDEX_TYPES",
    "IndexFormatError",
    "LSHForest",
    "LakeCatalog",
    "LakeIndex",
    "MinHashSignature",
    "ParameterError",
    "RPSignature",
    "estimate_cosine_distance",
    "estimate_jaccard_distance",
    "exact_cosine_distance",
    "exact_jaccard_distance",
    "forest_insert",
    "forest_lookup",
    "minhash",
    "profile_signatures",
    "random_projection",
]
