"""Related-table discovery in data lakes from five kinds of attribute evidence."""

from .config import Config, load_config
from .index import ExactLake, LakeIndex
from .ingest import Dataset, load_lake, load_table
from .query import QueryResult, discover
from .relatedness import EvidenceWeights

__version__ = "0.1.0"

__all__ = [
    "Config",
    "Dataset",
    "EvidenceWeights",
    "ExactLake",
    "LakeIndex",
    "QueryResult",
    "discover",
    "load_config",
    "load_lake",
    "load_table",
]
