"""Set representations of attributes and subject-attribute detection.

Each attribute is reduced to the inputs the four LSH indexes and the
distribution test consume: name q-grams, informative value tokens, format
strings, an embedding vector and, for numeric columns, the sorted extent.
"""

from __future__ import annotations

import logging
import re
import zlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import Config
from .ingest import Attribute, Dataset, Kind, parse_number

logger = logging.getLogger(__name__)

_WORD = re.compile(r"[^\W_]+")
_PUNCT = re.compile(r"(?:[^\w\s]|_)+")
_FORMAT_TOKEN = re.compile(r"[^\W_]+|(?:[^\w\s]|_)+")

# Checked in order; the first full match names the token's class.
LEXICAL_CLASSES = (
    ("C", re.compile(r"[A-Z][a-z]+")),
    ("U", re.compile(r"[A-Z]+")),
    ("L", re.compile(r"[a-z]+")),
    ("N", re.compile(r"[0-9]+")),
    ("A", re.compile(r"[A-Za-z0-9]+")),
)


@dataclass(frozen=True)
class AttributeProfile:
    attr_id: str
    dataset_id: str
    name: str
    kind: Kind
    qset: frozenset[str]
    rset: frozenset[str]
    tset: frozenset[str] | None = None
    frequent_words: frozenset[str] | None = None
    embedding: np.ndarray | None = None
    numeric_extent: np.ndarray | None = None
    is_subject: bool = False

    @property
    def is_numeric(self) -> bool:
        return self.kind is Kind.NUMERIC

    @property
    def tset_size(self) -> int:
        return len(self.tset) if self.tset else 0


class EmbeddingModel:
    """Word vectors of a fixed dimension, looked up by case-folded word."""

    def __init__(self, vocabulary: dict[str, np.ndarray], dimension: int | None = None):
        if dimension is None:
            if not vocabulary:
                raise ValueError("cannot infer the dimension of an empty model")
            dimension = len(next(iter(vocabulary.values())))
        self.dimension = dimension
        self.vocabulary: dict[str, np.ndarray] = {}
        for word, vec in vocabulary.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dimension,):
                raise ValueError(f"vector for {word!r} has shape {vec.shape}, expected ({dimension},)")
            self.vocabulary.setdefault(word.casefold(), vec)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.vocabulary

    def __len__(self) -> int:
        return len(self.vocabulary)

    def get(self, word: str) -> np.ndarray | None:
        return self.vocabulary.get(word.casefold())

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingModel":
        """Read a text vector file: optional ``count dim`` line, then ``word v1 .. vp``."""
        vocab: dict[str, np.ndarray] = {}
        dimension: int | None = None
        bad = 0
        with open(path, encoding="utf-8", errors="replace") as fh:
            for lineno, line in enumerate(fh):
                parts = line.rstrip("\n").split()
                if not parts:
                    continue
                if lineno == 0 and len(parts) == 2 and all(p.isdigit() for p in parts):
                    dimension = int(parts[1])
                    continue
                if dimension is None:
                    dimension = len(parts) - 1
                if len(parts) != dimension + 1:
                    bad += 1
                    continue
                try:
                    vec = np.array([float(x) for x in parts[1:]])
                except ValueError:
                    bad += 1
                    continue
                vocab.setdefault(parts[0].casefold(), vec)
        if bad:
            logger.warning("%s: ignored %d malformed vector line(s)", path, bad)
        if dimension is None:
            raise ValueError(f"{path}: no vectors found")
        return cls(vocab, dimension)


def get_qgrams(name: str, q: int = 4) -> set[str]:
    if q < 2:
        raise ValueError("q must be >= 2")
    s = "".join(name.lower().split())
    if not s:
        return set()
    if len(s) < q:
        return {s}
    return {s[i:i + q] for i in range(len(s) - q + 1)}


def value_parts(value: str) -> list[list[str]]:
    """Split a value into parts at punctuation, and parts into case-folded words."""
    parts = []
    for chunk in _PUNCT.split(value):
        words = _WORD.findall(chunk.casefold())
        if words:
            parts.append(words)
    return parts


def _order(hist: Counter):
    # Count ties put longer words first (they carry more identifying signal),
    # then lexicographic order.
    return lambda w: (hist[w], -len(w), w)


def _rarest(words: Iterable[str], hist: Counter) -> str:
    return min(words, key=_order(hist))


def _commonest(words: Iterable[str], hist: Counter) -> str:
    # The opposite end of the same order, so a part with two or more distinct
    # words never yields the same word for both sets.
    return max(words, key=_order(hist))


def tokenize_extent(extent: Sequence[str]) -> tuple[set[str], set[str]]:
    """Return (tset, frequent_words) from one histogram pass over the extent."""
    split = [value_parts(v) for v in extent]
    hist: Counter = Counter()
    for parts in split:
        for words in parts:
            hist.update(words)
    tset: set[str] = set()
    frequent: set[str] = set()
    for parts in split:
        for words in parts:
            tset.add(_rarest(words, hist))
            frequent.add(_commonest(words, hist))
    return tset, frequent


def token_class(token: str) -> str:
    for symbol, pattern in LEXICAL_CLASSES:
        if pattern.fullmatch(token):
            return symbol
    return "P"


def get_regex_string(value: str) -> str:
    out: list[str] = []
    for token in _FORMAT_TOKEN.findall(value):
        symbol = token_class(token)
        if out and (out[-1] == symbol or (out[-1] == "+" and out[-2] == symbol)):
            if out[-1] != "+":
                out.append("+")
            continue
        out.append(symbol)
    return "".join(out)


def embed_attribute(frequent_words: Iterable[str], model: EmbeddingModel | None) -> np.ndarray | None:
    if model is None:
        return None
    vectors = [v for v in (model.get(w) for w in sorted(frequent_words)) if v is not None]
    if not vectors:
        return None
    return np.mean(vectors, axis=0)


def subject_scores(dataset: Dataset, weights: Sequence[float] = (0.4, 0.3, 0.3)) -> dict[int, float]:
    alpha, beta, gamma = weights
    arity = dataset.arity
    scores = {}
    for attr in dataset.attributes:
        if attr.kind is not Kind.TEXT:
            continue
        values = attr.raw_values
        uniqueness = len(set(values)) / len(values) if values else 0.0
        null_ratio = attr.null_count / dataset.row_count if dataset.row_count else 1.0
        scores[attr.position] = (alpha * uniqueness + beta * (1.0 - null_ratio)
                                 + gamma * (1.0 - attr.position / arity))
    return scores


def detect_subject_attribute(dataset: Dataset, weights: Sequence[float] = (0.4, 0.3, 0.3)) -> int | None:
    """Position of the subject attribute, or None when the table has no text column."""
    best, best_score = None, -np.inf
    for position, score in sorted(subject_scores(dataset, weights).items()):
        if score > best_score:
            best, best_score = position, score
    return best


def _sample(values: list, cap: int, seed: int, key: str) -> list:
    if len(values) <= cap:
        return values
    rng = np.random.default_rng([seed, zlib.crc32(key.encode("utf-8"))])
    idx = np.sort(rng.choice(len(values), size=cap, replace=False))
    return [values[i] for i in idx]


def profile_attribute(dataset: Dataset, attr: Attribute, config: Config,
                      model: EmbeddingModel | None = None, is_subject: bool = False
                      ) -> AttributeProfile:
    attr_id = dataset.attribute_id(attr)
    raw = _sample(attr.raw_values, config.sample_cap, config.seed, attr_id)
    rset = frozenset(s for s in (get_regex_string(v) for v in raw) if s)
    qset = frozenset(get_qgrams(attr.name, config.qgram_size))
    if attr.kind is Kind.NUMERIC:
        extent = np.sort(np.array([parse_number(v) for v in raw], dtype=np.float64))
        return AttributeProfile(attr_id, dataset.id, attr.name, attr.kind, qset, rset,
                                numeric_extent=extent, is_subject=False)
    tset, frequent = tokenize_extent(raw)
    return AttributeProfile(
        attr_id, dataset.id, attr.name, attr.kind, qset, rset,
        tset=frozenset(tset), frequent_words=frozenset(frequent),
        embedding=embed_attribute(frequent, model), is_subject=is_subject,
    )


def profile_dataset(dataset: Dataset, config: Config | None = None,
                    model: EmbeddingModel | None = None) -> list[AttributeProfile]:
    config = config or Config()
    subject = detect_subject_attribute(dataset, config.subject_weights)
    return [
        profile_attribute(dataset, attr, config, model, is_subject=attr.position == subject)
        for attr in dataset.attributes
    ]
