"""MinHash and random-projection signatures with their distance estimators."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)
_LOW32 = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_CHUNK = 4096


class ParameterError(ValueError):
    """Two signatures were built with different sizes or seeds."""


@dataclass(frozen=True, eq=False)
class MinHashSignature:
    mins: np.ndarray
    seed: int

    width = 8  # bytes per component in forest keys

    def __len__(self) -> int:
        return len(self.mins)

    @property
    def empty(self) -> bool:
        return bool(np.all(self.mins == EMPTY))

    def key(self) -> bytes:
        return self.mins.astype(">u8").tobytes()

    def distance(self, other: "MinHashSignature") -> float:
        return estimate_jaccard_distance(self, other)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, MinHashSignature) and self.seed == other.seed
                and np.array_equal(self.mins, other.mins))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RPSignature:
    bits: np.ndarray
    seed: int
    empty: bool = False

    width = 1

    def __len__(self) -> int:
        return len(self.bits)

    def key(self) -> bytes:
        return self.bits.astype(np.uint8).tobytes()

    def distance(self, other: "RPSignature") -> float:
        return estimate_cosine_distance(self, other)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, RPSignature) and self.seed == other.seed
                and self.empty == other.empty and np.array_equal(self.bits, other.bits))

    __hash__ = None


class MinHasher:
    """Seeded MinHash over strings.

    Each element is first reduced to a 64-bit key with BLAKE2b; component i
    then applies the multiply-shift map ((a1*lo + a2*hi + b) mod 2^64) >> 32,
    which is strongly universal over the two 32-bit halves of the key.
    """

    def __init__(self, size: int = 256, seed: int = 42):
        if size < 16:
            raise ParameterError("MinHash size must be >= 16")
        self.size = size
        self.seed = seed
        rng = np.random.default_rng([seed, 0x6D68])
        self._a1, self._a2, self._b = (
            rng.integers(0, 2**64, size=size, dtype=np.uint64, endpoint=False) for _ in range(3)
        )

    @staticmethod
    def base_keys(elements: Iterable[str]) -> np.ndarray:
        digests = b"".join(
            hashlib.blake2b(e.encode("utf-8"), digest_size=8).digest() for e in elements
        )
        return np.frombuffer(digests, dtype=">u8").astype(np.uint64)

    def signature(self, elements: Iterable[str]) -> MinHashSignature:
        keys = self.base_keys(sorted(set(elements)))
        mins = np.full(self.size, EMPTY, dtype=np.uint64)
        for start in range(0, len(keys), _CHUNK):
            chunk = keys[start:start + _CHUNK]
            lo = (chunk & _LOW32)[:, None]
            hi = (chunk >> _SHIFT)[:, None]
            with np.errstate(over="ignore"):
                hv = (lo * self._a1 + hi * self._a2 + self._b) >> _SHIFT
            np.minimum(mins, hv.min(axis=0), out=mins)
        return MinHashSignature(mins, self.seed)


class RandomProjector:
    """Sign-of-projection bits against seeded Gaussian directions."""

    def __init__(self, bits: int = 256, dim: int = 300, seed: int = 42):
        if bits < 16:
            raise ParameterError("projection width must be >= 16")
        self.bits = bits
        self.dim = dim
        self.seed = seed
        rng = np.random.default_rng([seed, dim, 0x7270])
        self.directions = rng.standard_normal((bits, dim))

    def signature(self, v: np.ndarray | None) -> RPSignature:
        if v is None or not np.any(v):
            return RPSignature(np.zeros(self.bits, dtype=np.uint8), self.seed, empty=True)
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ParameterError(f"vector has dimension {v.shape}, projector expects {self.dim}")
        return RPSignature((self.directions @ v >= 0).astype(np.uint8), self.seed)


@lru_cache(maxsize=16)
def _minhasher(size: int, seed: int) -> MinHasher:
    return MinHasher(size, seed)


@lru_cache(maxsize=16)
def _projector(bits: int, dim: int, seed: int) -> RandomProjector:
    return RandomProjector(bits, dim, seed)


def minhash(set_repr: Iterable[str], h: int = 256, seed: int = 42) -> MinHashSignature:
    return _minhasher(h, seed).signature(set_repr)


def random_projection(v: np.ndarray | None, b: int = 256, seed: int = 42) -> RPSignature:
    if v is None:
        return RPSignature(np.zeros(b, dtype=np.uint8), seed, empty=True)
    return _projector(b, len(v), seed).signature(v)


def estimate_jaccard_distance(s1: MinHashSignature, s2: MinHashSignature) -> float:
    if len(s1) != len(s2) or s1.seed != s2.seed:
        raise ParameterError("MinHash signatures differ in size or seed")
    if s1.empty or s2.empty:
        return 1.0
    return 1.0 - float(np.count_nonzero(s1.mins == s2.mins)) / len(s1)


def estimate_cosine_distance(s1: RPSignature, s2: RPSignature) -> float:
    if len(s1) != len(s2) or s1.seed != s2.seed:
        raise ParameterError("projection signatures differ in width or seed")
    if s1.empty or s2.empty:
        return 1.0
    hamming = float(np.count_nonzero(s1.bits != s2.bits)) / len(s1)
    return min(1.0, max(0.0, 1.0 - math.cos(math.pi * hamming)))


def exact_jaccard_distance(a: set | frozenset, b: set | frozenset) -> float:
    if not a or not b:
        return 1.0
    return 1.0 - len(a & b) / len(a | b)


def exact_cosine_distance(u: np.ndarray | None, v: np.ndarray | None) -> float:
    if u is None or v is None:
        return 1.0
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - float(u @ v) / (nu * nv)))
