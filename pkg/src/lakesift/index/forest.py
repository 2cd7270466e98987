"""LSH Forest over MinHash or random-projection signatures.

Tree ``t`` is a prefix trie over signature components
``[t * depth, (t + 1) * depth)``. Each trie is kept as a sorted array of
byte keys so that all entries sharing a prefix form one contiguous slice,
found with two binary searches.
"""

from __future__ import annotations

import json
import logging
import struct
from bisect import bisect_left, bisect_right
from pathlib import Path
from typing import Iterator, Union

import numpy as np

from .sketch import MinHashSignature, ParameterError, RPSignature

logger = logging.getLogger(__name__)

Signature = Union[MinHashSignature, RPSignature]

MAGIC = b"LKSFRST\x00"
FORMAT_VERSION = 1
_EPS = 1e-12


class IndexFormatError(ValueError):
    pass


class LSHForest:
    def __init__(self, kind: str = "minhash", size: int = 256, seed: int = 42,
                 n_trees: int = 8, max_depth: int = 32, threshold: float = 0.7,
                 dim: int | None = None):
        if kind not in ("minhash", "rp"):
            raise ValueError(f"unknown signature kind {kind!r}")
        if n_trees * max_depth > size:
            raise ParameterError(
                f"{n_trees} trees of depth {max_depth} need {n_trees * max_depth} "
                f"components, signatures have {size}")
        self.kind = kind
        self.size = size
        self.seed = seed
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.threshold = threshold
        self.dim = dim
        self.entries: dict[str, Signature] = {}
        self._width = MinHashSignature.width if kind == "minhash" else RPSignature.width
        self._keys: list[list[bytes]] = []
        self._ids: list[list[str]] = []
        self._dirty = True

    @property
    def params(self) -> dict:
        return {
            "kind": self.kind, "size": self.size, "seed": self.seed,
            "trees": self.n_trees, "depth": self.max_depth,
            "threshold": self.threshold, "dim": self.dim,
        }

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.entries))

    def _check(self, sig: Signature) -> None:
        expected = MinHashSignature if self.kind == "minhash" else RPSignature
        if not isinstance(sig, expected):
            raise ParameterError(f"{self.kind} forest cannot hold {type(sig).__name__}")
        if len(sig) != self.size or sig.seed != self.seed:
            raise ParameterError("signature size or seed does not match the forest")

    def insert(self, item_id: str, sig: Signature) -> None:
        self._check(sig)
        old = self.entries.get(item_id)
        if old is not None:
            if old == sig:
                return
            logger.warning("replacing signature of %s", item_id)
        self.entries[item_id] = sig
        self._dirty = True

    def _tree_keys(self, sig: Signature) -> list[bytes]:
        raw = sig.key()
        span = self.max_depth * self._width
        return [raw[t * span:(t + 1) * span] for t in range(self.n_trees)]

    def _rebuild(self) -> None:
        trees: list[list[tuple[bytes, str]]] = [[] for _ in range(self.n_trees)]
        for item_id, sig in self.entries.items():
            if sig.empty:
                continue
            for t, key in enumerate(self._tree_keys(sig)):
                trees[t].append((key, item_id))
        self._keys, self._ids = [], []
        for tree in trees:
            tree.sort()
            self._keys.append([k for k, _ in tree])
            self._ids.append([i for _, i in tree])
        self._dirty = False

    def _candidates(self, sig: Signature, budget: int) -> set[str]:
        if self._dirty:
            self._rebuild()
        probe = self._tree_keys(sig)
        full = self.max_depth * self._width
        found: set[str] = set()
        for depth in range(self.max_depth, 0, -1):
            cut = depth * self._width
            for t in range(self.n_trees):
                prefix = probe[t][:cut]
                keys = self._keys[t]
                lo = bisect_left(keys, prefix)
                hi = bisect_right(keys, prefix + b"\xff" * (full - cut), lo)
                found.update(self._ids[t][lo:hi])
            if len(found) >= budget:
                break
        return found

    def lookup(self, sig: Signature, budget: int, prefer: str | None = None
               ) -> list[tuple[str, float]]:
        """Up to ``budget`` (id, estimated distance) pairs within 1 - threshold.

        Equal distances are ordered by id, except that ``prefer`` (the
        probe's own id, when it is indexed) goes first among its ties.
        """
        self._check(sig)
        if budget < 1 or not self.entries or sig.empty:
            return []
        limit = 1.0 - self.threshold + _EPS
        scored = sorted(
            (sig.distance(self.entries[i]), i != prefer, i) for i in self._candidates(sig, budget)
        )
        return [(i, d) for d, _, i in scored if d <= limit][:budget]

    # -- persistence -------------------------------------------------------

    def to_bytes(self) -> bytes:
        params = json.dumps(self.params, sort_keys=True, separators=(",", ":")).encode()
        out = [MAGIC, struct.pack(">HI", FORMAT_VERSION, len(params)), params,
               struct.pack(">I", len(self.entries))]
        for item_id in sorted(self.entries):
            sig = self.entries[item_id]
            raw_id = item_id.encode("utf-8")
            out.append(struct.pack(">HB", len(raw_id), int(sig.empty)))
            out.append(raw_id)
            out.append(sig.key())
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, expected: dict | None = None) -> "LSHForest":
        if not data.startswith(MAGIC):
            raise IndexFormatError("not an index container (bad magic bytes)")
        pos = len(MAGIC)
        version, plen = struct.unpack_from(">HI", data, pos)
        pos += 6
        if version != FORMAT_VERSION:
            raise IndexFormatError(f"unsupported container version {version}")
        params = json.loads(data[pos:pos + plen])
        pos += plen
        if expected is not None:
            diff = {k: (params.get(k), v) for k, v in expected.items() if params.get(k) != v}
            if diff:
                raise IndexFormatError(f"index parameters differ from configuration: {diff}")
        forest = cls(params["kind"], params["size"], params["seed"], params["trees"],
                     params["depth"], params["threshold"], params.get("dim"))
        (count,) = struct.unpack_from(">I", data, pos)
        pos += 4
        nbytes = params["size"] * forest._width
        for _ in range(count):
            id_len, empty = struct.unpack_from(">HB", data, pos)
            pos += 3
            item_id = data[pos:pos + id_len].decode("utf-8")
            pos += id_len
            raw = data[pos:pos + nbytes]
            pos += nbytes
            if forest.kind == "minhash":
                sig = MinHashSignature(np.frombuffer(raw, dtype=">u8").astype(np.uint64), forest.seed)
            else:
                sig = RPSignature(np.frombuffer(raw, dtype=np.uint8).copy(), forest.seed,
                                  empty=bool(empty))
            forest.entries[item_id] = sig
        if pos != len(data):
            raise IndexFormatError("trailing bytes after the last entry")
        return forest

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path, expected: dict | None = None) -> "LSHForest":
        return cls.from_bytes(Path(path).read_bytes(), expected)
