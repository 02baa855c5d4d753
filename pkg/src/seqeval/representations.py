"""Representation producers and the resolver that routes metrics to them.

Built-ins cover k-mer frequency embeddings and trivial sequence properties;
anything heavier (neural embedders, measured properties) arrives either as
a registered callable or as a file in one of the public formats.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import formats
from .core import (
    Cache,
    EmbeddingMatrix,
    EvaluationConfigError,
    PropertyColumn,
    PropertyTable,
    SequenceSet,
)


@dataclass
class KmerSpec:
    """Which k-mers to count and how.

    vocabulary: explicit ordered list of k-mers, or None to enumerate all
        |alphabet|^k k-mers over `alphabet` in product order.
    normalize: True divides counts by the window count (len - k + 1);
        False keeps raw counts.
    """

    k: int
    alphabet: str | None = None
    vocabulary: Sequence[str] | None = None
    normalize: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.vocabulary is None:
            if not self.alphabet:
                raise ValueError("need either an explicit vocabulary or an alphabet")
            self.vocabulary = ["".join(p) for p in product(self.alphabet, repeat=self.k)]
        else:
            self.vocabulary = list(self.vocabulary)
            if len(set(self.vocabulary)) != len(self.vocabulary):
                raise ValueError("vocabulary entries must be distinct")
            for v in self.vocabulary:
                if len(v) != self.k:
                    raise ValueError(f"vocabulary entry '{v}' is not length {self.k}")


def kmer_embed(sequences: SequenceSet, spec: KmerSpec) -> EmbeddingMatrix:
    """Frequency (or count) of each vocabulary k-mer per sequence.

    Out-of-vocabulary windows are ignored, so normalized rows sum to at
    most 1, with equality exactly when the vocabulary covers every window.
    """
    index = {kmer: i for i, kmer in enumerate(spec.vocabulary)}
    rows = np.zeros((len(sequences), len(index)))
    for i, s in enumerate(sequences):
        windows = len(s) - spec.k + 1
        if windows < 1:
            raise ValueError(f"sequence {i} has length {len(s)}, shorter than k={spec.k}")
        for w in range(windows):
            j = index.get(s[w : w + spec.k])
            if j is not None:
                rows[i, j] += 1.0
        if spec.normalize:
            rows[i] /= windows
    return EmbeddingMatrix(rows, source_id=f"kmer(k={spec.k})")


def kmer_embedder(spec: KmerSpec) -> Callable[[list[str]], np.ndarray]:
    """Batch callable form of kmer_embed, suitable for cache registration."""

    def embed(batch: list[str]) -> np.ndarray:
        return kmer_embed(SequenceSet("batch", list(batch)), spec).data

    return embed


def length_property(sequences: SequenceSet) -> PropertyTable:
    """Character count of each sequence as a real column named "length"."""
    return PropertyTable(
        [PropertyColumn("length", "real", [float(len(s)) for s in sequences])],
        source_id="length",
    )


def load_embeddings(path: str, expected_rows: int) -> EmbeddingMatrix:
    """Read either embedding format, then check the row count."""
    if formats.sniff_embedding_format(path) == "binary":
        m = formats.load_embeddings_binary(path)
    else:
        m = formats.load_embeddings_csv(path)
    if m.rows != expected_rows:
        raise ValueError(f"{path}: {m.rows} embedding rows for {expected_rows} sequences")
    return m


def load_properties(path: str, expected_rows: int) -> PropertyTable:
    t = formats.load_properties_csv(path)
    if t.rows != expected_rows:
        raise ValueError(f"{path}: {t.rows} property rows for {expected_rows} sequences")
    return t


def _content_key(sequences: SequenceSet) -> str:
    h = hashlib.sha256()
    for s in sequences:
        h.update(s.encode())
        h.update(b"\x00")
    return h.hexdigest()


class Representations:
    """Routes (group, representation id) requests to producers or files.

    Resolution order per request: in-memory objects registered for the
    exact (rep_id, group name) pair, then producers registered for the
    rep_id (embedder via the shared cache, property producer memoized by
    content), then files registered for the pair. Anything else is a
    configuration error.
    """

    def __init__(self, cache: Cache | None = None):
        self.cache = cache if cache is not None else Cache()
        self._embedders: dict[str, Callable[[list[str]], np.ndarray]] = {}
        self._property_fns: dict[str, Callable[[SequenceSet], PropertyTable]] = {}
        self._data: dict[tuple[str, str], EmbeddingMatrix | PropertyTable] = {}
        self._files: dict[tuple[str, str], str] = {}
        self._memo: dict[tuple[str, str], PropertyTable] = {}

    def register_embedder(self, rep_id: str, fn: Callable[[list[str]], np.ndarray]) -> None:
        self._embedders[rep_id] = fn

    def register_property(self, rep_id: str, fn: Callable[[SequenceSet], PropertyTable]) -> None:
        self._property_fns[rep_id] = fn

    def register_data(self, rep_id: str, group_name: str, rep: EmbeddingMatrix | PropertyTable) -> None:
        self._data[(rep_id, group_name)] = rep

    def register_file(self, rep_id: str, group_name: str, path: str) -> None:
        self._files[(rep_id, group_name)] = path

    def resolve(self, seqs: SequenceSet, rep_id: str) -> EmbeddingMatrix | PropertyTable:
        key = (rep_id, seqs.name)
        if key in self._data:
            return self._data[key]
        if rep_id in self._embedders:
            rows = self.cache.get_or_compute(rep_id, self._embedders[rep_id], seqs.sequences)
            return EmbeddingMatrix(np.asarray(rows, dtype=np.float64), source_id=rep_id)
        if rep_id in self._property_fns:
            memo_key = (rep_id, _content_key(seqs))
            if memo_key not in self._memo:
                table = self._property_fns[rep_id](seqs)
                if table.rows != len(seqs):
                    raise ValueError(
                        f"property producer '{rep_id}' returned {table.rows} rows "
                        f"for group '{seqs.name}' of size {len(seqs)}"
                    )
                self._memo[memo_key] = table
            return self._memo[memo_key]
        if key in self._files:
            path = self._files[key]
            if formats.sniff_embedding_format(path) == "binary":
                return load_embeddings(path, len(seqs))
            with open(path, "r", encoding="utf-8") as f:
                first = f.readline()
            if first.startswith("dim="):
                return load_embeddings(path, len(seqs))
            return load_properties(path, len(seqs))
        raise EvaluationConfigError(
            f"no representation '{rep_id}' available for group '{seqs.name}'"
        )
