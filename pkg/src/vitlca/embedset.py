"""Labeled embedding datasets and their binary container format (".vlca").

Layout, all little-endian, no padding or compression:

    bytes 0-3    magic b"VLCA"
    bytes 4-5    version, u16 (currently 1)
    bytes 6-9    N, vector length, u32
    bytes 10-13  C, number of classes, u32
    bytes 14-21  M, record count, u64
    bytes 22-25  P, provenance byte length, u32
    next P       UTF-8 provenance string
    then M records, each: u32 label followed by N f32 vector entries

Vectors are stored as raw float32; any normalization happens downstream
at dictionary build, never here.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, NamedTuple, Sequence

import numpy as np

from .errors import FormatError, ValidationError

MAGIC = b"VLCA"
VERSION = 1
_HEADER = struct.Struct("<4sHIIQI")


class EmbeddingRecord(NamedTuple):
    vector: np.ndarray
    label: int


@dataclass
class EmbeddingSet:
    """Immutable labeled collection of fixed-length float32 vectors.

    ``vectors`` has shape (M, N) float32, ``labels`` shape (M,) uint32.
    """

    n_dim: int
    n_classes: int
    vectors: np.ndarray
    labels: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint32)
        if self.n_dim < 1:
            raise ValidationError(f"n_dim must be positive, got {self.n_dim}")
        if self.n_classes < 1:
            raise ValidationError(f"n_classes must be positive, got {self.n_classes}")
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.n_dim:
            raise ValidationError(
                f"vectors must have shape (M, {self.n_dim}), got {self.vectors.shape}"
            )
        if self.labels.shape != (self.vectors.shape[0],):
            raise ValidationError(
                f"labels shape {self.labels.shape} does not match {self.vectors.shape[0]} records"
            )
        if not np.all(np.isfinite(self.vectors)):
            bad = int(np.argwhere(~np.isfinite(self.vectors))[0][0])
            raise ValidationError(f"non-finite entry in record {bad}")
        if self.labels.size and int(self.labels.max()) >= self.n_classes:
            bad = int(np.argmax(self.labels >= self.n_classes))
            raise ValidationError(
                f"record {bad} has label {int(self.labels[bad])} >= n_classes {self.n_classes}"
            )
        self.vectors.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def record(self, i: int) -> EmbeddingRecord:
        return EmbeddingRecord(self.vectors[i], int(self.labels[i]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingSet):
            return NotImplemented
        return (
            self.n_dim == other.n_dim
            and self.n_classes == other.n_classes
            and self.provenance == other.provenance
            and np.array_equal(self.vectors, other.vectors)
            and np.array_equal(self.labels, other.labels)
        )


def _record_dtype(n_dim: int) -> np.dtype:
    return np.dtype([("label", "<u4"), ("vector", "<f4", (n_dim,))])


def save_embedding_set(es: EmbeddingSet, destination: BinaryIO | str) -> None:
    """Serialize ``es`` to the ".vlca" format; byte-deterministic."""
    prov = es.provenance.encode("utf-8")
    m = len(es)
    packed = np.empty(m, dtype=_record_dtype(es.n_dim))
    packed["label"] = es.labels
    packed["vector"] = es.vectors
    header = _HEADER.pack(MAGIC, VERSION, es.n_dim, es.n_classes, m, len(prov))
    if isinstance(destination, str):
        with open(destination, "wb") as fh:
            fh.write(header)
            fh.write(prov)
            fh.write(packed.tobytes())
    else:
        destination.write(header)
        destination.write(prov)
        destination.write(packed.tobytes())


def load_embedding_set(source: BinaryIO | str | bytes) -> EmbeddingSet:
    """Parse a ".vlca" file, enforcing every format and content invariant."""
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, str):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()

    if len(data) < _HEADER.size:
        raise FormatError(f"file too short for header ({len(data)} bytes)")
    magic, version, n_dim, n_classes, m, prov_len = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}, expected {VERSION}")
    offset = _HEADER.size
    if len(data) < offset + prov_len:
        raise FormatError("truncated provenance block")
    try:
        provenance = data[offset : offset + prov_len].decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError(f"provenance is not valid UTF-8: {e}") from e
    offset += prov_len

    if n_dim == 0:
        raise ValidationError("n_dim must be positive, got 0")
    dtype = _record_dtype(n_dim)
    expected = m * dtype.itemsize
    payload = data[offset:]
    if len(payload) != expected:
        raise FormatError(
            f"payload is {len(payload)} bytes but {m} records of {dtype.itemsize} "
            f"bytes require {expected}"
        )
    packed = np.frombuffer(payload, dtype=dtype)
    return EmbeddingSet(
        n_dim=int(n_dim),
        n_classes=int(n_classes),
        vectors=packed["vector"].copy(),
        labels=packed["label"].copy(),
        provenance=provenance,
    )


def split_set(es: EmbeddingSet, indices: Sequence[int]) -> EmbeddingSet:
    """New set with exactly the selected records, in the given order.

    Indices must be in range and duplicate-free; N, C and provenance carry over.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValidationError("indices must be a flat sequence")
    if idx.size:
        if idx.min() < 0 or idx.max() >= len(es):
            bad = idx[(idx < 0) | (idx >= len(es))][0]
            raise ValidationError(f"index {int(bad)} out of range for {len(es)} records")
        if np.unique(idx).size != idx.size:
            raise ValidationError("duplicate index in split selection")
    return EmbeddingSet(
        n_dim=es.n_dim,
        n_classes=es.n_classes,
        vectors=es.vectors[idx],
        labels=es.labels[idx],
        provenance=es.provenance,
    )
