"""Minimal writer for the ".vlca" embedding container.

The byte contract (all little-endian): magic "VLCA", version 1 u16,
N u32, C u32, M u64, provenance length u32, UTF-8 provenance, then M
records of u32 label + N f32 entries.  This module owns only the writer;
the engine package is the reference reader.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"VLCA"
VERSION = 1
_HEADER = struct.Struct("<4sHIIQI")


def write_vlca(
    path: str,
    vectors: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    provenance: str,
) -> None:
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)
    labels = np.ascontiguousarray(labels, dtype=np.uint32)
    if vectors.ndim != 2:
        raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
    if labels.shape != (vectors.shape[0],):
        raise ValueError("labels do not match record count")
    if not np.all(np.isfinite(vectors)):
        raise ValueError("refusing to serialize non-finite embedding entries")
    if labels.size and int(labels.max()) >= n_classes:
        raise ValueError("label out of class range")

    m, n = vectors.shape
    prov = provenance.encode("utf-8")
    record = np.empty(m, dtype=np.dtype([("label", "<u4"), ("vector", "<f4", (n,))]))
    record["label"] = labels
    record["vector"] = vectors
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, n_classes, m, len(prov)))
        fh.write(prov)
        fh.write(record.tobytes())
