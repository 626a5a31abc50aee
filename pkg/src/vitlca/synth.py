"""Seed-deterministic synthetic embedding sets for desk-scale testing.

Clusters are isotropic blobs around random unit centers; every sample is
re-normalized to the unit sphere so the data resembles normalized
embedding geometry.
"""

from __future__ import annotations

import numpy as np

from .embedset import EmbeddingSet
from .errors import ValidationError


def make_clustered_set(
    n_clusters: int,
    per_cluster: int,
    n_dim: int,
    spread: float,
    seed: int,
) -> EmbeddingSet:
    """C isotropic clusters of unit vectors; labels are cluster ids.

    ``spread`` is the per-coordinate noise scale before re-normalization;
    spread 0 collapses each cluster onto its center exactly.
    """
    if n_clusters < 1:
        raise ValidationError(f"n_clusters must be >= 1, got {n_clusters}")
    if per_cluster < 1:
        raise ValidationError(f"per_cluster must be >= 1, got {per_cluster}")
    if n_dim < 1:
        raise ValidationError(f"n_dim must be >= 1, got {n_dim}")
    if spread < 0:
        raise ValidationError(f"spread must be >= 0, got {spread}")

    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_clusters, n_dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)

    vectors = np.repeat(centers, per_cluster, axis=0)
    if spread > 0:
        vectors = vectors + spread * rng.standard_normal(vectors.shape)
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    labels = np.repeat(np.arange(n_clusters, dtype=np.uint32), per_cluster)

    provenance = (
        f"synthetic clusters: C={n_clusters} per_cluster={per_cluster} "
        f"N={n_dim} spread={spread} seed={seed}"
    )
    return EmbeddingSet(
        n_dim=n_dim,
        n_classes=n_clusters,
        vectors=vectors.astype(np.float32),
        labels=labels,
        provenance=provenance,
    )


def cluster_centers(es: EmbeddingSet) -> np.ndarray:
    """Per-class mean vectors, for nearest-centroid baselines."""
    centers = np.zeros((es.n_classes, es.n_dim))
    for c in range(es.n_classes):
        mask = es.labels == c
        if mask.any():
            centers[c] = np.asarray(es.vectors[mask], dtype=np.float64).mean(axis=0)
    return centers


def nearest_centroid_accuracy(train: EmbeddingSet, test: EmbeddingSet) -> float:
    """Cosine nearest-centroid baseline accuracy of ``test`` against ``train``."""
    centers = cluster_centers(train)
    norms = np.linalg.norm(centers, axis=1)
    norms[norms == 0] = 1.0
    centers = centers / norms[:, None]
    sims = np.asarray(test.vectors, dtype=np.float64) @ centers.T
    return float(np.mean(np.argmax(sims, axis=1) == test.labels))


def nearest_atom_accuracy(train: EmbeddingSet, test: EmbeddingSet) -> float:
    """1-NN by inner product over unit-normalized training vectors."""
    atoms = np.asarray(train.vectors, dtype=np.float64)
    atoms = atoms / np.linalg.norm(atoms, axis=1, keepdims=True)
    sims = np.asarray(test.vectors, dtype=np.float64) @ atoms.T
    pred = np.asarray(train.labels)[np.argmax(sims, axis=1)]
    return float(np.mean(pred == test.labels))
