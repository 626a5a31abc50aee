"""Activation decoders: map a sparse code to a class prediction.

Two decoders are provided: "max activation" scores each class by its
single strongest neuron, "max sum" by the l1 mass of its neurons.  Both
use absolute activations by default; a signed mode exists for ablation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAX_ACTIVATION = "MaxActivation"
MAX_SUM = "MaxSumOfActivations"


@dataclass(frozen=True)
class Prediction:
    """``predicted_class`` is None when no neuron is active (no evidence)."""

    predicted_class: int | None
    per_class_scores: np.ndarray
    decoder_kind: str

    @property
    def is_no_evidence(self) -> bool:
        return self.predicted_class is None


def _check(a: np.ndarray, atom_labels: np.ndarray, n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    atom_labels = np.asarray(atom_labels)
    if a.shape != atom_labels.shape:
        raise ValidationError(
            f"activation length {a.shape} does not match label length {atom_labels.shape}"
        )
    if atom_labels.size and int(atom_labels.max()) >= n_classes:
        raise ValidationError("atom label out of class range")
    return a, atom_labels


def decode_max_activation(
    a: np.ndarray, atom_labels: np.ndarray, n_classes: int, signed: bool = False
) -> Prediction:
    """Score each class by its strongest neuron; ties go to the lowest class.

    ``signed`` scores by raw activation instead of magnitude (classes with
    no active neuron score 0 either way).
    """
    a, atom_labels = _check(a, atom_labels, n_classes)
    active = np.flatnonzero(a)
    if active.size == 0:
        return Prediction(None, np.zeros(n_classes), MAX_ACTIVATION)
    if signed:
        # classes with no active neuron cannot win in signed mode
        scores = np.full(n_classes, -np.inf)
        np.maximum.at(scores, atom_labels[active], a[active])
        return Prediction(int(np.argmax(scores)), scores, MAX_ACTIVATION)
    scores = np.zeros(n_classes)
    np.maximum.at(scores, atom_labels[active], np.abs(a[active]))
    return Prediction(int(np.argmax(scores)), scores, MAX_ACTIVATION)


def decode_max_sum(a: np.ndarray, atom_labels: np.ndarray, n_classes: int) -> Prediction:
    """Score each class by the summed |a_i| over its atoms (per-class l1 mass)."""
    a, atom_labels = _check(a, atom_labels, n_classes)
    scores = np.zeros(n_classes)
    active = np.flatnonzero(a)
    if active.size == 0:
        return Prediction(None, scores, MAX_SUM)
    np.add.at(scores, atom_labels[active], np.abs(a[active]))
    return Prediction(int(np.argmax(scores)), scores, MAX_SUM)
