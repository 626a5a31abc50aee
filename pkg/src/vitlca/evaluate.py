"""Batch evaluation: encode a test set once, decode with both decoders,
aggregate accuracy, sparsity, and cost.

Per-input work is pure (immutable dictionary and Gramian), so encoding
parallelizes over a thread pool; aggregation always runs in record-index
order, making reports deterministic for a fixed config.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .costmodel import CostReport
from .decoders import decode_max_activation, decode_max_sum
from .embedset import EmbeddingSet
from .errors import DivergenceError, ValidationError
from .lca import Dictionary, Gramian, LcaParams, encode


@dataclass
class RunConfig:
    params: LcaParams = field(default_factory=LcaParams)
    signed_max: bool = False
    normalize_input: bool = False
    fallback_most_atoms: bool = False
    joules_per_flop: float = 9.09e-14
    workers: int | None = None  # None: all available cores
    seed: int = 0

    def resolved_workers(self) -> int:
        if self.workers is not None:
            if self.workers < 1:
                raise ValidationError(f"workers must be >= 1, got {self.workers}")
            return self.workers
        return os.cpu_count() or 1


@dataclass
class RecordOutcome:
    index: int
    true_label: int
    pred_max: int | None
    pred_maxsum: int | None
    active_count: int
    diverged: bool = False


@dataclass
class EvalReport:
    top1_accuracy_max: float
    top1_accuracy_maxsum: float
    mean_active_count: float
    no_evidence_count: int
    divergent_count: int
    n_test: int
    correct_max: int
    correct_maxsum: int
    cost: CostReport
    config_echo: dict
    outcomes: list[RecordOutcome]

    def to_dict(self) -> dict:
        return {
            "top1_accuracy_max": self.top1_accuracy_max,
            "top1_accuracy_maxsum": self.top1_accuracy_maxsum,
            "mean_active_count": self.mean_active_count,
            "no_evidence_count": self.no_evidence_count,
            "divergent_count": self.divergent_count,
            "n_test": self.n_test,
            "correct_max": self.correct_max,
            "correct_maxsum": self.correct_maxsum,
            "cost": self.cost.to_dict(),
            "config": self.config_echo,
        }

    def to_text(self) -> str:
        lines = [
            f"test records           = {self.n_test}",
            f"top1 accuracy (max)    = {self.top1_accuracy_max:.4f}",
            f"top1 accuracy (maxsum) = {self.top1_accuracy_maxsum:.4f}",
            f"mean active count      = {self.mean_active_count:.3f}",
            f"no-evidence records    = {self.no_evidence_count}",
            f"divergent records      = {self.divergent_count}",
            "-- cost model --",
            self.cost.to_text(),
        ]
        return "\n".join(lines)

    def write_jsonl(self, path: str) -> None:
        """Line-delimited records: one line per test input, then a summary."""
        with open(path, "w") as fh:
            for o in self.outcomes:
                fh.write(json.dumps({
                    "type": "record",
                    "index": o.index,
                    "true_label": o.true_label,
                    "pred_max": o.pred_max,
                    "pred_maxsum": o.pred_maxsum,
                    "active_count": o.active_count,
                    "diverged": o.diverged,
                }, sort_keys=True) + "\n")
            fh.write(json.dumps({"type": "summary", **self.to_dict()}, sort_keys=True) + "\n")


def evaluate(
    dictionary: Dictionary,
    gram: Gramian,
    test: EmbeddingSet,
    config: RunConfig,
) -> EvalReport:
    """Encode every test record once and feed the same code to both decoders."""
    if test.n_dim != dictionary.n_dim:
        raise ValidationError(
            f"test set N={test.n_dim} does not match dictionary N={dictionary.n_dim}"
        )
    if gram.size != dictionary.size:
        raise ValidationError("Gramian does not match dictionary size")

    params = config.params
    labels = dictionary.atom_labels
    n_classes = dictionary.n_classes
    fallback_class = int(np.bincount(labels, minlength=n_classes).argmax())

    def run_one(i: int) -> RecordOutcome:
        x = np.asarray(test.vectors[i], dtype=np.float64)
        if config.normalize_input:
            norm = np.linalg.norm(x)
            if norm > 0:
                x = x / norm
        try:
            result = encode(x, dictionary, gram, params)
        except DivergenceError:
            return RecordOutcome(i, int(test.labels[i]), None, None, 0, diverged=True)
        pm = decode_max_activation(result.activations, labels, n_classes, signed=config.signed_max)
        ps = decode_max_sum(result.activations, labels, n_classes)
        return RecordOutcome(
            i, int(test.labels[i]), pm.predicted_class, ps.predicted_class, result.active_count
        )

    n = len(test)
    workers = min(config.resolved_workers(), max(n, 1))
    if workers > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, range(n)))
    else:
        outcomes = [run_one(i) for i in range(n)]
    outcomes.sort(key=lambda o: o.index)

    divergent = sum(o.diverged for o in outcomes)
    valid = [o for o in outcomes if not o.diverged]
    no_evidence = sum(o.pred_max is None for o in valid)

    if config.fallback_most_atoms:
        for o in valid:
            if o.pred_max is None:
                o.pred_max = fallback_class
            if o.pred_maxsum is None:
                o.pred_maxsum = fallback_class

    correct_max = sum(o.pred_max == o.true_label for o in valid if o.pred_max is not None)
    correct_maxsum = sum(o.pred_maxsum == o.true_label for o in valid if o.pred_maxsum is not None)
    decided_max = sum(o.pred_max is not None for o in valid)
    decided_maxsum = sum(o.pred_maxsum is not None for o in valid)
    mean_active = float(np.mean([o.active_count for o in valid])) if valid else 0.0

    # Eq.-style cost model instantiated at the measured operating point;
    # M_hat is the mean active count rounded to the nearest integer.
    cost = CostReport.build(
        m=dictionary.size,
        n=dictionary.n_dim,
        k=params.n_steps,
        m_hat=min(int(round(mean_active)), dictionary.size),
        joules_per_flop=config.joules_per_flop,
    )

    config_echo = {
        "lambda": params.threshold_lambda,
        "tau": params.leak_tau,
        "steps": params.n_steps,
        "dt": params.step_size,
        "signed_max": config.signed_max,
        "normalize_input": config.normalize_input,
        "fallback_most_atoms": config.fallback_most_atoms,
        "joules_per_flop": config.joules_per_flop,
        "workers": workers,
        "seed": config.seed,
        "M": dictionary.size,
        "N": dictionary.n_dim,
        "C": n_classes,
    }

    return EvalReport(
        top1_accuracy_max=correct_max / decided_max if decided_max else 0.0,
        top1_accuracy_maxsum=correct_maxsum / decided_maxsum if decided_maxsum else 0.0,
        mean_active_count=mean_active,
        no_evidence_count=no_evidence,
        divergent_count=divergent,
        n_test=n,
        correct_max=correct_max,
        correct_maxsum=correct_maxsum,
        cost=cost,
        config_echo=config_echo,
        outcomes=outcomes,
    )
