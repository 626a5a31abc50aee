"""Analytic FLOP counts and energy for the exemplar LCA pipeline.

Accounting convention: one multiply = one FLOP, one add = one FLOP;
thresholding comparisons and sign flips are free.  All counts are exact
Python integers (arbitrary precision, so no overflow is possible).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError
from .lca import EncodeResult

DEFAULT_JOULES_PER_FLOP = 9.09e-14  # RRAM crossbar MAC estimate, 11 TOPs/W


def training_flops(m: int, n: int) -> int:
    """Gramian build cost: M(M+1)(2N-1)/2, exact (M(M+1) is always even)."""
    _check_count("M", m, minimum=1)
    _check_count("N", n, minimum=1)
    return m * (m + 1) * (2 * n - 1) // 2


def inference_flops_dense(m: int, n: int, k: int) -> int:
    """Per-input inference cost with no sparsity: (2N-1)M + K(2M^2 + M).

    The excitatory input is computed once per input, so its (2N-1)M cost
    sits outside the per-step factor.
    """
    _check_count("M", m, minimum=1)
    _check_count("N", n, minimum=1)
    _check_count("K", k, minimum=1)
    return (2 * n - 1) * m + k * (2 * m * m + m)


def inference_flops_sparse(m: int, n: int, k: int, m_hat: int) -> int:
    """Per-input inference cost with M_hat average active neurons:
    (2N-1)M + K(2*M*M_hat + M).  Reduces to the dense count at M_hat = M."""
    _check_count("M", m, minimum=1)
    _check_count("N", n, minimum=1)
    _check_count("K", k, minimum=1)
    _check_count("M_hat", m_hat, minimum=0)
    if m_hat > m:
        raise ValidationError(f"M_hat ({m_hat}) cannot exceed M ({m})")
    return (2 * n - 1) * m + k * (2 * m * m_hat + m)


def inference_flops_per_step_exact(m: int, n: int, step_active_counts: Sequence[int]) -> int:
    """Per-step-exact variant: (2N-1)M + sum_k (2*M*m_k + M).

    ``step_active_counts`` are the measured active counts m_k entering
    each step's inhibition gather; substituting their exact mean for
    M_hat reproduces the average formula identically, and an integer-
    rounded M_hat differs by at most K*M.
    """
    _check_count("M", m, minimum=1)
    _check_count("N", n, minimum=1)
    return (2 * n - 1) * m + sum(2 * m * mk + m for mk in step_active_counts)


def energy_estimate(flops: int, joules_per_flop: float = DEFAULT_JOULES_PER_FLOP) -> float:
    if flops < 0:
        raise ValidationError(f"flops must be >= 0, got {flops}")
    if joules_per_flop <= 0:
        raise ValidationError(f"joules_per_flop must be > 0, got {joules_per_flop}")
    return flops * joules_per_flop


def measure_m_hat(results: Iterable[EncodeResult]) -> float:
    """Mean active count over encode results; the measured M_hat sample."""
    counts = [r.active_count for r in results]
    if not counts:
        raise ValidationError("cannot measure M_hat from an empty result list")
    return sum(counts) / len(counts)


@dataclass(frozen=True)
class CostReport:
    training_flops: int
    inference_flops_dense: int
    inference_flops_sparse: int
    energy_joules: float
    m: int
    n: int
    k: int
    m_hat: int
    joules_per_flop: float

    @classmethod
    def build(cls, m: int, n: int, k: int, m_hat: int,
              joules_per_flop: float = DEFAULT_JOULES_PER_FLOP) -> "CostReport":
        sparse = inference_flops_sparse(m, n, k, m_hat)
        return cls(
            training_flops=training_flops(m, n),
            inference_flops_dense=inference_flops_dense(m, n, k),
            inference_flops_sparse=sparse,
            energy_joules=energy_estimate(sparse, joules_per_flop),
            m=m, n=n, k=k, m_hat=m_hat, joules_per_flop=joules_per_flop,
        )

    def to_dict(self) -> dict:
        return {
            "training_flops": self.training_flops,
            "inference_flops_dense": self.inference_flops_dense,
            "inference_flops_sparse": self.inference_flops_sparse,
            "energy_joules": self.energy_joules,
            "M": self.m, "N": self.n, "K": self.k, "M_hat": self.m_hat,
            "joules_per_flop": self.joules_per_flop,
        }

    def to_text(self) -> str:
        lines = [
            f"M                      = {self.m}",
            f"N                      = {self.n}",
            f"K                      = {self.k}",
            f"M_hat                  = {self.m_hat}",
            f"joules_per_flop        = {self.joules_per_flop:.4g}",
            f"training_flops         = {self.training_flops}",
            f"inference_flops_dense  = {self.inference_flops_dense}",
            f"inference_flops_sparse = {self.inference_flops_sparse}",
            f"energy_joules          = {self.energy_joules:.6g}",
        ]
        return "\n".join(lines)


def _check_count(name: str, value: int, minimum: int) -> None:
    if not isinstance(value, (int,)) or isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
