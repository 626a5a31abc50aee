"""Exemplar LCA encoder: dictionary, Gramian, and LIF neuron dynamics.

The dictionary holds unit-normalized training embeddings as atoms; the
Gramian of all pairwise atom inner products drives lateral inhibition.
Encoding integrates leaky integrator neurons under soft thresholding and
returns the sparse activation code for one input vector.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .embedset import EmbeddingSet
from .errors import DivergenceError, FormatError, ValidationError

GRAM_MAGIC = b"VGRM"
GRAM_VERSION = 1
DICT_MAGIC = b"VDIC"
DICT_VERSION = 1

NORM_TOL = 1e-6
ZERO_NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class Dictionary:
    """Exemplar dictionary: rows are unit-l2 training embeddings.

    ``raw_norms`` keeps the pre-normalization l2 norms so unnormalized
    behavior can be reconstructed for experiments.
    """

    atoms: np.ndarray       # (M, N) float64, rows unit-norm
    atom_labels: np.ndarray  # (M,) uint32
    raw_norms: np.ndarray   # (M,) float64, all > 0
    n_dim: int
    n_classes: int

    @property
    def size(self) -> int:
        return self.atoms.shape[0]


@dataclass(frozen=True)
class Gramian:
    """Symmetric (M, M) matrix of pairwise atom inner products."""

    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class LcaParams:
    """Solver hyperparameters; defaults follow the reference operating point."""

    threshold_lambda: float = 2.0
    leak_tau: float = 100.0
    n_steps: int = 100
    step_size: float = 1.0

    def __post_init__(self):
        if self.threshold_lambda < 0:
            raise ValidationError(f"threshold_lambda must be >= 0, got {self.threshold_lambda}")
        if self.leak_tau <= 0:
            raise ValidationError(f"leak_tau must be > 0, got {self.leak_tau}")
        if self.n_steps < 1:
            raise ValidationError(f"n_steps must be >= 1, got {self.n_steps}")
        if not (0 < self.step_size <= self.leak_tau):
            raise ValidationError(
                f"step_size must lie in (0, leak_tau]; got {self.step_size} with tau {self.leak_tau}"
            )


@dataclass
class NeuronState:
    """Membrane potentials u and thresholded activations a; a == T_lambda(u)."""

    u: np.ndarray
    a: np.ndarray


@dataclass
class EncodeResult:
    activations: np.ndarray
    active_count: int
    fixed_point_residual: float
    objective_trajectory: np.ndarray | None = None
    step_active_counts: np.ndarray | None = None
    steps_run: int = 0


class OpCounter:
    """Tallies encode-kernel arithmetic under the documented accounting.

    The excitatory input costs N*M multiplies and (N-1)*M adds, once per
    input.  Each solver step with m_k active neurons entering the
    inhibition gather is charged 2*M*m_k + M operations (inhibition,
    leak, and membrane combination counted jointly; thresholding
    comparisons are not counted).  m_k is measured from the actual
    activation vector used by the step.
    """

    def __init__(self):
        self.b_flops = 0
        self.step_active_counts: list[int] = []
        self._m = 0

    def record_excitatory(self, m: int, n: int) -> None:
        self._m = m
        self.b_flops += (2 * n - 1) * m

    def record_step(self, active_count: int) -> None:
        self.step_active_counts.append(active_count)

    @property
    def step_flops(self) -> int:
        m = self._m
        return sum(2 * m * mk + m for mk in self.step_active_counts)

    @property
    def total_flops(self) -> int:
        return self.b_flops + self.step_flops


def build_dictionary(train: EmbeddingSet) -> Dictionary:
    """Normalize every training vector to unit l2 norm, preserving order."""
    if len(train) == 0:
        raise ValidationError("cannot build a dictionary from an empty set")
    vectors = np.asarray(train.vectors, dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms <= ZERO_NORM_FLOOR):
        bad = int(np.argmax(norms <= ZERO_NORM_FLOOR))
        raise ValidationError(f"record {bad} has (near-)zero norm {norms[bad]:.3e}")
    atoms = vectors / norms[:, None]
    return Dictionary(
        atoms=atoms,
        atom_labels=train.labels.copy(),
        raw_norms=norms,
        n_dim=train.n_dim,
        n_classes=train.n_classes,
    )


def compute_gramian(dictionary: Dictionary) -> Gramian:
    """G[i, j] = <atom_i, atom_j>; upper triangle computed, then mirrored.

    Mirroring makes symmetry exact in floating point rather than merely
    within tolerance.
    """
    full = dictionary.atoms @ dictionary.atoms.T
    if not np.all(np.isfinite(full)):
        raise ValidationError("non-finite entry while computing the Gramian")
    upper = np.triu(full)
    g = upper + upper.T - np.diag(np.diag(full))
    return Gramian(matrix=g)


def excitatory_input(
    x: np.ndarray, dictionary: Dictionary, counter: OpCounter | None = None
) -> np.ndarray:
    """b_i = <input, atom_i>, computed once per input."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dictionary.n_dim,):
        raise ValidationError(
            f"input shape {x.shape} does not match dictionary n_dim {dictionary.n_dim}"
        )
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite entry in input vector")
    if counter is not None:
        counter.record_excitatory(dictionary.size, dictionary.n_dim)
    return dictionary.atoms @ x


def soft_threshold(u, lam: float):
    """Shrinkage T_lambda: u - lam*sign(u) for |u| >= lam, else 0.

    At |u| == lam both branches give 0, so no tie-break is needed.
    Accepts scalars or arrays.
    """
    u = np.asarray(u, dtype=np.float64)
    out = np.where(np.abs(u) >= lam, u - lam * np.sign(u), 0.0)
    return out if out.ndim else float(out)


def lca_step(
    state: NeuronState,
    b: np.ndarray,
    gram: Gramian,
    params: LcaParams,
    counter: OpCounter | None = None,
    step_index: int = 0,
) -> NeuronState:
    """One explicit Euler update of the leaky integrator dynamics.

    u' = u + (dt/tau) * (b - u - (G - I) a); with unit-diagonal G the
    (G - I) a term carries no self-inhibition.  The inhibition gather only
    touches columns of G whose activation is nonzero.
    """
    dt_over_tau = params.step_size / params.leak_tau
    # overflow here is reported as a DivergenceError, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        active = np.flatnonzero(state.a)
        if active.size:
            inhibition = gram.matrix[:, active] @ state.a[active] - state.a
        else:
            inhibition = 0.0
        u_new = state.u + dt_over_tau * (b - state.u - inhibition)
    if not np.all(np.isfinite(u_new)):
        raise DivergenceError(step_index)
    if counter is not None:
        counter.record_step(int(active.size))
    a_new = soft_threshold(u_new, params.threshold_lambda)
    return NeuronState(u=u_new, a=a_new)


def fixed_point_residual(a: np.ndarray, b: np.ndarray, gram: Gramian, lam: float) -> float:
    """inf-norm of a - T_lambda(b - (G - I) a); zero at the LCA fixed point."""
    r = a - soft_threshold(b - (gram.matrix @ a - a), lam)
    return float(np.max(np.abs(r))) if r.size else 0.0


def encode(
    x: np.ndarray,
    dictionary: Dictionary,
    gram: Gramian,
    params: LcaParams,
    track_objective: bool = False,
    counter: OpCounter | None = None,
    convergence_tol: float | None = None,
) -> EncodeResult:
    """Run the LCA dynamics from a zero state for exactly ``n_steps`` steps.

    ``convergence_tol`` enables a diagnostic early-stop mode (stop when
    the inf-norm potential change falls below the tolerance); the costed
    path always runs the full step count and matches the analytic FLOP
    model, so early stop is excluded from cost accounting.
    """
    if gram.size != dictionary.size:
        raise ValidationError(
            f"Gramian size {gram.size} does not match dictionary size {dictionary.size}"
        )
    b = excitatory_input(x, dictionary, counter=counter)
    m = dictionary.size
    state = NeuronState(u=np.zeros(m), a=np.zeros(m))
    objective = [] if track_objective else None
    steps = 0
    for k in range(params.n_steps):
        prev_u = state.u
        state = lca_step(state, b, gram, params, counter=counter, step_index=k)
        steps += 1
        if objective is not None:
            objective.append(lasso_objective(x, state.a, dictionary, params.threshold_lambda))
        if convergence_tol is not None and np.max(np.abs(state.u - prev_u)) < convergence_tol:
            break
    a = state.a
    return EncodeResult(
        activations=a,
        active_count=int(np.count_nonzero(a)),
        fixed_point_residual=fixed_point_residual(a, b, gram, params.threshold_lambda),
        objective_trajectory=np.asarray(objective) if objective is not None else None,
        step_active_counts=np.asarray(counter.step_active_counts, dtype=np.int64)
        if counter is not None
        else None,
        steps_run=steps,
    )


def reconstruct(a: np.ndarray, dictionary: Dictionary) -> np.ndarray:
    """Linear reconstruction sum_i a_i * atom_i."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (dictionary.size,):
        raise ValidationError(
            f"activation shape {a.shape} does not match dictionary size {dictionary.size}"
        )
    return dictionary.atoms.T @ a


def lasso_objective(x: np.ndarray, a: np.ndarray, dictionary: Dictionary, lam: float) -> float:
    """0.5 * ||x - phi^T a||^2 + lam * ||a||_1; the descent monitor."""
    r = np.asarray(x, dtype=np.float64) - reconstruct(a, dictionary)
    return 0.5 * float(r @ r) + lam * float(np.sum(np.abs(a)))


# ---------------------------------------------------------------------------
# container formats


def save_dictionary(dictionary: Dictionary, path: str) -> None:
    """".vdic" container: header then per-atom label, raw norm, and row.

    Layout (little-endian): magic "VDIC", version u16, N u32, C u32,
    M u64, then M records of u32 label + f32 raw_norm + N f32 atom
    entries.  Atom rows are stored normalized.
    """
    m = dictionary.size
    dtype = np.dtype([("label", "<u4"), ("norm", "<f4"), ("atom", "<f4", (dictionary.n_dim,))])
    packed = np.empty(m, dtype=dtype)
    packed["label"] = dictionary.atom_labels
    packed["norm"] = dictionary.raw_norms
    packed["atom"] = dictionary.atoms
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sHIIQ", DICT_MAGIC, DICT_VERSION,
                             dictionary.n_dim, dictionary.n_classes, m))
        fh.write(packed.tobytes())


def load_dictionary(path: str) -> Dictionary:
    with open(path, "rb") as fh:
        data = fh.read()
    header = struct.Struct("<4sHIIQ")
    if len(data) < header.size:
        raise FormatError("file too short for dictionary header")
    magic, version, n_dim, n_classes, m = header.unpack_from(data)
    if magic != DICT_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {DICT_MAGIC!r}")
    if version != DICT_VERSION:
        raise FormatError(f"unsupported dictionary version {version}")
    dtype = np.dtype([("label", "<u4"), ("norm", "<f4"), ("atom", "<f4", (n_dim,))])
    payload = data[header.size:]
    if len(payload) != m * dtype.itemsize:
        raise FormatError(
            f"dictionary payload is {len(payload)} bytes, expected {m * dtype.itemsize}"
        )
    packed = np.frombuffer(payload, dtype=dtype)
    atoms = packed["atom"].astype(np.float64)
    # f32 storage perturbs norms; re-normalize so the unit-norm invariant
    # holds exactly in f64
    norms = np.linalg.norm(atoms, axis=1)
    if np.any(norms <= ZERO_NORM_FLOOR):
        raise ValidationError("zero-norm atom row in dictionary file")
    atoms = atoms / norms[:, None]
    return Dictionary(
        atoms=atoms,
        atom_labels=packed["label"].copy(),
        raw_norms=packed["norm"].astype(np.float64),
        n_dim=int(n_dim),
        n_classes=int(n_classes),
    )


def save_gramian(gram: Gramian, path: str) -> None:
    """".gram" cache: magic, version, M, then the packed upper triangle
    (row-major, M(M+1)/2 f32 LE values)."""
    m = gram.size
    iu = np.triu_indices(m)
    tri = gram.matrix[iu].astype("<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sHQ", GRAM_MAGIC, GRAM_VERSION, m))
        fh.write(tri.tobytes())


def load_gramian(path: str, expected_size: int | None = None) -> Gramian:
    """Rehydrate the full symmetric matrix from the packed triangle.

    ``expected_size`` cross-checks the cache against the dictionary it is
    meant to pair with.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    header = struct.Struct("<4sHQ")
    if len(data) < header.size:
        raise FormatError("file too short for Gramian header")
    magic, version, m = header.unpack_from(data)
    if magic != GRAM_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {GRAM_MAGIC!r}")
    if version != GRAM_VERSION:
        raise FormatError(f"unsupported Gramian version {version}")
    if expected_size is not None and m != expected_size:
        raise ValidationError(
            f"Gramian cache is for M={m} but the dictionary has M={expected_size}"
        )
    n_tri = m * (m + 1) // 2
    payload = data[header.size:]
    if len(payload) != 4 * n_tri:
        raise FormatError(f"Gramian payload is {len(payload)} bytes, expected {4 * n_tri}")
    tri = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    full = np.zeros((m, m))
    iu = np.triu_indices(m)
    full[iu] = tri
    full = full + full.T - np.diag(np.diag(full))
    return Gramian(matrix=full)
