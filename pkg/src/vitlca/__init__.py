"""Exemplar-dictionary LCA sparse-coding classifier over embeddings."""

from .costmodel import (
    CostReport,
    energy_estimate,
    inference_flops_dense,
    inference_flops_sparse,
    measure_m_hat,
    training_flops,
)
from .decoders import Prediction, decode_max_activation, decode_max_sum
from .embedset import EmbeddingSet, load_embedding_set, save_embedding_set, split_set
from .errors import (
    ConfigError,
    DivergenceError,
    FormatError,
    ValidationError,
    VitLcaError,
)
from .evaluate import EvalReport, RunConfig, evaluate
from .lca import (
    Dictionary,
    EncodeResult,
    Gramian,
    LcaParams,
    NeuronState,
    OpCounter,
    build_dictionary,
    compute_gramian,
    encode,
    excitatory_input,
    lasso_objective,
    lca_step,
    reconstruct,
    soft_threshold,
)

__version__ = "0.1.0"
