import numpy as np
import pytest

from vitlca.costmodel import (
    CostReport,
    energy_estimate,
    inference_flops_dense,
    inference_flops_per_step_exact,
    inference_flops_sparse,
    measure_m_hat,
    training_flops,
)
from vitlca.errors import ValidationError
from vitlca.lca import (
    EncodeResult,
    LcaParams,
    OpCounter,
    build_dictionary,
    compute_gramian,
    encode,
)
from test_lca import random_dictionary


def result_with_count(c):
    return EncodeResult(activations=np.zeros(1), active_count=c, fixed_point_residual=0.0)


def test_training_flops_reference_point():
    assert training_flops(50000, 768) == 1_918_788_375_000


def test_training_flops_minimal():
    assert training_flops(1, 1) == 1


def test_training_flops_small_hand_count():
    # 3-atom, length-4 Gramian: 6 upper-triangle entries incl. diagonal,
    # each a dot product of 4 multiplies and 3 adds -> 42
    assert training_flops(3, 4) == 42
    ops = 0
    for i in range(3):
        for j in range(i, 3):
            ops += 4 + 3
    assert ops == 42


def test_inference_dense_reference_point():
    assert inference_flops_dense(50000, 768, 100) == 500_081_750_000


def test_inference_dense_minimal():
    assert inference_flops_dense(1, 1, 1) == 4


def test_sparse_reduces_to_dense():
    for m, n, k in [(1, 1, 1), (7, 3, 2), (50, 16, 20), (50000, 768, 100)]:
        assert inference_flops_sparse(m, n, k, m) == inference_flops_dense(m, n, k)


def test_inference_sparse_reference_point():
    assert inference_flops_sparse(50000, 768, 100, 200) == 2_081_750_000


def test_inference_sparse_no_active():
    m, n, k = 13, 5, 7
    assert inference_flops_sparse(m, n, k, 0) == (2 * n - 1) * m + k * m


def test_inference_sparse_m_hat_too_large():
    with pytest.raises(ValidationError, match="M_hat"):
        inference_flops_sparse(5, 3, 2, 6)


def test_monotonicity():
    base = inference_flops_sparse(10, 4, 3, 2)
    assert inference_flops_sparse(11, 4, 3, 2) > base
    assert inference_flops_sparse(10, 4, 4, 2) > base
    assert inference_flops_sparse(10, 4, 3, 3) > base


def test_energy_reference_point():
    e = energy_estimate(2_081_750_000, 9.09e-14)
    assert e == pytest.approx(1.8923e-4, rel=1e-4)
    # rounds to the reported 0.19 mJ
    assert round(e * 1000, 2) == 0.19


def test_energy_trivial():
    assert energy_estimate(0, 9.09e-14) == 0.0
    assert energy_estimate(10**14, 9.09e-14) == pytest.approx(9.09)


def test_measure_m_hat():
    assert measure_m_hat([result_with_count(200)] * 5) == 200
    assert measure_m_hat([result_with_count(0)] * 3) == 0
    assert measure_m_hat([result_with_count(c) for c in (1, 2, 3)]) == 2
    with pytest.raises(ValidationError, match="empty"):
        measure_m_hat([])


def test_counts_are_exact_integers():
    for value in (training_flops(12345, 678),
                  inference_flops_dense(12345, 678, 99),
                  inference_flops_sparse(12345, 678, 99, 17)):
        assert isinstance(value, int)


def test_cost_report_build_and_text():
    r = CostReport.build(50000, 768, 100, 200)
    assert r.training_flops == 1_918_788_375_000
    assert r.inference_flops_sparse == 2_081_750_000
    text = r.to_text()
    assert "1918788375000" in text and "2081750000" in text
    d = r.to_dict()
    assert d["M_hat"] == 200


def test_instrumented_counter_matches_per_step_formula():
    # small instance: the counter total must equal the per-step-exact
    # variant of the sparse count with measured m_k
    rng = np.random.default_rng(40)
    d = random_dictionary(rng, 10, 4)
    g = compute_gramian(d)
    x = rng.standard_normal(4)
    params = LcaParams(threshold_lambda=0.05, leak_tau=2.0, n_steps=3, step_size=1.0)
    counter = OpCounter()
    encode(x, d, g, params, counter=counter)
    m, n = 10, 4
    mks = counter.step_active_counts
    assert len(mks) == 3
    assert counter.total_flops == inference_flops_per_step_exact(m, n, mks)
    # exact mean substituted into the average formula reproduces the sum
    mean = sum(mks) / len(mks)
    assert (2 * n - 1) * m + 3 * (2 * m * mean + m) == pytest.approx(counter.total_flops)
