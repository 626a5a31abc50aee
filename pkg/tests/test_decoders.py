import numpy as np
import pytest

from vitlca.decoders import decode_max_activation, decode_max_sum
from vitlca.errors import ValidationError


def test_single_active_neuron_max():
    a = np.zeros(5)
    a[2] = 0.7
    labels = np.array([0, 1, 3, 1, 2])
    p = decode_max_activation(a, labels, 4)
    assert p.predicted_class == 3
    assert p.per_class_scores[3] == pytest.approx(0.7)


def test_decoders_disagree_on_split_mass():
    # class 0 holds two moderate neurons, class 1 one strong neuron
    a = np.array([0.5, 0.5, 0.8])
    labels = np.array([0, 0, 1])
    pm = decode_max_activation(a, labels, 2)
    ps = decode_max_sum(a, labels, 2)
    assert pm.predicted_class == 1          # 0.8 > 0.5
    assert ps.predicted_class == 0          # 1.0 > 0.8
    assert np.allclose(ps.per_class_scores, [1.0, 0.8])


def test_all_zero_is_no_evidence():
    for decode in (decode_max_activation, decode_max_sum):
        p = decode(np.zeros(4), np.array([0, 1, 0, 1]), 2)
        assert p.is_no_evidence
        assert p.predicted_class is None


def test_max_sum_uses_absolute_values():
    a = np.array([-0.6, 0.5])
    labels = np.array([0, 1])
    assert decode_max_sum(a, labels, 2).predicted_class == 0


def test_max_activation_uses_absolute_values_by_default():
    a = np.array([-0.9, 0.5])
    labels = np.array([0, 1])
    assert decode_max_activation(a, labels, 2).predicted_class == 0


def test_signed_mode_ignores_magnitude_of_negatives():
    a = np.array([-0.9, 0.5])
    labels = np.array([0, 1])
    assert decode_max_activation(a, labels, 2, signed=True).predicted_class == 1


def test_one_sparse_agreement():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = rng.integers(2, 20)
        labels = rng.integers(0, 5, m)
        a = np.zeros(m)
        j = rng.integers(0, m)
        a[j] = rng.standard_normal() or 1.0
        pm = decode_max_activation(a, labels, 5)
        ps = decode_max_sum(a, labels, 5)
        assert pm.predicted_class == ps.predicted_class == labels[j]


def test_positive_scaling_invariance():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m = rng.integers(2, 25)
        labels = rng.integers(0, 4, m)
        a = rng.standard_normal(m) * (rng.random(m) < 0.5)
        if not a.any():
            continue
        s = float(rng.uniform(0.01, 100.0))
        assert (decode_max_activation(a, labels, 4).predicted_class
                == decode_max_activation(s * a, labels, 4).predicted_class)
        assert (decode_max_sum(a, labels, 4).predicted_class
                == decode_max_sum(s * a, labels, 4).predicted_class)


def test_label_permutation_equivariance():
    rng = np.random.default_rng(2)
    n_classes = 5
    for _ in range(30):
        m = rng.integers(2, 20)
        labels = rng.integers(0, n_classes, m)
        a = rng.standard_normal(m) * (rng.random(m) < 0.6)
        if not a.any():
            continue
        perm = rng.permutation(n_classes)
        for decode in (decode_max_activation, decode_max_sum):
            p = decode(a, labels, n_classes)
            pp = decode(a, perm[labels], n_classes)
            assert pp.predicted_class == perm[p.predicted_class]
            assert np.allclose(pp.per_class_scores[perm], p.per_class_scores)


def test_score_conservation_max_sum():
    rng = np.random.default_rng(3)
    for _ in range(30):
        m = rng.integers(1, 30)
        labels = rng.integers(0, 6, m)
        a = rng.standard_normal(m) * (rng.random(m) < 0.5)
        p = decode_max_sum(a, labels, 6)
        assert p.per_class_scores.sum() == pytest.approx(np.abs(a).sum(), abs=1e-12)


def test_tie_break_lowest_class():
    a = np.array([0.5, 0.5])
    labels = np.array([3, 1])
    assert decode_max_activation(a, labels, 4).predicted_class == 1
    assert decode_max_sum(a, labels, 4).predicted_class == 1


def test_length_mismatch():
    with pytest.raises(ValidationError, match="length"):
        decode_max_sum(np.zeros(3), np.array([0, 1]), 2)


def test_label_out_of_range():
    with pytest.raises(ValidationError, match="range"):
        decode_max_activation(np.ones(2), np.array([0, 5]), 2)
