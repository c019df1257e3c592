import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochconv import (
    DenseOperator,
    DimensionMismatchError,
    HilbertSpec,
    SemigroupSpec,
    SpectralOperator,
    StochConvError,
    apply_operator,
    hs_norm,
    semigroup_eval,
)
from stochconv.hilbert import (
    identity_operator,
    operator_from_json,
    operator_matrix,
    operator_to_json,
)


def _matvec_oracle(rows, v):
    """Plain by-hand matrix-vector product."""
    return [sum(r * x for r, x in zip(row, v)) for row in rows]


def test_apply_diagonal():
    h = HilbertSpec(2)
    op = SpectralOperator(h, h, [1.0, 2.0])
    assert np.array_equal(apply_operator(op, [1.0, 1.0]), [1.0, 2.0])


def test_apply_identity_is_noop(rng):
    h = HilbertSpec(5)
    v = rng.normal(size=5)
    assert np.array_equal(apply_operator(identity_operator(h), v), v)


def test_apply_dense_matches_by_hand_oracle():
    h = HilbertSpec(2)
    rows = [[0.0, 1.0], [1.0, 0.0]]
    op = DenseOperator(h, h, rows)
    expected = _matvec_oracle(rows, [3.0, 4.0])
    assert np.array_equal(apply_operator(op, [3.0, 4.0]), expected)
    assert expected == [4.0, 3.0]


def test_apply_dimension_mismatch():
    h2, h3 = HilbertSpec(2), HilbertSpec(3)
    op = DenseOperator(h2, h3, np.ones((3, 2)))
    with pytest.raises(DimensionMismatchError):
        apply_operator(op, [1.0, 2.0, 3.0])


def test_hs_norm_sum_of_squares_oracle():
    h = HilbertSpec(2)
    op = SpectralOperator(h, h, [3.0, 4.0])
    oracle = math.sqrt(sum(e * e for e in [3.0, 4.0]))
    assert hs_norm(op) == pytest.approx(oracle, rel=1e-15)
    assert hs_norm(op) == pytest.approx(5.0, rel=1e-15)


def test_hs_norm_zero_operator():
    h = HilbertSpec(3)
    assert hs_norm(DenseOperator(h, h, np.zeros((3, 3)))) == 0.0


def test_hs_norm_weighted_identity():
    h = HilbertSpec(2)
    weight = SpectralOperator(h, h, [4.0, 9.0])
    oracle = math.sqrt(4.0 + 9.0)
    assert hs_norm(identity_operator(h), weight) == pytest.approx(oracle, rel=1e-15)


def test_hs_norm_negative_weight_rejected():
    h = HilbertSpec(2)
    weight = SpectralOperator(h, h, [1.0, -0.5])
    with pytest.raises(StochConvError):
        hs_norm(identity_operator(h), weight)


def test_hs_norm_dense_agrees_with_column_oracle(rng):
    h = HilbertSpec(4)
    entries = rng.normal(size=(4, 4))
    q = rng.uniform(0.1, 2.0, 4)
    weight = SpectralOperator(h, h, q)
    oracle = math.sqrt(sum(q[j] * np.dot(entries[:, j], entries[:, j]) for j in range(4)))
    assert hs_norm(DenseOperator(h, h, entries), weight) == pytest.approx(oracle, rel=1e-13)


def test_semigroup_at_zero_is_identity():
    h = HilbertSpec(2)
    sg = SemigroupSpec(h, rates=[1.0, 4.0], horizon=1.0)
    assert np.array_equal(semigroup_eval(sg, 0.0).eigenvalues, [1.0, 1.0])


def test_semigroup_diagonal_scalar_exponentials():
    h = HilbertSpec(2)
    sg = SemigroupSpec(h, rates=[1.0, 4.0], horizon=1.0)
    got = semigroup_eval(sg, math.log(2.0)).eigenvalues
    oracle = [math.exp(-1.0 * math.log(2.0)), math.exp(-4.0 * math.log(2.0))]
    assert got == pytest.approx(oracle, rel=1e-15)
    assert got == pytest.approx([0.5, 1.0 / 16.0], rel=1e-14)


def test_semigroup_composition_law_single_case():
    h = HilbertSpec(3)
    sg = SemigroupSpec(h, rates=[0.5, 1.0, 2.0], horizon=1.0)
    left = operator_matrix(semigroup_eval(sg, 0.3)) @ operator_matrix(semigroup_eval(sg, 0.7))
    right = operator_matrix(semigroup_eval(sg, 1.0))
    assert np.max(np.abs(left - right)) <= 1e-12


def test_semigroup_negative_time_rejected():
    h = HilbertSpec(1)
    sg = SemigroupSpec(h, rates=[1.0], horizon=1.0)
    with pytest.raises(StochConvError):
        semigroup_eval(sg, -0.1)


def test_semigroup_law_random_battery_diagonal(rng):
    h = HilbertSpec(4)
    sg = SemigroupSpec(h, rates=rng.uniform(0.0, 5.0, 4), horizon=1.0)
    s, t = rng.uniform(0.0, 1.0, (2, 1000))
    vals = np.exp(-np.outer(s, sg.rates)) * np.exp(-np.outer(t, sg.rates))
    target = np.exp(-np.outer(s + t, sg.rates))
    assert np.max(np.abs(vals - target)) <= 1e-12


def test_semigroup_law_random_battery_dense(rng):
    h = HilbertSpec(3)
    gen = rng.normal(size=(3, 3))
    gen -= np.eye(3) * (np.max(np.abs(np.linalg.eigvals(gen)).real) + 0.1)
    sg = SemigroupSpec(h, generator=gen, horizon=1.0)
    for s, t in rng.uniform(0.0, 1.0, (1000, 2)):
        left = operator_matrix(semigroup_eval(sg, s)) @ operator_matrix(semigroup_eval(sg, t))
        right = operator_matrix(semigroup_eval(sg, s + t))
        assert np.max(np.abs(left - right)) <= 1e-8


def test_dense_generator_matches_diagonal_case(rng):
    rates = rng.uniform(0.1, 3.0, 3)
    h = HilbertSpec(3)
    diag_sg = SemigroupSpec(h, rates=rates, horizon=1.0)
    dense_sg = SemigroupSpec(h, generator=-np.diag(rates), horizon=1.0)
    for t in rng.uniform(0.0, 1.0, 50):
        a = np.diag(semigroup_eval(diag_sg, t).eigenvalues)
        b = operator_matrix(semigroup_eval(dense_sg, t))
        assert np.max(np.abs(a - b)) <= 1e-10


def test_norm_bound_random_battery(rng):
    h = HilbertSpec(4)
    sg = SemigroupSpec(h, rates=rng.uniform(0.0, 4.0, 4), horizon=1.0)
    assert sg.bound == 1.0
    for _ in range(1000):
        t = rng.uniform(0.0, 1.0)
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        image = apply_operator(semigroup_eval(sg, t), v)
        assert np.linalg.norm(image) <= sg.bound * (1.0 + 1e-12)


def test_dense_semigroup_bound_is_sampled_sup(rng):
    h = HilbertSpec(2)
    gen = np.array([[0.0, 1.0], [-1.0, 0.0]])  # rotation: norm exactly 1 forever
    sg = SemigroupSpec(h, generator=gen, horizon=2.0)
    assert sg.bound == pytest.approx(1.0, abs=1e-10)


def test_hs_norm_homogeneity_and_triangle(rng):
    h = HilbertSpec(3)
    for _ in range(200):
        a_entries = rng.normal(size=(3, 3))
        b_entries = rng.normal(size=(3, 3))
        scale = rng.normal()
        a = DenseOperator(h, h, a_entries)
        b = DenseOperator(h, h, b_entries)
        scaled = DenseOperator(h, h, scale * a_entries)
        assert hs_norm(scaled) <= abs(scale) * hs_norm(a) * (1.0 + 1e-12) + 1e-300
        assert hs_norm(scaled) >= abs(scale) * hs_norm(a) * (1.0 - 1e-12)
        both = DenseOperator(h, h, a_entries + b_entries)
        assert hs_norm(both) <= (hs_norm(a) + hs_norm(b)) * (1.0 + 1e-12)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=6))
@settings(max_examples=100, deadline=None)
def test_spectral_hs_norm_matches_dense_embedding(eigs):
    h = HilbertSpec(len(eigs))
    spectral = SpectralOperator(h, h, eigs)
    dense = DenseOperator(h, h, np.diag(eigs))
    assert hs_norm(spectral) == pytest.approx(hs_norm(dense), rel=1e-12, abs=1e-12)


def test_operator_json_roundtrip():
    h = HilbertSpec(2)
    diag = SpectralOperator(h, h, [1.5, -2.0])
    dense = DenseOperator(h, h, [[1.0, 2.0], [3.0, 4.0]])
    for op in (diag, dense):
        back = operator_from_json(operator_to_json(op), h, h)
        assert np.array_equal(operator_matrix(back), operator_matrix(op))


def test_operator_json_unknown_kind():
    h = HilbertSpec(1)
    with pytest.raises(StochConvError):
        operator_from_json({"kind": "banded"}, h, h)
