import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergolab.entropy import (
    ProbabilityVector, arithmetic_scheme, bootstrap_entropy_se, normalized_join_entropy,
    partition_entropy, plugin_entropy_estimate, tail_sup_diagnostic,
)
from ergolab.errors import InvalidParameterError


@st.composite
def prob_vectors(draw, max_cells=6):
    weights = draw(st.lists(st.integers(0, 20), min_size=1, max_size=max_cells))
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return ProbabilityVector([F(w, total) for w in weights])


def test_partition_entropy_examples():
    assert partition_entropy(ProbabilityVector([F(1, 2), F(1, 2)]), "bit") == 1.0
    assert partition_entropy(ProbabilityVector([1]), "nat") == 0.0
    assert partition_entropy(ProbabilityVector([F(1, 2), F(1, 4), F(1, 4)]), "bit") == 1.5


def test_zero_mass_convention():
    assert partition_entropy(ProbabilityVector([0, F(1, 2), F(1, 2)])) == 1.0


@pytest.mark.parametrize("masses", [[F(1, 2), F(1, 3)], [F(-1, 2), F(3, 2)], []])
def test_invalid_vectors_rejected(masses):
    with pytest.raises(InvalidParameterError):
        ProbabilityVector(masses)


def test_unknown_base_rejected():
    with pytest.raises(InvalidParameterError):
        partition_entropy(ProbabilityVector([1]), "decimal")


@given(prob_vectors(), st.randoms())
def test_permutation_invariant(p, rnd):
    masses = list(p.masses)
    rnd.shuffle(masses)
    assert math.isclose(partition_entropy(p), partition_entropy(ProbabilityVector(masses)),
                        rel_tol=1e-12, abs_tol=1e-15)


@given(prob_vectors())
def test_base_conversion(p):
    nat = partition_entropy(p, "nat")
    assert math.isclose(partition_entropy(p, "bit"), nat / math.log(2), rel_tol=1e-12, abs_tol=1e-15)


@given(prob_vectors(4), prob_vectors(4))
def test_additive_on_products(p, q):
    joint = p.product(q)
    assert math.isclose(partition_entropy(joint), partition_entropy(p) + partition_entropy(q),
                        rel_tol=1e-12, abs_tol=1e-12)


def test_arithmetic_scheme_examples():
    assert arithmetic_scheme([3], 4).sets == ((3, 6, 9, 12),)
    assert arithmetic_scheme([1], 1).sets == ((1,),)
    assert arithmetic_scheme([2], 2, "tower", heights=[1, 6]).sets == ((6, 12),)


@given(st.lists(st.integers(1, 30), min_size=1, max_size=8), st.integers(1, 12))
def test_scheme_cardinality(js, c):
    sch = arithmetic_scheme(js, lambda j: c + j % 3)
    assert sch.sizes() == [c + j % 3 for j in js]


@pytest.mark.parametrize("js,L", [([0], 1), ([2], 0), ([-1], 3)])
def test_scheme_rejects_nonpositive(js, L):
    with pytest.raises(InvalidParameterError):
        arithmetic_scheme(js, L)


def test_normalized_join_entropy_examples():
    uniform8 = ProbabilityVector([F(1, 8)] * 8)
    assert normalized_join_entropy(uniform8, 3, "bit") == pytest.approx(1.0, abs=1e-15)
    assert normalized_join_entropy(ProbabilityVector([1]), 5) == 0.0
    assert normalized_join_entropy(ProbabilityVector([F(1, 2), F(1, 4), F(1, 4)]), 2, "bit") == 0.75
    with pytest.raises(InvalidParameterError):
        normalized_join_entropy(uniform8, 0)


def test_tail_sup_diagnostic():
    assert tail_sup_diagnostic([1.0, 0.5, 0.25], 1) == 0.5
    assert tail_sup_diagnostic([0, 0, 0], 0) == 0
    assert tail_sup_diagnostic([0.3, 0.9, 0.2], 0) == 0.9
    with pytest.raises(InvalidParameterError):
        tail_sup_diagnostic([1.0], 1)


def test_plugin_examples():
    assert plugin_entropy_estimate({"a": 500_000, "b": 500_000}, "bit") == pytest.approx(1.0, abs=0.01)
    assert plugin_entropy_estimate({"a": 7}, "nat") == 0.0
    assert plugin_entropy_estimate({"a": 7}, "bit", "miller_madow") == 0.0
    assert plugin_entropy_estimate({"a": 1, "b": 1}, "bit") == 1.0
    with pytest.raises(InvalidParameterError):
        plugin_entropy_estimate({"a": 0, "b": 0})


def test_miller_madow_term():
    counts = {"a": 3, "b": 1}
    raw = plugin_entropy_estimate(counts, "nat")
    assert plugin_entropy_estimate(counts, "nat", "miller_madow") == pytest.approx(raw + 1 / 8)
    bits = plugin_entropy_estimate(counts, "bit", "miller_madow")
    assert bits == pytest.approx((raw + 1 / 8) / math.log(2))


def test_plugin_within_bootstrap_band_on_most_seeds():
    # true law (1/2, 1/4, 1/8, 1/8): H = 1.75 bits
    p = np.array([0.5, 0.25, 0.125, 0.125])
    inside = 0
    runs = 100
    for seed in range(runs):
        rng = np.random.default_rng(seed)
        counts = rng.multinomial(5000, p)
        est = plugin_entropy_estimate(counts, "bit", "miller_madow")
        se = bootstrap_entropy_se(counts, "bit", "miller_madow", n_boot=100, rng=rng)
        inside += abs(est - 1.75) <= 4 * se
    assert inside >= 99
