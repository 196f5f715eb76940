import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergolab.entropy import normalized_join_entropy, partition_entropy, binary_vector
from ergolab.errors import InvalidParameterError, NotSettledError
from ergolab.intervals import IntervalSet, union_all
from ergolab.poisson import (
    Configuration, CylinderEvent, SuspensionPartition, apply_suspension, cylinder_measure,
    event_frequency, poisson_pmf, sample_configuration, sample_counts, suspension_join_law,
    suspension_sample_labels, verify_independence,
)
from ergolab.rankone import build, spacer_params_for

LN2 = F(math.log(2))
iv = IntervalSet.interval


def direct_pmf(mu, k):
    return math.exp(-mu) * mu ** k / math.factorial(k)


def test_cylinder_examples():
    assert cylinder_measure(CylinderEvent([(iv(0, LN2), 0)])) == pytest.approx(0.5, rel=1e-15)
    assert cylinder_measure(CylinderEvent([(iv(0, 1), 1)])) == pytest.approx(math.exp(-1), rel=1e-15)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.fractions(F(1, 20), 5, max_denominator=20), st.integers(0, 8)),
                min_size=1, max_size=4))
def test_cylinder_matches_direct_product(terms):
    sets, lo = [], F(0)
    for length, _ in terms:
        sets.append(iv(lo, lo + length))
        lo += length + 1
    event = CylinderEvent([(A, k) for A, (_, k) in zip(sets, terms)])
    expected = math.prod(direct_pmf(float(m), k) for m, k in terms)
    assert cylinder_measure(event) == pytest.approx(expected, rel=1e-12)


def test_cylinder_rejects_overlap_and_null_sets():
    with pytest.raises(InvalidParameterError):
        CylinderEvent([(iv(0, 2), 0), (iv(1, 3), 0)])
    with pytest.raises(InvalidParameterError):
        CylinderEvent([(IntervalSet([]), 0)])


@pytest.mark.parametrize("mu", [F(1, 3), F(1), LN2, F(7, 2), F(25)])
def test_tail_sum_converges(mu):
    K = math.ceil(mu) + 40
    total = math.fsum(cylinder_measure(CylinderEvent([(iv(0, mu), k)])) for k in range(K + 1))
    assert abs(1 - total) < 1e-9


@pytest.mark.parametrize("ma,mb", [(F(1, 2), F(3, 4)), (LN2, F(2)), (F(1, 10), F(1, 10))])
def test_disjoint_union_additivity(ma, mb):
    A, B = iv(0, ma), iv(5, 5 + mb)
    AB = A | B
    for n in range(7):
        conv = math.fsum(cylinder_measure(CylinderEvent([(A, i), (B, n - i)])) for i in range(n + 1))
        assert cylinder_measure(CylinderEvent([(AB, n)])) == pytest.approx(conv, rel=1e-12)


def test_zero_count_frequency():
    n = 10**6
    counts = sample_counts(iv(0, LN2), [iv(0, LN2)], n, 12345)
    freq = float(np.mean(counts[:, 0] == 0))
    assert abs(freq - 0.5) <= 4 * math.sqrt(0.25 / n)


def test_sample_configuration_contract():
    W = IntervalSet([(0, 1), (3, F(7, 2))])
    a, b = sample_configuration(W, 9), sample_configuration(W, 9)
    assert a == b
    assert all(W.contains(p) for p in a.points)
    with pytest.raises(InvalidParameterError):
        sample_configuration(IntervalSet([]), 1)


def test_sample_count_law_of_whole_window():
    counts = sample_counts(iv(0, 3), [iv(0, 1), iv(1, 3)], 200_000, 4)
    assert counts[:, 0].mean() == pytest.approx(1.0, abs=4 * math.sqrt(1 / 200_000))
    assert counts[:, 1].mean() == pytest.approx(2.0, abs=4 * math.sqrt(2 / 200_000))


def test_event_frequency_multi_set():
    event = CylinderEvent([(iv(0, F(1, 2)), 1), (iv(2, 3), 0)])
    p = cylinder_measure(event)
    n = 200_000
    assert abs(event_frequency(event, n, 3) - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_configuration_validation():
    with pytest.raises(InvalidParameterError):
        Configuration((F(1, 2), F(1, 2)))
    with pytest.raises(InvalidParameterError):
        Configuration((F(2),), iv(0, 1))
    c = Configuration((F(3, 4), F(1, 4)))
    assert c.points == (F(1, 4), F(3, 4))
    assert c.count_in(iv(0, F(1, 2))) == 1
    assert c.to_csv() == "x\n0.25\n0.75\n"


def test_apply_suspension():
    state = build(spacer_params_for(1, 2, 3))
    config = sample_configuration(iv(0, 1), 5)
    assert apply_suspension(state, config, 0) == config
    moved = apply_suspension(state, config, 3)
    assert len(moved) == len(config)
    assert apply_suspension(state, moved, -3).points == config.points
    lvl = state.top.level(0)
    x = lvl.lower + (lvl.upper - lvl.lower) / 2
    one = apply_suspension(state, Configuration((x,)), 1)
    assert one.points == (x - lvl.lower + state.top.level(1).lower,)
    with pytest.raises(NotSettledError):
        apply_suspension(state, Configuration((x,)), -1)


def test_independence_examples():
    rep = verify_independence(iv(0, LN2), iv(1, 1 + LN2), 0, 0, 200_000, 8)
    assert rep.product == pytest.approx(0.25, rel=1e-12)
    assert rep.passed
    far = verify_independence(iv(0, F(1, 10)), iv(1, F(11, 10)), 60, 0, 1000, 1)
    assert far.joint < 1e-100 and far.exact_ok
    with pytest.raises(InvalidParameterError):
        verify_independence(iv(0, 1), iv(F(1, 2), 2), 0, 0, 10, 0)


def test_suspension_join_examples():
    state = build(spacer_params_for(1, 2, 4))
    h = state.heights()
    half = SuspensionPartition(iv(0, LN2), 0)
    law = suspension_join_law(state, half, [h[1]])
    assert law.exact and law.law.masses == binary_vector(F(half.q)).masses
    state5 = build(spacer_params_for(3, 2, 4))
    hs = state5.heights()
    law = suspension_join_law(state5, half, [hs[1] * k for k in (1, 2, 3)])
    assert law.exact and len(law.law) == 8
    assert normalized_join_entropy(law.law, 3, "bit") == pytest.approx(1.0, abs=1e-12)
    one = SuspensionPartition(iv(0, 1), 0)
    law = suspension_join_law(state, one, [h[1], 2 * h[1]])
    assert law.exact
    assert normalized_join_entropy(law.law, 2) == pytest.approx(
        partition_entropy(binary_vector(F(math.exp(-1)))), rel=1e-12)


def test_suspension_join_validation():
    state = build(spacer_params_for(1, 2, 3))
    part = SuspensionPartition(iv(0, LN2), 0)
    with pytest.raises(InvalidParameterError):
        suspension_join_law(state, part, [5, 10])
    with pytest.raises(InvalidParameterError):
        suspension_join_law(state, part, [6, 6])
    with pytest.raises(InvalidParameterError):
        suspension_join_law(state, SuspensionPartition(iv(100, 101), 0), [6])
    with pytest.raises(InvalidParameterError):
        SuspensionPartition(iv(0, 1), -1)


def test_overlapping_translates_fall_back_to_sampling():
    # A = stage-2 levels 0..2; T A and T^2 A share levels 2 and 3
    state = build(spacer_params_for(1, 2, 3))
    st2 = state.stage(2)
    A = union_all(st2.level(i) for i in range(3))
    n = 200_000
    law = suspension_join_law(state, SuspensionPartition(A, 0), [1, 2], samples=n, seed=2)
    assert not law.exact and not law.translates_disjoint
    # only T A: measure 1/2, shared: 1, only T^2 A: 1/2
    e = math.exp
    exact = {(0, 0): e(-2.0), (0, 1): e(-1.5) * (1 - e(-0.5)), (1, 0): e(-1.5) * (1 - e(-0.5))}
    exact[(1, 1)] = 1 - sum(exact.values())
    got = law.law.as_dict()
    for cell, p in exact.items():
        assert abs(float(got.get(cell, 0)) - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_sampled_labels_match_exact_law():
    state = build(spacer_params_for(2, 2, 4))
    h2 = state.heights()[1]
    part = SuspensionPartition(iv(0, LN2), 0)
    n = 100_000
    labels = suspension_sample_labels(state, part, [h2, 2 * h2], n, 6)
    assert labels.shape == (n, 2)
    freq = float(np.mean((labels == 0).all(axis=1)))
    assert abs(freq - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / n)
    assert poisson_pmf(LN2, 0) == pytest.approx(0.5, rel=1e-15)
