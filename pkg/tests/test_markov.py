from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ergolab.entropy import binary_vector, partition_entropy
from ergolab.errors import CapExceededError, InvalidParameterError
from ergolab.markov import (
    CylinderVector, KernelSpec, bareiss, chain_blocks, kernel_markov_identities, kernel_value,
    kron_power_int, tensor_apply, transfer_matrix, verify_injective_dense, verify_intertwining,
)

rationals_in_half = st.builds(
    lambda n, d: F(n, 2 * d + 2), st.integers(1, 10**6), st.integers(1, 10**6)
).filter(lambda a: 0 < a < F(1, 2))


def quadrature_matrix(a, grid):
    """J f(y) = int K(x, y) f(x) dx by midpoint quadrature; exact when a * grid is an integer."""
    spec = KernelSpec(a)
    out = [[F(0), F(0)], [F(0), F(0)]]
    xs = [F(2 * i + 1, 2 * grid) for i in range(grid)]
    for d, y in ((0, F(1, 4)), (1, F(3, 4))):
        for x in xs:
            c = 0 if x < a else 1
            out[d][c] += kernel_value(spec, c, 0 if y < F(1, 2) else 1) / grid
    return out


def gauss_rank(rows):
    """Plain Gaussian elimination over Fractions."""
    m = [[F(x) for x in r] for r in rows]
    rank, col = 0, 0
    n, k = len(m), len(m[0])
    while rank < n and col < k:
        piv = next((i for i in range(rank, n) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, n):
            f = m[i][col] / m[rank][col]
            m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def test_kernel_values():
    s = KernelSpec(F(1, 4))
    assert kernel_value(s, "A", "B") == 0
    assert kernel_value(s, "A", "X\\B") == 2
    assert kernel_value(s, "X\\A", "X\\B") == F(2, 3)
    assert kernel_value(s, "X\\A", "B") == F(4, 3)


@pytest.mark.parametrize("a", [0, F(1, 2), F(3, 4), -F(1, 8)])
def test_kernel_rejects_bad_parameter(a):
    with pytest.raises(InvalidParameterError):
        KernelSpec(a)


def test_transfer_matrix_quarter():
    J = transfer_matrix(KernelSpec(F(1, 4)))
    assert J.apply((1, 0)) == (0, F(1, 2))
    assert J.apply((0, 1)) == (1, F(1, 2))
    assert J.apply((1, 1)) == (1, 1)
    assert J.determinant == -F(1, 2)


@pytest.mark.parametrize("a,grid", [(F(1, 4), 8), (F(1, 3), 6), (F(2, 5), 10), (F(3, 10), 20)])
def test_transfer_matrix_matches_quadrature(a, grid):
    J = transfer_matrix(KernelSpec(a))
    assert [list(r) for r in J.entries] == quadrature_matrix(a, grid)


def test_markov_identities_on_grid():
    for k in range(1, 1001):
        ids = kernel_markov_identities(KernelSpec(F(k, 2002)))
        assert all(ids.values()), (k, ids)


@settings(max_examples=50)
@given(rationals_in_half)
def test_determinant_closed_form(a):
    assert transfer_matrix(KernelSpec(a)).determinant == -2 * a


@settings(max_examples=50, deadline=None)
@given(rationals_in_half, st.lists(st.fractions(0, 10, max_denominator=50), min_size=8, max_size=8))
def test_positivity_preserved(a, values):
    out = tensor_apply(KernelSpec(a), CylinderVector(3, values))
    assert all(v >= 0 for v in out.values)


def test_tensor_apply_examples():
    s = KernelSpec(F(1, 4))
    for w in (1, 2, 5):
        assert tensor_apply(s, CylinderVector.constant(w)) == CylinderVector.constant(w)
    assert tensor_apply(s, CylinderVector.product([(1, 0)])).values == (0, F(1, 2))
    got = tensor_apply(s, CylinderVector.product([(1, 0), (0, 1)]))
    assert got == CylinderVector.product([(0, F(1, 2)), (1, F(1, 2))])


@settings(max_examples=30, deadline=None)
@given(rationals_in_half, st.lists(st.tuples(st.fractions(-3, 3, max_denominator=9),
                                             st.fractions(-3, 3, max_denominator=9)),
                                   min_size=1, max_size=5))
def test_tensor_factorization(a, factors):
    J = transfer_matrix(KernelSpec(a))
    lhs = tensor_apply(KernelSpec(a), CylinderVector.product(factors))
    assert lhs == CylinderVector.product([J.apply(f) for f in factors])


def test_window_zero_rejected():
    with pytest.raises(InvalidParameterError):
        CylinderVector(0, [1])


@pytest.mark.parametrize("a,w", [(F(1, 3), 3), (F(2, 5), 5), (F(1, 4), 2)])
def test_intertwining(a, w):
    rep = verify_intertwining(KernelSpec(a), w)
    assert len(rep.results) == 2 ** (w - 1)
    assert rep.passed


def test_intertwining_detects_non_shift_invariant_operator():
    # a coordinate-dependent operator must fail the check
    from ergolab.markov import kron_apply
    s1, s2 = KernelSpec(F(1, 4)), KernelSpec(F(1, 3))
    mats = [transfer_matrix(s1), transfer_matrix(s2), transfer_matrix(s1)]
    f = CylinderVector(3, [0, 1, 0, 0, 0, 1, 0, 0])
    assert kron_apply(mats, f).shift() != kron_apply(mats, f.shift())


def test_intertwining_window_too_small():
    with pytest.raises(InvalidParameterError):
        verify_intertwining(KernelSpec(F(1, 4)), 1)


@pytest.mark.parametrize("a,w", [(F(1, 4), 1), (F(1, 4), 3), (F(1, 3), 4), (F(2, 5), 2)])
def test_rank_agrees_with_gauss(a, w):
    n, _ = transfer_matrix(KernelSpec(a)).integer_form()
    K = kron_power_int(n, w)
    assert bareiss(K)[0] == gauss_rank(K) == 2 ** w


def test_bareiss_rank_deficient():
    assert bareiss([[1, 2], [2, 4]]) == (1, 0)
    assert bareiss([[0, 1], [1, 0]]) == (2, -1)
    assert bareiss([[2, 0, 1], [1, 3, 2], [1, 1, 1]])[1] == 2 * (3 - 2) - 0 + 1 * (1 - 3)


def test_injective_dense_examples():
    rep = verify_injective_dense(KernelSpec(F(1, 4)), 4)
    assert rep.rank == 16 and rep.determinant_matches
    for a in (F(1, 7), F(3, 8)):
        assert verify_injective_dense(KernelSpec(a), 1).rank == 2


@pytest.mark.slow
def test_injective_dense_small_a_window_8():
    rep = verify_injective_dense(KernelSpec(F(1, 100)), 8)
    assert rep.rank == 256
    assert rep.factor_determinant_product == F(1, 50) ** 8
    assert rep.determinant == (-F(1, 50)) ** (8 * 128)


def test_dimension_cap(monkeypatch):
    monkeypatch.setenv("ERGOLAB_CAP", "8")
    with pytest.raises(CapExceededError):
        verify_injective_dense(KernelSpec(F(1, 4)), 4)


def test_chain_blocks():
    rep = chain_blocks(F(1, 3), 2, 2)
    assert rep.passed and rep.joint_intertwining is True
    expected = partition_entropy(binary_vector(F(1, 3))) + partition_entropy(binary_vector(F(1, 9)))
    assert rep.finite_side_entropy == pytest.approx(expected, rel=1e-12)
    assert rep.infinite_side_entropy == 2.0
    single = chain_blocks(F(1, 4), 1, 3)
    assert single.passed
    assert single.block_intertwining == [verify_intertwining(KernelSpec(F(1, 4)), 3).passed]


def test_chain_entropy_sum_converges():
    a = F(49, 100)
    sums = [chain_blocks(a, n, 2).finite_side_entropy for n in (4, 8)]
    assert sums[0] < sums[1] < 4 * 1.0 + 1e-9
    assert sums[1] - sums[0] < 4 * partition_entropy(binary_vector(a ** 5))


@settings(max_examples=100)
@given(rationals_in_half)
def test_entropy_separation(a):
    assert partition_entropy(binary_vector(a), "bit") < 1
    assert partition_entropy(binary_vector(F(1, 2)), "bit") == 1.0
