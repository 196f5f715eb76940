"""Markov quasi-similarity operator between two Bernoulli factors.

The kernel ``K(x, y)`` is constant on the cells of ``xi = {A, X-A}`` (input,
``A = [0, a)``) and ``beta = {B, X-B}`` (output, ``B = [0, 1/2)``).  On
cell-indicator coordinates the operator is the 2x2 matrix whose entry for input
cell ``c`` and output cell ``d`` is ``mu(c) K(c, d)``; the operator on a window
of ``w`` coordinates is its ``w``-fold Kronecker power.

Cell index 0 is ``A`` (resp. ``B``), index 1 the complement.  A
:class:`CylinderVector` stores the values of a function on the ``2**w`` atoms
of a window, the first coordinate being the most significant bit of the flat
index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .caps import cap
from .entropy import BIT, binary_vector, partition_entropy
from .errors import CapExceededError, InvalidParameterError

HALF = Fraction(1, 2)
_CELL_NAMES = {"A": 0, "X\\A": 1, "X-A": 1, "B": 0, "X\\B": 1, "X-B": 1}


@dataclass(frozen=True)
class KernelSpec:
    a: Fraction

    def __init__(self, a):
        a = Fraction(a)
        if not 0 < a < HALF:
            raise InvalidParameterError(f"kernel parameter a={a} must lie in (0, 1/2)")
        object.__setattr__(self, "a", a)

    @property
    def input_masses(self) -> tuple[Fraction, Fraction]:
        return (self.a, 1 - self.a)

    @property
    def output_masses(self) -> tuple[Fraction, Fraction]:
        return (HALF, HALF)


def _cell(c) -> int:
    if isinstance(c, str):
        try:
            return _CELL_NAMES[c]
        except KeyError:
            raise InvalidParameterError(f"unknown cell {c!r}") from None
    if c not in (0, 1):
        raise InvalidParameterError(f"unknown cell {c!r}")
    return int(c)


def kernel_value(spec: KernelSpec, x_cell, y_cell) -> Fraction:
    a = spec.a
    table = (
        (Fraction(0), 2 * Fraction(1)),          # x in A
        (1 / (1 - a), (1 - 2 * a) / (1 - a)),    # x in X-A
    )
    return table[_cell(x_cell)][_cell(y_cell)]


@dataclass(frozen=True)
class TransferMatrix:
    """``entries[d][c]``: coefficient of output cell ``d`` in the image of input cell ``c``."""

    entries: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    input_masses: tuple[Fraction, Fraction]
    output_masses: tuple[Fraction, Fraction]

    def apply(self, values: Sequence) -> tuple[Fraction, Fraction]:
        (m00, m01), (m10, m11) = self.entries
        f0, f1 = values
        return (m00 * f0 + m01 * f1, m10 * f0 + m11 * f1)

    @property
    def determinant(self) -> Fraction:
        (m00, m01), (m10, m11) = self.entries
        return m00 * m11 - m01 * m10

    def adjoint(self) -> "TransferMatrix":
        """Matrix of ``J*``: entry ``[c][d] = mu(d) K(c, d)``, read off with cell masses as weights."""
        e = self.entries
        mu_in, mu_out = self.input_masses, self.output_masses
        adj = tuple(
            tuple(e[d][c] * mu_out[d] / mu_in[c] for d in range(2)) for c in range(2)
        )
        return TransferMatrix(adj, mu_out, mu_in)

    def nonnegative(self) -> bool:
        return all(x >= 0 for row in self.entries for x in row)

    def fixes_constants(self) -> bool:
        return self.apply((1, 1)) == (1, 1)

    def adjoint_fixes_constants(self) -> bool:
        return self.adjoint().apply((1, 1)) == (1, 1)

    def integer_form(self) -> tuple[tuple[tuple[int, int], tuple[int, int]], int]:
        """``(N, d)`` with ``N`` integral and ``entries == N / d``."""
        d = reduce(math.lcm, (x.denominator for row in self.entries for x in row), 1)
        n = tuple(tuple(int(x * d) for x in row) for row in self.entries)
        return n, d


def transfer_matrix(spec: KernelSpec) -> TransferMatrix:
    mu_in, mu_out = spec.input_masses, spec.output_masses
    entries = tuple(
        tuple(mu_in[c] * kernel_value(spec, c, d) for c in range(2)) for d in range(2)
    )
    return TransferMatrix(entries, mu_in, mu_out)


def kernel_markov_identities(spec: KernelSpec) -> dict[str, bool]:
    """Exact cell-level identities of the kernel and its matrix."""
    mu_in, mu_out = spec.input_masses, spec.output_masses
    K = [[kernel_value(spec, c, d) for d in range(2)] for c in range(2)]
    J = transfer_matrix(spec)
    return {
        "kernel_nonnegative": all(K[c][d] >= 0 for c in range(2) for d in range(2)),
        "x_integral_one": all(sum(K[c][d] * mu_in[c] for c in range(2)) == 1 for d in range(2)),
        "y_integral_one": all(sum(K[c][d] * mu_out[d] for d in range(2)) == 1 for c in range(2)),
        "matrix_nonnegative": J.nonnegative(),
        "fixes_constants": J.fixes_constants(),
        "adjoint_fixes_constants": J.adjoint_fixes_constants(),
        "determinant": J.determinant == -2 * spec.a,
    }


@dataclass(frozen=True)
class CylinderVector:
    """Values of a function of ``window`` two-cell coordinates on its ``2**window`` atoms."""

    window: int
    values: tuple[Fraction, ...] = field(repr=False)

    def __init__(self, window: int, values: Sequence):
        if window < 1:
            raise InvalidParameterError("window length must be at least 1")
        vals = tuple(Fraction(v) for v in values)
        if len(vals) != 2 ** window:
            raise InvalidParameterError(f"need {2 ** window} values, got {len(vals)}")
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, window: int, c=1) -> "CylinderVector":
        return cls(window, [c] * 2 ** window)

    @classmethod
    def product(cls, factors: Sequence[Sequence]) -> "CylinderVector":
        """``f_1 (x) f_2 (x) ...`` from per-coordinate value pairs."""
        vals = [Fraction(1)]
        for f0, f1 in factors:
            vals = [v * Fraction(f) for v in vals for f in (f0, f1)]
        return cls(len(factors), vals)

    @classmethod
    def basis(cls, window: int, index: int) -> "CylinderVector":
        vals = [0] * 2 ** window
        vals[index] = 1
        return cls(window, vals)

    def shift(self) -> "CylinderVector":
        """Move coordinates ``2..w`` to ``1..w-1``; the function must not depend on coordinate 1."""
        w, v = self.window, self.values
        half = 2 ** (w - 1)
        if v[:half] != v[half:]:
            raise InvalidParameterError("shift needs a function constant in the first coordinate")
        return CylinderVector(w, [v[i >> 1] for i in range(2 ** w)])


def _kron_apply_int(mats: Sequence, values: list[int]) -> list[int]:
    """Apply ``mats[0] (x) ... (x) mats[w-1]`` to an integer vector, in place style."""
    w = len(mats)
    v = list(values)
    for k, ((m00, m01), (m10, m11)) in enumerate(mats):
        stride = 2 ** (w - 1 - k)
        block = 2 * stride
        for start in range(0, len(v), block):
            for i in range(start, start + stride):
                f0, f1 = v[i], v[i + stride]
                v[i] = m00 * f0 + m01 * f1
                v[i + stride] = m10 * f0 + m11 * f1
    return v


def kron_apply(mats: Sequence[TransferMatrix], vec: CylinderVector) -> CylinderVector:
    """Apply a tensor product of (possibly different) transfer matrices, exactly."""
    if len(mats) != vec.window:
        raise InvalidParameterError("one matrix per coordinate is required")
    den_in = reduce(math.lcm, (x.denominator for x in vec.values), 1)
    ints = [int(x * den_in) for x in vec.values]
    int_mats, scale = [], den_in
    for m in mats:
        n, d = m.integer_form()
        int_mats.append(n)
        scale *= d
    out = _kron_apply_int(int_mats, ints)
    return CylinderVector(vec.window, [Fraction(x, scale) for x in out])


def tensor_apply(spec: KernelSpec, vec: CylinderVector) -> CylinderVector:
    J = transfer_matrix(spec)
    return kron_apply([J] * vec.window, vec)


@dataclass
class IntertwiningReport:
    a: Fraction
    window: int
    results: list[tuple[int, bool]]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.results)

    @property
    def failures(self) -> int:
        return sum(not ok for _, ok in self.results)


def _inner_basis(window: int, b: int) -> CylinderVector:
    # indicator of atom b of coordinates 2..w, constant in coordinate 1
    half = 2 ** (window - 1)
    vals = [0] * (2 * half)
    vals[b] = vals[half + b] = 1
    return CylinderVector(window, vals)


def verify_intertwining(spec: KernelSpec, window: int) -> IntertwiningReport:
    """Check ``shift(J f) == J(shift f)`` for every basis function of the inner window."""
    if window < 2:
        raise InvalidParameterError("intertwining needs a window of length at least 2")
    _check_dim(window)
    results = []
    for b in range(2 ** (window - 1)):
        f = _inner_basis(window, b)
        lhs = tensor_apply(spec, f).shift()
        rhs = tensor_apply(spec, f.shift())
        results.append((b, lhs == rhs))
    return IntertwiningReport(spec.a, window, results)


def _check_dim(window: int, factor: int = 1) -> None:
    dim = 2 ** (window * factor)
    if dim > cap("dim"):
        raise CapExceededError(f"dimension {dim} exceeds cap {cap('dim')}")


def kron_power_int(n: Sequence[Sequence[int]], w: int) -> list[list[int]]:
    out = [[1]]
    for _ in range(w):
        out = [[x * y for x in row_a for y in row_b] for row_a in out for row_b in n]
    return out


def bareiss(matrix: Sequence[Sequence[int]]) -> tuple[int, int]:
    """Fraction-free elimination over the integers; returns ``(rank, det)``.

    ``det`` is the determinant for square full-rank input and 0 otherwise.
    """
    m = [list(row) for row in matrix]
    n_rows = len(m)
    n_cols = len(m[0]) if m else 0
    prev, sign, r = 1, 1, 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
            sign = -sign
        top = m[r]
        p = top[c]
        for i in range(r + 1, n_rows):
            row = m[i]
            f = row[c]
            if f == 0:
                if p != prev:
                    for k in range(c + 1, n_cols):
                        row[k] = row[k] * p // prev
            else:
                for k in range(c + 1, n_cols):
                    row[k] = (row[k] * p - f * top[k]) // prev
            row[c] = 0
        prev = p
        r += 1
    det = sign * prev if r == n_rows == n_cols else 0
    return r, det


@dataclass
class RankReport:
    a: Fraction
    window: int
    dimension: int
    rank: int
    determinant: Fraction
    closed_form_determinant: Fraction
    factor_determinant_product: Fraction

    @property
    def full_rank(self) -> bool:
        return self.rank == self.dimension

    @property
    def determinant_matches(self) -> bool:
        return self.determinant == self.closed_form_determinant

    @property
    def passed(self) -> bool:
        return self.full_rank and self.determinant_matches


def verify_injective_dense(spec: KernelSpec, window: int) -> RankReport:
    """Exact rank and determinant of the ``window``-fold tensor power.

    Full rank on a finite window is the finite shadow of both injectivity and
    density of the image.  ``closed_form_determinant`` is
    ``(-2a) ** (w 2**(w-1))``, the determinant of a Kronecker power;
    ``factor_determinant_product`` is ``(2a) ** w``, the product of
    single-coordinate determinant magnitudes.
    """
    if window < 1:
        raise InvalidParameterError("window length must be at least 1")
    _check_dim(window)
    n, d = transfer_matrix(spec).integer_form()
    dim = 2 ** window
    rank, det_int = bareiss(kron_power_int(n, window))
    det = Fraction(det_int, d ** (window * dim))
    return RankReport(
        a=spec.a,
        window=window,
        dimension=dim,
        rank=rank,
        determinant=det,
        closed_form_determinant=(-2 * spec.a) ** (window * dim // 2),
        factor_determinant_product=(2 * spec.a) ** window,
    )


@dataclass
class ChainReport:
    params: list[Fraction]
    window: int
    block_intertwining: list[bool]
    block_rank: list[bool]
    joint_intertwining: bool | None
    finite_side_entropy: float
    infinite_side_entropy: float
    window_entropy_growth: float

    @property
    def passed(self) -> bool:
        return (all(self.block_intertwining) and all(self.block_rank)
                and self.joint_intertwining is not False)


def chain_blocks(a, n_blocks: int, window: int, base: str = BIT) -> ChainReport:
    """Truncated chain ``J_a (x) J_{a^2} (x) ... (x) J_{a^n}`` on ``n_blocks`` blocks.

    Each block is checked on its own (intertwining and full rank).  When the
    joint dimension fits the cap, intertwining is also checked on the joint
    window with all blocks shifted simultaneously.  The finite side entropy is
    ``sum_k H(a^k, 1 - a^k)``; the infinite side contributes one unit per block.
    """
    if n_blocks < 1:
        raise InvalidParameterError("chain needs at least one block")
    if window < 2:
        raise InvalidParameterError("chain blocks need window length at least 2")
    a = Fraction(a)
    specs = [KernelSpec(a ** k) for k in range(1, n_blocks + 1)]
    inter = [verify_intertwining(s, window).passed for s in specs]
    ranks = [verify_injective_dense(s, window).passed for s in specs]
    joint = None
    if 2 ** (window * n_blocks) <= cap("dim"):
        joint = _joint_intertwining(specs, window)
    finite = math.fsum(partition_entropy(binary_vector(s.a), base) for s in specs)
    unit = partition_entropy(binary_vector(HALF), base)
    return ChainReport(
        params=[s.a for s in specs],
        window=window,
        block_intertwining=inter,
        block_rank=ranks,
        joint_intertwining=joint,
        finite_side_entropy=finite,
        infinite_side_entropy=n_blocks * unit,
        window_entropy_growth=n_blocks * window * unit,
    )


def _joint_intertwining(specs: Sequence[KernelSpec], window: int) -> bool:
    # coordinates laid out block by block; the shift acts inside every block
    mats = [transfer_matrix(s) for s in specs for _ in range(window)]
    n_blocks = len(specs)
    total = n_blocks * window

    def block_shift(vec: CylinderVector) -> CylinderVector:
        vals = vec.values
        out = []
        for idx in range(2 ** total):
            src = 0
            for b in range(n_blocks):
                bits = (idx >> ((n_blocks - 1 - b) * window)) & (2 ** window - 1)
                src = (src << window) | (bits >> 1)
            out.append(vals[src])
        # the source must not depend on the first coordinate of any block
        for idx in range(2 ** total):
            for b in range(n_blocks):
                first = 1 << ((n_blocks - 1 - b) * window + window - 1)
                if vals[idx] != vals[idx ^ first]:
                    raise InvalidParameterError("block shift needs functions constant in leading coordinates")
        return CylinderVector(total, out)

    inner = window - 1
    for b in range(2 ** (inner * n_blocks)):
        vals = [0] * 2 ** total
        for idx in range(2 ** total):
            key = 0
            for blk in range(n_blocks):
                bits = (idx >> ((n_blocks - 1 - blk) * window)) & (2 ** inner - 1)
                key = (key << inner) | bits
            if key == b:
                vals[idx] = 1
        f = CylinderVector(total, vals)
        lhs = block_shift(kron_apply(mats, f))
        rhs = kron_apply(mats, block_shift(f))
        if lhs != rhs:
            return False
    return True
