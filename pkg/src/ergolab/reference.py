"""Exactly solvable reference systems: Bernoulli shifts and rational rotations.

Bernoulli shifts carry the positive-entropy benchmark (iterates of a coordinate
partition are independent).  Circle rotations carry the zero-entropy side: the
join of ``n`` rotated copies of an arc partition has at most ``cuts * n``
cells, so the normalized join entropy decays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np

from .entropy import (
    BIT, ProbabilityVector, normalized_join_entropy, product_law,
)
from .errors import CapExceededError, InvalidParameterError


@dataclass(frozen=True)
class BernoulliScheme:
    letter_masses: ProbabilityVector

    @classmethod
    def of(cls, *masses) -> "BernoulliScheme":
        return cls(ProbabilityVector(masses))

    @property
    def alphabet_size(self) -> int:
        return len(self.letter_masses)


@dataclass(frozen=True)
class AlphabetPartition:
    """A coarsening of the alphabet: letter index -> cell label."""

    grouping: tuple[tuple[int, Hashable], ...]

    def __init__(self, grouping: Mapping[int, Hashable] | Sequence[Hashable]):
        if isinstance(grouping, Mapping):
            items = tuple(sorted(grouping.items()))
        else:
            items = tuple(enumerate(grouping))
        if not items:
            raise InvalidParameterError("partition needs at least one cell")
        object.__setattr__(self, "grouping", items)

    @classmethod
    def identity(cls, n: int) -> "AlphabetPartition":
        return cls(list(range(n)))

    @classmethod
    def singleton(cls, n: int, letter: int) -> "AlphabetPartition":
        """Two cells: ``{letter}`` (label 0) against the rest (label 1)."""
        return cls([0 if i == letter else 1 for i in range(n)])

    def cells(self) -> list[Hashable]:
        return sorted({lab for _, lab in self.grouping}, key=repr)

    def cell_index(self, n_letters: int) -> list[int]:
        """Cell index of each letter; rejects unmapped letters."""
        mapping = dict(self.grouping)
        missing = [i for i in range(n_letters) if i not in mapping]
        if missing:
            raise InvalidParameterError(f"letters {missing} not covered by the partition")
        extra = [i for i in mapping if not 0 <= i < n_letters]
        if extra:
            raise InvalidParameterError(f"partition names unknown letters {extra}")
        order = {lab: k for k, lab in enumerate(self.cells())}
        return [order[mapping[i]] for i in range(n_letters)]


def factor_partition(scheme: BernoulliScheme, grouping: AlphabetPartition) -> ProbabilityVector:
    idx = grouping.cell_index(scheme.alphabet_size)
    masses = [Fraction(0)] * (max(idx) + 1)
    for letter, cell in enumerate(idx):
        masses[cell] += scheme.letter_masses.masses[letter]
    return ProbabilityVector(masses, grouping.cells())


def _check_distinct(P: Sequence[int]) -> tuple[int, ...]:
    P = tuple(int(p) for p in P)
    if not P:
        raise InvalidParameterError("empty index set")
    if len(set(P)) != len(P):
        raise InvalidParameterError(f"repeated element in index set {P}")
    return P


def bernoulli_join_law(scheme: BernoulliScheme, xi: AlphabetPartition,
                       P: Sequence[int]) -> ProbabilityVector:
    """Law of the join of the shifted copies of ``xi`` indexed by ``P``.

    Distinct coordinates of a Bernoulli shift are independent, so the law is
    the ``|P|``-fold product of the cell masses of ``xi``.
    """
    P = _check_distinct(P)
    cells = factor_partition(scheme, xi)
    return product_law([ProbabilityVector(cells.masses)] * len(P))


def bernoulli_sample_window(scheme: BernoulliScheme, window_length: int,
                            seed: int | np.random.Generator) -> np.ndarray:
    """I.i.d. letters (integer indices) of the scheme; deterministic per seed."""
    if window_length < 1:
        raise InvalidParameterError("window length must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    probs = np.array([float(m) for m in scheme.letter_masses.masses])
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    u = rng.random(window_length)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def join_labels_from_sample(letters: np.ndarray, xi_index: Sequence[int],
                            P: Sequence[int]) -> list[tuple[int, ...]]:
    """Cell tuples of the join, read off non-overlapping blocks of a sample."""
    P = _check_distinct(P)
    lo, hi = min(P), max(P)
    span = hi - lo + 1
    cells = np.asarray(xi_index)[letters]
    n_blocks = len(cells) // span
    blocks = cells[: n_blocks * span].reshape(n_blocks, span)
    cols = blocks[:, [p - lo for p in P]]
    return [tuple(int(c) for c in row) for row in cols]


@dataclass(frozen=True)
class RotationSystem:
    """Rotation of the circle ``[0, 1)`` by a rational angle, with an arc partition."""

    angle: Fraction
    cuts: tuple[Fraction, ...]

    def __init__(self, angle, cuts: Sequence):
        angle = Fraction(angle)
        cuts = tuple(Fraction(c) for c in cuts)
        if not 0 <= angle < 1:
            raise InvalidParameterError("rotation angle must lie in [0, 1)")
        if not cuts:
            raise InvalidParameterError("need at least one cut point")
        if any(not 0 <= c < 1 for c in cuts):
            raise InvalidParameterError("cut points must lie in [0, 1)")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise InvalidParameterError("cut points must be strictly increasing")
        object.__setattr__(self, "angle", angle)
        object.__setattr__(self, "cuts", cuts)

    def arc_index(self, x: Fraction) -> int:
        """Index of the arc ``[c_i, c_{i+1})`` (cyclically) containing ``x``."""
        x = x % 1
        k = -1
        for i, c in enumerate(self.cuts):
            if c <= x:
                k = i
        return k % len(self.cuts)

    def arc_masses(self) -> ProbabilityVector:
        cs = self.cuts
        if len(cs) == 1:
            return ProbabilityVector([1])
        return ProbabilityVector([(cs[(i + 1) % len(cs)] - cs[i]) % 1 for i in range(len(cs))])


def rotation_join_law(rot: RotationSystem, P: Sequence[int]) -> ProbabilityVector:
    """Exact law of the join of ``R^{-p}`` (arc partition) over ``p`` in ``P``.

    The preimage of the arc partition under ``R^p`` has its cut points moved by
    ``-p * angle``.  All moved cut points are merged and each resulting arc is
    labelled by the tuple of arcs its points visit at times ``p``.
    """
    P = _check_distinct(P)
    points = sorted({(c - p * rot.angle) % 1 for p in P for c in rot.cuts})
    masses: dict[tuple[int, ...], Fraction] = {}
    for i, lo in enumerate(points):
        hi = points[i + 1] if i + 1 < len(points) else points[0] + 1
        length = hi - lo
        mid = lo + length / 2
        label = tuple(rot.arc_index(mid + p * rot.angle) for p in P)
        masses[label] = masses.get(label, Fraction(0)) + length
    labels = sorted(masses)
    return ProbabilityVector([masses[lab] for lab in labels], labels)


def rotation_entropy_bound(n_cuts: int, scheme_size: int, base: str = BIT) -> float:
    """``log(cuts * |P|) / |P|``, the cell-count ceiling on the normalized join entropy."""
    nats = math.log(n_cuts * scheme_size) / scheme_size
    return nats / math.log(2) if base == BIT else nats


def search_scheme_length(rot: RotationSystem, j: int, base: str = "nat",
                         max_length: int = 4096) -> tuple[int, float]:
    """Smallest ``L`` with ``h(R^j, xi)`` along ``{j, 2j, ..., L j}`` below ``1/j``.

    Returns ``(L, value)``; raises :class:`CapExceededError` when no length up
    to ``max_length`` qualifies.
    """
    if j < 1:
        raise InvalidParameterError("j must be positive")
    for L in range(1, max_length + 1):
        P = [j * k for k in range(1, L + 1)]
        value = normalized_join_entropy(rotation_join_law(rot, P), L, base)
        if value < 1 / j:
            return L, value
    raise CapExceededError(f"no scheme length up to {max_length} for j={j}")
