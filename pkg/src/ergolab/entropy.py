"""Partition entropy, subsequence schemes and the normalized join entropy.

Masses are exact rationals; only the final logarithm is evaluated in floating
point.  The logarithm base is always explicit (``"nat"`` or ``"bit"``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameterError

NAT = "nat"
BIT = "bit"
_BASE_ALIASES = {
    "nat": NAT, "natural": NAT, "e": NAT, "ln": NAT,
    "bit": BIT, "binary": BIT, "2": BIT, "log2": BIT,
}


def log_base(base: str) -> str:
    """Normalize a log-base selector to ``"nat"`` or ``"bit"``."""
    try:
        return _BASE_ALIASES[str(base).lower()]
    except KeyError:
        raise InvalidParameterError(f"unknown log base {base!r}") from None


def _to_base(nats: float, base: str) -> float:
    return nats / math.log(2) if log_base(base) == BIT else nats


@dataclass(frozen=True)
class ProbabilityVector:
    """Cell masses of a finite partition, summing to exactly one.

    ``labels`` optionally names the cells; join laws use tuples of per-iterate
    cell indices.
    """

    masses: tuple[Fraction, ...]
    labels: tuple[Hashable, ...] | None = None

    def __init__(self, masses: Iterable, labels: Iterable[Hashable] | None = None):
        ms = tuple(Fraction(m) for m in masses)
        if not ms:
            raise InvalidParameterError("probability vector needs at least one cell")
        if any(m < 0 for m in ms):
            raise InvalidParameterError("negative mass in probability vector")
        if sum(ms) != 1:
            raise InvalidParameterError(f"masses sum to {sum(ms)}, not 1")
        labs = None if labels is None else tuple(labels)
        if labs is not None and len(labs) != len(ms):
            raise InvalidParameterError("labels and masses differ in length")
        object.__setattr__(self, "masses", ms)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return len(self.masses)

    def as_dict(self) -> dict:
        labels = self.labels if self.labels is not None else range(len(self.masses))
        return dict(zip(labels, self.masses))

    def product(self, other: "ProbabilityVector") -> "ProbabilityVector":
        """Law of an independent pair, labels are concatenated tuples."""
        la = self.labels if self.labels is not None else [(i,) for i in range(len(self))]
        lb = other.labels if other.labels is not None else [(i,) for i in range(len(other))]
        la = [x if isinstance(x, tuple) else (x,) for x in la]
        lb = [x if isinstance(x, tuple) else (x,) for x in lb]
        return ProbabilityVector(
            [p * q for p in self.masses for q in other.masses],
            [x + y for x in la for y in lb],
        )


def binary_vector(q) -> ProbabilityVector:
    q = Fraction(q)
    return ProbabilityVector([q, 1 - q])


def product_law(marginals: Sequence[ProbabilityVector]) -> ProbabilityVector:
    """Independent product of the given cell laws with tuple labels."""
    if not marginals:
        raise InvalidParameterError("empty product")
    masses = [Fraction(1)]
    labels: list[tuple] = [()]
    for pv in marginals:
        masses = [m * q for m in masses for q in pv.masses]
        labels = [lab + (i,) for lab in labels for i in range(len(pv))]
    return ProbabilityVector(masses, labels)


def partition_entropy(p: ProbabilityVector, base: str = BIT) -> float:
    """``-sum m log m`` with ``0 log 0 = 0``."""
    terms = [float(m) * math.log(m) for m in p.masses if m > 0]
    return _to_base(-math.fsum(terms), base) + 0.0


@dataclass(frozen=True)
class SubsequenceScheme:
    """Ordered finite index sets ``P_j`` with the parameters that produced them."""

    sets: tuple[tuple[int, ...], ...]
    j_values: tuple[int, ...] = ()
    lengths: tuple[int, ...] = ()
    steps: tuple[int, ...] = ()

    def __post_init__(self):
        for s in self.sets:
            if not s:
                raise InvalidParameterError("empty index set in scheme")
            if len(set(s)) != len(s):
                raise InvalidParameterError(f"repeated element in index set {s}")

    def __len__(self) -> int:
        return len(self.sets)

    def sizes(self) -> list[int]:
        return [len(s) for s in self.sets]


def _lookup(rule, j: int) -> int:
    if callable(rule):
        return int(rule(j))
    if isinstance(rule, Mapping):
        return int(rule[j])
    return int(rule)


def arithmetic_scheme(
    j_values: Sequence[int],
    L: Callable[[int], int] | Mapping[int, int] | int,
    step_mode: str = "plain",
    heights: Mapping[int, int] | Sequence[int] | None = None,
) -> SubsequenceScheme:
    """Progressions ``{step, 2 step, ..., L(j) step}``.

    ``step_mode="plain"`` uses ``step = j``; ``step_mode="tower"`` uses the
    tower height ``h_j`` taken from ``heights`` (a mapping, or a sequence
    indexed from stage 1).
    """
    if step_mode not in ("plain", "tower"):
        raise InvalidParameterError(f"unknown step mode {step_mode!r}")
    if step_mode == "tower" and heights is None:
        raise InvalidParameterError("tower mode needs tower heights")
    sets, lengths, steps = [], [], []
    for j in j_values:
        j = int(j)
        if j < 1:
            raise InvalidParameterError(f"scheme index j={j} must be positive")
        n = _lookup(L, j)
        if n < 1:
            raise InvalidParameterError(f"L({j})={n} must be positive")
        if step_mode == "plain":
            step = j
        elif isinstance(heights, Mapping):
            step = int(heights[j])
        else:
            if j > len(heights):
                raise InvalidParameterError(f"no tower height for stage {j}")
            step = int(heights[j - 1])
        if step < 1:
            raise InvalidParameterError(f"step {step} must be positive")
        sets.append(tuple(step * k for k in range(1, n + 1)))
        lengths.append(n)
        steps.append(step)
    return SubsequenceScheme(tuple(sets), tuple(int(j) for j in j_values),
                             tuple(lengths), tuple(steps))


def normalized_join_entropy(joint: ProbabilityVector, scheme_size: int, base: str = BIT) -> float:
    if scheme_size < 1:
        raise InvalidParameterError("scheme size must be positive")
    return partition_entropy(joint, base) / scheme_size


def tail_sup_diagnostic(values: Sequence[float], tail_start: int = 0) -> float:
    """Largest value from ``tail_start`` on; a finite-range stand-in for a limsup."""
    if tail_start < 0 or tail_start >= len(values):
        raise InvalidParameterError("empty tail")
    return max(values[tail_start:])


def _count_array(cell_counts) -> np.ndarray:
    if isinstance(cell_counts, Mapping):
        counts = np.asarray(list(cell_counts.values()), dtype=np.int64)
    else:
        counts = np.asarray(cell_counts, dtype=np.int64)
    if counts.size == 0 or (counts < 0).any():
        raise InvalidParameterError("counts must be nonnegative and nonempty")
    if counts.sum() < 1:
        raise InvalidParameterError("all counts are zero")
    return counts


def _plugin_nats(counts: np.ndarray, correction: str) -> float:
    n = counts.sum()
    nz = counts[counts > 0]
    freq = nz / n
    h = -math.fsum((freq * np.log(freq)).tolist())
    if correction == "miller_madow":
        h += (len(nz) - 1) / (2 * n)
    elif correction != "none":
        raise InvalidParameterError(f"unknown correction {correction!r}")
    return h


def plugin_entropy_estimate(cell_counts, base: str = BIT, correction: str = "none") -> float:
    """Plug-in entropy of empirical frequencies, optionally Miller-Madow corrected."""
    counts = _count_array(cell_counts)
    return float(_to_base(_plugin_nats(counts, correction), base)) + 0.0


def bootstrap_entropy_se(cell_counts, base: str = BIT, correction: str = "none",
                         n_boot: int = 200, rng: np.random.Generator | None = None) -> float:
    """Bootstrap standard error of :func:`plugin_entropy_estimate` (multinomial resampling)."""
    counts = _count_array(cell_counts)
    rng = np.random.default_rng(0) if rng is None else rng
    n = int(counts.sum())
    draws = rng.multinomial(n, counts / n, size=n_boot)
    est = [_plugin_nats(row, correction) for row in draws]
    return _to_base(float(np.std(est, ddof=1)), base)


def empirical_counts(labels: Iterable[Hashable]) -> dict:
    out: dict = {}
    for lab in labels:
        out[lab] = out.get(lab, 0) + 1
    return out
