"""Poisson suspension over a rank-one map.

Cylinder probabilities use the Poisson product formula for disjoint sets.
Sampling places ``Poisson(mu(W))`` uniform points in a finite-measure window
``W``; sample coordinates are floats, all set algebra stays rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .entropy import ProbabilityVector, binary_vector, product_law
from .errors import InvalidParameterError, NotSettledError
from .intervals import IntervalSet, pairwise_disjoint, union_all
from .rankone import RankOneState

BOUNDARY_EPS = 1e-15


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def poisson_log_pmf(mu: float, k: int) -> float:
    return k * math.log(mu) - mu - math.lgamma(k + 1)


def poisson_pmf(mu, k: int) -> float:
    mu = float(mu)
    if k < 0:
        raise InvalidParameterError("count must be nonnegative")
    if mu <= 0:
        raise InvalidParameterError("set measure must be positive")
    return math.exp(poisson_log_pmf(mu, k))


@dataclass(frozen=True)
class CylinderEvent:
    """Configurations with exactly ``k_i`` points in ``A_i`` for each term."""

    terms: tuple[tuple[IntervalSet, int], ...]

    def __init__(self, terms: Sequence[tuple[IntervalSet, int]]):
        terms = tuple((A, int(k)) for A, k in terms)
        if not terms:
            raise InvalidParameterError("cylinder event needs at least one set")
        for A, k in terms:
            if A.measure <= 0:
                raise InvalidParameterError("cylinder sets need positive measure")
            if k < 0:
                raise InvalidParameterError("cylinder counts must be nonnegative")
        if not pairwise_disjoint([A for A, _ in terms]):
            raise InvalidParameterError("cylinder sets must be pairwise disjoint")
        object.__setattr__(self, "terms", terms)

    @property
    def sets(self) -> list[IntervalSet]:
        return [A for A, _ in self.terms]

    @property
    def counts(self) -> list[int]:
        return [k for _, k in self.terms]

    def hull(self) -> IntervalSet:
        sets = self.sets
        return IntervalSet.interval(min(s.lower for s in sets), max(s.upper for s in sets))


def cylinder_measure(event: CylinderEvent) -> float:
    """Product over terms of ``mu(A)^k / k! * exp(-mu(A))``."""
    return math.exp(math.fsum(poisson_log_pmf(float(A.measure), k) for A, k in event.terms))


@dataclass(frozen=True)
class Configuration:
    points: tuple[Fraction, ...]
    window: IntervalSet | None = None

    def __post_init__(self):
        pts = tuple(sorted(Fraction(p) for p in self.points))
        if len(set(pts)) != len(pts):
            raise InvalidParameterError("configuration points must be distinct")
        if self.window is not None and not all(self.window.contains(p) for p in pts):
            raise InvalidParameterError("configuration point outside its window")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def count_in(self, A: IntervalSet) -> int:
        return sum(A.contains(p) for p in self.points)

    def to_csv(self) -> str:
        lines = ["x"] + [repr(float(p)) for p in self.points]
        return "\n".join(lines) + "\n"


def _check_window(window: IntervalSet) -> None:
    if window.measure <= 0:
        raise InvalidParameterError("sampling window must have positive finite measure")


def _uniform_points(window: IntervalSet, m: int, rng: np.random.Generator,
                    boundaries: np.ndarray) -> np.ndarray:
    los = np.array([float(lo) for lo, _ in window])
    lengths = np.array([float(hi - lo) for lo, hi in window])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]

    def draw(size):
        u = rng.random(size) * total
        idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(los) - 1)
        return los[idx] + (u - cum[idx])

    x = draw(m)
    while True:
        # points numerically on a boundary are redrawn
        near = np.zeros(len(x), dtype=bool)
        if len(boundaries) and len(x):
            pos = np.searchsorted(boundaries, x)
            left = np.abs(x - boundaries[np.clip(pos - 1, 0, len(boundaries) - 1)])
            right = np.abs(boundaries[np.clip(pos, 0, len(boundaries) - 1)] - x)
            near = (np.minimum(left, right) < BOUNDARY_EPS)
        if not near.any():
            return x
        x[near] = draw(int(near.sum()))


def _edges(sets: Sequence[IntervalSet]) -> np.ndarray:
    return np.unique([float(e) for s in sets for iv in s for e in iv])


def sample_configuration(window: IntervalSet, seed) -> Configuration:
    _check_window(window)
    rng = _rng(seed)
    n = int(rng.poisson(float(window.measure)))
    pts = _uniform_points(window, n, rng, _edges([window]))
    return Configuration(tuple(Fraction(float(p)) for p in np.sort(pts)), window)


def sample_counts(window: IntervalSet, sets: Sequence[IntervalSet], n_samples: int,
                  seed) -> np.ndarray:
    """Point counts of ``n_samples`` independent configurations in each of ``sets``.

    The sets must be pairwise disjoint subsets of ``window``.  Returns an
    integer array of shape ``(n_samples, len(sets))``.
    """
    _check_window(window)
    if not pairwise_disjoint(list(sets)):
        raise InvalidParameterError("counting sets must be pairwise disjoint")
    if not union_all(sets).issubset(window):
        raise InvalidParameterError("counting sets must lie inside the window")
    rng = _rng(seed)
    n_per = rng.poisson(float(window.measure), size=n_samples)
    pts = _uniform_points(window, int(n_per.sum()), rng, _edges([window, *sets]))
    owner = np.repeat(np.arange(n_samples), n_per)
    ivs = sorted((float(lo), float(hi), sid) for sid, s in enumerate(sets) for lo, hi in s)
    los = np.array([iv[0] for iv in ivs])
    his = np.array([iv[1] for iv in ivs])
    sid = np.array([iv[2] for iv in ivs], dtype=np.int64)
    k = np.searchsorted(los, pts, side="right") - 1
    inside = (k >= 0) & (pts < his[np.clip(k, 0, None)])
    flat = owner[inside] * len(sets) + sid[k[inside]]
    counts = np.bincount(flat, minlength=n_samples * len(sets))
    return counts.reshape(n_samples, len(sets))


def event_frequency(event: CylinderEvent, n_samples: int, seed,
                    window: IntervalSet | None = None) -> float:
    window = event.hull() if window is None else window
    counts = sample_counts(window, event.sets, n_samples, seed)
    hit = np.all(counts == np.asarray(event.counts), axis=1)
    return float(hit.mean())


def apply_suspension(state: RankOneState, config: Configuration, n: int) -> Configuration:
    """Image of a configuration under the suspension of ``T^n`` (pointwise)."""
    if n == 0:
        return config
    pts = tuple(state.point_image(p, n) for p in config.points)
    window = None
    if config.window is not None and state.is_settled(config.window, n):
        window = state.image_of_set(config.window, n)
    return Configuration(pts, window)


@dataclass
class IndependenceReport:
    joint: float
    product: float
    relative_error: float
    mc_frequency: float
    sigma: float
    samples: int

    @property
    def exact_ok(self) -> bool:
        return self.relative_error <= 1e-12

    @property
    def mc_ok(self) -> bool:
        return abs(self.mc_frequency - self.product) <= 4 * self.sigma

    @property
    def passed(self) -> bool:
        return self.exact_ok and self.mc_ok


def verify_independence(A: IntervalSet, B: IntervalSet, k: int, m: int,
                        samples: int, seed) -> IndependenceReport:
    """Exact and Monte Carlo check that ``C(A, k)`` and ``C(B, m)`` are independent."""
    if not A.isdisjoint(B):
        raise InvalidParameterError("independence check needs disjoint sets")
    joint = cylinder_measure(CylinderEvent([(A, k), (B, m)]))
    product = cylinder_measure(CylinderEvent([(A, k)])) * cylinder_measure(CylinderEvent([(B, m)]))
    rel = abs(joint - product) / product if product > 0 else abs(joint)
    window = IntervalSet.interval(min(A.lower, B.lower), max(A.upper, B.upper))
    counts = sample_counts(window, [A, B], samples, seed)
    freq = float(np.mean((counts[:, 0] == k) & (counts[:, 1] == m)))
    sigma = math.sqrt(product * (1 - product) / samples)
    return IndependenceReport(joint, product, rel, freq, sigma, samples)


@dataclass(frozen=True)
class SuspensionPartition:
    """The two-cell partition ``{C(A, k), complement}``."""

    A: IntervalSet
    k: int

    def __post_init__(self):
        if self.A.measure <= 0:
            raise InvalidParameterError("generating set needs positive measure")
        if self.k < 0:
            raise InvalidParameterError("count must be nonnegative")

    @property
    def q(self) -> float:
        return poisson_pmf(self.A.measure, self.k)

    def cell_masses(self) -> ProbabilityVector:
        return binary_vector(Fraction(self.q))


@dataclass
class SuspensionJoinLaw:
    law: ProbabilityVector
    exact: bool
    translates_disjoint: bool
    scheme: tuple[int, ...]


def suspension_join_law(state: RankOneState, part: SuspensionPartition, P: Sequence[int],
                        samples: int = 100_000, seed=0) -> SuspensionJoinLaw:
    """Law of the join of ``T_o^p xi_C`` over ``p`` in ``P``.

    When the forward translates ``T^p A`` are pairwise disjoint the events are
    independent and the law is the exact product of ``(q, 1 - q)``; cell 0 of
    each factor is ``C``.  Otherwise an empirical law is returned with
    ``exact=False``.
    """
    P = tuple(int(p) for p in P)
    if not P or len(set(P)) != len(P):
        raise InvalidParameterError("scheme needs distinct elements")
    step = min(P)
    hs = state.heights()
    if step not in hs or any(p % step for p in P):
        raise InvalidParameterError(f"scheme {P} is not a progression of a tower height {hs}")
    if not part.A.issubset(state.space()):
        raise InvalidParameterError("generating set must lie inside a built tower")
    translates = [state.image_of_set(part.A, p) for p in P]
    disjoint = pairwise_disjoint(translates)
    if disjoint:
        marginal = part.cell_masses()
        return SuspensionJoinLaw(product_law([marginal] * len(P)), True, True, P)
    window = union_all(translates)
    labels = _translate_labels(window, translates, part.k, samples, seed)
    values, freq = np.unique(labels, axis=0, return_counts=True)
    masses = [Fraction(int(c), samples) for c in freq]
    law = ProbabilityVector(masses, [tuple(int(x) for x in row) for row in values])
    return SuspensionJoinLaw(law, False, False, P)


def _translate_labels(window: IntervalSet, translates: Sequence[IntervalSet], k: int,
                      samples: int, seed) -> np.ndarray:
    # overlapping translates: count each translate separately on the same configuration
    rng = _rng(seed)
    n_per = rng.poisson(float(window.measure), size=samples)
    edges = _edges([window, *translates])
    pts = _uniform_points(window, int(n_per.sum()), rng, edges)
    owner = np.repeat(np.arange(samples), n_per)
    cols = []
    for T in translates:
        los = np.array([float(lo) for lo, _ in T])
        his = np.array([float(hi) for _, hi in T])
        j = np.searchsorted(los, pts, side="right") - 1
        inside = (j >= 0) & (pts < his[np.clip(j, 0, None)])
        cnt = np.bincount(owner[inside], minlength=samples)
        cols.append(np.where(cnt == k, 0, 1))
    return np.stack(cols, axis=1)


def suspension_sample_labels(state: RankOneState, part: SuspensionPartition, P: Sequence[int],
                             samples: int, seed) -> np.ndarray:
    """Sampled join cells along ``P`` (rows of 0/1, 0 meaning the event ``C``)."""
    translates = [state.image_of_set(part.A, int(p)) for p in P]
    return _translate_labels(union_all(translates), translates, part.k, samples, seed)
