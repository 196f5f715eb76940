"""Rank-one cutting and stacking with exact rational geometry.

Stage 1 is the single level ``[0, 1)``.  Going from stage ``j`` to ``j+1`` the
tower is cut into ``r_j`` equal columns, ``s_j(i)`` spacer levels are stacked on
column ``i`` and the columns are stacked left to right, giving height
``h_{j+1} = r_j h_j + sum_i s_j(i)``.  Spacer levels are allocated contiguously
to the right of all space used so far.

At every stage the tower levels partition the whole space built so far, and
``T`` moves level ``i`` onto level ``i + 1``.  ``T^n`` is therefore settled on
level ``i`` of the last built tower iff ``0 <= i + n < h``.  Earlier stages
never change: each level of stage ``j`` splits into column pieces of stage
``j+1`` that are translated by the same offset.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .caps import cap
from .errors import CapExceededError, InvalidParameterError, NotSettledError
from .intervals import IntervalSet, pairwise_disjoint


@dataclass(frozen=True)
class RankOneParams:
    """Cuts ``r_1..r_{J-1}`` and spacer arrays ``s_1..s_{J-1}``; ``h_1 = 1``."""

    cuts: tuple[int, ...]
    spacers: tuple[tuple[int, ...], ...]

    def __init__(self, cuts: Sequence[int], spacers: Sequence[Sequence[int]]):
        cuts = tuple(int(r) for r in cuts)
        spacers = tuple(tuple(int(s) for s in row) for row in spacers)
        if len(cuts) != len(spacers):
            raise InvalidParameterError("one spacer array per cut is required")
        for j, (r, row) in enumerate(zip(cuts, spacers), start=1):
            if r < 2:
                raise InvalidParameterError(f"r_{j}={r} must be at least 2")
            if len(row) != r:
                raise InvalidParameterError(f"spacer array of stage {j} has {len(row)} entries, expected {r}")
            if any(s < 0 for s in row):
                raise InvalidParameterError(f"negative spacer count at stage {j}")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "spacers", spacers)

    @property
    def stages(self) -> int:
        return len(self.cuts) + 1

    @classmethod
    def odometer(cls, stages: int, r: int = 2) -> "RankOneParams":
        return cls([r] * (stages - 1), [[0] * r] * (stages - 1))

    def predicted_heights(self) -> list[int]:
        hs = [1]
        for r, row in zip(self.cuts, self.spacers):
            hs.append(r * hs[-1] + sum(row))
        return hs

    def to_text(self) -> str:
        lines = []
        for r, row in zip(self.cuts, self.spacers):
            lines.append("stage {")
            lines.append(f"  r = {r}")
            lines.append(f"  s = {', '.join(str(s) for s in row)}")
            lines.append("}")
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class Stage:
    index: int
    height: int
    width: Fraction
    starts: tuple[Fraction, ...] = field(repr=False)

    @property
    def base(self) -> IntervalSet:
        return IntervalSet.interval(self.starts[0], self.starts[0] + self.width)

    def level(self, i: int) -> IntervalSet:
        return IntervalSet.interval(self.starts[i], self.starts[i] + self.width)


def _next_stage(stage: Stage, r: int, row: Sequence[int], frontier: Fraction) -> tuple[Stage, Fraction]:
    width = stage.width / r
    starts: list[Fraction] = []
    for c in range(r):
        offset = c * width
        starts.extend(s + offset for s in stage.starts)
        for _ in range(row[c]):
            starts.append(frontier)
            frontier += width
    return Stage(stage.index + 1, len(starts), width, tuple(starts)), frontier


class RankOneState:
    """Stages ``1..built`` of a construction.  Immutable; :meth:`extend` returns a new state."""

    def __init__(self, params: RankOneParams, stages: tuple[Stage, ...], frontier: Fraction):
        self.params = params
        self.stages = stages
        self.frontier = frontier
        top = stages[-1]
        order = sorted(range(top.height), key=top.starts.__getitem__)
        self._sorted_starts = [top.starts[i] for i in order]
        self._sorted_levels = order

    @property
    def built(self) -> int:
        return len(self.stages)

    @property
    def top(self) -> Stage:
        return self.stages[-1]

    def stage(self, j: int) -> Stage:
        if not 1 <= j <= self.built:
            raise InvalidParameterError(f"stage {j} not in 1..{self.built}")
        return self.stages[j - 1]

    def space(self) -> IntervalSet:
        return IntervalSet.interval(0, self.frontier)

    def extend(self, extra: int = 1) -> "RankOneState":
        """Build ``extra`` more stages from the parameters."""
        target = self.built + extra
        if target > self.params.stages:
            raise CapExceededError(f"parameters define only {self.params.stages} stages")
        return _build_from(self.params, self.stages, self.frontier, target)

    def locate(self, x) -> int | None:
        """Level index of ``x`` in the last built tower, or None outside the built space."""
        x = Fraction(x)
        k = bisect_right(self._sorted_starts, x) - 1
        if k < 0 or x >= self._sorted_starts[k] + self.top.width:
            return None
        return self._sorted_levels[k]

    def _pieces(self, S: IntervalSet):
        """Split ``S`` by the levels of the last tower: yields ``(level or None, lo, hi)``."""
        starts, w = self._sorted_starts, self.top.width
        for lo, hi in S:
            cur = lo
            while cur < hi:
                k = bisect_right(starts, cur) - 1
                if k >= 0 and cur < starts[k] + w:
                    end = min(hi, starts[k] + w)
                    yield self._sorted_levels[k], cur, end
                else:
                    end = min(hi, starts[k + 1]) if k + 1 < len(starts) else hi
                    yield None, cur, end
                cur = end

    def image_partial(self, S: IntervalSet, n: int) -> tuple[IntervalSet, IntervalSet]:
        """``(T^n of the settled part of S, unsettled part of S)``."""
        h, starts = self.top.height, self.top.starts
        image, unsettled = [], []
        for lvl, lo, hi in self._pieces(S):
            if lvl is None or not 0 <= lvl + n < h:
                unsettled.append((lo, hi))
                continue
            off = starts[lvl + n] - starts[lvl]
            image.append((lo + off, hi + off))
        return IntervalSet(image), IntervalSet(unsettled)

    def image_of_set(self, S: IntervalSet, n: int) -> IntervalSet:
        if n == 0:
            return S
        image, unsettled = self.image_partial(S, n)
        if unsettled:
            raise NotSettledError(
                f"T^{n} not settled on a part of measure {unsettled.measure} after {self.built} stages"
            )
        return image

    def is_settled(self, S: IntervalSet, n: int) -> bool:
        return not self.image_partial(S, n)[1]

    def point_image(self, x, n: int) -> Fraction:
        x = Fraction(x)
        lvl = self.locate(x)
        if lvl is None or not 0 <= lvl + n < self.top.height:
            raise NotSettledError(f"T^{n} not settled at {x} after {self.built} stages")
        return x + self.top.starts[lvl + n] - self.top.starts[lvl]

    def heights(self) -> list[int]:
        return [s.height for s in self.stages]

    def tower_set(self, j: int) -> IntervalSet:
        st = self.stage(j)
        return IntervalSet((s, s + st.width) for s in st.starts)


def _build_from(params: RankOneParams, stages: Sequence[Stage], frontier: Fraction,
                target: int) -> RankOneState:
    if target > cap("stages"):
        raise CapExceededError(f"{target} stages exceed cap {cap('stages')}")
    predicted = params.predicted_heights()
    if max(predicted[:target]) > cap("levels"):
        raise CapExceededError(
            f"tower height {max(predicted[:target])} exceeds level cap {cap('levels')}"
        )
    stages = list(stages)
    while len(stages) < target:
        j = len(stages)
        nxt, frontier = _next_stage(stages[-1], params.cuts[j - 1], params.spacers[j - 1], frontier)
        stages.append(nxt)
    return RankOneState(params, tuple(stages), frontier)


def build(params: RankOneParams, stages: int | None = None) -> RankOneState:
    """Construct stages ``1..stages`` (default: all stages the parameters define)."""
    target = params.stages if stages is None else int(stages)
    if not 1 <= target <= params.stages:
        raise InvalidParameterError(f"cannot build {target} stages from {params.stages}")
    first = Stage(1, 1, Fraction(1), (Fraction(0),))
    return _build_from(params, (first,), Fraction(1), target)


def heights(state: RankOneState) -> list[int]:
    return state.heights()


def tower_set(state: RankOneState, j: int) -> IntervalSet:
    return state.tower_set(j)


def image_of_set(state: RankOneState, S: IntervalSet, n: int) -> IntervalSet:
    return state.image_of_set(S, n)


@dataclass
class DisjointnessReport:
    j: int
    L: int
    height: int
    disjoint: bool
    overlap: tuple[int, int] | None = None
    unsettled_measure: Fraction = Fraction(0)


def verify_translate_disjointness(state: RankOneState, j: int, L: int) -> DisjointnessReport:
    """Exact verdict on pairwise disjointness of ``X_j, T^{h_j} X_j, ..., T^{L h_j} X_j``.

    A positive-measure overlap between settled parts is a certified ``False``
    even when some translate is only partly settled.  Otherwise every translate
    must be settled, else :class:`NotSettledError` is raised.
    """
    if L < 0:
        raise InvalidParameterError("L must be nonnegative")
    X = state.tower_set(j)
    h = state.stage(j).height
    if L == 0:
        return DisjointnessReport(j, L, h, True)
    images, unsettled = [X], Fraction(0)
    for k in range(1, L + 1):
        img, rest = state.image_partial(X, k * h)
        images.append(img)
        unsettled += rest.measure
    if not pairwise_disjoint(images):
        for a in range(len(images)):
            for b in range(a + 1, len(images)):
                if not images[a].isdisjoint(images[b]):
                    return DisjointnessReport(j, L, h, False, (a, b), unsettled)
    if unsettled:
        raise NotSettledError(
            f"translates of X_{j} not settled after {state.built} stages (measure {unsettled})"
        )
    return DisjointnessReport(j, L, h, True)


def _rule(rule, j: int) -> int:
    if callable(rule):
        return int(rule(j))
    if isinstance(rule, Mapping):
        return int(rule[j])
    return int(rule)


def spacer_params_for(L: Callable[[int], int] | Mapping[int, int] | int,
                      r: Callable[[int], int] | Mapping[int, int] | int,
                      J: int) -> RankOneParams:
    """Parameters with ``s_j(i) = L(j) h_j + 1`` for every column, stages ``1..J``."""
    if J < 1:
        raise InvalidParameterError("J must be at least 1")
    cuts, spacers, h = [], [], 1
    for j in range(1, J):
        rj, Lj = _rule(r, j), _rule(L, j)
        if Lj < 1:
            raise InvalidParameterError(f"L({j})={Lj} must be positive")
        row = [Lj * h + 1] * rj
        cuts.append(rj)
        spacers.append(row)
        h = rj * h + sum(row)
    return RankOneParams(cuts, spacers)
