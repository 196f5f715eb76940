"""Finite unions of half-open intervals with rational endpoints.

An :class:`IntervalSet` is kept in canonical form: intervals sorted, pairwise
disjoint, and with touching neighbours merged.  Two sets describing the same
subset of the line therefore compare equal.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import InvalidParameterError

Interval = tuple[Fraction, Fraction]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def _normalize(pieces: Iterable[Sequence]) -> tuple[Interval, ...]:
    items = []
    for lo, hi in pieces:
        lo, hi = _as_fraction(lo), _as_fraction(hi)
        if hi < lo:
            raise InvalidParameterError(f"interval [{lo}, {hi}) has negative length")
        if hi > lo:
            items.append((lo, hi))
    items.sort()
    merged: list[list[Fraction]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


class IntervalSet:
    """A finite disjoint union of intervals ``[lo, hi)``."""

    __slots__ = ("_intervals", "_measure")

    def __init__(self, pieces: Iterable[Sequence] = ()):
        self._intervals = _normalize(pieces)
        self._measure = sum((hi - lo for lo, hi in self._intervals), Fraction(0))

    @classmethod
    def _from_canonical(cls, intervals: tuple[Interval, ...]) -> "IntervalSet":
        obj = cls.__new__(cls)
        obj._intervals = intervals
        obj._measure = sum((hi - lo for lo, hi in intervals), Fraction(0))
        return obj

    @classmethod
    def interval(cls, lo, hi) -> "IntervalSet":
        return cls([(lo, hi)])

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return self._intervals

    @property
    def measure(self) -> Fraction:
        return self._measure

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._intervals)

    def __len__(self) -> int:
        return len(self._intervals)

    def __bool__(self) -> bool:
        return bool(self._intervals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self._intervals == other._intervals

    def __hash__(self) -> int:
        return hash(self._intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{lo}, {hi})" for lo, hi in self._intervals)
        return f"IntervalSet({body})"

    @property
    def lower(self) -> Fraction:
        return self._intervals[0][0]

    @property
    def upper(self) -> Fraction:
        return self._intervals[-1][1]

    def contains(self, x) -> bool:
        x = _as_fraction(x)
        k = bisect_right(self._intervals, (x, float("inf"))) - 1
        return k >= 0 and self._intervals[k][0] <= x < self._intervals[k][1]

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self._intervals + other._intervals)

    __or__ = union

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        a, b = self._intervals, other._intervals
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet._from_canonical(tuple(out))

    __and__ = intersection

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        b = other._intervals
        j = 0
        for lo, hi in self._intervals:
            cur = lo
            while j < len(b) and b[j][1] <= cur:
                j += 1
            k = j
            while k < len(b) and b[k][0] < hi:
                if b[k][0] > cur:
                    out.append((cur, b[k][0]))
                cur = max(cur, b[k][1])
                if cur >= hi:
                    break
                k += 1
            if cur < hi:
                out.append((cur, hi))
        return IntervalSet._from_canonical(tuple(out))

    __sub__ = difference

    def isdisjoint(self, other: "IntervalSet") -> bool:
        return self.intersection(other).measure == 0

    def issubset(self, other: "IntervalSet") -> bool:
        return self.difference(other).measure == 0

    def translate(self, offset) -> "IntervalSet":
        offset = _as_fraction(offset)
        return IntervalSet._from_canonical(
            tuple((lo + offset, hi + offset) for lo, hi in self._intervals)
        )

    def to_csv(self) -> str:
        """Endpoint pairs as numerator/denominator columns."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lo_num", "lo_den", "hi_num", "hi_den"])
        for lo, hi in self._intervals:
            writer.writerow([lo.numerator, lo.denominator, hi.numerator, hi.denominator])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "IntervalSet":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(
            (Fraction(int(r["lo_num"]), int(r["lo_den"])),
             Fraction(int(r["hi_num"]), int(r["hi_den"])))
            for r in rows
        )


def union_all(sets: Iterable[IntervalSet]) -> IntervalSet:
    pieces: list[Interval] = []
    for s in sets:
        pieces.extend(s.intervals)
    return IntervalSet(pieces)


def pairwise_disjoint(sets: Sequence[IntervalSet]) -> bool:
    """True when the union's measure equals the sum of measures."""
    total = sum((s.measure for s in sets), Fraction(0))
    return union_all(sets).measure == total
