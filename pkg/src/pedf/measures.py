"""Event, duration and feature error between real and predicted suffixes.

Over the steps both sequences share, events count 1 per mismatch, durations
add their absolute difference and feature vectors add the sum of absolute
numeric differences plus the number of differing nominal slots. Every step
past the end of the shorter sequence adds 1 for events and the longer
sequence's own magnitude for durations and features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ArityMismatch
from .event_log import END
from .features import UNCHANGED, MixedVector


@dataclass(frozen=True)
class Stream:
    """One side of a suffix pair: labels with aligned per-step increments."""

    events: tuple[str, ...] = ()
    durations: tuple[float, ...] = ()
    features: tuple[MixedVector, ...] = ()

    def __post_init__(self):
        n = len(self.events)
        if self.durations and len(self.durations) != n:
            raise ValueError("durations not aligned with events")
        if self.features and len(self.features) != n:
            raise ValueError("features not aligned with events")

    def without_end(self) -> Stream:
        keep = [i for i, e in enumerate(self.events) if e != END]
        return Stream(
            tuple(self.events[i] for i in keep),
            tuple(self.durations[i] for i in keep) if self.durations else (),
            tuple(self.features[i] for i in keep) if self.features else (),
        )


@dataclass(frozen=True)
class SuffixPair:
    real: Stream = field(default_factory=Stream)
    predicted: Stream = field(default_factory=Stream)


def bpl(real_len: int, pred_len: int) -> int:
    """1 when the predicted sequence is longer, else 0 (equal lengths have no tail)."""
    return 1 if pred_len > real_len else 0


def _ee_one(p: SuffixPair) -> int:
    r, q = p.real.events, p.predicted.events
    short = min(len(r), len(q))
    return sum(1 for t in range(short) if r[t] != q[t]) + max(len(r), len(q)) - short


def _tail(real: Sequence, pred: Sequence, short: int):
    """The longer sequence's steps past ``short``."""
    longer = pred if bpl(len(real), len(pred)) else real
    return longer[short:]


def _de_one(p: SuffixPair) -> float:
    r, q = p.real.durations, p.predicted.durations
    short = min(len(r), len(q))
    total = sum(abs(r[t] - q[t]) for t in range(short))
    return total + sum(_tail(r, q, short))


def feature_distance(a: MixedVector, b: MixedVector) -> float:
    if len(a.numeric) != len(b.numeric) or len(a.nominal) != len(b.nominal):
        raise ArityMismatch("feature vectors differ in arity")
    return (sum(abs(x - y) for x, y in zip(a.numeric, b.numeric))
            + sum(1 for x, y in zip(a.nominal, b.nominal) if x != y))


def feature_magnitude(a: MixedVector) -> float:
    return sum(abs(x) for x in a.numeric) + sum(1 for x in a.nominal if x != UNCHANGED)


def _fe_one(p: SuffixPair) -> float:
    r, q = p.real.features, p.predicted.features
    short = min(len(r), len(q))
    total = sum(feature_distance(r[t], q[t]) for t in range(short))
    return total + sum(feature_magnitude(v) for v in _tail(r, q, short))


def event_error(pairs: Iterable[SuffixPair]) -> int:
    return sum(_ee_one(p) for p in pairs)


def duration_error(pairs: Iterable[SuffixPair]) -> float:
    return sum(_de_one(p) for p in pairs)


def feature_error(pairs: Iterable[SuffixPair]) -> float:
    return sum(_fe_one(p) for p in pairs)
