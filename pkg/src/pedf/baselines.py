"""Label-only sequence predictors used as comparison baselines.

All predictors are deterministic. ``next`` returns a label or None when the
predictor has nothing to offer; ties are broken by the smallest label.
START is never predicted.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Iterable, Sequence

from .event_log import END, START


def _argmax(counts: dict[str, float]) -> str | None:
    best = None
    for label in sorted(counts):
        if label == START or counts[label] <= 0:
            continue
        if best is None or counts[label] > counts[best]:
            best = label
    return best


class SeqPredictor:
    tag = "base"

    def next(self, prefix: Sequence[str]) -> str | None:
        raise NotImplementedError

    @property
    def alphabet(self) -> set[str]:
        raise NotImplementedError


class MarkovPredictor(SeqPredictor):
    """First-order Markov chain: the most frequent successor of the last label."""

    tag = "markov"

    def __init__(self, sequences: Iterable[Sequence[str]]):
        self.successors: dict[str, Counter] = defaultdict(Counter)
        self._alphabet: set[str] = set()
        for seq in sequences:
            self._alphabet.update(seq)
            for a, b in zip(seq, seq[1:]):
                self.successors[a][b] += 1

    @property
    def alphabet(self) -> set[str]:
        return self._alphabet

    def next(self, prefix):
        if not prefix or prefix[-1] not in self.successors:
            return None
        return _argmax(self.successors[prefix[-1]])


class AkomPredictor(SeqPredictor):
    """All-k-order Markov: the longest context (up to ``k``) seen in training decides."""

    def __init__(self, sequences: Iterable[Sequence[str]], k: int = 3):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.k = k
        self.tables: dict[tuple[str, ...], Counter] = defaultdict(Counter)
        self._alphabet: set[str] = set()
        for seq in sequences:
            seq = list(seq)
            self._alphabet.update(seq)
            for i in range(1, len(seq)):
                for order in range(1, min(k, i) + 1):
                    self.tables[tuple(seq[i - order:i])][seq[i]] += 1

    @property
    def tag(self) -> str:
        return f"akom(k={self.k})"

    @property
    def alphabet(self) -> set[str]:
        return self._alphabet

    def next(self, prefix):
        for order in range(min(self.k, len(prefix)), 0, -1):
            counts = self.tables.get(tuple(prefix[-order:]))
            if counts:
                return _argmax(counts)
        return None


def lz78_parse(seq: Sequence[str]) -> list[tuple[str, ...]]:
    """Textbook LZ78 phrase list; a trailing phrase already in the dictionary is dropped."""
    phrases: list[tuple[str, ...]] = []
    seen: set[tuple[str, ...]] = set()
    current: tuple[str, ...] = ()
    for sym in seq:
        current = current + (sym,)
        if current not in seen:
            seen.add(current)
            phrases.append(current)
            current = ()
    return phrases


class Lz78Predictor(SeqPredictor):
    """Dictionary predictor over the LZ78 phrases of each training sequence.

    The next label is the most frequent training successor of the longest
    dictionary phrase that suffixes the prefix (successors are counted
    wherever the phrase occurs in a training sequence). Without a usable
    phrase, global label frequencies decide.
    """

    tag = "lz78"

    def __init__(self, sequences: Iterable[Sequence[str]]):
        seqs = [list(s) for s in sequences]
        self.dictionary: set[tuple[str, ...]] = set()
        self.frequency: Counter = Counter()
        for seq in seqs:
            self.frequency.update(seq)
            self.dictionary.update(lz78_parse(seq))
        longest = max((len(w) for w in self.dictionary), default=0)
        self.followers: dict[tuple[str, ...], Counter] = defaultdict(Counter)
        for seq in seqs:
            for i in range(len(seq) - 1):
                for m in range(1, min(longest, i + 1) + 1):
                    ctx = tuple(seq[i - m + 1:i + 1])
                    if ctx in self.dictionary:
                        self.followers[ctx][seq[i + 1]] += 1

    @property
    def alphabet(self) -> set[str]:
        return set(self.frequency)

    def next(self, prefix):
        for m in range(len(prefix), 0, -1):
            counts = self.followers.get(tuple(prefix[-m:]))
            if counts:
                return _argmax(counts)
        return _argmax(self.frequency)


class PpmPredictor(SeqPredictor):
    """PPM with escape method C, blending orders ``max_order`` down to 0 and a
    uniform order -1 over the training alphabet (no exclusions)."""

    def __init__(self, sequences: Iterable[Sequence[str]], max_order: int = 3):
        if max_order < 1:
            raise ValueError("max_order must be at least 1")
        self.max_order = max_order
        self.tables: dict[tuple[str, ...], Counter] = defaultdict(Counter)
        self._alphabet: set[str] = set()
        for seq in sequences:
            seq = list(seq)
            self._alphabet.update(seq)
            for i in range(len(seq)):
                for order in range(0, min(max_order, i) + 1):
                    self.tables[tuple(seq[i - order:i])][seq[i]] += 1

    @property
    def tag(self) -> str:
        return f"ppm(order={self.max_order})"

    @property
    def alphabet(self) -> set[str]:
        return self._alphabet

    def distribution(self, prefix: Sequence[str]) -> dict[str, float]:
        symbols = sorted(self._alphabet)
        if not symbols:
            return {}
        probs = {s: 1.0 / len(symbols) for s in symbols}
        top = min(self.max_order, len(prefix))
        for order in range(0, top + 1):
            ctx = tuple(prefix[len(prefix) - order:]) if order else ()
            counts = self.tables.get(ctx)
            if not counts:
                continue
            n = sum(counts.values())
            q = len(counts)
            escape = q / (n + q)
            probs = {s: counts.get(s, 0) / (n + q) + escape * probs[s] for s in symbols}
        return probs

    def next(self, prefix):
        return _argmax(self.distribution(prefix))


def markov_fit(sequences) -> MarkovPredictor:
    return MarkovPredictor(sequences)


def akom_fit(sequences, k: int = 3) -> AkomPredictor:
    return AkomPredictor(sequences, k)


def lz78_fit(sequences) -> Lz78Predictor:
    return Lz78Predictor(sequences)


def ppm_fit(sequences, max_order: int = 3) -> PpmPredictor:
    return PpmPredictor(sequences, max_order)


def complete_sequence(predictor: SeqPredictor, prefix: Sequence[str], cap: int = 10) -> list[str]:
    """Append predictions until END, no prediction, or ``cap`` non-END events."""
    if not prefix:
        raise ValueError("prefix must not be empty")
    seq = list(prefix)
    out: list[str] = []
    n_real = 0
    while n_real < cap:
        nxt = predictor.next(seq)
        if nxt is None:
            break
        out.append(nxt)
        seq.append(nxt)
        if nxt == END:
            break
        n_real += 1
    return out


BASELINES = {
    "markov": lambda seqs, **kw: MarkovPredictor(seqs),
    "dg": lambda seqs, **kw: MarkovPredictor(seqs),
    "akom": lambda seqs, k=3, **kw: AkomPredictor(seqs, k),
    "lz78": lambda seqs, **kw: Lz78Predictor(seqs),
    "ppm": lambda seqs, order=3, **kw: PpmPredictor(seqs, order),
}


def fit_baseline(name: str, sequences, **params) -> SeqPredictor:
    try:
        factory = BASELINES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown baseline {name!r}; choose from {sorted(BASELINES)}") from None
    return factory(list(sequences), **params)
