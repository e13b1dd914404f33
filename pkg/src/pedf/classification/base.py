from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ArityMismatch, NoRows
from ..features import MixedVector


@dataclass(frozen=True)
class LabeledRow:
    input: MixedVector
    label: str


class Classifier:
    """Common surface of the node classifiers.

    ``labels`` is sorted, so the first maximum of a probability vector is the
    lexicographically smallest most-probable label.
    """

    algorithm = "base"

    def __init__(self, labels: Sequence[str], n_numeric: int, n_nominal: int):
        self.labels = tuple(labels)
        self.n_numeric = n_numeric
        self.n_nominal = n_nominal

    def _check(self, x: MixedVector) -> None:
        if len(x.numeric) != self.n_numeric or len(x.nominal) != self.n_nominal:
            raise ArityMismatch(
                f"input arity ({len(x.numeric)}, {len(x.nominal)}) does not match "
                f"training arity ({self.n_numeric}, {self.n_nominal})"
            )

    def proba(self, x: MixedVector) -> np.ndarray:
        raise NotImplementedError

    def predict_dist(self, x: MixedVector) -> dict[str, float]:
        return dict(zip(self.labels, self.proba(x).tolist()))

    def predict(self, x: MixedVector) -> str:
        return self.labels[int(np.argmax(self.proba(x)))]

    def to_dict(self) -> dict:
        raise NotImplementedError


def check_rows(rows: Sequence[LabeledRow]) -> tuple[int, int]:
    if not rows:
        raise NoRows("cannot fit a classifier without rows")
    dn, dc = len(rows[0].input.numeric), len(rows[0].input.nominal)
    for r in rows:
        if len(r.input.numeric) != dn or len(r.input.nominal) != dc:
            raise ArityMismatch("training rows have inconsistent arity")
    return dn, dc


def nominal_vocab(rows: Sequence[LabeledRow], dc: int) -> list[list[str]]:
    return [sorted({r.input.nominal[j] for r in rows}) for j in range(dc)]


def encode_nominal(tokens: Sequence[str], lookups: list[dict[str, int]]) -> np.ndarray:
    """Vocabulary codes per slot; -1 for symbols never seen in training."""
    return np.array([lookups[j].get(t, -1) for j, t in enumerate(tokens)], dtype=np.int64)
