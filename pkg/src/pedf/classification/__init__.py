"""Per-node classifiers mapping (incoming link, cluster, cumulative state) to
the next ``(destination, cluster)`` label."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from ..features import MixedVector
from .base import Classifier, LabeledRow
from .forest import RandomForest
from .naive_bayes import NaiveBayes

__all__ = [
    "Classifier",
    "ClassifierSpec",
    "LabeledRow",
    "NaiveBayes",
    "RandomForest",
    "classifier_from_dict",
    "nb_fit",
    "predict",
    "predict_dist",
    "rf_fit",
]


def nb_fit(rows: Sequence[LabeledRow], laplace_alpha: float = 1.0) -> NaiveBayes:
    return NaiveBayes.fit(rows, alpha=laplace_alpha)


def rf_fit(rows: Sequence[LabeledRow], n_trees: int = 100, seed: int = 0,
           max_depth: int | None = None, features_per_split: int | None = None) -> RandomForest:
    return RandomForest.fit(rows, n_trees=n_trees, seed=seed, max_depth=max_depth,
                            features_per_split=features_per_split)


def predict_dist(classifier: Classifier, x: MixedVector) -> dict[str, float]:
    return classifier.predict_dist(x)


def predict(classifier: Classifier, x: MixedVector) -> str:
    """Most probable label; ties go to the lexicographically smallest."""
    return classifier.predict(x)


def classifier_from_dict(d: dict) -> Classifier:
    kind = d["algorithm"]
    if kind == NaiveBayes.algorithm:
        return NaiveBayes.from_dict(d)
    if kind == RandomForest.algorithm:
        return RandomForest.from_dict(d)
    raise ValueError(f"unknown classifier {kind!r}")


@dataclass(frozen=True)
class ClassifierSpec:
    name: str = "rf"
    alpha: float = 1.0
    n_trees: int = 100
    max_depth: int | None = None
    features_per_split: int | None = None

    def __post_init__(self):
        if self.name not in ("nb", "rf"):
            raise ValueError(f"unknown classifier {self.name!r}")

    @property
    def tag(self) -> str:
        return self.name

    def fit(self, rows: Sequence[LabeledRow], seed: int) -> Classifier:
        if self.name == "nb":
            return nb_fit(rows, self.alpha)
        return rf_fit(rows, self.n_trees, seed, self.max_depth, self.features_per_split)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict | None) -> ClassifierSpec:
        d = dict(d or {})
        aliases = {"naive_bayes": "nb", "random_forest": "rf", "naivebayes": "nb", "randomforest": "rf"}
        if "name" in d:
            d["name"] = aliases.get(str(d["name"]).lower(), str(d["name"]).lower())
        return cls(**d)
