"""Naive Bayes with Gaussian numeric and Laplace-smoothed categorical features."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .base import Classifier, LabeledRow, check_rows, encode_nominal, nominal_vocab

VAR_FLOOR = 1e-9


class NaiveBayes(Classifier):
    """Each nominal slot reserves one extra bucket for unseen symbols, so the
    smoothed categorical likelihoods of a class sum to one over vocabulary + 1."""

    algorithm = "nb"

    def __init__(self, labels, alpha, class_counts, means, variances, vocab, value_counts):
        super().__init__(labels, np.asarray(means, dtype=float).shape[1], len(vocab))
        self.alpha = float(alpha)
        self.class_counts = np.asarray(class_counts, dtype=float)
        self.means = np.asarray(means, dtype=float).reshape(len(self.labels), self.n_numeric)
        self.variances = np.asarray(variances, dtype=float).reshape(len(self.labels), self.n_numeric)
        self.vocab = [list(v) for v in vocab]
        self._lookup = [{v: i for i, v in enumerate(voc)} for voc in self.vocab]
        # value_counts[j]: (n_classes, |V_j|) counts for slot j
        self.value_counts = [np.asarray(vc, dtype=float).reshape(len(self.labels), len(self.vocab[j]))
                             for j, vc in enumerate(value_counts)]

        n = self.class_counts.sum()
        n_classes = len(self.labels)
        self._log_prior = np.log((self.class_counts + self.alpha) / (n + self.alpha * n_classes))
        self._log_norm = -0.5 * np.log(2 * math.pi * self.variances)
        self._log_cat = []
        for j, vc in enumerate(self.value_counts):
            buckets = len(self.vocab[j]) + 1
            with_unseen = np.hstack([vc, np.zeros((n_classes, 1))])
            denom = self.class_counts[:, None] + self.alpha * buckets
            self._log_cat.append(np.log((with_unseen + self.alpha) / denom))

    @classmethod
    def fit(cls, rows: Sequence[LabeledRow], alpha: float = 1.0) -> NaiveBayes:
        dn, dc = check_rows(rows)
        labels = sorted({r.label for r in rows})
        index = {lab: i for i, lab in enumerate(labels)}
        y = np.array([index[r.label] for r in rows])
        X = np.array([r.input.numeric for r in rows], dtype=float).reshape(len(rows), dn)
        class_counts = np.bincount(y, minlength=len(labels)).astype(float)
        means = np.zeros((len(labels), dn))
        variances = np.zeros((len(labels), dn))
        for c in range(len(labels)):
            Xc = X[y == c]
            means[c] = Xc.mean(axis=0)
            variances[c] = np.maximum(Xc.var(axis=0), VAR_FLOOR)
        vocab = nominal_vocab(rows, dc)
        value_counts = []
        for j in range(dc):
            lookup = {v: i for i, v in enumerate(vocab[j])}
            counts = np.zeros((len(labels), len(vocab[j])))
            codes = np.array([lookup[r.input.nominal[j]] for r in rows])
            np.add.at(counts, (y, codes), 1.0)
            value_counts.append(counts)
        return cls(labels, alpha, class_counts, means, variances, vocab, value_counts)

    def joint_log_likelihood(self, x) -> np.ndarray:
        self._check(x)
        out = self._log_prior.copy()
        if self.n_numeric:
            v = np.asarray(x.numeric, dtype=float)
            out += (self._log_norm - 0.5 * (v - self.means) ** 2 / self.variances).sum(axis=1)
        codes = encode_nominal(x.nominal, self._lookup)
        for j, code in enumerate(codes):
            out += self._log_cat[j][:, code]  # -1 picks the unseen bucket
        return out

    def proba(self, x) -> np.ndarray:
        jll = self.joint_log_likelihood(x)
        p = np.exp(jll - jll.max())
        return p / p.sum()

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "labels": list(self.labels),
            "alpha": self.alpha,
            "class_counts": self.class_counts.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "vocab": self.vocab,
            "value_counts": [vc.tolist() for vc in self.value_counts],
        }

    @classmethod
    def from_dict(cls, d: dict) -> NaiveBayes:
        return cls(d["labels"], d["alpha"], d["class_counts"], d["means"], d["variances"],
                   d["vocab"], d["value_counts"])
