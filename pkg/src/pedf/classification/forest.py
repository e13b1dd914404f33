"""Random forest of Gini CART trees over mixed numeric/nominal inputs.

Numeric splits send ``x <= threshold`` left, thresholds sitting halfway
between consecutive distinct values. Nominal splits are one-vs-rest: the
chosen symbol goes left, everything else (including symbols never seen in
training) goes right.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .base import Classifier, LabeledRow, check_rows, encode_nominal, nominal_vocab

LEAF = -1


class _TreeBuilder:
    def __init__(self, Xn: np.ndarray, Xc: np.ndarray, y: np.ndarray, n_classes: int,
                 mtry: int, max_depth: int | None, rng: np.random.Generator):
        self.Xn, self.Xc, self.y = Xn, Xc, y
        self.dn = Xn.shape[1]
        self.d = Xn.shape[1] + Xc.shape[1]
        self.C = n_classes
        self.mtry = mtry
        self.max_depth = max_depth
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[int] = []

    def _new_node(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(0)
        return len(self.feature) - 1

    @staticmethod
    def _score(left: np.ndarray, nl: np.ndarray, total: np.ndarray, n: int) -> np.ndarray:
        # maximising sum(l^2)/nl + sum(r^2)/nr minimises the weighted Gini impurity
        right = total - left
        nr = n - nl
        return (left ** 2).sum(axis=-1) / nl + (right ** 2).sum(axis=-1) / nr

    def _numeric_split(self, idx: np.ndarray, f: int, total: np.ndarray):
        v = self.Xn[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        valid = np.flatnonzero(vs[:-1] < vs[1:])
        if valid.size == 0:
            return None
        onehot = np.zeros((len(idx), self.C))
        onehot[np.arange(len(idx)), self.y[idx][order]] = 1.0
        cum = np.cumsum(onehot, axis=0)[valid]
        scores = self._score(cum, (valid + 1).astype(float), total, len(idx))
        best = int(np.argmax(scores))
        i = valid[best]
        thr = (vs[i] + vs[i + 1]) / 2.0
        if not vs[i] <= thr < vs[i + 1]:
            thr = vs[i]
        return scores[best], float(thr)

    def _nominal_split(self, idx: np.ndarray, j: int, total: np.ndarray):
        codes = self.Xc[idx, j]
        cats, inv = np.unique(codes, return_inverse=True)
        if len(cats) < 2:
            return None
        counts = np.zeros((len(cats), self.C))
        np.add.at(counts, (inv, self.y[idx]), 1.0)
        scores = self._score(counts, counts.sum(axis=1), total, len(idx))
        best = int(np.argmax(scores))
        return scores[best], float(cats[best])

    def _best_split(self, idx: np.ndarray, total: np.ndarray):
        order = self.rng.permutation(self.d)
        best = None
        for tried, f in enumerate(order):
            if tried >= self.mtry and best is not None:
                break
            if f < self.dn:
                found = self._numeric_split(idx, int(f), total)
            else:
                found = self._nominal_split(idx, int(f) - self.dn, total)
            if found is not None and (best is None or found[0] > best[0]):
                best = (found[0], int(f), found[1])
        return best

    def build(self, idx: np.ndarray) -> dict:
        root = self._new_node()
        stack = [(root, idx, 0)]
        while stack:
            node, idx, depth = stack.pop()
            total = np.bincount(self.y[idx], minlength=self.C).astype(float)
            self.value[node] = int(np.argmax(total))
            if np.count_nonzero(total) <= 1 or (self.max_depth is not None and depth >= self.max_depth):
                continue
            split = self._best_split(idx, total)
            if split is None:
                continue
            _, f, thr = split
            if f < self.dn:
                go_left = self.Xn[idx, f] <= thr
            else:
                go_left = self.Xc[idx, f - self.dn] == int(thr)
            self.feature[node] = f
            self.threshold[node] = thr
            lnode, rnode = self._new_node(), self._new_node()
            self.left[node], self.right[node] = lnode, rnode
            # push right first so the left subtree gets the lower node ids
            stack.append((rnode, idx[~go_left], depth + 1))
            stack.append((lnode, idx[go_left], depth + 1))
        return {"feature": self.feature, "threshold": self.threshold,
                "left": self.left, "right": self.right, "value": self.value}


class RandomForest(Classifier):
    algorithm = "rf"

    def __init__(self, labels, n_numeric, vocab, trees, params):
        super().__init__(labels, n_numeric, len(vocab))
        self.vocab = [list(v) for v in vocab]
        self._lookup = [{v: i for i, v in enumerate(voc)} for voc in self.vocab]
        self.trees = trees
        self.params = dict(params)
        # flatten all trees into one node table for vectorised traversal
        offsets = np.cumsum([0] + [len(t["feature"]) for t in trees])[:-1]
        self._roots = offsets.astype(np.int64)
        self._feature = np.concatenate([np.asarray(t["feature"], dtype=np.int64) for t in trees])
        self._threshold = np.concatenate([np.asarray(t["threshold"], dtype=float) for t in trees])
        self._left = np.concatenate([np.asarray(t["left"], dtype=np.int64) + o for t, o in zip(trees, offsets)])
        self._right = np.concatenate([np.asarray(t["right"], dtype=np.int64) + o for t, o in zip(trees, offsets)])
        self._value = np.concatenate([np.asarray(t["value"], dtype=np.int64) for t in trees])
        self._is_numeric = self._feature < n_numeric

    @classmethod
    def fit(cls, rows: Sequence[LabeledRow], n_trees: int = 100, seed: int = 0,
            max_depth: int | None = None, features_per_split: int | None = None) -> RandomForest:
        dn, dc = check_rows(rows)
        labels = sorted({r.label for r in rows})
        index = {lab: i for i, lab in enumerate(labels)}
        y = np.array([index[r.label] for r in rows], dtype=np.int64)
        Xn = np.array([r.input.numeric for r in rows], dtype=float).reshape(len(rows), dn)
        vocab = nominal_vocab(rows, dc)
        lookups = [{v: i for i, v in enumerate(voc)} for voc in vocab]
        Xc = np.array([encode_nominal(r.input.nominal, lookups) for r in rows], dtype=np.int64).reshape(len(rows), dc)
        d = dn + dc
        mtry = features_per_split or max(1, int(math.floor(math.sqrt(d))))
        n = len(rows)
        trees = []
        for t in range(n_trees):
            rng = np.random.default_rng([seed, t])
            sample = rng.integers(0, n, size=n)
            builder = _TreeBuilder(Xn, Xc, y, len(labels), mtry, max_depth, rng)
            trees.append(builder.build(np.sort(sample)))
        params = {"n_trees": n_trees, "seed": seed, "max_depth": max_depth, "features_per_split": mtry}
        return cls(labels, dn, vocab, trees, params)

    def _leaves(self, x) -> np.ndarray:
        xv = np.concatenate([np.asarray(x.numeric, dtype=float),
                             encode_nominal(x.nominal, self._lookup).astype(float)])
        nodes = self._roots.copy()
        while True:
            f = self._feature[nodes]
            inner = f != LEAF
            if not inner.any():
                return nodes
            n_in = nodes[inner]
            val = xv[f[inner]]
            thr = self._threshold[n_in]
            go_left = np.where(self._is_numeric[n_in], val <= thr, val == thr)
            nodes[inner] = np.where(go_left, self._left[n_in], self._right[n_in])

    def proba(self, x) -> np.ndarray:
        self._check(x)
        votes = np.bincount(self._value[self._leaves(x)], minlength=len(self.labels)).astype(float)
        return votes / votes.sum()

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "labels": list(self.labels),
            "n_numeric": self.n_numeric,
            "vocab": self.vocab,
            "params": self.params,
            "trees": self.trees,
        }

    @classmethod
    def from_dict(cls, d: dict) -> RandomForest:
        return cls(d["labels"], d["n_numeric"], d["vocab"], d["trees"], d["params"])
