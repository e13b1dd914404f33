"""Clusterers for link data over mixed numeric/nominal vectors.

Distance between two points is the squared Euclidean distance of their
min-max scaled numeric parts plus the number of nominal slots that differ.
Scaling statistics are fitted on the points handed to each fit call, so every
link gets its own scale. Centroids are stored in original units.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ArityMismatch, BadClusterId, NoPoints
from .features import MixedVector


def _inverse_range(mins: np.ndarray, maxs: np.ndarray) -> np.ndarray:
    """1 / (max - min) per dimension; 0 for constant (or numerically constant) dimensions."""
    rng = maxs - mins
    with np.errstate(divide="ignore", over="ignore"):
        inv = 1.0 / np.where(rng > 0, rng, 1.0)
    return np.where((rng > 0) & np.isfinite(inv), inv, 0.0)


class _Encoded:
    """Points as a scaled float matrix plus integer codes per nominal slot."""

    def __init__(self, points: Sequence[MixedVector]):
        if not points:
            raise NoPoints("cannot cluster an empty point set")
        dn = len(points[0].numeric)
        dc = len(points[0].nominal)
        for p in points:
            if len(p.numeric) != dn or len(p.nominal) != dc:
                raise ArityMismatch("points have inconsistent arity")
        raw = np.array([p.numeric for p in points], dtype=float).reshape(len(points), dn)
        self.mins = raw.min(axis=0) if len(points) else np.zeros(dn)
        self.maxs = raw.max(axis=0)
        self.inv = _inverse_range(self.mins, self.maxs)
        self.X = (raw - self.mins) * self.inv
        # sorted vocabularies make code order equal lexicographic order
        self.vocab = [sorted({p.nominal[j] for p in points}) for j in range(dc)]
        lookup = [{v: i for i, v in enumerate(voc)} for voc in self.vocab]
        self.Z = np.array([[lookup[j][p.nominal[j]] for j in range(dc)] for p in points],
                          dtype=np.int64).reshape(len(points), dc)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def unscale(self, cx: np.ndarray) -> np.ndarray:
        rng = self.maxs - self.mins
        return cx * np.where(self.inv > 0, rng, 0.0) + self.mins

    def decode(self, cz: np.ndarray) -> tuple[str, ...]:
        return tuple(self.vocab[j][int(c)] for j, c in enumerate(cz))

    def distinct_indices(self) -> np.ndarray:
        """Indices of the first occurrence of each distinct point, ascending."""
        key = np.hstack([self.X, self.Z.astype(float)])
        _, first = np.unique(key, axis=0, return_index=True)
        return np.sort(first)


def _pairwise(X: np.ndarray, Z: np.ndarray, CX: np.ndarray, CZ: np.ndarray) -> np.ndarray:
    d = ((X[:, None, :] - CX[None, :, :]) ** 2).sum(axis=-1)
    if Z.shape[1]:
        d = d + (Z[:, None, :] != CZ[None, :, :]).sum(axis=-1)
    return d


def mixed_distance(a: MixedVector, b: MixedVector, mins: Sequence[float], maxs: Sequence[float]) -> float:
    """Distance between two points under the given per-dimension min/max scaling."""
    if len(a.numeric) != len(b.numeric) or len(a.nominal) != len(b.nominal):
        raise ArityMismatch("vectors differ in arity")
    total = 0.0
    inv = _inverse_range(np.asarray(mins, dtype=float), np.asarray(maxs, dtype=float))
    for x, y, w in zip(a.numeric, b.numeric, inv):
        total += ((x - y) * w) ** 2
    return total + sum(1 for x, y in zip(a.nominal, b.nominal) if x != y)


class ClusterModel:
    def __init__(self, algorithm: str, centroids: Sequence[MixedVector], mins: Sequence[float],
                 maxs: Sequence[float], params: dict | None = None,
                 cost_history: Sequence[float] = ()):
        if not centroids:
            raise NoPoints("a cluster model needs at least one centroid")
        self.algorithm = algorithm
        self.centroids = tuple(centroids)
        self.mins = np.asarray(mins, dtype=float)
        self.maxs = np.asarray(maxs, dtype=float)
        self.params = dict(params or {})
        self.cost_history = tuple(cost_history)
        self._inv = _inverse_range(self.mins, self.maxs)
        self._CX = self._scale(np.array([c.numeric for c in self.centroids], dtype=float)
                               .reshape(len(self.centroids), len(self.mins)))
        self._ctok = [c.nominal for c in self.centroids]

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def tag(self) -> str:
        return self.algorithm

    def _scale(self, raw: np.ndarray) -> np.ndarray:
        return (raw - self.mins) * self._inv

    def _check(self, point: MixedVector) -> None:
        if len(point.numeric) != len(self.mins) or len(point.nominal) != len(self._ctok[0]):
            raise ArityMismatch(
                f"point arity ({len(point.numeric)}, {len(point.nominal)}) does not match "
                f"model ({len(self.mins)}, {len(self._ctok[0])})"
            )

    def distances(self, point: MixedVector) -> np.ndarray:
        self._check(point)
        x = self._scale(np.asarray(point.numeric, dtype=float))
        d = ((self._CX - x) ** 2).sum(axis=1)
        if point.nominal:
            d = d + np.array([sum(a != b for a, b in zip(tok, point.nominal)) for tok in self._ctok])
        return d

    def assign(self, point: MixedVector) -> int:
        """Nearest centroid; ties go to the lowest index."""
        return int(np.argmin(self.distances(point)))

    def assign_many(self, points: Sequence[MixedVector]) -> list[int]:
        if not points:
            return []
        for p in points:
            self._check(p)
        X = self._scale(np.array([p.numeric for p in points], dtype=float).reshape(len(points), len(self.mins)))
        vocab = sorted({t for tok in self._ctok for t in tok} | {t for p in points for t in p.nominal})
        code = {v: i for i, v in enumerate(vocab)}
        dc = len(self._ctok[0])
        Z = np.array([[code[t] for t in p.nominal] for p in points], dtype=np.int64).reshape(len(points), dc)
        CZ = np.array([[code[t] for t in tok] for tok in self._ctok], dtype=np.int64).reshape(self.k, dc)
        return _pairwise(X, Z, self._CX, CZ).argmin(axis=1).tolist()

    def centroid(self, cluster_id: int) -> MixedVector:
        if not 0 <= cluster_id < self.k:
            raise BadClusterId(f"cluster id {cluster_id} outside 0..{self.k - 1}")
        return self.centroids[cluster_id]

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": self.params,
            "mins": self.mins.tolist(),
            "maxs": self.maxs.tolist(),
            "centroids": [c.to_list() for c in self.centroids],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ClusterModel:
        return cls(d["algorithm"], [MixedVector.from_list(c) for c in d["centroids"]],
                   d["mins"], d["maxs"], d.get("params"))


def _model_from_codes(enc: _Encoded, algorithm: str, CX: np.ndarray, CZ: np.ndarray,
                      params: dict, history=()) -> ClusterModel:
    centroids = [MixedVector(tuple(float(v) for v in enc.unscale(cx)), enc.decode(cz))
                 for cx, cz in zip(CX, CZ)]
    return ClusterModel(algorithm, centroids, enc.mins.tolist(), enc.maxs.tolist(), params, history)


def _update(enc: _Encoded, labels: np.ndarray, k: int):
    """Numeric means and nominal modes (ties: smallest code) of the non-empty clusters."""
    counts = np.bincount(labels, minlength=k)
    keep = np.flatnonzero(counts)
    CX = np.zeros((len(keep), enc.X.shape[1]))
    CZ = np.zeros((len(keep), enc.Z.shape[1]), dtype=np.int64)
    for out, c in enumerate(keep):
        members = labels == c
        CX[out] = enc.X[members].mean(axis=0)
        for j in range(enc.Z.shape[1]):
            CZ[out, j] = np.bincount(enc.Z[members, j]).argmax()
    remap = np.full(k, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    return CX, CZ, remap[labels]


def _dedupe(CX: np.ndarray, CZ: np.ndarray):
    seen = set()
    keep = []
    for i in range(len(CX)):
        key = (CX[i].tobytes(), CZ[i].tobytes())
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return CX[keep], CZ[keep]


def _lloyd(enc: _Encoded, k: int, rng: np.random.Generator, max_iter: int):
    distinct = enc.distinct_indices()
    k = min(k, len(distinct))
    init = distinct[np.sort(rng.choice(len(distinct), size=k, replace=False))]
    CX, CZ = enc.X[init].copy(), enc.Z[init].copy()
    labels = None
    history = []
    for _ in range(max_iter):
        new = _pairwise(enc.X, enc.Z, CX, CZ).argmin(axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        CX, CZ, labels = _update(enc, new, len(CX))
        d = _pairwise(enc.X, enc.Z, CX, CZ)
        history.append(float(d[np.arange(enc.n), labels].sum()))
    CX, CZ = _dedupe(CX, CZ)
    labels = _pairwise(enc.X, enc.Z, CX, CZ).argmin(axis=1)
    return CX, CZ, labels, history


def kmeans_fit(points: Sequence[MixedVector], k: int, seed: int, max_iter: int = 100) -> ClusterModel:
    """Lloyd's k-means under the mixed distance.

    Starts from ``k`` distinct points drawn with ``seed``. Clusters that empty
    out are dropped, so the fitted model may hold fewer than ``k`` centroids.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    enc = _Encoded(points)
    CX, CZ, _, history = _lloyd(enc, k, np.random.default_rng(seed), max_iter)
    return _model_from_codes(enc, "kmeans", CX, CZ, {"k": k, "max_iter": max_iter}, history)


def calinski_harabasz(enc: _Encoded, CX: np.ndarray, CZ: np.ndarray, labels: np.ndarray):
    """Between/within dispersion ratio under the mixed distance.

    Returns ``(index, within)``; the index is None when fewer than two clusters
    are present or the within-cluster dispersion is zero.
    """
    k = len(CX)
    n = enc.n
    within = float(_pairwise(enc.X, enc.Z, CX, CZ)[np.arange(n), labels].sum())
    if k < 2 or within == 0.0 or n <= k:
        return None, within
    gx = enc.X.mean(axis=0, keepdims=True)
    gz = np.array([[np.bincount(enc.Z[:, j]).argmax() for j in range(enc.Z.shape[1])]],
                  dtype=np.int64).reshape(1, enc.Z.shape[1])
    sizes = np.bincount(labels, minlength=k)
    between = float((sizes * _pairwise(CX, CZ, gx, gz)[:, 0]).sum())
    return (between / (k - 1)) / (within / (n - k)), within


def cascade_kmeans_fit(points: Sequence[MixedVector], k_min: int = 2, k_max: int = 100,
                       seed: int = 0, max_iter: int = 100) -> ClusterModel:
    """Run k-means for every k in range and keep the best Calinski-Harabasz score.

    k values where the index is undefined are skipped. When every candidate
    is undefined the smallest k that separates all points perfectly is used,
    and failing that a single cluster.
    """
    if not 1 <= k_min <= k_max:
        raise ValueError("need 1 <= k_min <= k_max")
    enc = _Encoded(points)
    n_distinct = len(enc.distinct_indices())
    best = None
    perfect = None
    scores = {}
    for k in range(k_min, min(k_max, n_distinct) + 1):
        CX, CZ, labels, _ = _lloyd(enc, k, np.random.default_rng(seed), max_iter)
        ch, within = calinski_harabasz(enc, CX, CZ, labels)
        scores[k] = ch
        if ch is None:
            if within == 0.0 and len(CX) >= 2 and perfect is None:
                perfect = (k, CX, CZ)
            continue
        if best is None or ch > best[0]:
            best = (ch, k, CX, CZ)
    params = {"k_min": k_min, "k_max": k_max, "max_iter": max_iter}
    if best is not None:
        _, k, CX, CZ = best
    elif perfect is not None:
        k, CX, CZ = perfect
    else:
        k = 1
        CX, CZ, _, _ = _lloyd(enc, 1, np.random.default_rng(seed), max_iter)
    params["chosen_k"] = k
    return _model_from_codes(enc, "cascade_kmeans", CX, CZ, params)


def canopy_fit(points: Sequence[MixedVector], t1: float = 0.5, t2: float = 0.25, seed: int = 0) -> ClusterModel:
    """Canopy pass: centers are picked in seeded random order; points closer
    than ``t2`` to a center stop being candidates. Centers become centroids."""
    if not t1 >= t2 >= 0:
        raise ValueError("need t1 >= t2 >= 0")
    enc = _Encoded(points)
    order = np.random.default_rng(seed).permutation(enc.n)
    candidate = np.ones(enc.n, dtype=bool)
    centers = []
    for i in order:
        if not candidate[i]:
            continue
        centers.append(i)
        d = _pairwise(enc.X, enc.Z, enc.X[i:i + 1], enc.Z[i:i + 1])[:, 0]
        candidate[(d < t2) | (d == 0)] = False
    idx = np.array(centers)
    return _model_from_codes(enc, "canopy", enc.X[idx], enc.Z[idx], {"t1": t1, "t2": t2})


@dataclass(frozen=True)
class ClustererSpec:
    """Which clusterer to run on each link, with its hyperparameters."""

    name: str = "kmeans"
    k: int = 50
    k_min: int = 2
    k_max: int = 100
    t1: float = 0.5
    t2: float = 0.25
    max_iter: int = 100

    def __post_init__(self):
        if self.name not in ("kmeans", "cascade_kmeans", "canopy"):
            raise ValueError(f"unknown clusterer {self.name!r}")

    @property
    def tag(self) -> str:
        if self.name == "kmeans":
            return f"kmeans(k={self.k})"
        if self.name == "cascade_kmeans":
            return f"cascade_kmeans(k_max={self.k_max})"
        return f"canopy(t1={self.t1},t2={self.t2})"

    def fit(self, points: Sequence[MixedVector], seed: int) -> ClusterModel:
        if self.name == "kmeans":
            return kmeans_fit(points, self.k, seed, self.max_iter)
        if self.name == "cascade_kmeans":
            return cascade_kmeans_fit(points, self.k_min, self.k_max, seed, self.max_iter)
        return canopy_fit(points, self.t1, self.t2, seed)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict | None) -> ClustererSpec:
        d = dict(d or {})
        if d.get("name") in ("cascade", "ckm", "cascadekmeans"):
            d["name"] = "cascade_kmeans"
        if d.get("name") in ("km", "k-means"):
            d["name"] = "kmeans"
        return cls(**d)
