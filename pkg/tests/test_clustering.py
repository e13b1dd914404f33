import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pedf.clustering import (
    ClusterModel,
    ClustererSpec,
    _Encoded,
    canopy_fit,
    cascade_kmeans_fit,
    kmeans_fit,
    mixed_distance,
)
from pedf.errors import BadClusterId, NoPoints
from pedf.features import MixedVector


def pts(rows, noms=None):
    noms = noms or [()] * len(rows)
    return [MixedVector(tuple(float(v) for v in r), tuple(n)) for r, n in zip(rows, noms)]


def blobs(rng, centres, n=30, sd=0.1):
    return np.vstack([rng.normal(c, sd, size=(n, len(c))) for c in centres])


def test_k1_mean_and_mode():
    m = kmeans_fit(pts([[1], [2], [6]], [["b"], ["a"], ["b"]]), 1, seed=0)
    assert m.k == 1
    assert m.centroid(0).numeric == pytest.approx((3.0,))
    assert m.centroid(0).nominal == ("b",)


def test_k1_two_points():
    assert kmeans_fit(pts([[2], [4]]), 1, 0).centroid(0).numeric == pytest.approx((3.0,))


def test_nominal_mode_tie_goes_to_smallest():
    m = kmeans_fit(pts([[0], [0]], [["y"], ["x"]]), 1, 0)
    assert m.centroid(0).nominal == ("x",)


def test_two_blobs_recover_means():
    rng = np.random.default_rng(1)
    X = blobs(rng, [[0.0], [100.0]])
    m = kmeans_fit(pts(X), 2, seed=3)
    got = sorted(c.numeric[0] for c in m.centroids)
    assert got[0] == pytest.approx(X[:30].mean(), abs=0.5)
    assert got[1] == pytest.approx(X[30:].mean(), abs=0.5)


def test_k_reduced_to_distinct_points():
    m = kmeans_fit(pts([[1], [1], [5], [5], [9]]), 10, 0)
    assert m.k == 3


def test_lloyd_cost_monotone_over_random_datasets():
    rng = np.random.default_rng(0)
    for i in range(100):
        n = int(rng.integers(5, 60))
        X = rng.uniform(0, 100, size=(n, 2))
        noms = [[str(v)] for v in rng.choice(list("abc"), n)]
        m = kmeans_fit(pts(X, noms), int(rng.integers(1, 8)), seed=i)
        h = np.array(m.cost_history)
        assert np.all(np.diff(h) <= 1e-9), (i, h)


def test_cascade_picks_three_blobs_and_matches_ch_sweep():
    rng = np.random.default_rng(7)
    X = blobs(rng, [[0, 0], [10, 0], [0, 10]], n=40, sd=0.5)
    m = cascade_kmeans_fit(pts(X), 2, 10, seed=0)
    assert m.params["chosen_k"] == 3
    # the sweep oracle: plain CH on the scaled data for each k's partition
    enc = _Encoded(pts(X))
    scores = {}
    for k in range(2, 11):
        labels = kmeans_fit(pts(X), k, 0).assign_many(pts(X))
        scores[k] = oracles.calinski_harabasz(enc.X, labels)
    assert max(scores, key=lambda k: scores[k] or -1) == 3


def test_cascade_identical_points_fall_back_to_one():
    m = cascade_kmeans_fit(pts([[4, 4]] * 6), 2, 10)
    assert m.k == 1 and m.params["chosen_k"] == 1


def test_cascade_two_distinct_points():
    m = cascade_kmeans_fit(pts([[0], [1]]), 2, 10)
    assert m.k == 2
    assert sorted(c.numeric[0] for c in m.centroids) == [0.0, 1.0]


def test_canopy_single_point():
    assert canopy_fit(pts([[3]])).k == 1


def test_canopy_close_points_share_canopy():
    P = pts([[0.0], [0.4], [10.0]])
    assert mixed_distance(P[0], P[1], [0.0], [10.0]) < 0.25
    m = canopy_fit(P, 0.5, 0.25)
    assert m.k == 2


def test_canopy_far_fewer_than_kmeans_on_spread_data():
    rng = np.random.default_rng(2)
    P = pts(rng.uniform(0, 1, size=(300, 2)))
    assert canopy_fit(P).k < kmeans_fit(P, 50, 0).k


def test_assign_exact_centroid_and_tie():
    m = ClusterModel("manual", pts([[0], [10], [20], [30], [5]]), [0.0], [30.0])
    assert m.assign(MixedVector((30.0,), ())) == 3
    tie = ClusterModel("manual", pts([[0], [10], [20], [30], [0], [10]]), [0.0], [30.0])
    assert tie.assign(MixedVector((5.0,), ())) == 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100), st.sampled_from("ab")), min_size=2, max_size=30),
       st.integers(1, 5))
def test_assign_matches_linear_scan(rows, k):
    P = pts([r[:2] for r in rows], [[r[2]] for r in rows])
    m = kmeans_fit(P, k, 0)
    for p in P:
        d = [mixed_distance(p, c, m.mins, m.maxs) for c in m.centroids]
        best = min(range(len(d)), key=lambda i: (d[i], i))
        assert d[m.assign(p)] == pytest.approx(d[best], abs=1e-12)


def test_bad_cluster_id():
    m = kmeans_fit(pts([[1]]), 1, 0)
    with pytest.raises(BadClusterId):
        m.centroid(1)


def test_no_points():
    with pytest.raises(NoPoints):
        kmeans_fit([], 2, 0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=20))
def test_scale_unscale_round_trip(values):
    enc = _Encoded(pts([[v] for v in values]))
    back = enc.unscale(enc.X)[:, 0]
    lo, hi = min(values), max(values)
    if enc.inv[0] > 0:
        assert np.allclose(back, values, atol=1e-9 * max(1.0, abs(hi), abs(lo)))
    else:
        assert np.all(back == lo)


def test_serialization_round_trip():
    rng = np.random.default_rng(4)
    P = pts(rng.uniform(0, 5, (20, 2)), [[s] for s in rng.choice(list("xy"), 20)])
    m = kmeans_fit(P, 4, 1)
    back = ClusterModel.from_dict(m.to_dict())
    assert back.assign_many(P) == m.assign_many(P)
    assert back.to_dict() == m.to_dict()


def test_spec_dispatch():
    P = pts([[0], [1], [2], [10]])
    assert ClustererSpec("kmeans", k=2).fit(P, 0).algorithm == "kmeans"
    assert ClustererSpec.from_dict({"name": "cascade", "k_max": 3}).fit(P, 0).algorithm == "cascade_kmeans"
    assert ClustererSpec("canopy").fit(P, 0).algorithm == "canopy"
    with pytest.raises(ValueError):
        ClustererSpec("em")
