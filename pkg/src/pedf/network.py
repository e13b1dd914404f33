"""The PEDF network: a clusterer on every observed link and a classifier on
every node.

Training runs in two phases. Each link's transition records are clustered
first; then each node's classifier learns to pick the next
``(destination, cluster)`` from the incoming link, its cluster and the
cumulative state of the case. Prediction repeatedly picks the most probable
outgoing ``(destination, cluster)`` and adds that cluster's centroid to the
cumulative state until END is reached or the cap is hit.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .classification import Classifier, ClassifierSpec, LabeledRow, classifier_from_dict
from .clustering import ClusterModel, ClustererSpec
from .errors import (
    CorruptModel,
    DeadEnd,
    EmptyTraining,
    FitError,
    NotTrained,
    UnknownEvent,
    VersionMismatch,
)
from .event_log import END, START, Case, EventLog, FeatureSchema
from .features import (
    CumulativeState,
    MixedVector,
    TransitionRecord,
    cumulative_states,
    encode_classifier_input,
    extract_transitions,
)

log = logging.getLogger(__name__)

FORMAT_NAME = "pedf-model"
FORMAT_VERSION = 1

LinkKey = tuple[str, str]


def sub_seed(seed: int, *identity: str) -> int:
    """Seed for one link or node, derived from its identity rather than from
    the order in which things get trained."""
    digest = hashlib.sha256(json.dumps([seed, *identity]).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def format_label(dest: str, cluster_id: int) -> str:
    return json.dumps([dest, int(cluster_id)])


def parse_label(label: str) -> tuple[str, int]:
    dest, cid = json.loads(label)
    return dest, int(cid)


@dataclass(frozen=True)
class NodeRow:
    """One visit of a case to a node that was followed by another event.

    ``incoming``/``outgoing`` point into the record lists of the adjacent
    links as ``(other label, record index)``.
    """

    incoming: tuple[str, int] | None
    state: CumulativeState
    outgoing: tuple[str, int]

    def to_list(self) -> list:
        inc_src, inc_idx = self.incoming if self.incoming else (None, None)
        return [inc_src, inc_idx, self.state.to_list(), self.outgoing[0], self.outgoing[1]]

    @classmethod
    def from_list(cls, node: str, data) -> NodeRow:
        inc = None if data[0] is None else (data[0], int(data[1]))
        return cls(inc, CumulativeState.from_list(node, data[2]), (data[3], int(data[4])))


@dataclass
class NetworkSkeleton:
    schema: FeatureSchema
    nodes: list[str] = field(default_factory=list)
    links: dict[LinkKey, list[TransitionRecord]] = field(default_factory=dict)
    rows: dict[str, list[NodeRow]] = field(default_factory=dict)

    def add_case(self, case: Case) -> tuple[set[LinkKey], set[str]]:
        """Append one augmented (possibly partial) case; returns touched links and nodes."""
        labels = case.labels
        if not labels or labels[0] != START:
            raise ValueError(f"case {case.case_id!r} does not start with {START}")
        if END in labels[:-1] or START in labels[1:]:
            raise ValueError(f"case {case.case_id!r} has misplaced dummy events")
        transitions = extract_transitions(case, self.schema)
        states = cumulative_states(case, self.schema, transitions)
        for lab in labels:
            if lab not in self.rows and lab not in self.nodes:
                self.nodes.append(lab)
                self.rows[lab] = []
        touched_links: set[LinkKey] = set()
        indices = []
        for tr in transitions:
            key = (tr.source_label, tr.dest_label)
            recs = self.links.setdefault(key, [])
            recs.append(tr)
            indices.append(len(recs) - 1)
            touched_links.add(key)
        for t in range(len(transitions)):
            incoming = (labels[t - 1], indices[t - 1]) if t > 0 else None
            self.rows[labels[t]].append(NodeRow(incoming, states[t], (labels[t + 1], indices[t])))
        return touched_links, set(labels)

    def copy(self) -> NetworkSkeleton:
        return NetworkSkeleton(
            self.schema,
            list(self.nodes),
            {k: list(v) for k, v in self.links.items()},
            {k: list(v) for k, v in self.rows.items()},
        )


def build_skeleton(train: EventLog) -> NetworkSkeleton:
    if not train.cases:
        raise EmptyTraining("training log has no cases")
    if not train.augmented:
        raise ValueError("training log must be augmented with START/END")
    skel = NetworkSkeleton(train.schema)
    for case in train.cases:
        skel.add_case(case)
    return skel


@dataclass
class PredictedSuffix:
    events: list[str]
    durations: list[float]
    features: list[MixedVector]  # per-step numeric deltas + nominal post-values
    states: list[CumulativeState]
    terminated_by: str  # "END" or "cap"

    @property
    def real_events(self) -> list[str]:
        return [e for e in self.events if e != END]

    def to_dict(self, schema: FeatureSchema | None = None) -> dict:
        steps = []
        for ev, dur, feat, st in zip(self.events, self.durations, self.features, self.states):
            step = {"event": ev, "duration": dur, "cumulative_duration": st.cumulative_duration}
            if schema is not None:
                step["features"] = dict(zip(schema.numeric_features, feat.numeric))
                step["features"].update(zip(schema.nominal_names, feat.nominal))
                step["cumulative"] = dict(zip(schema.numeric_features, st.cumulative_numeric))
                step["cumulative"].update(zip(schema.nominal_names, st.latest_nominal))
            steps.append(step)
        return {"events": list(self.events), "terminated_by": self.terminated_by, "steps": steps}


def _pmap(fn: Callable, items: Sequence, threads: int | None) -> list:
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class PedfModel:
    def __init__(self, skeleton: NetworkSkeleton, cluster_models: dict[LinkKey, ClusterModel],
                 classifiers: dict[str, Classifier], clusterer: ClustererSpec,
                 classifier: ClassifierSpec, seed: int):
        self.skeleton = skeleton
        self.schema = skeleton.schema
        self.cluster_models = cluster_models
        self.classifiers = classifiers
        self.clusterer = clusterer
        self.classifier = classifier
        self.seed = seed
        self._labels = {node: {lab: parse_label(lab) for lab in clf.labels}
                        for node, clf in classifiers.items()}

    @property
    def nodes(self) -> list[str]:
        return self.skeleton.nodes

    @property
    def links(self) -> list[LinkKey]:
        return list(self.skeleton.links)

    def summary(self) -> dict:
        return {
            "nodes": len(self.nodes),
            "links": len(self.cluster_models),
            "clusters_per_link": {f"{s}->{d}": m.k for (s, d), m in sorted(self.cluster_models.items())},
        }

    def decode_label(self, node: str, label: str) -> tuple[str, int]:
        return self._labels[node][label]


def _fit_link(skel: NetworkSkeleton, spec: ClustererSpec, seed: int, key: LinkKey) -> ClusterModel:
    try:
        return spec.fit([r.as_vector() for r in skel.links[key]], sub_seed(seed, "link", *key))
    except Exception as exc:
        raise FitError(f"link {key[0]}->{key[1]}: {exc}") from exc


def _node_rows(skel: NetworkSkeleton, node: str, assignments: dict[LinkKey, list[int]]) -> list[LabeledRow]:
    rows = []
    for row in skel.rows[node]:
        if row.incoming is None:
            link, cluster = None, None
        else:
            link = (row.incoming[0], node)
            cluster = assignments[link][row.incoming[1]]
        dest, out_idx = row.outgoing
        label = format_label(dest, assignments[(node, dest)][out_idx])
        rows.append(LabeledRow(encode_classifier_input(row.state, link, cluster), label))
    return rows


def _fit_node(skel: NetworkSkeleton, spec: ClassifierSpec, seed: int,
              assignments: dict[LinkKey, list[int]], node: str) -> Classifier:
    try:
        return spec.fit(_node_rows(skel, node, assignments), sub_seed(seed, "node", node))
    except Exception as exc:
        raise FitError(f"node {node}: {exc}") from exc


def _assign(model: ClusterModel, recs: list[TransitionRecord]) -> list[int]:
    return model.assign_many([r.as_vector() for r in recs])


def _refit(skel: NetworkSkeleton, clusterer: ClustererSpec, classifier: ClassifierSpec, seed: int,
           links: Iterable[LinkKey], nodes: Iterable[str], cluster_models: dict, classifiers: dict,
           threads: int | None) -> None:
    links = list(links)
    fitted = _pmap(lambda key: _fit_link(skel, clusterer, seed, key), links, threads)
    cluster_models.update(zip(links, fitted))
    assignments = {key: _assign(cluster_models[key], recs) for key, recs in skel.links.items()}
    nodes = [n for n in nodes if skel.rows.get(n)]
    fitted = _pmap(lambda node: _fit_node(skel, classifier, seed, assignments, node), nodes, threads)
    classifiers.update(zip(nodes, fitted))


def train(skeleton: NetworkSkeleton, clusterer: ClustererSpec | None = None,
          classifier: ClassifierSpec | None = None, seed: int = 0,
          threads: int | None = None) -> PedfModel:
    """Cluster every link, then fit every node's classifier.

    Per-link and per-node seeds derive from ``seed`` and the link/node
    identity, so results do not depend on ``threads`` or on training order.
    """
    clusterer = clusterer or ClustererSpec()
    classifier = classifier or ClassifierSpec()
    if not skeleton.links:
        raise EmptyTraining("skeleton has no links")
    cluster_models: dict[LinkKey, ClusterModel] = {}
    classifiers: dict[str, Classifier] = {}
    _refit(skeleton, clusterer, classifier, seed, skeleton.links, skeleton.nodes,
           cluster_models, classifiers, threads)
    return PedfModel(skeleton, cluster_models, classifiers, clusterer, classifier, seed)


def fit_log(train_log: EventLog, clusterer: ClustererSpec | None = None,
            classifier: ClassifierSpec | None = None, seed: int = 0,
            threads: int | None = None) -> PedfModel:
    return train(build_skeleton(train_log), clusterer, classifier, seed, threads)


def update_with_case(model: PedfModel, case: Case, threads: int | None = 1) -> PedfModel:
    """New model with ``case`` added; only the links and nodes it touches are refit.

    ``case`` must start with START; it may stop before END. Unseen labels
    become new nodes and links.
    """
    skel = model.skeleton.copy()
    touched_links, touched_nodes = skel.add_case(case)
    for src, dst in touched_links:
        touched_nodes.update((src, dst))
    cluster_models = dict(model.cluster_models)
    classifiers = dict(model.classifiers)
    _refit(skel, model.clusterer, model.classifier, model.seed,
           sorted(touched_links), sorted(touched_nodes), cluster_models, classifiers, threads)
    return PedfModel(skel, cluster_models, classifiers, model.clusterer, model.classifier, model.seed)


def replay_prefix(model: PedfModel, prefix: Case):
    """Cumulative state at the last prefix event plus the incoming link and its cluster."""
    labels = prefix.labels
    unknown = [lab for lab in labels if lab not in model.skeleton.rows]
    if unknown:
        raise UnknownEvent(unknown)
    if not labels or labels[0] != START:
        raise ValueError("prefix must start with START")
    transitions = extract_transitions(prefix, model.schema)
    state = cumulative_states(prefix, model.schema, transitions)[-1]
    if len(labels) < 2:
        return state, None, None
    link = (labels[-2], labels[-1])
    cm = model.cluster_models.get(link)
    cluster = cm.assign(transitions[-1].as_vector()) if cm is not None else None
    return state, link, cluster


def predict_case(model: PedfModel, prefix: Case, cap: int = 10, sample: bool = False,
                 rng: np.random.Generator | None = None) -> PredictedSuffix:
    """Complete a partially known case.

    ``cap`` bounds the number of predicted events not counting END. With
    ``sample`` the next step is drawn from the classifier's distribution
    instead of taking the most probable one.
    """
    state, link, cluster = replay_prefix(model, prefix)
    out = PredictedSuffix([], [], [], [], "END")
    if state.node_label == END:
        return out
    if sample and rng is None:
        rng = np.random.default_rng(model.seed)
    node = state.node_label
    n_real = 0
    while True:
        if n_real >= cap:
            out.terminated_by = "cap"
            return out
        clf = model.classifiers.get(node)
        if clf is None:
            raise DeadEnd(f"node {node!r} has no classifier")
        x = encode_classifier_input(state, link, cluster)
        if sample:
            p = clf.proba(x)
            label = clf.labels[int(rng.choice(len(p), p=p))]
        else:
            label = clf.predict(x)
        dest, cid = model.decode_label(node, label)
        c = model.cluster_models[(node, dest)].centroid(cid)
        duration, deltas, post = c.numeric[0], c.numeric[1:], c.nominal
        state = state.advance(dest, duration, deltas, post)
        out.events.append(dest)
        out.durations.append(duration)
        out.features.append(MixedVector(tuple(deltas), tuple(post)))
        out.states.append(state)
        if dest == END:
            return out
        n_real += 1
        link, cluster, node = (node, dest), cid, dest


# serialization

def _canonical(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n").encode()


def classifier_bytes(clf: Classifier) -> bytes:
    return _canonical(clf.to_dict())


def cluster_model_bytes(cm: ClusterModel) -> bytes:
    return _canonical(cm.to_dict())


def model_to_dict(model: PedfModel) -> dict:
    skel = model.skeleton
    missing_links = [k for k in skel.links if k not in model.cluster_models]
    missing_nodes = [n for n, rows in skel.rows.items() if rows and n not in model.classifiers]
    if missing_links or missing_nodes:
        raise NotTrained(f"model is not fully trained ({len(missing_links)} links, "
                         f"{len(missing_nodes)} nodes without fitted parameters)")
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "schema": model.schema.to_dict(),
        "seed": model.seed,
        "clusterer": model.clusterer.to_dict(),
        "classifier": model.classifier.to_dict(),
        "nodes": sorted(skel.nodes),
        "links": [
            {
                "source": src,
                "dest": dst,
                "cluster_model": model.cluster_models[(src, dst)].to_dict(),
                "records": [r.to_list() for r in skel.links[(src, dst)]],
            }
            for src, dst in sorted(skel.links)
        ],
        "node_models": [
            {
                "label": node,
                "classifier": model.classifiers[node].to_dict() if node in model.classifiers else None,
                "rows": [r.to_list() for r in skel.rows[node]],
            }
            for node in sorted(skel.nodes)
        ],
    }


def serialize(model) -> bytes:
    if not isinstance(model, PedfModel):
        raise NotTrained(f"cannot serialize {type(model).__name__}; train it first")
    return _canonical(model_to_dict(model))


def deserialize(data: bytes) -> PedfModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModel(f"model bytes are not a valid document: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise CorruptModel("not a PEDF model document")
    if doc.get("version") != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {doc.get('version')!r}, expected {FORMAT_VERSION}")
    try:
        schema = FeatureSchema.from_dict(doc["schema"])
        skel = NetworkSkeleton(schema, list(doc["nodes"]))
        cluster_models = {}
        for ln in doc["links"]:
            key = (ln["source"], ln["dest"])
            skel.links[key] = [TransitionRecord.from_list(key[0], key[1], r) for r in ln["records"]]
            cluster_models[key] = ClusterModel.from_dict(ln["cluster_model"])
        classifiers = {}
        for nm in doc["node_models"]:
            node = nm["label"]
            skel.rows[node] = [NodeRow.from_list(node, r) for r in nm["rows"]]
            if nm["classifier"] is not None:
                classifiers[node] = classifier_from_dict(nm["classifier"])
        return PedfModel(skel, cluster_models, classifiers,
                         ClustererSpec.from_dict(doc["clusterer"]),
                         ClassifierSpec.from_dict(doc["classifier"]), int(doc["seed"]))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModel(f"malformed model document: {exc!r}") from None
