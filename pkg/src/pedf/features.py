"""Link data (per-transition differences) and node data (cumulative states).

Numeric features carry forward: the delta on a transition is the destination
value minus the last value observed earlier in the case (or the destination
value itself when nothing was observed before), and zero when the destination
cell is blank. Summing deltas therefore reproduces the latest observed level.
Nominal features store the value observed at the destination, or the
``UNCHANGED`` sentinel when the cell is blank.
"""

from __future__ import annotations

from dataclasses import dataclass

from .event_log import START, Case, FeatureSchema

UNCHANGED = "<unchanged>"
NONE_TOKEN = "<none>"


@dataclass(frozen=True)
class MixedVector:
    numeric: tuple[float, ...]
    nominal: tuple[str, ...]

    def to_list(self) -> list:
        return [list(self.numeric), list(self.nominal)]

    @classmethod
    def from_list(cls, data) -> MixedVector:
        return cls(tuple(float(x) for x in data[0]), tuple(data[1]))


@dataclass(frozen=True)
class TransitionRecord:
    source_label: str
    dest_label: str
    duration_delta: float
    numeric_deltas: tuple[float, ...]
    nominal_post_values: tuple[str, ...]

    def as_vector(self) -> MixedVector:
        """Clustering view: ``[duration, numeric deltas...]`` + nominal post-values."""
        return MixedVector((self.duration_delta,) + self.numeric_deltas, self.nominal_post_values)

    def to_list(self) -> list:
        return [self.duration_delta, list(self.numeric_deltas), list(self.nominal_post_values)]

    @classmethod
    def from_list(cls, source: str, dest: str, data) -> TransitionRecord:
        return cls(source, dest, float(data[0]), tuple(float(x) for x in data[1]), tuple(data[2]))


@dataclass(frozen=True)
class CumulativeState:
    node_label: str
    cumulative_duration: float
    cumulative_numeric: tuple[float, ...]
    latest_nominal: tuple[str, ...]

    @classmethod
    def initial(cls, schema: FeatureSchema, label: str = START) -> CumulativeState:
        return cls(label, 0.0, (0.0,) * schema.n_numeric, (UNCHANGED,) * schema.n_nominal)

    def advance(self, dest: str, duration: float, numeric: tuple[float, ...],
                nominal: tuple[str, ...]) -> CumulativeState:
        """State after moving to ``dest`` with the given increments."""
        return CumulativeState(
            dest,
            self.cumulative_duration + duration,
            tuple(a + b for a, b in zip(self.cumulative_numeric, numeric)),
            tuple(old if new == UNCHANGED else new for old, new in zip(self.latest_nominal, nominal)),
        )

    def to_list(self) -> list:
        return [self.cumulative_duration, list(self.cumulative_numeric), list(self.latest_nominal)]

    @classmethod
    def from_list(cls, label: str, data) -> CumulativeState:
        return cls(label, float(data[0]), tuple(float(x) for x in data[1]), tuple(data[2]))


def extract_transitions(case: Case, schema: FeatureSchema) -> list[TransitionRecord]:
    recs = case.records
    last_seen: list[float | None] = [None] * schema.n_numeric
    for j, v in enumerate(recs[0].numeric_values if recs else ()):
        last_seen[j] = v
    out = []
    for src, dst in zip(recs, recs[1:]):
        deltas = []
        for j, v in enumerate(dst.numeric_values):
            if v is None:
                deltas.append(0.0)
            elif last_seen[j] is None:
                deltas.append(float(v))
            else:
                deltas.append(float(v) - last_seen[j])
            if v is not None:
                last_seen[j] = v
        post = tuple(UNCHANGED if v is None else v for v in dst.nominal_values)
        out.append(TransitionRecord(
            src.event_label,
            dst.event_label,
            max(0.0, dst.timestamp - src.timestamp),
            tuple(deltas),
            post,
        ))
    return out


def cumulative_states(case: Case, schema: FeatureSchema,
                      transitions: list[TransitionRecord] | None = None) -> list[CumulativeState]:
    """One state per event: running sums of the transition deltas up to that event."""
    if not case.records:
        return []
    if transitions is None:
        transitions = extract_transitions(case, schema)
    state = CumulativeState.initial(schema, case.records[0].event_label)
    states = [state]
    for tr in transitions:
        state = state.advance(tr.dest_label, tr.duration_delta, tr.numeric_deltas, tr.nominal_post_values)
        states.append(state)
    return states


def encode_classifier_input(state: CumulativeState, incoming_link: tuple[str, str] | None,
                            incoming_cluster: int | None) -> MixedVector:
    """Node classifier features.

    nominal: ``[incoming source label, incoming cluster id, latest nominals...]``
    numeric: ``[cumulative duration, cumulative numerics...]``
    """
    if incoming_link is not None and incoming_link[1] != state.node_label:
        raise ValueError(f"link {incoming_link} does not enter node {state.node_label!r}")
    link_tok = NONE_TOKEN if incoming_link is None else incoming_link[0]
    cluster_tok = NONE_TOKEN if incoming_cluster is None else str(int(incoming_cluster))
    return MixedVector(
        (state.cumulative_duration,) + tuple(state.cumulative_numeric),
        (link_tok, cluster_tok) + tuple(state.latest_nominal),
    )


def decode_classifier_input(vec: MixedVector, node_label: str):
    """Inverse of :func:`encode_classifier_input` for the link, cluster and duration slots."""
    link_tok, cluster_tok = vec.nominal[0], vec.nominal[1]
    link = None if link_tok == NONE_TOKEN else (link_tok, node_label)
    cluster = None if cluster_tok == NONE_TOKEN else int(cluster_tok)
    return link, cluster, vec.numeric[0]
