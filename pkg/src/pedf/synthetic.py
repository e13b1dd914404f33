"""Seeded synthetic event logs with known ground truth.

A generator spec is a plain mapping (usually loaded from YAML/JSON)::

    seed: 3
    start_time: "2020-01-01T00:00:00"
    case_spacing: 3600            # seconds between case starts
    numeric_features: [payment]
    nominal_features: {status: [open, closed]}
    edges:
      - {from: START, to: A}
      - {from: A, to: B, weight: 2,
         duration: {dist: uniform, low: 3600, high: 7200},
         numeric: {payment: {dist: normal, mean: 20, sd: 2}},
         nominal: {status: open}}
      - {from: B, to: C, when: {feature: payment, op: gt, value: 50}}
      - {from: B, to: D, when: {prev: A}}
      - {from: C, to: END}

At each step the eligible edges leaving the current node (those whose
``when`` conditions all hold for the case so far) are drawn in proportion to
``weight``. Numeric features are emitted as running levels on the events an
edge touches and left blank elsewhere, so extracted deltas equal the sampled
ones. Durations are rounded to whole seconds; edges leaving START or entering
END always take zero time.
"""

from __future__ import annotations

import operator
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnreachableEnd
from .event_log import END, START, Case, EventLog, EventRecord, FeatureSchema, parse_timestamp

_OPS = {
    "gt": operator.gt, ">": operator.gt,
    "ge": operator.ge, ">=": operator.ge,
    "lt": operator.lt, "<": operator.lt,
    "le": operator.le, "<=": operator.le,
    "eq": operator.eq, "==": operator.eq,
    "ne": operator.ne, "!=": operator.ne,
}

MAX_CASE_LENGTH = 1000


def sample(dist: dict | float | int | None, rng: np.random.Generator) -> float:
    if dist is None:
        return 0.0
    if isinstance(dist, (int, float)):
        return float(dist)
    kind = dist.get("dist", "constant")
    if kind == "constant":
        return float(dist["value"])
    if kind == "uniform":
        return float(rng.uniform(dist["low"], dist["high"]))
    if kind == "normal":
        return float(rng.normal(dist["mean"], dist["sd"]))
    if kind == "exponential":
        return float(rng.exponential(dist["mean"]))
    if kind == "choice":
        values = dist["values"]
        p = dist.get("weights")
        if p is not None:
            p = np.asarray(p, dtype=float) / np.sum(p)
        return float(values[rng.choice(len(values), p=p)])
    raise ConfigError(f"unknown distribution {kind!r}")


@dataclass(frozen=True)
class _Edge:
    source: str
    dest: str
    weight: float
    duration: object
    numeric: dict
    nominal: dict
    when: tuple[dict, ...]


def _parse_edges(spec: dict, schema: FeatureSchema) -> list[_Edge]:
    edges = []
    for i, e in enumerate(spec.get("edges", [])):
        try:
            src, dst = e["from"], e["to"]
        except KeyError:
            raise ConfigError(f"edge #{i} needs 'from' and 'to'") from None
        when = e.get("when") or ()
        if isinstance(when, dict):
            when = (when,)
        for name in e.get("numeric", {}):
            if name not in schema.numeric_features:
                raise ConfigError(f"edge {src}->{dst}: unknown numeric feature {name!r}")
        for name in e.get("nominal", {}):
            if name not in schema.nominal_names:
                raise ConfigError(f"edge {src}->{dst}: unknown nominal feature {name!r}")
        edges.append(_Edge(src, dst, float(e.get("weight", 1.0)), e.get("duration"),
                           dict(e.get("numeric", {})), dict(e.get("nominal", {})), tuple(when)))
    if not edges:
        raise ConfigError("generator spec has no edges")
    return edges


def _check_reachable(edges: list[_Edge]) -> None:
    succ: dict[str, set[str]] = {}
    for e in edges:
        succ.setdefault(e.source, set()).add(e.dest)
    seen = {START}
    queue = deque([START])
    while queue:
        node = queue.popleft()
        for nxt in succ.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    if END not in seen:
        raise UnreachableEnd("no path from START to END in generator spec")


def _holds(cond: dict, prev: str | None, levels: dict, nominal: dict, elapsed: float) -> bool:
    if "prev" in cond:
        allowed = cond["prev"]
        allowed = [allowed] if isinstance(allowed, str) else list(allowed)
        return prev in allowed
    op = _OPS[cond.get("op", "eq")]
    if "feature" in cond:
        name = cond["feature"]
        value = levels[name] if name in levels else nominal.get(name)
        return value is not None and op(value, cond["value"])
    if "duration" in cond:
        return op(elapsed, cond["duration"])
    raise ConfigError(f"unsupported condition {cond}")


def schema_from_spec(spec: dict) -> FeatureSchema:
    nominal = spec.get("nominal_features") or {}
    return FeatureSchema(
        numeric_features=tuple(spec.get("numeric_features") or ()),
        nominal_features=tuple((n, tuple(sorted(dom))) for n, dom in nominal.items()),
        duration_unit=spec.get("duration_unit", "seconds"),
    )


def generate_log(gen_spec: dict, n_cases: int, seed: int | None = None) -> EventLog:
    """Draw ``n_cases`` augmented cases from ``gen_spec``; ``seed`` overrides the spec's."""
    if n_cases <= 0:
        raise ConfigError("n_cases must be positive")
    schema = schema_from_spec(gen_spec)
    edges = _parse_edges(gen_spec, schema)
    _check_reachable(edges)
    by_source: dict[str, list[_Edge]] = {}
    for e in edges:
        by_source.setdefault(e.source, []).append(e)

    rng = np.random.default_rng(gen_spec.get("seed", 0) if seed is None else seed)
    t0 = parse_timestamp(str(gen_spec.get("start_time", "2020-01-01T00:00:00")))
    spacing = float(gen_spec.get("case_spacing", 3600))
    num_names = schema.numeric_features
    nom_names = schema.nominal_names

    cases = []
    for i in range(n_cases):
        cid = f"case{i:06d}"
        start_ts = t0 + i * spacing
        ts = start_ts
        levels = {n: 0.0 for n in num_names}
        nominal: dict[str, str] = {}
        prev, node = None, START
        recs = [EventRecord(cid, START, start_ts, (None,) * len(num_names), (None,) * len(nom_names))]
        while node != END:
            options = [e for e in by_source.get(node, ())
                       if all(_holds(c, prev, levels, nominal, ts - start_ts) for c in e.when)]
            if not options:
                raise UnreachableEnd(f"case {cid}: no eligible edge leaves {node!r}")
            w = np.array([e.weight for e in options])
            edge = options[rng.choice(len(options), p=w / w.sum())] if len(options) > 1 else options[0]
            if len(recs) > MAX_CASE_LENGTH:
                raise UnreachableEnd(f"case {cid}: exceeded {MAX_CASE_LENGTH} events")
            if edge.dest != END:
                if node != START:
                    ts += max(0.0, float(round(sample(edge.duration, rng))))
                nums: list[float | None] = [None] * len(num_names)
                for j, name in enumerate(num_names):
                    if name in edge.numeric:
                        levels[name] += sample(edge.numeric[name], rng)
                        nums[j] = levels[name]
                noms: list[str | None] = [None] * len(nom_names)
                for j, name in enumerate(nom_names):
                    if name in edge.nominal:
                        nominal[name] = str(edge.nominal[name])
                        noms[j] = nominal[name]
                recs.append(EventRecord(cid, edge.dest, ts, tuple(nums), tuple(noms)))
            else:
                recs.append(EventRecord(cid, END, ts, (None,) * len(num_names), (None,) * len(nom_names)))
            prev, node = node, edge.dest
        cases.append(Case(cid, tuple(recs)))
    return EventLog(schema, tuple(cases), augmented=True)
