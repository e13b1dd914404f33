"""Event logs: parsing, boundary augmentation, splitting and prefix truncation."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, TextIO

import numpy as np

from .errors import (
    AlreadyAugmented,
    BadTimestamp,
    DegenerateCase,
    EmptyLabel,
    EmptyLog,
    MissingColumn,
)

log = logging.getLogger(__name__)

START = "START"
END = "END"
DUMMY_LABELS = frozenset({START, END})

# seconds per display unit
DURATION_UNITS = {
    "seconds": 1.0,
    "minutes": 60.0,
    "hours": 3600.0,
    "days": 86400.0,
}


@dataclass(frozen=True)
class FeatureSchema:
    numeric_features: tuple[str, ...] = ()
    nominal_features: tuple[tuple[str, tuple[str, ...]], ...] = ()
    duration_unit: str = "seconds"

    def __post_init__(self):
        names = list(self.numeric_features) + [n for n, _ in self.nominal_features]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate feature names in schema: {names}")
        if self.duration_unit not in DURATION_UNITS:
            raise ValueError(f"unknown duration unit {self.duration_unit!r}")

    @property
    def nominal_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.nominal_features)

    @property
    def n_numeric(self) -> int:
        return len(self.numeric_features)

    @property
    def n_nominal(self) -> int:
        return len(self.nominal_features)

    @property
    def unit_seconds(self) -> float:
        return DURATION_UNITS[self.duration_unit]

    def to_dict(self) -> dict:
        return {
            "numeric_features": list(self.numeric_features),
            "nominal_features": [[n, list(dom)] for n, dom in self.nominal_features],
            "duration_unit": self.duration_unit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> FeatureSchema:
        return cls(
            numeric_features=tuple(d["numeric_features"]),
            nominal_features=tuple((n, tuple(dom)) for n, dom in d["nominal_features"]),
            duration_unit=d.get("duration_unit", "seconds"),
        )


@dataclass(frozen=True)
class EventRecord:
    case_id: str
    event_label: str
    timestamp: float  # POSIX seconds, UTC
    numeric_values: tuple[float | None, ...] = ()
    nominal_values: tuple[str | None, ...] = ()

    @property
    def is_dummy(self) -> bool:
        return self.event_label in DUMMY_LABELS


@dataclass(frozen=True)
class Case:
    case_id: str
    records: tuple[EventRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def labels(self) -> list[str]:
        return [r.event_label for r in self.records]

    @property
    def real_records(self) -> list[EventRecord]:
        return [r for r in self.records if not r.is_dummy]


@dataclass(frozen=True)
class EventLog:
    schema: FeatureSchema
    cases: tuple[Case, ...]
    augmented: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.cases)

    @property
    def n_events(self) -> int:
        return sum(len(c) for c in self.cases)


@dataclass
class ParseConfig:
    """Column mapping and parsing options for CSV logs.

    ``numeric``/``nominal`` force a column's type; other feature columns are
    numeric when every non-blank cell parses as a float. ``features``, when
    given, restricts the feature columns to that list.
    """

    case_column: str = "case"
    event_column: str = "event"
    time_column: str = "time"
    delimiter: str = ","
    date_format: str | None = None
    numeric: tuple[str, ...] = ()
    nominal: tuple[str, ...] = ()
    ignore: tuple[str, ...] = ()
    features: tuple[str, ...] | None = None
    record_limit: int | None = None
    duration_unit: str = "seconds"

    @classmethod
    def from_dict(cls, d: dict | None) -> ParseConfig:
        d = dict(d or {})
        for key in ("numeric", "nominal", "ignore"):
            if key in d:
                d[key] = tuple(d[key] or ())
        if d.get("features") is not None:
            d["features"] = tuple(d["features"])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parse option(s): {sorted(unknown)}")
        return cls(**d)


_AUTO_FORMATS = ("%Y/%m/%d", "%Y/%m/%d %H:%M:%S", "%Y/%m/%d %H:%M", "%Y/%m/%d %H:%M:%S.%f")


def _to_epoch(dt: datetime) -> float:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def parse_timestamp(text: str, date_format: str | None = None) -> float:
    """Parse ``yyyy/MM/dd`` (optionally with a time) or ISO-8601 into POSIX seconds."""
    text = text.strip()
    if date_format:
        return _to_epoch(datetime.strptime(text, date_format))
    for fmt in _AUTO_FORMATS:
        try:
            return _to_epoch(datetime.strptime(text, fmt))
        except ValueError:
            pass
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return _to_epoch(datetime.fromisoformat(text))


def format_timestamp(ts: float) -> str:
    dt = datetime.fromtimestamp(ts, tz=timezone.utc).replace(tzinfo=None)
    return dt.isoformat()


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_log(raw: TextIO | str, parse_config: ParseConfig | None = None) -> EventLog:
    """Read a CSV event log into cases.

    ``raw`` is a text stream or the CSV content itself. Rows are grouped by
    case in order of first appearance; records within a case are stably
    sorted by timestamp.
    """
    cfg = parse_config or ParseConfig()
    if isinstance(raw, str):
        raw = io.StringIO(raw)
    reader = csv.reader(raw, delimiter=cfg.delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptyLog("input has no header row") from None

    col = {name: i for i, name in enumerate(header)}
    for required in (cfg.case_column, cfg.event_column, cfg.time_column):
        if required not in col:
            raise MissingColumn(f"column {required!r} not found in header {header}")
    core = {cfg.case_column, cfg.event_column, cfg.time_column}
    if cfg.features is not None:
        missing = [f for f in cfg.features if f not in col]
        if missing:
            raise MissingColumn(f"feature column(s) {missing} not found in header")
        feature_cols = list(cfg.features)
    else:
        feature_cols = [h for h in header if h and h not in core and h not in cfg.ignore]

    rows: list[tuple[int, list[str]]] = []
    limit = cfg.record_limit
    for lineno, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        rows.append((lineno, row))
        if limit is not None and len(rows) > limit:
            break
    meta: dict = {}
    if limit is not None:
        meta["record_limit"] = limit
        meta["dropped_partial_case"] = None
        if len(rows) > limit:
            overflow = rows.pop()
            cid = rows[-1][1][col[cfg.case_column]].strip() if rows else None
            if cid is not None and overflow[1][col[cfg.case_column]].strip() == cid:
                rows = [r for r in rows if r[1][col[cfg.case_column]].strip() != cid]
                meta["dropped_partial_case"] = cid
                log.info("record limit cut case %s mid-way; dropped it", cid)
    if not rows:
        raise EmptyLog("log has no data rows")

    numeric_cols: list[str] = []
    nominal_cols: list[str] = []
    for name in feature_cols:
        if name in cfg.nominal:
            nominal_cols.append(name)
        elif name in cfg.numeric:
            numeric_cols.append(name)
        else:
            cells = (r[col[name]].strip() for _, r in rows)
            if all(_is_float(c) for c in cells if c):
                numeric_cols.append(name)
            else:
                nominal_cols.append(name)

    records_by_case: dict[str, list[EventRecord]] = {}
    domains: dict[str, set[str]] = {n: set() for n in nominal_cols}
    for lineno, row in rows:
        case_id = row[col[cfg.case_column]].strip()
        label = row[col[cfg.event_column]].strip()
        if not label:
            raise EmptyLabel(f"row {lineno}: empty event label")
        ts_text = row[col[cfg.time_column]]
        try:
            ts = parse_timestamp(ts_text, cfg.date_format)
        except ValueError:
            raise BadTimestamp(lineno, ts_text) from None
        nums: list[float | None] = []
        for name in numeric_cols:
            cell = row[col[name]].strip()
            if not cell:
                nums.append(None)
                continue
            try:
                nums.append(float(cell))
            except ValueError:
                raise ValueError(f"row {lineno}: column {name!r} is numeric but holds {cell!r}") from None
        noms: list[str | None] = []
        for name in nominal_cols:
            cell = row[col[name]].strip()
            noms.append(cell or None)
            if cell:
                domains[name].add(cell)
        records_by_case.setdefault(case_id, []).append(
            EventRecord(case_id, label, ts, tuple(nums), tuple(noms))
        )

    cases = tuple(
        Case(cid, tuple(sorted(recs, key=lambda r: r.timestamp)))  # sorted() is stable
        for cid, recs in records_by_case.items()
    )
    schema = FeatureSchema(
        numeric_features=tuple(numeric_cols),
        nominal_features=tuple((n, tuple(sorted(domains[n]))) for n in nominal_cols),
        duration_unit=cfg.duration_unit,
    )
    return EventLog(schema, cases, augmented=False, meta=meta)


def _dummy(case: Case, label: str, ts: float, schema: FeatureSchema) -> EventRecord:
    return EventRecord(
        case.case_id,
        label,
        ts,
        (None,) * schema.n_numeric,
        (None,) * schema.n_nominal,
    )


def augment_case(case: Case, schema: FeatureSchema) -> Case:
    if not case.records:
        raise DegenerateCase(f"case {case.case_id!r} has no events")
    first, last = case.records[0], case.records[-1]
    return Case(
        case.case_id,
        (_dummy(case, START, first.timestamp, schema),)
        + case.records
        + (_dummy(case, END, last.timestamp, schema),),
    )


def augment_boundaries(log: EventLog) -> EventLog:
    """Wrap every case in START/END dummy events with zero-duration transitions."""
    if log.augmented:
        raise AlreadyAugmented("log is already augmented")
    cases = tuple(augment_case(c, log.schema) for c in log.cases)
    return replace(log, cases=cases, augmented=True)


def split_cases(log: EventLog, train_fraction: float, seed: int) -> tuple[EventLog, EventLog]:
    """Random case-level partition; both halves keep the original case order."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(log.cases)
    n_train = int(math.floor(train_fraction * n + 0.5))
    n_train = min(max(n_train, 1), n)
    perm = np.random.default_rng(seed).permutation(n)
    train_idx = sorted(perm[:n_train].tolist())
    test_idx = sorted(perm[n_train:].tolist())
    train = replace(log, cases=tuple(log.cases[i] for i in train_idx))
    test = replace(log, cases=tuple(log.cases[i] for i in test_idx))
    return train, test


def known_count(n_real: int, known_fraction: float) -> int:
    return max(1, int(math.floor(known_fraction * n_real)))


def truncate_prefix(case: Case, known_fraction: float) -> tuple[Case, Case]:
    """Split an augmented case into ``START + known events`` and ``rest + END``."""
    if not 0 < known_fraction < 1:
        raise ValueError("known_fraction must lie in (0, 1)")
    recs = case.records
    if len(recs) < 2 or recs[0].event_label != START or recs[-1].event_label != END:
        raise ValueError(f"case {case.case_id!r} is not augmented")
    real = recs[1:-1]
    if not real:
        raise DegenerateCase(f"case {case.case_id!r} has no real events")
    known = known_count(len(real), known_fraction)
    prefix = Case(case.case_id, (recs[0],) + real[:known])
    suffix = Case(case.case_id, real[known:] + (recs[-1],))
    return prefix, suffix


def write_log_csv(log: EventLog, out: TextIO, *, delimiter: str = ",",
                  columns: tuple[str, str, str] = ("case", "event", "time")) -> None:
    """Write the real events of ``log`` as CSV (dummy START/END rows are omitted)."""
    schema = log.schema
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(list(columns) + list(schema.numeric_features) + list(schema.nominal_names))
    for case in log.cases:
        for r in case.records:
            if r.is_dummy:
                continue
            nums = ["" if v is None else repr(float(v)) for v in r.numeric_values]
            noms = ["" if v is None else v for v in r.nominal_values]
            writer.writerow([case.case_id, r.event_label, format_timestamp(r.timestamp)] + nums + noms)


def cases_from_labels(sequences: Iterable[Iterable[str]], schema: FeatureSchema | None = None,
                      step: float = 0.0) -> EventLog:
    """Build an unaugmented log from bare label sequences (timestamps ``i * step``)."""
    schema = schema or FeatureSchema()
    cases = []
    for i, seq in enumerate(sequences):
        cid = f"c{i}"
        recs = tuple(
            EventRecord(cid, lab, j * step, (None,) * schema.n_numeric, (None,) * schema.n_nominal)
            for j, lab in enumerate(seq)
        )
        cases.append(Case(cid, recs))
    return EventLog(schema, tuple(cases))
