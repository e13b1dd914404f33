"""Train-once, truncate-and-predict benchmark over a grid of models and known %."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

from .baselines import SeqPredictor, complete_sequence, fit_baseline
from .config import ModelSpec, RunConfig
from .errors import PedfError, UnknownEvent
from .event_log import Case, EventLog, augment_boundaries, known_count, parse_log, split_cases
from .features import MixedVector, extract_transitions
from .measures import Stream, SuffixPair, duration_error, event_error, feature_error
from .network import PedfModel, _pmap, fit_log, predict_case
from .synthetic import generate_log

log = logging.getLogger(__name__)

CSV_COLUMNS = ["model", "clusterer", "classifier", "known_pct", "EE", "DE", "FE",
               "n_cases", "n_unknown_event_cases"]


class CellError(PedfError):
    """A benchmark grid cell failed; the message names the cell."""


def load_dataset(cfg: RunConfig) -> EventLog:
    """Augmented log named by the config (CSV file or synthetic generator)."""
    if cfg.dataset_path is not None:
        with open(cfg.dataset_path, newline="", encoding="utf-8") as fh:
            raw = parse_log(fh, cfg.parse)
        return augment_boundaries(raw)
    return generate_log(cfg.generator, cfg.n_cases)


@dataclass(frozen=True)
class ReportRow:
    model: str
    clusterer: str
    classifier: str
    known_pct: int
    ee: float
    de: float | None
    fe: float | None
    n_cases: int
    n_unknown_event_cases: int
    train_seconds: float = 0.0

    def cells(self, include_timings: bool) -> list[str]:
        def num(v):
            return "" if v is None else f"{v:.6f}".rstrip("0").rstrip(".")

        out = [self.model, self.clusterer, self.classifier, str(self.known_pct),
               num(self.ee), num(self.de), num(self.fe),
               str(self.n_cases), str(self.n_unknown_event_cases)]
        if include_timings:
            out.append(f"{self.train_seconds:.3f}")
        return out


@dataclass
class ErrorReport:
    rows: list[ReportRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, model: str, known_pct: int) -> ReportRow:
        for r in self.rows:
            if r.model == model and r.known_pct == known_pct:
                return r
        raise KeyError((model, known_pct))

    def to_csv(self, include_timings: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS + (["train_seconds"] if include_timings else []))
        for r in self.rows:
            w.writerow(r.cells(include_timings))
        return buf.getvalue()

    def to_text(self, include_timings: bool = False) -> str:
        header = CSV_COLUMNS + (["train_seconds"] if include_timings else [])
        body = [r.cells(include_timings) for r in self.rows]
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
                  for i, h in enumerate(header)]
        lines = [f"# {k}: {v}" for k, v in self.metadata.items()]
        lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
        lines.extend("  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body)
        return "\n".join(lines) + "\n"


# real suffixes

def real_suffix(case: Case, known: int, schema) -> Stream:
    """Events after the first ``known`` real ones, with their incoming increments (END dropped)."""
    transitions = extract_transitions(case, schema)
    real = transitions[known:-1]  # transition i enters real event i + 1
    return Stream(
        tuple(t.dest_label for t in real),
        tuple(t.duration_delta for t in real),
        tuple(MixedVector(t.numeric_deltas, t.nominal_post_values) for t in real),
    )


def _prefix(case: Case, known: int) -> Case:
    return Case(case.case_id, case.records[: known + 1])


def _n_real(case: Case) -> int:
    return len(case.records) - 2


# per-model evaluation

def evaluate_pedf(model: PedfModel, test: EventLog, known_pcts: Sequence[float], cap: int = 10,
                  threads: int | None = None) -> list[tuple[float, float, float, int, int]]:
    """(EE, DE, FE, n_cases, n_unknown) per known fraction; DE in seconds."""
    schema = test.schema
    cases = [c for c in test.cases if _n_real(c) > 0]

    def one(args) -> tuple[SuffixPair, bool]:
        case, pct = args
        known = known_count(_n_real(case), pct)
        real = real_suffix(case, known, schema)
        try:
            pred = predict_case(model, _prefix(case, known), cap=cap)
        except UnknownEvent:
            return SuffixPair(real, Stream()), True
        ps = Stream(tuple(pred.events), tuple(pred.durations), tuple(pred.features)).without_end()
        return SuffixPair(real, ps), False

    out = []
    for pct in known_pcts:
        results = _pmap(one, [(c, pct) for c in cases], threads)
        pairs = [p for p, _ in results]
        out.append((event_error(pairs), duration_error(pairs), feature_error(pairs),
                    len(pairs), sum(u for _, u in results)))
    return out


def evaluate_baseline(pred: SeqPredictor, test: EventLog, known_pcts: Sequence[float],
                      cap: int = 10) -> list[tuple[float, int, int]]:
    """(EE, n_cases, n_unknown) per known fraction."""
    alphabet = pred.alphabet
    cases = [c for c in test.cases if _n_real(c) > 0]
    out = []
    for pct in known_pcts:
        pairs, unknown = [], 0
        for case in cases:
            labels = case.labels
            known = known_count(_n_real(case), pct)
            real = Stream(tuple(labels[known + 1:-1]))
            prefix = labels[: known + 1]
            if any(lab not in alphabet for lab in prefix):
                unknown += 1
                pairs.append(SuffixPair(real, Stream()))
                continue
            predicted = Stream(tuple(complete_sequence(pred, prefix, cap))).without_end()
            pairs.append(SuffixPair(real, predicted))
        out.append((event_error(pairs), len(pairs), unknown))
    return out


def _pct_int(p: float) -> int:
    return int(round(p * 100))


def model_spec_label(spec: ModelSpec) -> str:
    return spec.name if not spec.is_pedf else f"pedf[{spec.clusterer.tag}/{spec.classifier.tag}]"


def run_benchmark(cfg: RunConfig, data: EventLog | None = None) -> ErrorReport:
    data = data if data is not None else load_dataset(cfg)
    train, test = split_cases(data, cfg.train_fraction, cfg.split_seed)
    unit = data.schema.unit_seconds
    report = ErrorReport(metadata={
        "dataset": cfg.dataset_name,
        "cases": len(data.cases),
        "train_cases": len(train.cases),
        "test_cases": len(test.cases),
        "split_seed": cfg.split_seed,
        "model_seed": cfg.seed,
        "cap": cfg.cap,
        "duration_unit": data.schema.duration_unit,
        "config_hash": cfg.digest(),
    })
    if data.meta.get("dropped_partial_case"):
        report.metadata["dropped_partial_case"] = data.meta["dropped_partial_case"]

    for spec in cfg.bench_models:
        cell = model_spec_label(spec)
        t0 = time.perf_counter()
        try:
            if spec.is_pedf:
                model = fit_log(train, spec.clusterer, spec.classifier, cfg.seed, cfg.worker_threads)
            else:
                predictor = fit_baseline(spec.kind, [c.labels for c in train.cases], **spec.params)
        except PedfError as exc:
            raise CellError(f"training {cell}: {exc}") from exc
        seconds = time.perf_counter() - t0
        log.info("trained %s in %.3f s", cell, seconds)
        try:
            if spec.is_pedf:
                res = evaluate_pedf(model, test, cfg.known_pcts, cfg.cap, cfg.worker_threads)
                for pct, (ee, de, fe, n, unk) in zip(cfg.known_pcts, res):
                    report.rows.append(ReportRow("pedf", spec.clusterer.tag, spec.classifier.tag,
                                                 _pct_int(pct), ee, de / unit, fe, n, unk, seconds))
            else:
                res = evaluate_baseline(predictor, test, cfg.known_pcts, cfg.cap)
                for pct, (ee, n, unk) in zip(cfg.known_pcts, res):
                    report.rows.append(ReportRow(spec.name, "-", "-", _pct_int(pct), ee, None, None,
                                                 n, unk, seconds))
        except PedfError as exc:
            raise CellError(f"evaluating {cell}: {exc}") from exc
    return report

