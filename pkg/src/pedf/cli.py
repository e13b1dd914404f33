"""Command-line entry point: ``pedf gen|train|predict|bench``.

On failure every command prints a single ``<Category>: message`` line to
stderr and exits with status 2.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .benchmark import load_dataset, run_benchmark
from .config import RunConfig, load_config
from .errors import ConfigError, PedfError, UnknownEvent
from .event_log import START, Case, EventRecord, FeatureSchema, ParseConfig, parse_log, split_cases, write_log_csv
from .network import deserialize, fit_log, predict_case, serialize, update_with_case
from .synthetic import generate_log

log = logging.getLogger("pedf")


def _write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def _with_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = dataclasses.replace(cfg, threads=args.threads)
    return cfg


def cmd_gen(args) -> int:
    cfg = load_config(args.config)
    if cfg.generator is None:
        raise ConfigError("dataset.generator is required for gen")
    spec = dict(cfg.generator)
    if args.seed is not None:
        spec["seed"] = args.seed
    data = generate_log(spec, args.n_cases or cfg.n_cases)
    out = Path(args.out) if args.out else cfg.output("log")
    text = io.StringIO()
    write_log_csv(data, text)
    _write(out, text.getvalue().encode())
    print(f"wrote {len(data.cases)} cases ({data.n_events} events incl. START/END) to {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _with_overrides(load_config(args.config), args)
    data = load_dataset(cfg)
    train, _ = split_cases(data, cfg.train_fraction, cfg.split_seed)
    t0 = time.perf_counter()
    model = fit_log(train, cfg.model.clusterer, cfg.model.classifier, cfg.seed, cfg.worker_threads)
    seconds = time.perf_counter() - t0
    out = Path(args.out) if args.out else cfg.output("model")
    _write(out, serialize(model))
    summary = model.summary()
    print(f"cases: {len(data.cases)} (train {len(train.cases)})")
    if data.meta.get("dropped_partial_case"):
        print(f"dropped partially captured case: {data.meta['dropped_partial_case']}")
    print(f"nodes: {summary['nodes']}")
    print(f"links: {summary['links']}")
    for link, k in summary["clusters_per_link"].items():
        print(f"  {link}: {k} clusters")
    print(f"train_seconds: {seconds:.3f}")
    print(f"model: {out}")
    return 0


def _prefix_from_labels(labels: list[str], schema: FeatureSchema) -> Case:
    recs = [EventRecord("prefix", lab, 0.0, (None,) * schema.n_numeric, (None,) * schema.n_nominal)
            for lab in labels]
    if not recs or recs[0].event_label != START:
        recs.insert(0, EventRecord("prefix", START, 0.0, (None,) * schema.n_numeric,
                                   (None,) * schema.n_nominal))
    return Case("prefix", tuple(recs))


def _prefix_from_csv(path: str, case_id: str, parse: ParseConfig, schema: FeatureSchema) -> Case:
    with open(path, newline="", encoding="utf-8") as fh:
        data = parse_log(fh, parse)
    case = next((c for c in data.cases if c.case_id == case_id), None)
    if case is None:
        raise ConfigError(f"case {case_id!r} not found in {path}")
    num_idx = {n: i for i, n in enumerate(data.schema.numeric_features)}
    nom_idx = {n: i for i, n in enumerate(data.schema.nominal_names)}
    recs = []
    for r in case.records:
        nums = tuple(r.numeric_values[num_idx[n]] if n in num_idx else None
                     for n in schema.numeric_features)
        noms = tuple(r.nominal_values[nom_idx[n]] if n in nom_idx else None
                     for n in schema.nominal_names)
        recs.append(EventRecord(case_id, r.event_label, r.timestamp, nums, noms))
    first = case.records[0]
    start = EventRecord(case_id, START, first.timestamp, (None,) * schema.n_numeric,
                        (None,) * schema.n_nominal)
    return Case(case_id, (start, *recs))


def cmd_predict(args) -> int:
    model = deserialize(Path(args.model).read_bytes())
    if args.prefix is not None:
        labels = [s.strip() for s in args.prefix.split(",") if s.strip()]
        prefix = _prefix_from_labels(labels, model.schema)
    else:
        if not args.case_id:
            raise ConfigError("--csv needs --case-id")
        parse = load_config(args.config).parse if args.config else ParseConfig()
        prefix = _prefix_from_csv(args.csv, args.case_id, parse, model.schema)
    try:
        rng = np.random.default_rng(args.seed) if args.sample else None
        result = predict_case(model, prefix, cap=args.cap, sample=args.sample, rng=rng)
    except UnknownEvent:
        if not args.extend:
            raise
        model = update_with_case(model, prefix, threads=args.threads)
        result = predict_case(model, prefix, cap=args.cap, sample=args.sample,
                              rng=np.random.default_rng(args.seed) if args.sample else None)
        if args.save_model:
            _write(Path(args.save_model), serialize(model))
    doc = result.to_dict(model.schema)
    doc["duration_unit"] = "seconds"
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(Path(args.out), text.encode())
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    cfg = _with_overrides(load_config(args.config), args)
    include = cfg.include_timings or args.include_timings
    report = run_benchmark(cfg)
    csv_out = Path(args.report) if args.report else cfg.output("report")
    _write(csv_out, report.to_csv(include).encode())
    table = report.to_text(include)
    table_out = Path(args.table) if args.table else cfg.outputs.get("table")
    if table_out is not None:
        _write(table_out, table.encode())
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pedf", description="Predict event sequences, durations and features.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic event log CSV")
    g.add_argument("config")
    g.add_argument("--out")
    g.add_argument("--n-cases", type=int)
    g.add_argument("--seed", type=int, help="override the generator seed")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train a model on the training split")
    t.add_argument("config")
    t.add_argument("--out")
    t.add_argument("--threads", type=int)
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("predict", help="complete a partially known case")
    r.add_argument("model")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--prefix", help="comma-separated event labels")
    src.add_argument("--csv", help="event log CSV holding the prefix case")
    r.add_argument("--case-id")
    r.add_argument("--config", help="run config whose dataset.parse mapping reads --csv")
    r.add_argument("--cap", type=int, default=10)
    r.add_argument("--extend", action="store_true", help="add an unseen prefix to the model before predicting")
    r.add_argument("--save-model", help="with --extend, write the updated model here")
    r.add_argument("--sample", action="store_true", help="sample next steps instead of taking the most probable")
    r.add_argument("--seed", type=int, default=0, help="seed for --sample")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--out")
    r.set_defaults(func=cmd_predict)

    b = sub.add_parser("bench", help="run the benchmark grid")
    b.add_argument("config")
    b.add_argument("--report")
    b.add_argument("--table")
    b.add_argument("--threads", type=int)
    b.add_argument("--include-timings", action="store_true", help="add train_seconds to report files")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except PedfError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"{exc.category}: {msg}", file=sys.stderr)
    except OSError as exc:
        print(f"IOError: {exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
