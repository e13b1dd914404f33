"""Run configuration (one YAML or JSON document per run).

Schema, version 1::

    version: 1
    dataset:
      name: fines                 # free text, copied into reports
      path: data/fines.csv        # CSV log ...
      parse: {case_column: case, event_column: event, time_column: time,
              date_format: null, delimiter: ",", record_limit: 50000,
              numeric: [], nominal: [], ignore: [], features: null,
              duration_unit: days}
      generator: gen.yaml         # ... or a synthetic spec (path or inline mapping)
      n_cases: 2000
    split: {train_fraction: 0.7, seed: 42}
    seed: 0                       # model seed
    cap: 10
    threads: null                 # worker threads; null = os.cpu_count()
    known_pcts: [20, 30, 40, 50, 60, 70, 80, 90]   # percents or fractions
    model:                        # used by `train`
      clusterer: {name: kmeans, k: 50}
      classifier: {name: rf, n_trees: 100}
    bench:
      models:
        - {type: pedf, clusterer: {name: kmeans, k: 50}, classifier: {name: rf}}
        - {type: markov}
        - {type: akom, k: 3}
        - {type: lz78}
        - {type: ppm, order: 3}
      include_timings: false      # adds train_seconds to report files
    output: {model: model.json, report: report.csv, table: report.txt, log: log.csv}

Relative paths are resolved against the directory holding the config file.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .classification import ClassifierSpec
from .clustering import ClustererSpec
from .errors import ConfigError
from .event_log import ParseConfig

CONFIG_VERSION = 1
DEFAULT_KNOWN_PCTS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "pedf"
    clusterer: ClustererSpec = field(default_factory=ClustererSpec)
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    params: dict = field(default_factory=dict)

    @property
    def is_pedf(self) -> bool:
        return self.kind == "pedf"

    @property
    def name(self) -> str:
        if self.is_pedf:
            return "pedf"
        extra = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({extra})" if extra else self.kind

    @classmethod
    def from_dict(cls, d: dict) -> ModelSpec:
        d = dict(d)
        kind = str(d.pop("type", "pedf")).lower()
        try:
            if kind == "pedf":
                return cls(kind, ClustererSpec.from_dict(d.pop("clusterer", None)),
                           ClassifierSpec.from_dict(d.pop("classifier", None)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad model spec: {exc}") from None
        if kind not in ("markov", "dg", "akom", "lz78", "ppm"):
            raise ConfigError(f"unknown model type {kind!r}")
        return cls(kind, params=d)


@dataclass
class RunConfig:
    dataset_name: str = "dataset"
    dataset_path: Path | None = None
    parse: ParseConfig = field(default_factory=ParseConfig)
    generator: dict | None = None
    n_cases: int = 1000
    train_fraction: float = 0.7
    split_seed: int = 0
    seed: int = 0
    cap: int = 10
    threads: int | None = None
    known_pcts: tuple[float, ...] = DEFAULT_KNOWN_PCTS
    model: ModelSpec = field(default_factory=ModelSpec)
    bench_models: tuple[ModelSpec, ...] = (ModelSpec(),)
    include_timings: bool = False
    outputs: dict[str, Path] = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def worker_threads(self) -> int:
        return self.threads or os.cpu_count() or 1

    def output(self, key: str) -> Path:
        try:
            return self.outputs[key]
        except KeyError:
            raise ConfigError(f"config has no output.{key} path") from None

    def digest(self) -> str:
        """Hash of the config content (threads excluded: it cannot change results)."""
        raw = {k: v for k, v in self.raw.items() if k != "threads"}
        return hashlib.sha256(json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> RunConfig:
        base = base or Path.cwd()
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        version = d.get("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version}; expected {CONFIG_VERSION}")
        unknown = set(d) - {"version", "dataset", "split", "seed", "cap", "threads", "known_pcts",
                            "model", "bench", "output"}
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")

        ds = dict(d.get("dataset") or {})
        path = ds.get("path")
        gen = ds.get("generator")
        if path is None and gen is None:
            raise ConfigError("dataset needs either 'path' or 'generator'")
        if isinstance(gen, str):
            gen_path = base / gen
            try:
                gen = yaml.safe_load(gen_path.read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read generator spec {gen_path}: {exc.strerror}") from None
        try:
            parse = ParseConfig.from_dict(ds.get("parse"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"dataset.parse: {exc}") from None

        split = d.get("split") or {}
        pcts = []
        for p in d.get("known_pcts", DEFAULT_KNOWN_PCTS):
            p = float(p)
            p = p / 100.0 if p > 1 else p
            if not 0 < p < 1:
                raise ConfigError(f"known percentage {p} outside (0, 1)")
            pcts.append(p)

        bench = d.get("bench") or {}
        models = tuple(ModelSpec.from_dict(m) for m in bench.get("models", [{"type": "pedf"}]))
        model_d = dict(d.get("model") or {})
        model_d.setdefault("type", "pedf")
        model = ModelSpec.from_dict(model_d)
        if not model.is_pedf:
            raise ConfigError("'model' must describe a PEDF model")

        threads = d.get("threads")
        if threads is not None and int(threads) < 1:
            raise ConfigError("threads must be >= 1")
        train_fraction = float(split.get("train_fraction", 0.7))
        if not 0 < train_fraction < 1:
            raise ConfigError("split.train_fraction must lie in (0, 1)")
        return cls(
            dataset_name=str(ds.get("name", Path(path).stem if path else "synthetic")),
            dataset_path=(base / path) if path else None,
            parse=parse,
            generator=gen,
            n_cases=int(ds.get("n_cases", 1000)),
            train_fraction=train_fraction,
            split_seed=int(split.get("seed", 0)),
            seed=int(d.get("seed", 0)),
            cap=int(d.get("cap", 10)),
            threads=None if threads is None else int(threads),
            known_pcts=tuple(pcts),
            model=model,
            bench_models=models,
            include_timings=bool(bench.get("include_timings", False)),
            outputs={k: base / v for k, v in (d.get("output") or {}).items()},
            raw=d,
        )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from None
    return RunConfig.from_dict(data, base=path.parent)
