"""Predict the remaining events, durations and features of running process cases."""

from .baselines import complete_sequence, fit_baseline
from .benchmark import ErrorReport, run_benchmark
from .classification import ClassifierSpec
from .clustering import ClustererSpec
from .config import RunConfig, load_config
from .errors import PedfError
from .event_log import END, START, EventLog, FeatureSchema, ParseConfig, augment_boundaries, parse_log, split_cases
from .network import PedfModel, deserialize, fit_log, predict_case, serialize, train, update_with_case
from .synthetic import generate_log

__version__ = "0.1.0"

__all__ = [
    "END",
    "START",
    "ClassifierSpec",
    "ClustererSpec",
    "ErrorReport",
    "EventLog",
    "FeatureSchema",
    "ParseConfig",
    "PedfError",
    "PedfModel",
    "RunConfig",
    "augment_boundaries",
    "complete_sequence",
    "deserialize",
    "fit_baseline",
    "fit_log",
    "generate_log",
    "load_config",
    "parse_log",
    "predict_case",
    "run_benchmark",
    "serialize",
    "split_cases",
    "train",
    "update_with_case",
]
