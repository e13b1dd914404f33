import pytest
import yaml

import oracles
from pedf.errors import ConfigError, UnreachableEnd
from pedf.event_log import END, START
from pedf.features import extract_transitions
from pedf.synthetic import generate_log

CHAIN = {"edges": [{"from": START, "to": "A"}, {"from": "A", "to": "B", "duration": 10},
                   {"from": "B", "to": END}]}

PAYMENT = {
    "seed": 9,
    "numeric_features": ["payment"],
    "edges": [
        {"from": START, "to": "Create", "numeric": {"payment": {"dist": "uniform", "low": 0, "high": 100}}},
        {"from": "Create", "to": "Hi", "weight": 9, "when": {"feature": "payment", "op": "gt", "value": 50}},
        {"from": "Create", "to": "Lo", "weight": 1, "when": {"feature": "payment", "op": "gt", "value": 50}},
        {"from": "Create", "to": "Lo", "when": {"feature": "payment", "op": "le", "value": 50}},
        {"from": "Hi", "to": END},
        {"from": "Lo", "to": END},
    ],
}


def test_chain_cases_identical():
    log = generate_log(CHAIN, 5)
    assert len(log.cases) == 5
    assert all(c.labels == [START, "A", "B", END] for c in log.cases)
    assert log.augmented


def test_same_seed_same_log():
    assert generate_log(PAYMENT, 50) == generate_log(PAYMENT, 50)
    assert generate_log(PAYMENT, 50) != generate_log(PAYMENT, 50, seed=10)


def test_boundary_edges_take_no_time():
    log = generate_log(CHAIN, 3)
    for case in log.cases:
        ts = [r.timestamp for r in case.records]
        assert ts[1] == ts[0] and ts[3] == ts[2] and ts[2] - ts[1] == 10


def test_feature_dependent_branch_frequency():
    log = generate_log(PAYMENT, 10000)
    high = [c for c in log.cases if c.records[1].numeric_values[0] > 50]
    n_hi = sum(1 for c in high if c.labels[2] == "Hi")
    assert oracles.binomial_within(n_hi, len(high), 0.9)
    low = [c for c in log.cases if c.records[1].numeric_values[0] <= 50]
    assert all(c.labels[2] == "Lo" for c in low)


def test_sampled_deltas_are_recoverable():
    spec = {"numeric_features": ["x"],
            "edges": [{"from": START, "to": "A", "numeric": {"x": 3}},
                      {"from": "A", "to": "B", "numeric": {"x": 4.5}},
                      {"from": "B", "to": END}]}
    case = generate_log(spec, 1).cases[0]
    deltas = [t.numeric_deltas[0] for t in extract_transitions(case, generate_log(spec, 1).schema)]
    assert deltas == [3.0, 4.5, 0.0]


def test_memory_condition(configs):
    spec = yaml.safe_load((configs / "memory_gen.yaml").read_text())
    for case in generate_log(spec, 100).cases:
        first, last = case.labels[1], case.labels[3]
        assert (first, last) in {("A", "D"), ("C", "E")}


def test_unreachable_end():
    with pytest.raises(UnreachableEnd):
        generate_log({"edges": [{"from": START, "to": "A"}, {"from": "A", "to": "A"}]}, 1)


def test_bad_spec():
    with pytest.raises(ConfigError):
        generate_log({"edges": []}, 1)
    with pytest.raises(ConfigError):
        generate_log({"edges": [{"from": START}]}, 1)
    with pytest.raises(ConfigError):
        generate_log({"edges": [{"from": START, "to": END, "numeric": {"nope": 1}}]}, 1)
