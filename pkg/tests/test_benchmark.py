import pytest

from pedf.benchmark import ErrorReport, evaluate_baseline, real_suffix, run_benchmark
from pedf.config import RunConfig, load_config
from pedf.errors import ConfigError
from pedf.event_log import augment_boundaries, cases_from_labels
from pedf.baselines import markov_fit


def test_chain_all_zero_and_grid_shape(configs):
    cfg = load_config(configs / "chain.yaml")
    report = run_benchmark(cfg)
    assert len(report.rows) == len(cfg.bench_models) * len(cfg.known_pcts)
    for r in report.rows:
        assert r.ee == 0
        if r.model == "pedf":
            assert r.de == 0 and r.fe == 0
        else:
            assert r.de is None and r.fe is None
    assert [r.known_pct for r in report.rows[:8]] == [20, 30, 40, 50, 60, 70, 80, 90]


def test_real_suffix_drops_end():
    log = augment_boundaries(cases_from_labels([["A", "B", "C"]], step=5))
    s = real_suffix(log.cases[0], 1, log.schema)
    assert s.events == ("B", "C") and s.durations == (5.0, 5.0)


def test_unknown_events_counted_and_charged():
    train = augment_boundaries(cases_from_labels([["A", "B"]] * 3))
    test = augment_boundaries(cases_from_labels([["Q", "B", "C"]]))
    ((ee, n, unknown),) = evaluate_baseline(markov_fit([c.labels for c in train.cases]), test, [0.5])
    assert (ee, n, unknown) == (2, 1, 1)


def test_unknown_events_in_pedf_cells(configs):
    cfg = load_config(configs / "chain.yaml")
    data = augment_boundaries(cases_from_labels([["A", "B"]] * 9 + [["Z", "B", "C"]]))
    cfg = RunConfig(**{**cfg.__dict__, "train_fraction": 0.5, "split_seed": 0})
    report = run_benchmark(cfg, data)
    assert sum(r.n_unknown_event_cases for r in report.rows) > 0


def test_report_formats():
    from pedf.benchmark import ReportRow

    rep = ErrorReport([ReportRow("pedf", "kmeans(k=3)", "rf", 20, 3, 1.5, 0.25, 10, 0, 1.234),
                       ReportRow("markov", "-", "-", 20, 7, None, None, 10, 1, 0.0)],
                      {"dataset": "x"})
    csv = rep.to_csv()
    assert csv.splitlines()[0] == "model,clusterer,classifier,known_pct,EE,DE,FE,n_cases,n_unknown_event_cases"
    assert csv.splitlines()[1] == "pedf,kmeans(k=3),rf,20,3,1.5,0.25,10,0"
    assert csv.splitlines()[2] == "markov,-,-,20,7,,,10,1"
    assert rep.to_csv(include_timings=True).splitlines()[1].endswith(",1.234")
    text = rep.to_text()
    assert text.startswith("# dataset: x\n")
    assert rep.cell("markov", 20).ee == 7


def test_config_validation(tmp_path):
    bad = tmp_path / "c.yaml"
    bad.write_text("version: 2\ndataset: {generator: {}}\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("version: 1\ndataset: {}\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("version: 1\ndataset: {path: x.csv}\nknown_pcts: [100]\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("version: 1\ndataset: {path: x.csv}\nbench: {models: [{type: cpt}]}\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("version: 1\ndataset: {path: x.csv}\nsurprise: 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_known_pcts_accept_fractions_and_percents(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("version: 1\ndataset: {path: x.csv}\nknown_pcts: [0.2, 50]\n")
    assert load_config(p).known_pcts == (0.2, 0.5)


def test_digest_ignores_threads(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("version: 1\ndataset: {path: x.csv}\nthreads: 1\n")
    q = tmp_path / "d.yaml"
    q.write_text("version: 1\ndataset: {path: x.csv}\nthreads: 8\n")
    assert load_config(p).digest() == load_config(q).digest()
