import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pedf.errors import AlreadyAugmented, BadTimestamp, DegenerateCase, EmptyLabel, EmptyLog, MissingColumn
from pedf.event_log import (
    END,
    START,
    ParseConfig,
    augment_boundaries,
    cases_from_labels,
    format_timestamp,
    known_count,
    parse_log,
    parse_timestamp,
    split_cases,
    truncate_prefix,
    write_log_csv,
)

FINES = """case,event,time,amount,expense,article
A1,Create Fine,2006/07/24,35.0,,157
A1,Send Fine,2006/12/05,,11.0,
"""


def test_fines_style_rows():
    log = parse_log(FINES, ParseConfig(nominal=("article",)))
    assert len(log.cases) == 1
    case = log.cases[0]
    assert case.labels == ["Create Fine", "Send Fine"]
    assert log.schema.numeric_features == ("amount", "expense")
    assert log.schema.nominal_names == ("article",)
    assert case.records[0].numeric_values == (35.0, None)
    assert case.records[1].numeric_values == (None, 11.0)
    assert case.records[0].nominal_values == ("157",)
    assert case.records[1].timestamp - case.records[0].timestamp == 134 * 86400


def test_header_only_is_empty():
    with pytest.raises(EmptyLog):
        parse_log("case,event,time\n")
    with pytest.raises(EmptyLog):
        parse_log("")


def test_missing_column():
    with pytest.raises(MissingColumn):
        parse_log("case,activity,time\n1,A,2020/01/01\n")


def test_bad_timestamp_names_row():
    with pytest.raises(BadTimestamp) as err:
        parse_log("case,event,time\n1,A,2020/01/01\n1,B,yesterday\n")
    assert err.value.row == 3


def test_empty_label():
    with pytest.raises(EmptyLabel):
        parse_log("case,event,time\n1,,2020/01/01\n")


def test_records_sorted_by_timestamp():
    log = parse_log("case,event,time\n1,B,2020/01/02\n1,A,2020/01/01\n")
    assert log.cases[0].labels == ["A", "B"]


@given(st.lists(st.tuples(st.integers(0, 5), st.sampled_from("ABC")), min_size=1, max_size=20))
def test_sort_matches_stable_sort_oracle(rows):
    text = "case,event,time\n" + "".join(f"c,{lab},2020/01/0{day + 1}\n" for day, lab in rows)
    log = parse_log(text)
    expected = [lab for _, lab in sorted(rows, key=lambda r: r[0])]
    assert log.cases[0].labels == expected


def test_cases_grouped_in_first_appearance_order():
    log = parse_log("case,event,time\n2,A,2020/01/01\n1,A,2020/01/01\n2,B,2020/01/02\n")
    assert [c.case_id for c in log.cases] == ["2", "1"]
    assert log.cases[0].labels == ["A", "B"]


def test_record_limit_drops_partial_trailing_case():
    text = "case,event,time\n1,A,2020/01/01\n1,B,2020/01/02\n2,A,2020/01/01\n2,B,2020/01/02\n"
    log = parse_log(text, ParseConfig(record_limit=3))
    assert [c.case_id for c in log.cases] == ["1"]
    assert log.meta["dropped_partial_case"] == "2"
    whole = parse_log(text, ParseConfig(record_limit=4))
    assert len(whole.cases) == 2
    assert whole.meta["dropped_partial_case"] is None


def test_augment():
    log = augment_boundaries(parse_log(FINES))
    assert log.cases[0].labels == [START, "Create Fine", "Send Fine", END]
    with pytest.raises(AlreadyAugmented):
        augment_boundaries(log)


def test_augment_single_event_case():
    log = augment_boundaries(cases_from_labels([["A"]]))
    assert len(log.cases[0].records) == 3


@given(st.lists(st.lists(st.sampled_from("ABC"), min_size=1, max_size=6), min_size=1, max_size=5))
def test_augmented_length(seqs):
    raw = cases_from_labels(seqs)
    aug = augment_boundaries(raw)
    for a, b in zip(raw.cases, aug.cases):
        assert len(b.records) == len(a.records) + 2
        assert b.records[0].timestamp == a.records[0].timestamp
        assert b.records[-1].timestamp == a.records[-1].timestamp


def test_split_sizes_and_determinism():
    log = cases_from_labels([["A"]] * 10)
    train, test = split_cases(log, 0.7, 1)
    assert (len(train.cases), len(test.cases)) == (7, 3)
    again = split_cases(log, 0.7, 1)
    assert [c.case_id for c in again[0].cases] == [c.case_id for c in train.cases]
    ids = sorted(c.case_id for c in train.cases + test.cases)
    assert ids == sorted(c.case_id for c in log.cases)


def test_split_large_log_sizes():
    log = cases_from_labels([["A"]] * 14333)
    train, test = split_cases(log, 0.7, 0)
    assert len(train.cases) == 10033
    assert len(test.cases) == 4300


@pytest.mark.parametrize("n_real, fraction, known", [(4, 0.5, 2), (5, 0.5, 2), (12, 0.9, 10), (1, 0.2, 1)])
def test_known_count(n_real, fraction, known):
    assert known_count(n_real, fraction) == known


def test_truncate_prefix():
    case = augment_boundaries(cases_from_labels([list("ABCD")])).cases[0]
    prefix, rest = truncate_prefix(case, 0.5)
    assert prefix.labels == [START, "A", "B"]
    assert rest.labels == ["C", "D", END]
    with pytest.raises(ValueError):
        truncate_prefix(case, 1.0)


def test_truncate_needs_real_events():
    from pedf.event_log import Case

    case = augment_boundaries(cases_from_labels([["A"]])).cases[0]
    bare = Case("x", (case.records[0], case.records[-1]))
    with pytest.raises(DegenerateCase):
        truncate_prefix(bare, 0.5)


def test_timestamps_round_trip():
    ts = parse_timestamp("2006/07/24")
    assert parse_timestamp(format_timestamp(ts)) == ts
    assert parse_timestamp("2006-07-24T00:00:00Z") == ts
    assert parse_timestamp("24.07.2006", "%d.%m.%Y") == ts


def test_write_then_parse_round_trip():
    log = parse_log(FINES, ParseConfig(nominal=("article",)))
    buf = io.StringIO()
    write_log_csv(augment_boundaries(log), buf)
    back = parse_log(buf.getvalue(), ParseConfig(nominal=("article",)))
    assert back.cases == log.cases
