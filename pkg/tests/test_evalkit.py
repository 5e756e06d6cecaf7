import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from breakwatch.core import BreakoutReport, DetectionConfig, TimeSeries
from breakwatch.errors import InvalidSpec, MalformedLabels
from breakwatch.evalkit import (
    EvalOutcome,
    SynthSpec,
    evaluate,
    f_measure,
    load_dataset,
    read_labeled,
    score,
    summarize,
    synthesize,
    ttd,
    write_labeled,
    write_scoreboard,
)


@pytest.mark.parametrize("true, est, expected", [(100, 107, 7), (100, 100, 0), (100, None, None), (100, 93, 7)])
def test_ttd(true, est, expected):
    assert ttd(true, est) == expected


def test_single_match():
    o = score([103], [100], w=10)
    assert (o.tp, o.fp, o.fn) == (1, 0, 0)
    assert o.precision == o.recall == o.f_measure == 1.0


def test_no_match():
    o = score([150], [100], w=10)
    assert (o.tp, o.fp, o.fn, o.f_measure) == (0, 1, 1, 0.0)


def test_f_measure_example():
    assert f_measure(0.5, 1.0) == pytest.approx(2 / 3)
    o = EvalOutcome(tp=1, fp=1, fn=0)
    assert (o.precision, o.recall) == (0.5, 1.0)
    assert o.f_measure == pytest.approx(2 / 3)


def test_non_significant_report_is_no_detection():
    rep = BreakoutReport(101, 150, 1.0, 0.2, False, "edm")
    o = score([rep], [100])
    assert (o.tp, o.fp, o.fn, o.ttd) == (0, 0, 1, None)
    sig = BreakoutReport(101, 150, 1.0, 0.01, True, "edm")
    assert score([sig], [100]).tp == 1


def test_window_zero_requires_exact_hit():
    assert score([100], [100], w=0).tp == 1
    assert score([101], [100], w=0).tp == 0
    with pytest.raises(ValueError):
        score([1], [1], w=-1)


def test_greedy_nearest_first():
    # 108 is closest to 110; 95 then takes 100
    o = score([95, 108], [100, 110], w=10)
    assert (o.tp, o.fp, o.fn) == (2, 0, 0)
    o = score([104], [100, 105], w=10)
    assert (o.tp, o.fp, o.fn) == (1, 0, 1)


def test_empty_cases():
    assert score([], []).f_measure == 0.0
    assert score([], [5]).fn == 1


indices = st.lists(st.integers(1, 300), max_size=8)


@given(indices, indices, st.integers(0, 30), st.randoms())
def test_score_order_invariant(dets, truths, w, rnd):
    shuffled = dets[:]
    rnd.shuffle(shuffled)
    assert score(dets, truths, w) == score(shuffled, truths, w)


@given(indices, indices, st.integers(0, 30))
def test_f_measure_bounds(dets, truths, w):
    o = score(dets, truths, w)
    p, r, f = o.precision, o.recall, o.f_measure
    assert 0.0 <= f <= min(1.0, 2 * p, 2 * r)
    if p + r > 0:
        assert f == pytest.approx(1 / ((1 / p + 1 / r) / 2) if p and r else 0.0)
    assert o.tp + o.fp == len(dets) and o.tp + o.fn == len(truths)


def test_synth_noiseless_step():
    s = synthesize(SynthSpec((200, 200), (0, 1), 0.0, 0, seed=4))
    assert s.values.tolist() == [0.0] * 200 + [1.0] * 200
    assert s.true_breakouts == {200} and s.anomaly_labels == set()


def test_synth_anomalies():
    spec = SynthSpec((200, 200), (0, 1), 0.1, 5, 10.0, seed=1)
    s = synthesize(spec)
    assert len(s.anomaly_labels) == 5
    mean = np.repeat([0.0, 1.0], 200)
    for i in s.anomaly_labels:
        assert abs(s.values[i - 1] - mean[i - 1]) >= 10.0


@given(
    st.lists(st.integers(1, 60), min_size=1, max_size=4).flatmap(
        lambda ls: st.tuples(st.just(ls), st.lists(st.floats(-5, 5), min_size=len(ls), max_size=len(ls)))
    ),
    st.floats(0, 2),
    st.floats(-20, 20),
    st.integers(0, 2**32),
    st.data(),
)
def test_synth_label_consistency(shape, sd, magnitude, seed, data):
    lengths, means = shape
    count = data.draw(st.integers(0, sum(lengths) - 1))
    spec = SynthSpec(tuple(lengths), tuple(means), sd, count, magnitude, seed)
    s = synthesize(spec)
    mean = np.repeat(spec.segment_means, spec.segment_lengths)
    assert s.n == sum(lengths) and len(s.anomaly_labels) == count
    bound = abs(magnitude) * spec.max_shift - 3 * sd
    for i in s.anomaly_labels:
        assert abs(s.values[i - 1] - mean[i - 1]) >= bound - 1e-9
    assert synthesize(spec) == s


def test_synth_deterministic_and_seeded():
    spec = SynthSpec((50, 50), (0, 1), 0.5, 3, seed=9)
    assert synthesize(spec) == synthesize(spec)
    other = SynthSpec((50, 50), (0, 1), 0.5, 3, seed=10)
    assert synthesize(other) != synthesize(spec)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"segment_lengths": (10, 10), "segment_means": (0.0,)},
        {"segment_lengths": (), "segment_means": ()},
        {"segment_lengths": (0, 5), "segment_means": (0.0, 1.0)},
        {"noise_sd": -1.0},
        {"anomaly_count": 400},
        {"anomaly_count": -1},
        {"seed": -1},
    ],
)
def test_synth_spec_validation(kwargs):
    with pytest.raises(InvalidSpec):
        SynthSpec(**kwargs)


def test_labeled_round_trip(tmp_path):
    s = synthesize(SynthSpec((30, 30), (0, 2), 0.2, 2, seed=3))
    side = write_labeled(s, tmp_path / "a.csv")
    assert json.loads(side.read_text())["true_breakouts"] == [30]
    assert read_labeled(tmp_path / "a.csv") == s


@pytest.mark.parametrize(
    "content",
    ['{"true_breakouts": "x"}', "[1, 2]", "not json", '{"anomaly_labels": []}', '{"true_breakouts": [999]}'],
)
def test_malformed_labels(tmp_path, content):
    s = TimeSeries(np.arange(10.0))
    write_labeled(s, tmp_path / "a.csv")
    (tmp_path / "a.json").write_text(content)
    with pytest.raises(MalformedLabels):
        read_labeled(tmp_path / "a.csv")


def test_missing_sidecar(tmp_path):
    (tmp_path / "a.csv").write_text("1\n2\n")
    with pytest.raises(MalformedLabels):
        load_dataset(tmp_path)


def test_empty_dataset(tmp_path):
    with pytest.raises(MalformedLabels):
        load_dataset(tmp_path)


def test_evaluate_and_summarize(tmp_path):
    for k in range(3):
        write_labeled(synthesize(SynthSpec((40, 40), (0, 1), 0.1, 1, seed=k)), tmp_path / f"s{k}.csv")
    data = load_dataset(tmp_path)
    assert [name for name, _ in data] == ["s0", "s1", "s2"]
    rows = evaluate(data, ["edmx", "edivisive"], DetectionConfig(delta=5, permutations=19), w=5)
    assert len(rows) == 6
    summary = summarize(rows, 5)
    assert summary["match_window"] == 5
    assert set(summary["methods"]) == {"edmx", "edivisive"}
    for entry in summary["methods"].values():
        assert entry["series"] == 3 and 0.0 <= entry["f_measure"] <= 1.0
    out = tmp_path / "board.csv"
    write_scoreboard(rows, out)
    lines = out.read_text().splitlines()
    assert lines[0].startswith("series,method,tau_hat") and len(lines) == 7
