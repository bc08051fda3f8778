"""Replay decision loop, ping-pong accounting, and the majority baseline."""

import numpy as np

from helpers import hand_trace

from nextcell.replay import (OracleScorer, ReplayConfig, baseline_next_cell,
                             replay, write_events)
from nextcell.synth import ground_truth_next_cell


def _oscillating_trace():
    rows = [
        (0.0, 1, 10, [(10, -60.0), (11, -70.0), (12, -90.0)]),
        (2.0, 1, 10, [(10, -60.0), (11, -70.0), (12, -90.0)]),
        (4.0, 1, 11, [(11, -55.0), (10, -62.0), (12, -88.0)]),
        (6.0, 1, 11, [(11, -55.0), (10, -62.0), (12, -88.0)]),
        (8.0, 1, 10, [(10, -58.0), (11, -66.0), (12, -90.0)]),
        (0.0, 2, 20, [(20, -61.0), (21, -70.0)]),
        (2.0, 2, 21, [(21, -57.0), (20, -64.0)]),
    ]
    return hand_trace(rows)


def test_zero_events_reports_accuracy_one():
    trace = hand_trace([(0.0, 1, 10, [(10, -60.0), (11, -70.0)]),
                        (2.0, 1, 10, [(10, -60.0), (11, -70.0)])])
    truth = ground_truth_next_cell(trace)
    assert truth == []
    report, events = replay(trace, truth, OracleScorer(), ReplayConfig())
    assert report.handover_count == 0
    assert report.next_cell_accuracy == 1.0
    assert events == []


def test_oracle_scorer_perfect_accuracy():
    trace = _oscillating_trace()
    truth = ground_truth_next_cell(trace)
    assert len(truth) == 3
    report, events = replay(trace, truth, OracleScorer(), ReplayConfig())
    assert report.next_cell_accuracy == 1.0
    assert report.correct_count == report.scored_count == 3
    assert all(e.correct for e in events)


def test_pingpong_counting_window():
    trace = _oscillating_trace()
    truth = ground_truth_next_cell(trace)
    # UE 1: 10->11 at t=4, 11->10 at t=8 (gap 4s)
    report, _ = replay(trace, truth, OracleScorer(), ReplayConfig(pingpong_window_s=5.0))
    assert report.pingpong_count == 1
    report, _ = replay(trace, truth, OracleScorer(), ReplayConfig(pingpong_window_s=3.0))
    assert report.pingpong_count == 0
    assert report.pingpong_count <= report.handover_count


def test_replay_bit_identical_and_nonmutating():
    trace = _oscillating_trace()
    truth = ground_truth_next_cell(trace)

    class CountingScorer:
        def __init__(self):
            self.calls = 0

        def score(self, event, candidates):
            self.calls += 1
            return np.linspace(0.9, 0.1, len(candidates))

    scorer = CountingScorer()
    r1, e1 = replay(trace, truth, scorer, ReplayConfig(threshold=0.2))
    r2, e2 = replay(trace, truth, scorer, ReplayConfig(threshold=0.2))
    assert [ (e.predicted, e.correct) for e in e1 ] == \
        [ (e.predicted, e.correct) for e in e2 ]
    assert r1.next_cell_accuracy == r2.next_cell_accuracy
    assert scorer.calls == 6


def test_unknown_ue_counts_unpredictable():
    trace = _oscillating_trace()
    truth = ground_truth_next_cell(trace)

    class PartialScorer:
        def score(self, event, candidates):
            if event.ue == 2:
                return None
            return np.array([1.0 if c == event.to_cell else 0.0
                             for c in candidates])

    report, events = replay(trace, truth, PartialScorer(), ReplayConfig())
    assert report.unpredictable_count == 1
    assert report.scored_count == 2
    assert report.next_cell_accuracy == 1.0
    assert any(e.correct is None for e in events)


def test_below_threshold_counts_incorrect():
    trace = _oscillating_trace()
    truth = ground_truth_next_cell(trace)

    class TimidScorer:
        def score(self, event, candidates):
            return np.full(len(candidates), 0.1)

    report, events = replay(trace, truth, TimidScorer(), ReplayConfig(threshold=0.5))
    assert report.scored_count == 3
    assert report.correct_count == 0
    assert all(e.predicted is None for e in events)


def test_from_t_filters_events():
    trace = _oscillating_trace()
    truth = ground_truth_next_cell(trace)
    report, _ = replay(trace, truth, OracleScorer(), ReplayConfig(), from_t=5.0)
    assert report.handover_count == 1


def test_event_log_format(tmp_path):
    trace = _oscillating_trace()
    truth = ground_truth_next_cell(trace)
    _, events = replay(trace, truth, OracleScorer(), ReplayConfig())
    path = tmp_path / "events.csv"
    write_events(events, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,ue,from,to,predicted,correct,latency_s"
    assert len(lines) == 4


def test_baseline_examples():
    trace = hand_trace([
        (0.0, 1, 10, [(10, -60.0), (11, -70.0)]),
        (2.0, 1, 11, [(11, -55.0), (10, -64.0)]),
        (4.0, 1, 10, [(10, -58.0), (11, -67.0)]),
        (6.0, 1, 11, [(11, -55.0), (10, -64.0)]),
    ])
    truth = ground_truth_next_cell(trace)
    # targets 11, 10, 11: majority 11 -> 2/3
    assert abs(baseline_next_cell(truth) - 2.0 / 3.0) < 1e-12

    single = [t for t in truth if t.to_cell == 11][:1]
    assert baseline_next_cell(single) == 1.0
    assert baseline_next_cell([]) == 1.0


def test_baseline_uniform_targets_approaches_reciprocal():
    rng = np.random.default_rng(0)
    from nextcell.synth import HandoverEvent
    k = 5
    events = [HandoverEvent(float(i), 1, 0, int(rng.integers(1, k + 1)))
              for i in range(5000)]
    assert abs(baseline_next_cell(events) - 1.0 / k) < 0.03
