"""Offline replay of the proactive handover decision loop.

At each ground-truth handover instant the scorer ranks the UE's measured
non-serving cells; the argmax above the decision threshold becomes the
predicted target. Replay never mutates the model, so repeated runs are
bit-identical.

Scorers implement score(event, candidate_cells) -> array of probabilities,
with NaN for cells the model cannot score and None when the UE itself is
outside the model's node set (the transductive limitation).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields

import numpy as np

from .vgae import MessageGraph, encode


@dataclass
class ReplayConfig:
    threshold: float = 0.5
    pingpong_window_s: float = 5.0


@dataclass
class ReplayEvent:
    t: float
    ue: int
    from_cell: int
    to_cell: int
    predicted: int | None
    correct: bool | None  # None when the UE is outside the model's node set
    latency_s: float


@dataclass
class ReplayReport:
    handover_count: int
    scored_count: int
    correct_count: int
    unpredictable_count: int
    next_cell_accuracy: float
    pingpong_count: int
    mean_decision_latency_s: float

    def to_text(self):
        return "\n".join(f"{f.name} = {getattr(self, f.name):.6g}"
                         for f in fields(self)) + "\n"


class VgaeLinkScorer:
    """Scores UE-cell candidates from a trained encoder's mean-path latents.

    Latents are computed once at construction; each event is a handful of
    dot products, which keeps per-event latency far under the budget.
    """

    def __init__(self, state, g, message_pairs=None):
        mg = MessageGraph(g, message_pairs)
        z, _, _ = encode(mg, state, sample=False)
        self._z = z.data
        self._ue_node = g.ue_node
        self._cell_node = g.cell_node

    def score(self, event, candidates):
        u = self._ue_node.get(event.ue)
        if u is None:
            return None
        out = np.full(len(candidates), np.nan)
        zu = self._z[u]
        for i, c in enumerate(candidates):
            node = self._cell_node.get(c)
            if node is None:
                continue
            dot = float(zu @ self._z[node])
            out[i] = 1.0 / (1.0 + np.exp(-dot)) if dot >= 0 else \
                np.exp(dot) / (1.0 + np.exp(dot))
        return out


class OracleScorer:
    """Indicator of the true target; validates the replay plumbing."""

    def score(self, event, candidates):
        return np.array([1.0 if c == event.to_cell else 0.0 for c in candidates])


def replay(trace, truth, scorer, cfg, from_t=None):
    """Score every ground-truth handover; returns (report, events).

    With zero events the accuracy is reported as 1.0 and the zero
    handover_count flags the degenerate case. UEs outside the scorer's node
    set are excluded from accuracy and counted as unpredictable.
    """
    events = []
    last_ho = {}
    pingpong = 0
    latencies = []
    correct = 0
    scored = 0
    unpredictable = 0

    for ev in truth:
        if from_t is not None and ev.t < from_t:
            continue
        prev = last_ho.get(ev.ue)
        if prev is not None and prev[1] == ev.to_cell and \
                ev.t - prev[0] <= cfg.pingpong_window_s:
            pingpong += 1
        last_ho[ev.ue] = (ev.t, ev.from_cell)

        # Score the measurement set reported just before the switch: the
        # decision is proactive, so the post-handover sample is off limits.
        sample = trace.sample_before(ev.ue, ev.t)
        candidates = [c for c, _ in sample.candidates if c != ev.from_cell] \
            if sample is not None else []

        start = time.perf_counter()
        scores = scorer.score(ev, candidates) if candidates else np.zeros(0)
        latency = time.perf_counter() - start

        if scores is None:
            unpredictable += 1
            events.append(ReplayEvent(ev.t, ev.ue, ev.from_cell, ev.to_cell,
                                      None, None, latency))
            continue

        predicted = None
        usable = np.where(np.isfinite(scores))[0]
        if usable.size:
            best = int(usable[np.argmax(scores[usable])])
            if scores[best] >= cfg.threshold:
                predicted = candidates[best]
        ok = predicted == ev.to_cell
        scored += 1
        correct += int(ok)
        latencies.append(latency)
        events.append(ReplayEvent(ev.t, ev.ue, ev.from_cell, ev.to_cell,
                                  predicted, ok, latency))

    report = ReplayReport(
        handover_count=len(events),
        scored_count=scored,
        correct_count=correct,
        unpredictable_count=unpredictable,
        next_cell_accuracy=(correct / scored) if scored else 1.0,
        pingpong_count=pingpong,
        mean_decision_latency_s=float(np.mean(latencies)) if latencies else 0.0,
    )
    return report, events


def baseline_next_cell(truth):
    """Accuracy of always predicting each UE's most frequent target."""
    per_ue = {}
    for ev in truth:
        per_ue.setdefault(ev.ue, []).append(ev.to_cell)
    if not per_ue:
        return 1.0
    correct = 0
    total = 0
    for targets in per_ue.values():
        counts = {}
        for t in targets:
            counts[t] = counts.get(t, 0) + 1
        top = max(counts.values())
        majority = min(t for t, c in counts.items() if c == top)
        correct += counts[majority]
        total += len(targets)
    return correct / total


def write_events(events, path):
    """Per-event log: t,ue,from,to,predicted,correct,latency_s."""
    with open(path, "w") as fh:
        fh.write("t,ue,from,to,predicted,correct,latency_s\n")
        for e in events:
            pred = "" if e.predicted is None else str(e.predicted)
            corr = "" if e.correct is None else str(int(e.correct))
            fh.write(f"{e.t:.10g},{e.ue},{e.from_cell},{e.to_cell},"
                     f"{pred},{corr},{e.latency_s:.6g}\n")
