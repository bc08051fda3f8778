"""Synthetic cellular scenarios: hexagonal cell layouts, random-waypoint UE
motion, log-distance radio metrics, and ground-truth next-cell labels.

Traces are deterministic under the configured seed: each UE draws from its
own seeded stream, and the merged trace is ordered by (t, ue), so per-UE
generation could run in parallel without changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataFormatError
from .graph import homogenize

PATHLOSS_EXPONENT = 3.5
SHADOWING_SIGMA_DB = 4.0
HYSTERESIS_DB = 3.0
TX_POWER_DBM = -40.0  # received power at the 10 m reference distance
REF_DISTANCE_M = 10.0

RADIO_FEATURES = ("rsrp_dbm", "rsrq_db", "transport_blocks", "available_rbs",
                  "packet_size_bytes", "mcs_index", "sig_pw_ul_dbm", "sig_pw_dl_dbm")

TRACE_COLUMNS = ("t", "ue", "serving", "cell", "rsrp", "rsrq", "tb", "arb",
                 "pkt", "mcs", "ul", "dl")


@dataclass
class RadioFeatureVector:
    rsrp_dbm: float
    rsrq_db: float
    transport_blocks: float
    available_rbs: float
    packet_size_bytes: float
    mcs_index: float
    sig_pw_ul_dbm: float
    sig_pw_dl_dbm: float

    def as_array(self):
        return np.array([getattr(self, name) for name in RADIO_FEATURES])

    def validate(self):
        if not -140.0 <= self.rsrp_dbm <= -40.0:
            raise ConfigError(f"rsrp_dbm out of range: {self.rsrp_dbm}")
        if not -20.0 <= self.rsrq_db <= -3.0:
            raise ConfigError(f"rsrq_db out of range: {self.rsrq_db}")
        if not 0 <= self.mcs_index <= 28:
            raise ConfigError(f"mcs_index out of range: {self.mcs_index}")
        for name in ("transport_blocks", "available_rbs", "packet_size_bytes"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")


@dataclass
class ScenarioConfig:
    n_cells: int = 31
    n_ues: int = 70
    area_m: float = 2000.0
    cell_spacing_m: float = 380.0
    speed_mps: tuple = (1.0, 3.0)
    duration_s: float = 240.0
    sample_period_s: float = 2.0
    max_neighbors: int = 4
    rng_seed: int = 1
    roam_radius_m: float | None = 300.0  # None lets UEs roam the whole area
    max_cells_per_ue: int = 6  # monitored-set budget, like a measurement config

    def validate(self):
        if self.n_cells < 2:
            raise ConfigError("n_cells must be at least 2")
        if self.n_ues < 1:
            raise ConfigError("n_ues must be positive")
        if self.area_m <= 0:
            raise ConfigError("area_m must be positive")
        if self.cell_spacing_m <= 0:
            raise ConfigError("cell_spacing_m must be positive")
        lo, hi = self.speed_mps
        if lo < 0 or hi < lo:
            raise ConfigError("speed_mps must be a nonnegative (min, max) range")
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be positive")
        if self.sample_period_s <= 0:
            raise ConfigError("sample_period_s must be positive")
        steps = self.duration_s / self.sample_period_s
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError("sample_period_s must divide duration_s")
        if not 2 <= self.max_neighbors:
            raise ConfigError("max_neighbors must be at least 2")
        if self.max_cells_per_ue < self.max_neighbors:
            raise ConfigError("max_cells_per_ue must be at least max_neighbors")
        if self.roam_radius_m is not None and self.roam_radius_m <= 0:
            raise ConfigError("roam_radius_m must be positive or unset")
        _ = hex_layout(self.n_cells, self.area_m, self.cell_spacing_m)
        return self


@dataclass
class MobilitySample:
    t: float
    ue: int
    serving_cell: int
    candidates: list = field(default_factory=list)  # [(cell_id, np.ndarray(8))]


class MobilityTrace:
    """Time-ordered mobility samples, ordered by (t, ue)."""

    def __init__(self, samples, config=None):
        self.samples = sorted(samples, key=lambda s: (s.t, s.ue))
        self.config = config
        self._by_ue = None
        self._index = None

    def __len__(self):
        return len(self.samples)

    def ues(self):
        return sorted({s.ue for s in self.samples})

    def cells(self):
        seen = set()
        for s in self.samples:
            seen.update(c for c, _ in s.candidates)
        return sorted(seen)

    def by_ue(self):
        if self._by_ue is None:
            groups = {}
            for s in self.samples:
                groups.setdefault(s.ue, []).append(s)
            self._by_ue = groups
        return self._by_ue

    def sample_at(self, ue, t):
        if self._index is None:
            self._index = {(s.ue, s.t): s for s in self.samples}
        return self._index.get((ue, t))

    def sample_before(self, ue, t):
        """The UE's latest sample strictly earlier than t, if any."""
        samples = self.by_ue().get(ue)
        if not samples:
            return None
        prev = None
        for s in samples:
            if s.t >= t:
                break
            prev = s
        return prev

    def truncate(self, t_max):
        """Samples with t <= t_max, as a new trace."""
        return MobilityTrace([s for s in self.samples if s.t <= t_max], self.config)


def hex_layout(n_cells, area_m, spacing_m):
    """Cell sites on a hexagonal grid, the n_cells nearest the area center."""
    dy = spacing_m * math.sqrt(3.0) / 2.0
    n_cols = int(area_m // spacing_m) + 1
    n_rows = int(area_m // dy) + 1
    if n_cols * n_rows < n_cells:
        raise ConfigError("cell_spacing_m too large: the area cannot hold n_cells sites")
    pts = []
    for r in range(n_rows):
        x0 = (spacing_m / 2.0) if r % 2 else 0.0
        for c in range(n_cols):
            x = x0 + c * spacing_m
            y = r * dy
            if x <= area_m and y <= area_m:
                pts.append((x, y))
    if len(pts) < n_cells:
        raise ConfigError("cell_spacing_m too large: the area cannot hold n_cells sites")
    pts = np.array(pts)
    center = np.array([area_m / 2.0, area_m / 2.0])
    order = np.lexsort((pts[:, 0], pts[:, 1], np.linalg.norm(pts - center, axis=1)))
    return pts[order[:n_cells]]


def _rsrp(positions, cell_xy, shadow_db):
    d = np.maximum(np.linalg.norm(positions - cell_xy, axis=-1), REF_DISTANCE_M)
    pl = 10.0 * PATHLOSS_EXPONENT * np.log10(d / REF_DISTANCE_M)
    return np.clip(TX_POWER_DBM - pl + shadow_db, -140.0, -40.0)


def _candidate_features(rsrp, rng):
    q = np.clip((rsrp + 120.0) / 60.0, 0.0, 1.0)
    rsrq = np.clip(-19.5 + 14.0 * q + rng.normal(0.0, 0.6), -20.0, -3.0)
    mcs = float(np.clip(round(28.0 * q + rng.normal(0.0, 1.5)), 0, 28))
    tb = float(rng.poisson(4.0 + 40.0 * q))
    arb = float(rng.poisson(20.0 + 60.0 * q))
    pkt = float(max(round(200.0 + 1300.0 * q + rng.normal(0.0, 80.0)), 1))
    ul = np.clip(rsrp - 18.0 + rng.normal(0.0, 2.0), -140.0, -40.0)
    dl = np.clip(rsrp - 3.0 + rng.normal(0.0, 1.0), -140.0, -40.0)
    return np.array([rsrp, rsrq, tb, arb, pkt, mcs, ul, dl])


def _ue_samples(ue, cfg, cells):
    rng = np.random.default_rng([cfg.rng_seed, 7919, ue])
    n_cells = cells.shape[0]
    shadow = rng.normal(0.0, SHADOWING_SIGMA_DB, n_cells)
    home = rng.uniform(0.0, cfg.area_m, 2)
    pos = home.copy()
    lo, hi = cfg.speed_mps
    k = min(cfg.max_neighbors, n_cells)

    def next_waypoint():
        if cfg.roam_radius_m is None:
            return rng.uniform(0.0, cfg.area_m, 2)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        radius = cfg.roam_radius_m * math.sqrt(rng.uniform())
        return np.clip(home + radius * np.array([math.cos(angle), math.sin(angle)]),
                       0.0, cfg.area_m)

    waypoint = next_waypoint()
    speed = rng.uniform(lo, hi)
    serving = None
    monitored = []  # bounded measurement set; once full, only these cells count
    samples = []
    n_steps = int(round(cfg.duration_s / cfg.sample_period_s)) + 1
    for step in range(n_steps):
        t = step * cfg.sample_period_s
        rsrp = _rsrp(pos, cells, shadow)
        if len(monitored) >= cfg.max_cells_per_ue:
            visible = np.array(monitored)
        else:
            visible = np.arange(n_cells)
        vis_order = visible[np.lexsort((visible, -rsrp[visible]))]  # rsrp desc, id asc
        top = []
        for c in vis_order:
            c = int(c)
            if c in monitored:
                top.append(c)
            elif len(monitored) < cfg.max_cells_per_ue:
                monitored.append(c)
                top.append(c)
            if len(top) == k:
                break
        best = top[0]
        if serving is None:
            serving = best
        elif rsrp[best] >= rsrp[serving] + HYSTERESIS_DB:
            serving = best
        if serving not in top:
            top[-1] = serving
        candidates = [(c, _candidate_features(float(rsrp[c]), rng)) for c in top]
        samples.append(MobilitySample(t, ue, serving, candidates))

        if hi > 0:
            remaining = speed * cfg.sample_period_s
            while remaining > 0:
                delta = waypoint - pos
                dist = float(np.linalg.norm(delta))
                if dist <= remaining:
                    pos = waypoint.copy()
                    remaining -= dist
                    waypoint = next_waypoint()
                    speed = rng.uniform(lo, hi)
                    if speed == 0:
                        break
                else:
                    pos = pos + delta * (remaining / dist)
                    remaining = 0.0
    return samples


def generate_scenario(cfg):
    """Deterministic mobility trace for the configured scenario."""
    cfg.validate()
    cells = hex_layout(cfg.n_cells, cfg.area_m, cfg.cell_spacing_m)
    samples = []
    for ue in range(cfg.n_ues):
        samples.extend(_ue_samples(ue, cfg, cells))
    return MobilityTrace(samples, config=cfg)


def trace_to_graph(trace):
    """Graph over observed UEs and cells, one edge per associated pair.

    The first observation of each (ue, cell) pair supplies the edge
    features (edge ids follow observation order, so the dedup rule keeps
    exactly these). Node features are the means of incident edge features,
    giving generated and ingested data the same schema.
    """
    ue_ids = trace.ues()
    cell_ids = trace.cells()
    seen = set()
    edge_rows = []
    for s in trace.samples:
        for cell, feats in s.candidates:
            key = (s.ue, cell)
            if key in seen:
                continue
            seen.add(key)
            edge_rows.append((len(edge_rows), s.ue, cell, feats.copy(), s.t))

    sums = {}
    counts = {}
    for _, ue, cell, feats, _t in edge_rows:
        for node in (("u", ue), ("c", cell)):
            sums[node] = sums.get(node, 0.0) + feats
            counts[node] = counts.get(node, 0) + 1

    def node_feats(kind, raw):
        total = sums.get((kind, raw))
        if total is None:
            return np.zeros(len(RADIO_FEATURES))
        return total / counts[(kind, raw)]

    ue_table = [(u, node_feats("u", u)) for u in ue_ids]
    cell_table = [(c, node_feats("c", c)) for c in cell_ids]
    return homogenize(ue_table, cell_table, edge_rows)


@dataclass
class HandoverEvent:
    t: float
    ue: int
    from_cell: int
    to_cell: int


def ground_truth_next_cell(trace):
    """One record per serving-cell change per UE, ordered by time."""
    events = []
    for ue, samples in trace.by_ue().items():
        prev = None
        for s in samples:
            if prev is not None and s.serving_cell != prev:
                events.append(HandoverEvent(s.t, ue, prev, s.serving_cell))
            prev = s.serving_cell
    events.sort(key=lambda e: (e.t, e.ue))
    return events


def _fmt(x):
    return format(float(x), ".10g")


def write_trace(trace, path):
    """One line per candidate per sample: t,ue,serving,cell,<8 features>."""
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for s in trace.samples:
            for cell, feats in s.candidates:
                fields = [_fmt(s.t), str(s.ue), str(s.serving_cell), str(cell)]
                fields.extend(_fmt(v) for v in feats)
                fh.write(",".join(fields) + "\n")


def read_trace(path):
    samples = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header.split(",") != list(TRACE_COLUMNS):
            raise DataFormatError(f"{path}:1: unexpected trace header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(TRACE_COLUMNS):
                raise DataFormatError(f"{path}:{lineno}: expected "
                                      f"{len(TRACE_COLUMNS)} fields, got {len(parts)}")
            try:
                t = float(parts[0])
                ue = int(parts[1])
                serving = int(parts[2])
                cell = int(parts[3])
                feats = np.array([float(v) for v in parts[4:]])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            key = (t, ue)
            if key not in samples:
                samples[key] = MobilitySample(t, ue, serving, [])
            samples[key].candidates.append((cell, feats))
    return MobilityTrace(list(samples.values()))
