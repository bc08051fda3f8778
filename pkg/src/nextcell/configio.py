"""Line-oriented `key = value` config files and run manifests."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .errors import ConfigError
from .synth import ScenarioConfig


def read_kv(path):
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def write_kv(path, mapping):
    with open(path, "w") as fh:
        for key, value in mapping.items():
            fh.write(f"{key} = {value}\n")


_SCENARIO_FIELDS = {
    "n_cells": int, "n_ues": int, "area_m": float, "cell_spacing_m": float,
    "duration_s": float, "sample_period_s": float, "max_neighbors": int,
    "rng_seed": int, "max_cells_per_ue": int,
}


def scenario_from_mapping(mapping):
    kwargs = {}
    for key, value in mapping.items():
        if key in _SCENARIO_FIELDS:
            try:
                kwargs[key] = _SCENARIO_FIELDS[key](value)
            except ValueError:
                raise ConfigError(f"field {key}: cannot parse {value!r}") from None
        elif key == "speed_mps":
            parts = value.split(",")
            if len(parts) != 2:
                raise ConfigError(f"field speed_mps: expected 'min,max', got {value!r}")
            kwargs["speed_mps"] = (float(parts[0]), float(parts[1]))
        elif key == "roam_radius_m":
            kwargs["roam_radius_m"] = None if value.lower() == "none" else float(value)
        else:
            raise ConfigError(f"unknown config field {key!r}")
    return ScenarioConfig(**kwargs).validate()


def scenario_from_file(path):
    return scenario_from_mapping(read_kv(path))


def scenario_to_mapping(cfg):
    out = {}
    for key, value in asdict(cfg).items():
        if key == "speed_mps":
            out[key] = f"{value[0]},{value[1]}"
        elif key == "roam_radius_m":
            out[key] = "none" if value is None else str(value)
        else:
            out[key] = str(value)
    return out


def fingerprint_paths(paths):
    """sha256 over the named files' bytes, order-independent by name."""
    digest = hashlib.sha256()
    for path in sorted(str(p) for p in paths):
        digest.update(path.rsplit("/", 1)[-1].encode())
        with open(path, "rb") as fh:
            digest.update(fh.read())
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: list
    dataset_fingerprint: str
    tool_version: str = __version__
    started_at: str = ""
    finished_at: str = ""
    outputs: dict = field(default_factory=dict)
    feature_scale: str = "unit"  # "unit" clamps to [0,1] on load, "radio" not

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def now_iso():
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
