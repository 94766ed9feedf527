"""Experiment configuration file parsing (YAML) and the run manifest."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from . import __version__
from .errors import ConfigurationError
from .grid import LevelRange, SphericalGrid, build_grid
from .harness import DEFAULT_EXPERIMENTS, ExperimentPlan
from .surrogate import (
    AIR_MASS_PER_HPA_KG,
    EruptionSpec,
    ModelParams,
    PRESET_ID,
    PRESET_PARAMS,
)

CONVENTIONS = {
    "never_active_day": "run length in days (1200 for the default run)",
    "std_divisor": "n-1 (sample standard deviation, also used for standard error)",
    "threshold_tie_break": "inactive branch checked before active, both before hold",
    "zone_membership": "cell-center latitude, half-open [lat_min, lat_max), closed at 90",
}


@dataclass(frozen=True)
class ExperimentConfig:
    grid: dict
    params: ModelParams
    preset: str
    eruption: EruptionSpec
    plan: ExperimentPlan
    output_dir: str
    snapshot_days: tuple[float, ...] = ()

    def build_grid(self) -> SphericalGrid:
        return build_grid(**self.grid)


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigurationError(f"missing field {key!r} in {where}")
    return mapping[key]


def load_config(path: str | Path) -> ExperimentConfig:
    """Load and validate an experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"configuration file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return parse_config(raw)


def parse_config(raw: dict) -> ExperimentConfig:
    grid_raw = dict(raw.get("grid", {}))
    grid = {
        "nlat": int(grid_raw.get("nlat", 32)),
        "nlon": int(grid_raw.get("nlon", 64)),
        "nlev": int(grid_raw.get("nlev", 16)),
        "p_top": float(grid_raw.get("p_top", 1.0)),
        "p_surface": float(grid_raw.get("p_surface", 1000.0)),
    }

    surrogate_raw = dict(raw.get("surrogate", {}))
    preset = surrogate_raw.get("preset", PRESET_ID)
    if preset != PRESET_ID:
        raise ConfigurationError(f"unknown surrogate preset {preset!r}")
    overrides = dict(surrogate_raw.get("overrides", {}))
    valid = set(ModelParams.__dataclass_fields__)
    unknown = set(overrides) - valid
    if unknown:
        raise ConfigurationError(f"unknown surrogate overrides: {sorted(unknown)}")
    params = replace(PRESET_PARAMS, **overrides)

    eruption_raw = dict(raw.get("eruption", {}))
    lev = eruption_raw.get("injection_levels")
    eruption = EruptionSpec(
        mass=float(eruption_raw.get("mass", 10.0)),
        day=float(eruption_raw.get("day", 90.0)),
        lat=float(eruption_raw.get("lat", 15.1)),
        injection_levels=(
            LevelRange(float(lev[0]), float(lev[1])) if lev else LevelRange(25.0, 75.0)
        ),
    )

    plan_raw = dict(raw.get("plan", {}))
    experiments_raw = plan_raw.get("experiments")
    if experiments_raw is None:
        experiments = DEFAULT_EXPERIMENTS
    else:
        experiments = tuple(
            (str(label), float(pair[0]), float(pair[1]))
            for label, pair in experiments_raw.items()
        )
    defaults = ExperimentPlan()
    plan = ExperimentPlan(
        masses=tuple(float(x) for x in plan_raw.get("masses", defaults.masses)),
        experiments=experiments,
        n_members=int(plan_raw.get("n_members", defaults.n_members)),
        baseline_members=int(plan_raw.get("baseline_members", defaults.baseline_members)),
        seed=int(plan_raw.get("seed", defaults.seed)),
    )

    return ExperimentConfig(
        grid=grid,
        params=params,
        preset=preset,
        eruption=eruption,
        plan=plan,
        output_dir=str(raw.get("output_dir", "out")),
        snapshot_days=tuple(float(d) for d in raw.get("snapshot_days", ())),
    )


def config_digest(cfg: ExperimentConfig) -> str:
    """Stable digest over the configuration's canonical JSON form."""
    payload = {
        "grid": cfg.grid,
        "preset": cfg.preset,
        "params": asdict(cfg.params),
        "eruption": asdict(cfg.eruption),
        "plan": {
            "masses": list(cfg.plan.masses),
            "experiments": [list(e) for e in cfg.plan.experiments],
            "n_members": cfg.plan.n_members,
            "baseline_members": cfg.plan.baseline_members,
            "seed": cfg.plan.seed,
        },
        "snapshot_days": list(cfg.snapshot_days),
    }
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def build_manifest(cfg: ExperimentConfig, seeds: dict | None = None) -> dict:
    """Run manifest: versions, digest, seeds, conventions.

    Deliberately timestamp-free so repeated runs produce identical artifacts;
    re-run provenance lives in the output directory, not the manifest.
    """
    return {
        "tool": "volpath",
        "version": __version__,
        "config_digest": config_digest(cfg),
        "surrogate_preset": cfg.preset,
        "plan_seed": cfg.plan.seed,
        "member_seeds": seeds or {},
        "air_mass_per_hpa_kg": AIR_MASS_PER_HPA_KG,
        "never_active_day": cfg.params.dt * cfg.params.n_steps,
        "conventions": CONVENTIONS,
    }
