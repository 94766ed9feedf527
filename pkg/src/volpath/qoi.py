"""Scalar QOI extraction: pressure-weighted vertical mean, then area-weighted zonal mean.

Reductions are normalized (mean-valued) by default so QOI magnitudes match the
field magnitudes the activation thresholds are written against; raw integrals
are available behind a flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalFailureError
from .grid import (
    LevelRange,
    SphericalGrid,
    STRATOSPHERE_RANGE,
    ZoneSpec,
    canonical_zones,
    level_mask,
    zone_weights,
)
from .surrogate import ModelState

FIELD_NAMES = ("SO2", "SUL", "AOD", "T")


@dataclass(frozen=True)
class QoiSpec:
    """One tracked quantity: a field reduced over a zone (and level range if 3D)."""

    id: str
    field: str
    zone: ZoneSpec
    level_range: LevelRange | None

    def __post_init__(self):
        if self.field not in FIELD_NAMES:
            raise ConfigurationError(f"unknown field {self.field!r}")
        if self.field == "AOD" and self.level_range is not None:
            raise ConfigurationError("AOD is 2D; its spec must not carry a level range")
        if self.field != "AOD" and self.level_range is None:
            raise ConfigurationError(f"3D field {self.field} requires a level range")


@dataclass(frozen=True)
class QoiSample:
    qoi_id: str
    step: int
    time: float
    value: float


@dataclass
class QoiSeries:
    """Dense per-step values for one QOI over a full run."""

    qoi_id: str
    values: np.ndarray  # length M+1, indexed by step


def _field_of(state: ModelState, name: str) -> np.ndarray:
    if name == "SO2":
        return state.so2
    if name == "SUL":
        return state.so4
    if name == "AOD":
        return state.aod
    return state.temperature


def vertical_reduce(
    field3d: np.ndarray,
    grid: SphericalGrid,
    level_range: LevelRange,
    normalized: bool = True,
) -> np.ndarray:
    """Pressure-weighted vertical mean (or raw integral) over the selected levels."""
    mask = level_mask(grid, level_range)
    if not mask.any():
        raise ConfigurationError(
            f"no model level has mid-pressure within [{level_range.p_lo}, {level_range.p_hi}] hPa"
        )
    dp = grid.dp[mask]
    out = np.tensordot(field3d[:, :, mask], dp, axes=([2], [0]))
    if normalized:
        out = out / dp.sum()
    return out


def zonal_reduce(
    field2d: np.ndarray,
    grid: SphericalGrid,
    zone: ZoneSpec,
    normalized: bool = True,
) -> float:
    """Area-weighted zonal mean (or raw integral) of a 2D field."""
    w = zone_weights(grid, zone)
    total = w.sum()
    if total == 0.0:
        raise ConfigurationError(f"zone {zone.label!r} contains no cell centers")
    val = float((field2d * w).sum())
    if normalized:
        val = val / total
    return val


def evaluate(spec: QoiSpec, state: ModelState, grid: SphericalGrid) -> QoiSample:
    """Evaluate one QOI on a model state."""
    f = _field_of(state, spec.field)
    if spec.level_range is not None:
        f = vertical_reduce(f, grid, spec.level_range)
    value = zonal_reduce(f, grid, spec.zone)
    if not np.isfinite(value):
        raise NumericalFailureError(
            f"non-finite QOI value for {spec.id} at step {state.step_index}",
            step_index=state.step_index,
        )
    return QoiSample(qoi_id=spec.id, step=state.step_index, time=state.time, value=value)


def registry_canonical() -> list[QoiSpec]:
    """The 16 canonical specs: {SO2, SUL, AOD, T} x {e, s, t, p}, field-major."""
    zones = canonical_zones()
    specs = []
    for field in FIELD_NAMES:
        for label in ("e", "s", "t", "p"):
            lr = None if field == "AOD" else STRATOSPHERE_RANGE
            specs.append(
                QoiSpec(id=f"{field}({label})", field=field, zone=zones[label], level_range=lr)
            )
    return specs


class RegistryEvaluator:
    """Cached-weight evaluator for a fixed registry on a fixed grid.

    Each spec collapses to a single flat weight vector, so per-step evaluation
    is one dot product per QOI and allocates nothing proportional to the grid.
    """

    def __init__(self, grid: SphericalGrid, specs: list[QoiSpec]):
        self.grid = grid
        self.specs = list(specs)
        self._weights = []
        for spec in self.specs:
            wz = zone_weights(grid, spec.zone)
            total = wz.sum()
            if total == 0.0:
                raise ConfigurationError(f"zone {spec.zone.label!r} is empty for {spec.id}")
            wz = wz / total
            if spec.level_range is None:
                self._weights.append((spec.field, wz.ravel()))
            else:
                mask = level_mask(grid, spec.level_range)
                if not mask.any():
                    raise ConfigurationError(f"empty level range for {spec.id}")
                wk = np.where(mask, grid.dp, 0.0)
                wk = wk / wk[mask].sum()
                w3 = wz[:, :, None] * wk[None, None, :]
                self._weights.append((spec.field, w3.ravel()))

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.specs]

    def evaluate_state(self, state: ModelState) -> np.ndarray:
        """Vector of all QOI values for one state, in registry order."""
        out = np.empty(len(self.specs))
        for i, (field, w) in enumerate(self._weights):
            out[i] = w @ _field_of(state, field).ravel()
        if not np.isfinite(out).all():
            bad = self.specs[int(np.argmax(~np.isfinite(out)))].id
            raise NumericalFailureError(
                f"non-finite QOI value for {bad} at step {state.step_index}",
                step_index=state.step_index,
            )
        return out
