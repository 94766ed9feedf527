"""Surrogate eruption atmosphere: injection, chemistry, transport, AOD, heating.

The model advances a state (SO2, SO4, T, AOD) one step at a time:

  1. injection of an SO2 pulse at the eruption day,
  2. pointwise SO2 -> SO4 conversion and SO4 removal (exponential factors),
  3. conservative upwind poleward advection of both tracers in the
     stratospheric levels, with zero flux through the polar cap,
  4. AOD diagnosed from the column sulfate burden,
  5. temperature: AOD-driven stratospheric heating, Newtonian relaxation
     toward an equilibrium temperature, and AR(1) band noise.

The tracer subsystem is linear in the injected mass, so doubling the
eruption doubles every SO2/SO4/AOD value at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, NumericalFailureError
from .grid import LevelRange, SphericalGrid, STRATOSPHERE_RANGE, lat_row_index, level_mask

# Column air-mass constant: kg of air per hPa of pressure thickness for the
# whole (unit-weight) sphere.  Recorded in run manifests; based on a total
# atmosphere mass of 5.1e18 kg over ~1000 hPa.
AIR_MASS_PER_HPA_KG = 5.1e15
TG_TO_KG = 1.0e9

# Noise bands: the four canonical zones plus everything south of -23.5 deg.
N_NOISE_BANDS = 5


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the surrogate (the forward model's parameter vector)."""

    tau_chem: float = 18.0  # days, SO2 -> SO4 e-folding
    tau_decay: float | None = 360.0  # days, SO4 removal e-folding (None disables removal)
    v_transport: float = 0.35  # deg/day poleward advection speed
    k_aod: float = 7.5e4  # AOD per (kg/kg * hPa) of column sulfate
    k_heat: float = 0.5  # K/day per unit AOD, stratospheric heating
    tau_relax: float = 40.0  # days, Newtonian relaxation time
    t_eq: float = 240.0  # K, equilibrium stratospheric temperature
    noise_amp: float = 0.0003  # K, AR(1) innovation amplitude scale
    noise_memory: float = 0.999  # AR(1) autocorrelation, in [0, 1)
    dt: float = 0.25  # days per step
    n_steps: int = 4800  # steps M; default run spans 1200 days

    def __post_init__(self):
        if self.tau_chem <= 0 or self.tau_relax <= 0 or self.dt <= 0:
            raise ConfigurationError("all timescales and dt must be positive")
        if self.tau_decay is not None and self.tau_decay <= 0:
            raise ConfigurationError("tau_decay must be positive or None")
        if not 0.0 <= self.noise_memory < 1.0:
            raise ConfigurationError("noise_memory must lie in [0, 1)")
        if self.v_transport < 0:
            raise ConfigurationError("v_transport must be nonnegative")
        if self.n_steps < 1:
            raise ConfigurationError("n_steps must be >= 1")


#: Frozen default parameter set used by the experiment protocol.
PRESET_ID = "hswv-surrogate-v1"
PRESET_PARAMS = ModelParams()


@dataclass(frozen=True)
class EruptionSpec:
    """Eruption forcing: SO2 mass (Tg), injection day, latitude, level range."""

    mass: float = 10.0
    day: float = 90.0
    lat: float = 15.1
    injection_levels: LevelRange = STRATOSPHERE_RANGE

    def __post_init__(self):
        if self.mass < 0:
            raise ConfigurationError("eruption mass must be >= 0")


@dataclass(frozen=True)
class RunSeed:
    """Identifies one run's pseudo-random stream."""

    seed: int
    member_index: int = 0


@dataclass
class ModelState:
    """Per-step model state; one instance is owned by one run."""

    so2: np.ndarray  # (nlat, nlon, nlev) kg/kg
    so4: np.ndarray  # (nlat, nlon, nlev) kg/kg
    temperature: np.ndarray  # (nlat, nlon, nlev) K
    aod: np.ndarray  # (nlat, nlon) dimensionless
    step_index: int
    time: float  # days
    band_noise: np.ndarray = field(default_factory=lambda: np.zeros(N_NOISE_BANDS))


def make_rng(seed: RunSeed) -> np.random.Generator:
    """The run's random stream; fully determined by (seed, member_index)."""
    return np.random.default_rng([seed.seed & (2**64 - 1), seed.member_index])


def noise_band_of_rows(grid: SphericalGrid) -> np.ndarray:
    """Band index per latitude row: 0 south of -23.5, then e, s, t, p as 1..4."""
    c = grid.lat_centers
    band = np.zeros(grid.nlat, dtype=int)
    band[(c >= -23.5) & (c < 23.5)] = 1
    band[(c >= 23.5) & (c < 35.0)] = 2
    band[(c >= 35.0) & (c < 66.5)] = 3
    band[c >= 66.5] = 4
    return band


def initialize(
    params: ModelParams,
    grid: SphericalGrid,
    seed: RunSeed | None = None,
    rng: np.random.Generator | None = None,
) -> ModelState:
    """Zero tracers and AOD; temperature = t_eq plus a small seeded perturbation.

    Pass an existing rng to keep the perturbation and the subsequent stepping
    noise on one stream; passing a RunSeed creates the stream internally.
    """
    if rng is None:
        if seed is None:
            raise ConfigurationError("initialize needs a RunSeed or an rng")
        rng = make_rng(seed)
    shape3 = (grid.nlat, grid.nlon, grid.nlev)
    perturb = params.noise_amp * 0.01 * rng.standard_normal(shape3)
    # Start the band noise from its stationary distribution so runs begin in
    # statistical equilibrium rather than spinning variability up from zero.
    stationary_sd = params.noise_amp * np.sqrt(params.dt / (1.0 - params.noise_memory**2))
    band_noise = stationary_sd * rng.standard_normal(N_NOISE_BANDS)
    return ModelState(
        so2=np.zeros(shape3),
        so4=np.zeros(shape3),
        temperature=np.full(shape3, params.t_eq) + perturb,
        aod=np.zeros((grid.nlat, grid.nlon)),
        step_index=0,
        time=0.0,
        band_noise=band_noise,
    )


def convert_mass_to_mixing_ratio(
    mass_tg: float,
    grid: SphericalGrid,
    cell_mask: np.ndarray,
    lev_mask: np.ndarray,
) -> np.ndarray:
    """3D mixing-ratio increment whose mass integral over the selection is mass_tg.

    The increment is a uniform mixing ratio over the selected cells/levels, so
    the injected mass distributes across levels proportionally to dp.
    """
    if not cell_mask.any() or not lev_mask.any():
        raise ConfigurationError("injection selection is empty")
    w_cells = grid.area_weight[cell_mask].sum()
    dp_sum = grid.dp[lev_mask].sum()
    denom = w_cells * dp_sum * AIR_MASS_PER_HPA_KG
    q = mass_tg * TG_TO_KG / denom
    inc = np.zeros((grid.nlat, grid.nlon, grid.nlev))
    sel3 = cell_mask[:, :, None] & lev_mask[None, None, :]
    inc[sel3] = q
    return inc


def total_sulfur_kg(state: ModelState, grid: SphericalGrid) -> float:
    """Global sulfur mass (SO2 + SO4) in kg."""
    col = np.tensordot(state.so2 + state.so4, grid.dp, axes=([2], [0]))
    return float((col * grid.area_weight).sum() * AIR_MASS_PER_HPA_KG)


def _advect_poleward(
    fields: list[np.ndarray],
    grid: SphericalGrid,
    lev_idx: np.ndarray,
    i_src: int,
    frac: float,
) -> None:
    """Conservative first-order upwind northward transport, in place.

    Moves a fraction frac of each donor cell's mass to its northern neighbor,
    for rows i_src..nlat-2 on the selected levels.  The polar row only
    receives; nothing leaves through the cap.
    """
    if frac == 0.0 or i_src >= grid.nlat - 1:
        return
    w = grid.area_weight[:, :, None] * grid.dp[lev_idx][None, None, :]
    for f in fields:
        q = f[:, :, lev_idx]
        mass = q * w
        donor = frac * mass[i_src:-1]
        mass[i_src:-1] -= donor
        mass[i_src + 1 :] += donor
        f[:, :, lev_idx] = mass / w


def step(
    state: ModelState,
    params: ModelParams,
    eruption: EruptionSpec,
    grid: SphericalGrid,
    rng: np.random.Generator,
) -> ModelState:
    """Advance one step; returns a new state, the input is not modified."""
    dt = params.dt
    so2 = state.so2.copy()
    so4 = state.so4.copy()
    temp = state.temperature.copy()

    lev_flags = level_mask(grid, eruption.injection_levels)
    lev_idx = np.nonzero(lev_flags)[0]

    # 1. injection
    if eruption.mass > 0.0 and state.time <= eruption.day < state.time + dt:
        cell_mask = np.zeros((grid.nlat, grid.nlon), dtype=bool)
        cell_mask[lat_row_index(grid, eruption.lat), :] = True
        so2 += convert_mass_to_mixing_ratio(eruption.mass, grid, cell_mask, lev_flags)

    # 2. chemistry: exact exponential transfer, then SO4 removal
    convert = 1.0 - np.exp(-dt / params.tau_chem)
    transferred = so2 * convert
    so2 -= transferred
    so4 += transferred
    if params.tau_decay is not None:
        so4 *= np.exp(-dt / params.tau_decay)

    # 3. poleward transport north of the eruption latitude
    frac = params.v_transport * dt / grid.dlat
    if frac > 1.0:
        raise ConfigurationError(
            f"transport CFL fraction {frac:.3f} > 1; reduce dt or v_transport"
        )
    i_src = lat_row_index(grid, eruption.lat)
    _advect_poleward([so2, so4], grid, lev_idx, i_src, frac)

    # 4. AOD from the column sulfate burden
    aod = params.k_aod * np.tensordot(so4, grid.dp, axes=([2], [0]))

    # 5. temperature: heating in stratospheric levels, relaxation, band noise
    temp += dt * (-(temp - params.t_eq) / params.tau_relax)
    temp[:, :, lev_idx] += dt * params.k_heat * aod[:, :, None]
    innovations = params.noise_amp * np.sqrt(dt) * rng.standard_normal(N_NOISE_BANDS)
    band_noise = params.noise_memory * state.band_noise + innovations
    temp += band_noise[noise_band_of_rows(grid)][:, None, None]

    m_next = state.step_index + 1
    checks = so2.sum() + so4.sum() + temp.sum() + aod.sum()
    if not np.isfinite(checks):
        raise NumericalFailureError(
            f"non-finite field values at step {m_next}", step_index=m_next
        )

    return ModelState(
        so2=so2,
        so4=so4,
        temperature=temp,
        aod=aod,
        step_index=m_next,
        time=state.time + dt,
        band_noise=band_noise,
    )
