"""Experiment orchestration: member runs, baseline ensembles, threshold sweeps,
and the QOI-count overhead benchmark.

The bounds-test thresholds are analysis-side only, so each (mass, member)
trajectory is simulated once and every experiment's pathway is derived from
the same in-situ-extracted series.  Member seeds are derived from the plan
seed with a stable hash so any cell of the grid can be reproduced alone.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .grid import SphericalGrid
from .pathway import (
    BaseDag,
    BoundsTest,
    PathwayAccumulator,
    PathwayDag,
    base_dag_canonical,
    canonical_tests,
)
from .qoi import QoiSeries, QoiSpec, RegistryEvaluator, registry_canonical
from .stats import (
    ActivationSummary,
    BaselineStats,
    EnsembleSummary,
    ensemble_summarize,
    first_activation,
    total_active,
)
from .surrogate import (
    EruptionSpec,
    ModelParams,
    RunSeed,
    initialize,
    make_rng,
    step,
)

DEFAULT_EXPERIMENTS = (
    ("Ex1", 0.5, 0.75),
    ("Ex2", 0.5, 1.0),
    ("Ex3", 0.5, 1.5),
    ("Ex4", 0.5, 2.0),
)


@dataclass(frozen=True)
class ExperimentPlan:
    """The full protocol: eruption masses, threshold experiments, ensemble sizes."""

    masses: tuple[float, ...] = (5.0, 10.0, 20.0)
    experiments: tuple[tuple[str, float, float], ...] = DEFAULT_EXPERIMENTS
    n_members: int = 10
    baseline_members: int = 10
    seed: int = 20260964

    def __post_init__(self):
        if self.n_members < 2 or self.baseline_members < 2:
            raise ConfigurationError("ensembles need >= 2 members")
        for label, t_l, t_u in self.experiments:
            if t_l > t_u:
                raise ConfigurationError(f"{label}: T_l {t_l} > T_u {t_u}")


def derive_seed(plan_seed: int, role: str, member_index: int) -> RunSeed:
    """Stable member seed; independent of execution order and other cells.

    Eruption members share seeds across masses and experiments (the
    thresholds are analysis-side and the tracer forcing is monotone in mass),
    so cross-mass and cross-experiment comparisons use common random numbers.
    """
    key = f"{plan_seed}|{role}|{member_index}".encode()
    digest = hashlib.sha256(key).digest()
    return RunSeed(seed=int.from_bytes(digest[:8], "little"), member_index=member_index)


class TrackerHook:
    """In-situ observer invoked once per model step (and once at the initial state).

    Extracts the QOI vector via cached reductions and, when tests are
    configured, streams the hysteresis taus into a pathway accumulator.  No 3D
    field is ever retained.
    """

    def __init__(
        self,
        grid: SphericalGrid,
        specs: list[QoiSpec],
        n_steps: int,
        dt: float,
        base: BaseDag | None = None,
        tests: dict[str, BoundsTest] | None = None,
        baselines: dict[str, BaselineStats] | None = None,
    ):
        self.evaluator = RegistryEvaluator(grid, specs)
        self.dt = dt
        self.series = np.zeros((len(specs), n_steps + 1))
        self.accumulator = None
        if tests is not None:
            if base is None:
                raise ConfigurationError("tests require a base DAG")
            if list(base.vertices) != self.evaluator.ids:
                raise ConfigurationError("base DAG vertices do not match the registry")
            self.accumulator = PathwayAccumulator(
                base, tests, baselines, n_steps=n_steps, dt=dt
            )

    def observe(self, state) -> None:
        m = state.step_index
        values = self.evaluator.evaluate_state(state)
        self.series[:, m] = values
        if self.accumulator is not None:
            self.accumulator.observe(values, m)

    def series_by_id(self) -> dict[str, np.ndarray]:
        return {qid: self.series[i] for i, qid in enumerate(self.evaluator.ids)}

    def pathway(self) -> PathwayDag | None:
        return self.accumulator.result() if self.accumulator is not None else None


@dataclass
class MemberResult:
    series: dict[str, np.ndarray]
    pathway: PathwayDag | None
    summaries: list[ActivationSummary]
    seed: RunSeed


def activation_summaries(
    pathway: PathwayDag, member_index: int, never_value: float
) -> list[ActivationSummary]:
    return [
        ActivationSummary(
            qoi_id=qid,
            member_index=member_index,
            first_active=first_activation(pathway.vertex_series(qid), pathway.dt, never_value),
            total_active=total_active(pathway.vertex_series(qid), pathway.dt),
        )
        for qid in pathway.base.vertices
    ]


def run_member(
    params: ModelParams,
    eruption: EruptionSpec,
    grid: SphericalGrid,
    seed: RunSeed,
    hook: TrackerHook,
) -> MemberResult:
    """One simulation with the in-situ hook; keeps a single state in memory."""
    rng = make_rng(seed)
    state = initialize(params, grid, rng=rng)
    hook.observe(state)
    for _ in range(params.n_steps):
        state = step(state, params, eruption, grid, rng)
        hook.observe(state)
    pathway = hook.pathway()
    never = params.dt * params.n_steps
    summaries = (
        activation_summaries(pathway, seed.member_index, never) if pathway else []
    )
    return MemberResult(
        series=hook.series_by_id(), pathway=pathway, summaries=summaries, seed=seed
    )


def run_baseline_ensemble(
    plan: ExperimentPlan,
    params: ModelParams,
    grid: SphericalGrid,
    eruption_template: EruptionSpec | None = None,
) -> dict[str, BaselineStats]:
    """Eruption-free ensemble; per-step mean/std for every canonical QOI."""
    template = eruption_template or EruptionSpec()
    quiet = EruptionSpec(
        mass=0.0, day=template.day, lat=template.lat,
        injection_levels=template.injection_levels,
    )
    specs = registry_canonical()
    stats = {s.id: BaselineStats(s.id, params.n_steps) for s in specs}
    for b in range(plan.baseline_members):
        seed = derive_seed(plan.seed, "baseline", b)
        hook = TrackerHook(grid, specs, params.n_steps, params.dt)
        result = run_member(params, quiet, grid, seed, hook)
        for qid, values in result.series.items():
            stats[qid].update(values)
    return stats


@dataclass(frozen=True)
class SummaryRow:
    mass: float
    experiment: str
    qoi_id: str
    n_members: int
    mean_first: float
    se_first: float
    mean_total: float
    se_total: float


@dataclass
class ExperimentResult:
    rows: list[SummaryRow]
    # (mass, experiment, member_index) -> PathwayDag
    pathways: dict[tuple[float, str, int], PathwayDag]
    member_seeds: dict[tuple[float, int], RunSeed]


def run_experiment_grid(
    plan: ExperimentPlan,
    params: ModelParams,
    grid: SphericalGrid,
    baselines: dict[str, BaselineStats],
    eruption_template: EruptionSpec | None = None,
) -> ExperimentResult:
    """Eruption ensembles at every mass, analyzed under every threshold experiment."""
    from .pathway import compute_pathway

    template = eruption_template or EruptionSpec()
    specs = registry_canonical()
    base = base_dag_canonical()
    never = params.dt * params.n_steps
    rows: list[SummaryRow] = []
    pathways: dict[tuple[float, str, int], PathwayDag] = {}
    member_seeds: dict[tuple[float, int], RunSeed] = {}

    for mass in plan.masses:
        eruption = EruptionSpec(
            mass=mass, day=template.day, lat=template.lat,
            injection_levels=template.injection_levels,
        )
        per_member_series = []
        for b in range(plan.n_members):
            seed = derive_seed(plan.seed, "eruption", b)
            member_seeds[(mass, b)] = seed
            hook = TrackerHook(grid, specs, params.n_steps, params.dt)
            try:
                result = run_member(params, eruption, grid, seed, hook)
            except Exception as exc:
                raise type(exc)(
                    f"member {b} (mass {mass} Tg, seed {seed.seed}) failed: {exc}"
                ) from exc
            per_member_series.append(result.series)
        for label, t_l, t_u in plan.experiments:
            tests = canonical_tests(t_l, t_u)
            by_qoi: dict[str, list[ActivationSummary]] = {v: [] for v in base.vertices}
            for b, series in enumerate(per_member_series):
                pathway = compute_pathway(
                    base, series, tests, baselines, dt=params.dt
                )
                pathways[(mass, label, b)] = pathway
                for summary in activation_summaries(pathway, b, never):
                    by_qoi[summary.qoi_id].append(summary)
            for qid in base.vertices:
                s = ensemble_summarize(by_qoi[qid])
                rows.append(
                    SummaryRow(
                        mass=mass,
                        experiment=label,
                        qoi_id=qid,
                        n_members=s.n_members,
                        mean_first=s.mean_first,
                        se_first=s.se_first,
                        mean_total=s.mean_total,
                        se_total=s.se_total,
                    )
                )
    return ExperimentResult(rows=rows, pathways=pathways, member_seeds=member_seeds)


def synthetic_registry(count: int) -> list[QoiSpec]:
    """count copies of the zonal-average-of-vertical-integral QOI (the expensive kind)."""
    if count < 1:
        raise ConfigurationError("QOI count must be >= 1")
    canon = [s for s in registry_canonical() if s.field == "T"]
    specs = []
    for i in range(count):
        template = canon[i % len(canon)]
        specs.append(
            QoiSpec(
                id=f"bench{i}:{template.id}",
                field=template.field,
                zone=template.zone,
                level_range=template.level_range,
            )
        )
    return specs


@dataclass(frozen=True)
class BenchRow:
    qoi_count: int
    baseline_s_per_step: float
    tracked_s_per_step: float
    ratio: float


def bench_overhead(
    qoi_counts: list[int],
    params: ModelParams,
    grid: SphericalGrid,
    repetitions: int = 3,
    n_steps: int = 50,
) -> list[BenchRow]:
    """Per-step wall time with the hook disabled vs enabled at each QOI count."""
    eruption = EruptionSpec(mass=10.0, day=0.0)
    bench_params = replace(params, n_steps=n_steps)
    seed = RunSeed(seed=0, member_index=0)

    def timed_run(specs: list[QoiSpec] | None) -> float:
        rng = make_rng(seed)
        state = initialize(bench_params, grid, rng=rng)
        hook = (
            TrackerHook(grid, specs, n_steps, bench_params.dt) if specs is not None else None
        )
        if hook is not None:
            hook.observe(state)
        start = time.perf_counter()
        for _ in range(n_steps):
            state = step(state, bench_params, eruption, grid, rng)
            if hook is not None:
                hook.observe(state)
        return (time.perf_counter() - start) / n_steps

    baseline = np.mean([timed_run(None) for _ in range(repetitions)])
    rows = []
    for count in qoi_counts:
        specs = synthetic_registry(count)
        tracked = np.mean([timed_run(specs) for _ in range(repetitions)])
        rows.append(
            BenchRow(
                qoi_count=count,
                baseline_s_per_step=float(baseline),
                tracked_s_per_step=float(tracked),
                ratio=float(tracked / baseline),
            )
        )
    return rows
