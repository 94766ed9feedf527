"""Base-DAG, hysteresis bounds tests, and the pathway-DAG activation algorithm.

A bounds test classifies one QOI per step as active (1) or inactive (0) with a
hold band between its lower and upper thresholds; the per-step active vertex
sets induce subgraphs of the static base-DAG, recorded as an activation matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigurationError, DegenerateBaselineError
from .qoi import FIELD_NAMES

# Absolute hysteresis thresholds for the tracer QOIs (field units).
SO2_BOUNDS = (4.0e-10, 8.0e-10)
SUL_BOUNDS = (4.0e-10, 8.0e-10)
AOD_BOUNDS = (0.0075, 0.015)

ZONE_LABELS = ("e", "s", "t", "p")


def topological_sort(vertices: list[str], edges: list[tuple[str, str]]) -> list[str]:
    """Kahn's algorithm; raises ConfigurationError on a cycle."""
    succ: dict[str, list[str]] = {v: [] for v in vertices}
    indeg = {v: 0 for v in vertices}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    queue = [v for v in vertices if indeg[v] == 0]
    order = []
    while queue:
        v = queue.pop()
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if len(order) != len(vertices):
        raise ConfigurationError("graph contains a cycle")
    return order


@dataclass(frozen=True)
class BaseDag:
    """Static hypothesis graph over QOI ids; validated acyclic on construction."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ConfigurationError("duplicate vertices in base DAG")
        if len(set(self.edges)) != len(self.edges):
            raise ConfigurationError("duplicate edges in base DAG")
        vs = set(self.vertices)
        for a, b in self.edges:
            if a == b:
                raise ConfigurationError(f"self-loop at {a!r}")
            if a not in vs or b not in vs:
                raise ConfigurationError(f"edge ({a!r}, {b!r}) references unknown vertex")
        topological_sort(list(self.vertices), list(self.edges))

    @property
    def r(self) -> int:
        return len(self.vertices)

    @property
    def s(self) -> int:
        return len(self.edges)


def base_dag_canonical() -> BaseDag:
    """16 vertices, 24 edges: per-zone chemistry chains plus poleward chains."""
    vertices = tuple(f"{f}({z})" for f in FIELD_NAMES for z in ZONE_LABELS)
    edges = []
    chain = ("SO2", "SUL", "AOD", "T")
    for z in ZONE_LABELS:
        for a, b in zip(chain[:-1], chain[1:]):
            edges.append((f"{a}({z})", f"{b}({z})"))
    for f in FIELD_NAMES:
        for za, zb in zip(ZONE_LABELS[:-1], ZONE_LABELS[1:]):
            edges.append((f"{f}({za})", f"{f}({zb})"))
    return BaseDag(vertices=vertices, edges=tuple(edges))


@dataclass(frozen=True)
class AbsoluteHysteresis:
    """Active above upper, inactive below lower, hold in the open band."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ConfigurationError(
                f"absolute test requires lower < upper, got ({self.lower}, {self.upper})"
            )


@dataclass(frozen=True)
class ZScoreHysteresis:
    """Hysteresis on (value - mu_m) / sigma_m against baseline statistics.

    Forced inactive at m = 0.  sigma_m must be strictly positive for m > 0.
    """

    t_l: float
    t_u: float

    def __post_init__(self):
        if not (self.t_l <= self.t_u and self.t_u > 0):
            raise ConfigurationError(
                f"z-score test requires t_l <= t_u and t_u > 0, got ({self.t_l}, {self.t_u})"
            )


@dataclass(frozen=True)
class InactiveTest:
    """Placeholder test that never activates (used when no baseline is available)."""


BoundsTest = AbsoluteHysteresis | ZScoreHysteresis | InactiveTest


@dataclass
class TestState:
    """Per-run hysteresis memory; previous_tau = 0 before the first step."""

    qoi_id: str
    previous_tau: int = 0


def zscore(value: float, mu: float, sigma: float) -> float:
    if sigma <= 0.0:
        raise DegenerateBaselineError(
            f"baseline standard deviation {sigma} is not positive"
        )
    return (value - mu) / sigma


def eval_bounds_test(
    test: BoundsTest,
    state: TestState,
    value: float,
    m: int,
    mu: float | None = None,
    sigma: float | None = None,
) -> int:
    """One hysteresis update; stores and returns the new tau.

    At exact threshold equality the inactive branch is checked before the
    active branch, and both take priority over the hold branch.
    """
    if isinstance(test, InactiveTest):
        tau = 0
    elif isinstance(test, AbsoluteHysteresis):
        if value <= test.lower:
            tau = 0
        elif value >= test.upper:
            tau = 1
        else:
            tau = state.previous_tau
    else:
        if m == 0:
            tau = 0
        else:
            if sigma is None or mu is None:
                raise ConfigurationError(
                    f"z-score test for {state.qoi_id} needs baseline mu/sigma at step {m}"
                )
            if sigma <= 0.0:
                raise DegenerateBaselineError(
                    f"baseline sigma for {state.qoi_id} is zero at step {m}; "
                    "z-score test is not well-defined"
                )
            z = zscore(value, mu, sigma)
            if z <= test.t_l:
                tau = 0
            elif z >= test.t_u:
                tau = 1
            else:
                tau = state.previous_tau
    state.previous_tau = tau
    return tau


@dataclass(frozen=True)
class PathwayDag:
    """Time-indexed activation record over a base-DAG.

    activation[m, l] is the tau of vertex l (in base vertex order) at step m.
    Individual step graphs are materialized on demand.
    """

    base: BaseDag
    activation: np.ndarray  # (M+1, r) bool
    dt: float

    @property
    def n_steps(self) -> int:
        return self.activation.shape[0] - 1

    def vertex_series(self, qoi_id: str) -> np.ndarray:
        l = self.base.vertices.index(qoi_id)
        return self.activation[:, l]


def pathway_step(
    base: BaseDag, taus: np.ndarray
) -> tuple[list[str], list[tuple[str, str]]]:
    """Active vertices and the base edges with both endpoints active."""
    if len(taus) != base.r:
        raise ConfigurationError(f"expected {base.r} taus, got {len(taus)}")
    active = {v for v, t in zip(base.vertices, taus) if t}
    v_m = [v for v in base.vertices if v in active]
    e_m = [e for e in base.edges if e[0] in active and e[1] in active]
    return v_m, e_m


def materialize_dag(
    pathway: PathwayDag, m: int
) -> tuple[list[str], list[tuple[str, str]]]:
    """The step-m subgraph (V_m, E_m)."""
    if not 0 <= m <= pathway.n_steps:
        raise IndexError(f"step {m} outside [0, {pathway.n_steps}]")
    return pathway_step(pathway.base, pathway.activation[m])


class PathwayAccumulator:
    """Streaming activation tracker driven one step at a time.

    The same object serves in-situ observation (fed values as the model runs)
    and offline recomputation from saved series; both paths are identical.
    """

    def __init__(
        self,
        base: BaseDag,
        tests: dict[str, BoundsTest],
        baselines: dict[str, "object"] | None = None,
        n_steps: int | None = None,
        dt: float = 1.0,
    ):
        missing = [v for v in base.vertices if v not in tests]
        if missing:
            raise ConfigurationError(f"no bounds test for vertices: {missing}")
        self.base = base
        self.tests = tests
        self.baselines = baselines or {}
        self.dt = dt
        self.states = {v: TestState(qoi_id=v) for v in base.vertices}
        self._rows: list[np.ndarray] = []
        if n_steps is not None:
            self._matrix = np.zeros((n_steps + 1, base.r), dtype=bool)
        else:
            self._matrix = None
        self._m = 0

    def observe(self, values: np.ndarray, m: int) -> np.ndarray:
        """Evaluate all taus for step m; values are in base vertex order."""
        if m != self._m:
            raise ConfigurationError(f"expected step {self._m}, got {m}")
        row = np.zeros(self.base.r, dtype=bool)
        for l, v in enumerate(self.base.vertices):
            test = self.tests[v]
            mu = sigma = None
            if isinstance(test, ZScoreHysteresis):
                try:
                    bl = self.baselines[v]
                except KeyError:
                    raise ConfigurationError(f"z-score test for {v} has no baseline")
                mu, sigma = bl.mean_at(m), bl.std_at(m)
            try:
                row[l] = eval_bounds_test(
                    test, self.states[v], float(values[l]), m, mu=mu, sigma=sigma
                )
            except DegenerateBaselineError as exc:
                raise DegenerateBaselineError(f"{exc} (qoi {v}, step {m})") from exc
        if self._matrix is not None:
            self._matrix[m] = row
        else:
            self._rows.append(row)
        self._m += 1
        return row

    def result(self) -> PathwayDag:
        matrix = self._matrix if self._matrix is not None else np.array(self._rows)
        return PathwayDag(base=self.base, activation=matrix[: self._m].copy(), dt=self.dt)


def compute_pathway(
    base: BaseDag,
    series: dict[str, np.ndarray],
    tests: dict[str, BoundsTest],
    baselines: dict[str, "object"] | None = None,
    dt: float = 1.0,
) -> PathwayDag:
    """Run the activation algorithm over full saved series.

    Equivalent by construction to driving a PathwayAccumulator in-situ.
    """
    lengths = {len(series[v]) for v in base.vertices if v in series}
    missing = [v for v in base.vertices if v not in series]
    if missing:
        raise ConfigurationError(f"no series for vertices: {missing}")
    if len(lengths) != 1:
        raise ConfigurationError(f"series lengths differ: {sorted(lengths)}")
    n = lengths.pop()
    acc = PathwayAccumulator(base, tests, baselines, n_steps=n - 1, dt=dt)
    stacked = np.stack([np.asarray(series[v], dtype=float) for v in base.vertices], axis=1)
    for m in range(n):
        acc.observe(stacked[m], m)
    return acc.result()


def canonical_tests(t_l: float, t_u: float) -> dict[str, BoundsTest]:
    """Absolute tracer tests plus z-score temperature tests for one experiment."""
    tests: dict[str, BoundsTest] = {}
    for z in ZONE_LABELS:
        tests[f"SO2({z})"] = AbsoluteHysteresis(*SO2_BOUNDS)
        tests[f"SUL({z})"] = AbsoluteHysteresis(*SUL_BOUNDS)
        tests[f"AOD({z})"] = AbsoluteHysteresis(*AOD_BOUNDS)
        tests[f"T({z})"] = ZScoreHysteresis(t_l, t_u)
    return tests
