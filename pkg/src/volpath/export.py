"""Serialization: pathway JSON, DOT snapshots, CSV tables, baseline stats.

Every writer goes through an atomic write-then-rename so no partial file is
left behind on an error path.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .harness import BenchRow, SummaryRow
from .pathway import BaseDag, PathwayDag, materialize_dag
from .stats import BaselineStats


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pathway_to_dict(pathway: PathwayDag, manifest_digest: str | None = None) -> dict:
    rows = ["".join("1" if t else "0" for t in row) for row in pathway.activation]
    doc = {
        "vertices": list(pathway.base.vertices),
        "edges": [list(e) for e in pathway.base.edges],
        "dt_days": pathway.dt,
        "activation": rows,
    }
    if manifest_digest is not None:
        doc["config_digest"] = manifest_digest
    return doc


def pathway_from_dict(doc: dict) -> PathwayDag:
    base = BaseDag(
        vertices=tuple(doc["vertices"]),
        edges=tuple((a, b) for a, b in doc["edges"]),
    )
    activation = np.array(
        [[c == "1" for c in row] for row in doc["activation"]], dtype=bool
    )
    if activation.ndim != 2 or activation.shape[1] != base.r:
        raise ConfigurationError("activation matrix does not match the base DAG")
    return PathwayDag(base=base, activation=activation, dt=float(doc["dt_days"]))


def write_pathway_json(path: str | Path, pathway: PathwayDag, manifest_digest: str | None = None) -> None:
    atomic_write_text(path, json.dumps(pathway_to_dict(pathway, manifest_digest), indent=1))


def read_pathway_json(path: str | Path) -> PathwayDag:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"pathway file not found: {path}")
    return pathway_from_dict(json.loads(path.read_text()))


def export_dot(pathway: PathwayDag, day: float, active_only: bool = False) -> str:
    """DOT snapshot at a simulation day: active nodes orange, inactive gray.

    Base edges outside E_m render dashed gray unless active_only is set.
    """
    m = int(round(day / pathway.dt))
    if not 0 <= m <= pathway.n_steps:
        raise IndexError(
            f"day {day} maps to step {m}, outside [0, {pathway.n_steps}]"
        )
    v_m, e_m = materialize_dag(pathway, m)
    active = set(v_m)
    active_edges = set(e_m)
    lines = [f'digraph pathway_day_{day:g} {{'.replace(".", "_")]
    lines.append("  rankdir=LR;")
    for v in pathway.base.vertices:
        if v in active:
            lines.append(f'  "{v}" [style=filled, fillcolor=orange];')
        elif not active_only:
            lines.append(f'  "{v}" [style=filled, fillcolor=gray];')
    for a, b in pathway.base.edges:
        if (a, b) in active_edges:
            lines.append(f'  "{a}" -> "{b}";')
        elif not active_only:
            lines.append(f'  "{a}" -> "{b}" [style=dashed, color=gray];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return repr(float(x))


def series_csv_text(series: dict[str, np.ndarray], dt: float) -> str:
    ids = list(series)
    n = len(next(iter(series.values())))
    lines = ["step,time_days," + ",".join(ids)]
    for m in range(n):
        vals = ",".join(_fmt(series[q][m]) for q in ids)
        lines.append(f"{m},{_fmt(m * dt)},{vals}")
    return "\n".join(lines) + "\n"


def write_series_csv(path: str | Path, series: dict[str, np.ndarray], dt: float) -> None:
    atomic_write_text(path, series_csv_text(series, dt))


def summary_csv_text(rows: list[SummaryRow]) -> str:
    lines = [
        "mass_tg,experiment,qoi_id,n_members,mean_first_days,se_first_days,"
        "mean_total_days,se_total_days"
    ]
    for r in rows:
        lines.append(
            f"{_fmt(r.mass)},{r.experiment},{r.qoi_id},{r.n_members},"
            f"{_fmt(r.mean_first)},{_fmt(r.se_first)},{_fmt(r.mean_total)},{_fmt(r.se_total)}"
        )
    return "\n".join(lines) + "\n"


def write_summary_csv(path: str | Path, rows: list[SummaryRow]) -> None:
    atomic_write_text(path, summary_csv_text(rows))


def bench_csv_text(rows: list[BenchRow]) -> str:
    lines = ["qoi_count,baseline_s_per_step,tracked_s_per_step,ratio"]
    for r in rows:
        lines.append(
            f"{r.qoi_count},{_fmt(r.baseline_s_per_step)},"
            f"{_fmt(r.tracked_s_per_step)},{_fmt(r.ratio)}"
        )
    return "\n".join(lines) + "\n"


def write_bench_csv(path: str | Path, rows: list[BenchRow]) -> None:
    atomic_write_text(path, bench_csv_text(rows))


def baselines_to_dict(baselines: dict[str, BaselineStats]) -> dict:
    return {
        qid: {
            "n_members": b.n,
            "mean": [float(x) for x in b.mean],
            "std": [float(x) for x in b.std()],
        }
        for qid, b in baselines.items()
    }


def baselines_from_dict(doc: dict) -> dict[str, BaselineStats]:
    return {
        qid: BaselineStats.from_arrays(
            qid, entry["n_members"], np.array(entry["mean"]), np.array(entry["std"])
        )
        for qid, entry in doc.items()
    }


def write_baselines_json(path: str | Path, baselines: dict[str, BaselineStats]) -> None:
    atomic_write_text(path, json.dumps(baselines_to_dict(baselines)))


def read_baselines_json(path: str | Path) -> dict[str, BaselineStats]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"baseline file not found: {path}")
    return baselines_from_dict(json.loads(path.read_text()))


def write_manifest_json(path: str | Path, manifest: dict) -> None:
    atomic_write_text(path, json.dumps(manifest, indent=1, sort_keys=True))
