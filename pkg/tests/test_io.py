"""Config parsing, serialization round trips, DOT rendering, and the CLI."""

import json

import numpy as np
import pytest
import yaml

from volpath.cli import main
from volpath.config import (
    CONVENTIONS,
    build_manifest,
    config_digest,
    load_config,
    parse_config,
)
from volpath.errors import ConfigurationError
from volpath.export import (
    atomic_write_text,
    baselines_from_dict,
    baselines_to_dict,
    bench_csv_text,
    export_dot,
    pathway_from_dict,
    pathway_to_dict,
    read_pathway_json,
    series_csv_text,
    summary_csv_text,
    write_pathway_json,
)
from volpath.harness import BenchRow, SummaryRow
from volpath.pathway import BaseDag, PathwayDag
from volpath.stats import BaselineStats
from volpath.surrogate import PRESET_ID


def tiny_config_dict(tmp_path, **extra):
    cfg = {
        "grid": {"nlat": 8, "nlon": 8, "nlev": 8},
        "surrogate": {"overrides": {"n_steps": 40}},
        "eruption": {"mass": 10.0, "day": 2.0},
        "plan": {
            "masses": [5.0, 10.0],
            "n_members": 2,
            "baseline_members": 2,
            "seed": 11,
            "experiments": {"Ex1": [0.5, 0.75]},
        },
        "output_dir": str(tmp_path / "out"),
    }
    cfg.update(extra)
    return cfg


def write_config(tmp_path, **extra):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(tiny_config_dict(tmp_path, **extra)))
    return path


def tiny_pathway():
    base = BaseDag(vertices=("A", "B", "C"), edges=(("A", "B"), ("B", "C")))
    activation = np.array(
        [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 1]], dtype=bool
    )
    return PathwayDag(base=base, activation=activation, dt=0.5)


class TestConfig:
    def test_defaults(self):
        cfg = parse_config({})
        assert cfg.grid == {
            "nlat": 32, "nlon": 64, "nlev": 16, "p_top": 1.0, "p_surface": 1000.0
        }
        assert cfg.preset == PRESET_ID
        assert cfg.params.n_steps == 4800
        assert cfg.eruption.mass == 10.0 and cfg.eruption.day == 90.0
        assert cfg.plan.seed == 20260964
        assert cfg.snapshot_days == ()

    def test_file_round_trip(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        assert cfg.params.n_steps == 40
        assert cfg.plan.masses == (5.0, 10.0)
        assert cfg.plan.experiments == (("Ex1", 0.5, 0.75),)
        cfg.build_grid()

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "nope.yaml")

    def test_malformed_yaml_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("grid: [unclosed")
        with pytest.raises(ConfigurationError):
            load_config(path)
        path.write_text("- not\n- a\n- mapping\n")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_config({"surrogate": {"preset": "other"}})

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_config({"surrogate": {"overrides": {"gravity": 9.8}}})

    def test_digest_stable_and_sensitive(self, tmp_path):
        a = load_config(write_config(tmp_path))
        b = load_config(write_config(tmp_path))
        assert config_digest(a) == config_digest(b)
        c = parse_config(tiny_config_dict(tmp_path, eruption={"mass": 20.0}))
        assert config_digest(a) != config_digest(c)

    def test_manifest_is_deterministic(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        m1 = build_manifest(cfg, seeds={"0": 1})
        m2 = build_manifest(cfg, seeds={"0": 1})
        assert m1 == m2
        assert m1["conventions"] == CONVENTIONS
        assert m1["never_active_day"] == 10.0
        assert "timestamp" not in m1


class TestPathwaySerialization:
    def test_dict_round_trip(self):
        pw = tiny_pathway()
        doc = pathway_to_dict(pw, manifest_digest="abc")
        back = pathway_from_dict(doc)
        assert back.base == pw.base
        assert back.dt == pw.dt
        assert np.array_equal(back.activation, pw.activation)
        assert doc["config_digest"] == "abc"
        assert doc["activation"] == ["000", "100", "110", "011"]

    def test_file_round_trip(self, tmp_path):
        pw = tiny_pathway()
        path = tmp_path / "deep" / "pathway.json"
        write_pathway_json(path, pw)
        back = read_pathway_json(path)
        assert np.array_equal(back.activation, pw.activation)
        json.loads(path.read_text())

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError):
            read_pathway_json(tmp_path / "missing.json")

    def test_shape_mismatch_rejected(self):
        doc = pathway_to_dict(tiny_pathway())
        doc["activation"] = ["01", "10"]
        with pytest.raises(ConfigurationError):
            pathway_from_dict(doc)


class TestBaselineSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        stats = BaselineStats("T(e)", 20)
        for _ in range(4):
            stats.update(rng.standard_normal(21))
        doc = baselines_to_dict({"T(e)": stats})
        back = baselines_from_dict(doc)["T(e)"]
        assert back.n == 4
        assert np.allclose(back.mean, stats.mean, rtol=1e-15)
        assert np.allclose(back.std(), stats.std(), rtol=1e-12)


class TestCsv:
    def test_series_round_trip(self):
        rng = np.random.default_rng(0)
        series = {"SO2(e)": rng.standard_normal(4), "T(e)": rng.standard_normal(4)}
        text = series_csv_text(series, dt=0.25)
        lines = text.strip().split("\n")
        assert lines[0] == "step,time_days,SO2(e),T(e)"
        assert len(lines) == 5
        for m, line in enumerate(lines[1:]):
            parts = line.split(",")
            assert int(parts[0]) == m
            assert float(parts[1]) == m * 0.25
            assert float(parts[2]) == series["SO2(e)"][m]  # repr round trip is exact
            assert float(parts[3]) == series["T(e)"][m]

    def test_summary_header_and_rows(self):
        rows = [SummaryRow(5.0, "Ex1", "T(e)", 10, 90.25, 1.5, 100.0, 2.5)]
        text = summary_csv_text(rows)
        lines = text.strip().split("\n")
        assert lines[0].split(",") == [
            "mass_tg", "experiment", "qoi_id", "n_members",
            "mean_first_days", "se_first_days", "mean_total_days", "se_total_days",
        ]
        assert lines[1] == "5.0,Ex1,T(e),10,90.25,1.5,100.0,2.5"

    def test_bench_csv(self):
        rows = [BenchRow(7, 0.01, 0.011, 1.1)]
        text = bench_csv_text(rows)
        assert text.startswith("qoi_count,baseline_s_per_step,tracked_s_per_step,ratio\n")
        assert "7,0.01,0.011,1.1" in text


class TestDot:
    def test_active_and_inactive_styles(self):
        dot = export_dot(tiny_pathway(), day=1.0)  # step 2: A, B active
        assert "rankdir=LR;" in dot
        assert '"A" [style=filled, fillcolor=orange];' in dot
        assert '"B" [style=filled, fillcolor=orange];' in dot
        assert '"C" [style=filled, fillcolor=gray];' in dot
        assert '"A" -> "B";' in dot
        assert '"B" -> "C" [style=dashed, color=gray];' in dot

    def test_active_only_omits_inactive(self):
        dot = export_dot(tiny_pathway(), day=1.0, active_only=True)
        assert "gray" not in dot
        assert '"C"' not in dot

    def test_day_out_of_range(self):
        with pytest.raises(IndexError):
            export_dot(tiny_pathway(), day=100.0)


class TestAtomicWrite:
    def test_no_temp_files_left(self, tmp_path):
        atomic_write_text(tmp_path / "a.txt", "hello")
        assert (tmp_path / "a.txt").read_text() == "hello"
        assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]

    def test_failure_leaves_no_partial_file(self, tmp_path):
        blocker = tmp_path / "not_a_dir"
        blocker.write_text("")
        with pytest.raises(OSError):
            atomic_write_text(blocker / "x.txt", "hello")
        assert blocker.read_text() == ""


class TestCli:
    def test_simulate_writes_outputs(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["simulate", str(cfg)]) == 0
        assert (out / "series.csv").exists()
        assert (out / "pathway.json").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["surrogate_preset"] == PRESET_ID

    def test_simulate_mass_zero(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["simulate", str(cfg), "--mass", "0"]) == 0
        text = (tmp_path / "out" / "series.csv").read_text()
        data_cells = [line.split(",")[2] for line in text.strip().split("\n")[1:]]
        assert all(float(v) == 0.0 for v in data_cells)  # SO2(e) column

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["simulate", str(tmp_path / "nope.yaml")]) == 2

    def test_baseline_then_simulate_with_zscores(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["baseline", str(cfg)]) == 0
        assert (out / "baselines.json").exists()
        assert main([
            "simulate", str(cfg), "--baseline", str(out / "baselines.json"),
        ]) == 0

    def test_experiment_grid_outputs(self, tmp_path):
        cfg = write_config(tmp_path, snapshot_days=[0.0, 5.0])
        out = tmp_path / "out"
        assert main(["experiment", str(cfg)]) == 0
        lines = (out / "summary.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 2 * 1 * 16  # masses x experiments x QOIs
        pathway_files = sorted(p.name for p in (out / "pathways").iterdir())
        assert pathway_files == [
            "pathway_m10_Ex1_b0.json",
            "pathway_m10_Ex1_b1.json",
            "pathway_m5_Ex1_b0.json",
            "pathway_m5_Ex1_b1.json",
        ]
        snapshots = sorted(p.name for p in (out / "snapshots").iterdir())
        assert snapshots == [
            "dag_m10_Ex1_day0.dot", "dag_m10_Ex1_day5.dot",
            "dag_m5_Ex1_day0.dot", "dag_m5_Ex1_day5.dot",
        ]
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["member_seeds"]) == 4

    def test_experiment_label_filter(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["experiment", str(cfg), "--experiments", "Ex1"]) == 0
        assert main(["experiment", str(cfg), "--experiments", "Ex9"]) == 2

    def test_export_dot_round_trip(self, tmp_path):
        pw_path = tmp_path / "pathway.json"
        write_pathway_json(pw_path, tiny_pathway())
        dot_path = tmp_path / "snap.dot"
        assert main([
            "export-dot", str(pw_path), "--day", "1.0", "--out", str(dot_path),
        ]) == 0
        assert "digraph" in dot_path.read_text()
        assert main(["export-dot", str(pw_path), "--day", "999"]) == 1

    def test_bench_writes_csv(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main([
            "bench", str(cfg), "--counts", "1,2", "--repetitions", "1", "--steps", "2",
        ]) == 0
        text = (tmp_path / "out" / "bench.csv").read_text()
        assert text.startswith("qoi_count,")
        assert len(text.strip().split("\n")) == 3
