import copy
import csv
import json

import numpy as np
import pytest

from hjdg import cli, experiment
from hjdg.experiment import ExperimentPlan, OscillationSettings, emit_plotdata, normalize_field
from hjdg.grid import ParabolicCylinder, sup_inf_on
from hjdg.problem import problem_from_config
from hjdg.solver import SolverError, solve

BASE = {
    "n": 1, "p": 3, "m": 2, "lambda": 1,
    "grid": {"cells": 64, "h": 1 / 32, "dt": 1 / 32, "t1": 0.5, "origin": -1.0},
    "initial": {"kind": "tanh", "width": 0.1, "amplitude": 2.0},
    "source": {"kind": "radial", "c": 0.5, "a": 0.25, "x0": 0.3},
    "diffusion": {"kind": "checkerboard", "values": [1.0, 0.25], "block_cells": 4, "anchor": -1.0},
}


def plan_dict(**extra):
    d = {"base": copy.deepcopy(BASE), "sweep": {"epsilon": [0.0, 0.02]},
         "oscillation": {"beta1": 0.8, "k_max": 30}, "dg": {"enabled": True}}
    d.update(extra)
    return d


def tree(path):
    return {p.relative_to(path).as_posix(): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


class TestPlan:
    def test_product_and_labels(self):
        plan = ExperimentPlan.from_dict(plan_dict(sweep={
            "epsilon": [0.0, 0.1], "diffusion": [{"kind": "scalar", "label": "flat"}, {"kind": "scalar"}],
            "source_c": [0.1, 0.2, 0.3], "refine": [1, 2]}))
        pts = plan.points()
        assert len(pts) == 24 and [p.label for p in pts[:2]] == ["p000", "p001"]
        assert {p.roughness for p in pts} == {"flat", "d1"}
        fine = [p for p in pts if p.refine == 2][0]
        assert fine.config["grid"]["cells"] == 128 and fine.config["grid"]["h"] == pytest.approx(1 / 64)
        assert "label" not in fine.config["diffusion"]

    def test_refine_keeps_block_size(self):
        plan = ExperimentPlan.from_dict(plan_dict(sweep={"refine": [2]}))
        cfg = plan.points()[0].config
        assert cfg["diffusion"]["block_cells"] * cfg["grid"]["h"] == pytest.approx(4 / 32)

    def test_default_beta1(self):
        assert OscillationSettings().resolved_beta1() == pytest.approx(1 / 16)
        assert OscillationSettings(r_star=1.0).resolved_beta1() == pytest.approx(1 / 4)

    def test_round_trip(self):
        plan = ExperimentPlan.from_dict(plan_dict())
        again = ExperimentPlan.from_dict(experiment.plan_to_dict(plan))
        assert again.points()[1].config == plan.points()[1].config
        assert again.oscillation == plan.oscillation and again.dg == plan.dg


def test_normalized_field_bounded():
    spec = problem_from_config({**BASE, "epsilon": 0.02})
    u = solve(spec)
    w, params = normalize_field(u, spec, (0.5, (0.0,)), OscillationSettings())
    hi, lo = sup_inf_on(w, ParabolicCylinder(-4.0, 0.0, 3.0))
    assert max(hi, -lo) <= 2 + 1e-12
    assert params.violations(3, 2, 1) == []


class TestRuns:
    def test_deterministic_and_worker_independent(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        ra = experiment.run_holder_experiment(ExperimentPlan.from_dict(plan_dict(out=str(a))))
        experiment.run_holder_experiment(ExperimentPlan.from_dict(plan_dict(out=str(b), workers=2)))
        assert all(r.status == "ok" for r in ra.rows)
        assert tree(a) == tree(b)
        assert {"holder.csv", "summary.csv", "plot_gamma.csv", "points/p001/energy.csv"} <= set(tree(a))

    def test_fit_row_matches_data_rows(self, tmp_path):
        report = experiment.run_holder_experiment(ExperimentPlan.from_dict(plan_dict()))
        emit_plotdata(report, tmp_path)
        rows = list(csv.DictReader(open(tmp_path / "plot_oscillation.csv")))
        for label in {r["point"] for r in rows}:
            data = [r for r in rows if r["point"] == label and r["k"] != "fit"]
            fit = [r for r in rows if r["point"] == label and r["k"] == "fit"][0]
            x = np.array([float(r["log_scale"]) for r in data])
            y = np.array([float(r["log_osc"]) for r in data])
            assert np.polyfit(x, y, 1)[0] == pytest.approx(float(fit["log_scale"]), abs=1e-12)

    def test_empty_plotdata_has_headers(self, tmp_path):
        paths = emit_plotdata(experiment.HolderReport([]), tmp_path)
        assert [p.read_text().count("\n") for p in paths] == [1, 1, 1]

    def test_hypothesis_and_probe(self):
        d = plan_dict()
        d["base"]["source"]["c"] = 50.0
        res = experiment.run_holder_experiment(ExperimentPlan.from_dict(d))
        assert {r.status for r in res.rows} == {"hypothesis"}
        d["allow_probes"] = True
        res = experiment.run_holder_experiment(ExperimentPlan.from_dict(d))
        assert all(r.status == "ok" and r.probe for r in res.rows)

    def test_failure_isolated(self):
        d = plan_dict(sweep={"epsilon": [0.0], "diffusion": [{"kind": "scalar"}, {"kind": "bogus"}]})
        rows = experiment.run_holder_experiment(ExperimentPlan.from_dict(d)).rows
        assert [r.status for r in rows] == ["ok", "error"] and "bogus" in rows[1].message

    def test_summary_axes(self):
        fits = [{"epsilon": e, "roughness": r, "source_c": None, "refine": 1, "center_x": (0.0,), "gamma": g}
                for e, r, g in [(0, "a", 0.5), (1, "a", 0.6), (0, "b", 0.4), (1, "b", 0.8)]]
        s = experiment.summarize(fits)
        assert s["gamma_ratio"] == pytest.approx(2.0)
        assert s["epsilon_axis_ratio"] == pytest.approx(2.0)
        assert s["roughness_axis_ratio"] == pytest.approx(4 / 3)

    def test_dg_pipeline(self, tmp_path):
        rep = experiment.run_dg_pipeline(ExperimentPlan.from_dict(plan_dict(out=str(tmp_path))))
        for r in rep.ok():
            assert r.dg.label in ("mostly-negative", "mostly-positive")
            assert [row[0] for row in r.dg.interstitial] == list(range(r.dg.k0 + 1))
            assert all(lv.energy >= 0 for lv in r.dg.energy.levels)
        assert (tmp_path / "interstitial.csv").exists()


class TestCli:
    def write(self, path, data):
        path.write_text(json.dumps(data))
        return str(path)

    def test_solve_diagnose(self, tmp_path, capsys):
        cfg = self.write(tmp_path / "c.json", {**BASE, "epsilon": 0.02})
        out = tmp_path / "u.bin"
        assert cli.main(["solve", cfg, "--out", str(out)]) == 0 and out.exists()
        assert cli.main(["diagnose", cfg, str(out)]) == 0
        assert "fit," in capsys.readouterr().out

    def test_solve_hypothesis_exit(self, tmp_path):
        cfg = self.write(tmp_path / "c.json", {**BASE, "m": 1.0})
        assert cli.main(["solve", cfg, "--out", str(tmp_path / "u.bin")]) == 2
        assert cli.main(["solve", cfg, "--probe", "--out", str(tmp_path / "u.bin")]) == 0

    def test_sweep_and_report(self, tmp_path, capsys):
        plan = self.write(tmp_path / "plan.json", plan_dict())
        assert cli.main(["sweep", plan, "--out", str(tmp_path / "o")]) == 0
        capsys.readouterr()
        assert cli.main(["report", str(tmp_path / "o")]) == 0
        assert "fits=2" in capsys.readouterr().out

    def test_solver_failure_wins(self, tmp_path, monkeypatch):
        def flaky(spec, cfg=None):
            if spec.epsilon > 0:
                raise SolverError("boom")
            return solve(spec, cfg)

        monkeypatch.setattr(experiment, "solve", flaky)
        # one clean point, one hypothesis violation (source too large), one solver failure
        d = plan_dict(sweep={"epsilon": [0.0, 0.02], "source_c": [0.5, 50.0]})
        plan = self.write(tmp_path / "plan.json", d)
        assert cli.main(["sweep", plan]) == 3
        statuses = [r.status for r in experiment.run_holder_experiment(ExperimentPlan.load(plan)).rows]
        assert statuses == ["ok", "hypothesis", "solver", "hypothesis"]

    def test_hypothesis_exit_from_sweep(self, tmp_path):
        d = plan_dict()
        d["base"]["source"]["c"] = 50.0
        assert cli.main(["sweep", self.write(tmp_path / "plan.json", d)]) == 2
