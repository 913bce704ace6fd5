"""Sweep runner: solve each point, normalize onto ``Q3``, measure oscillation decay and the De Giorgi ladder.

A plan is a base problem config plus sweep axes.  Every point is solved
independently (optionally in worker processes); failures are caught per
point and recorded with an error code, so one bad point never stops a
plan.  CSV output uses ``repr`` floats and a fixed row order, which makes
it byte-identical across runs of the same plan.
"""

from __future__ import annotations

import copy
import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import (DG1Config, EnergyReport, HypothesisViolation, OscillationProfile, TruncationLadder,
                          classify_majority, dg1_iterate, interstitial_measure, k0_levels, normalized_q3_grid,
                          oscillation_profile, q_small, theoretical_gamma)
from .grid import GridError, GridField, ParabolicCylinder
from .problem import ProblemSpec, problem_from_config, validate_problem
from .scaling import ScaleParams, compute_exponents, dg_level_transform, normalization_params, scale_61
from .solver import SchemeConfig, SolverError, format_meta, solve

OK, HYPOTHESIS, SOLVER, ERROR = "ok", "hypothesis", "solver", "error"


# ---------------------------------------------------------------------------
# plan


@dataclass(frozen=True)
class OscillationSettings:
    alpha1: float = 8 / 7
    beta1: float | None = None
    # beta1 defaults to 1/4, halved until 3 beta1 <= r_star
    r_star: float = 0.25
    k_max: int = 8
    # elapsed time s before the centre; None means a third of the horizon
    elapsed: float | None = None
    centers: tuple = ()
    random_centers: int = 0
    min_samples: int = 8
    drift: bool = True
    lam0_bound: float | None = None

    def resolved_beta1(self) -> float:
        if self.beta1 is not None:
            return float(self.beta1)
        beta = 0.25
        while 3 * beta > self.r_star:
            beta /= 2
        return beta


@dataclass(frozen=True)
class DGSettings:
    enabled: bool = False
    k0: int | None = 1
    mu0: float | None = None
    ladder_k: int = 4
    target_h: float = 1 / 32
    target_dt: float = 1 / 32
    delta0: float | None = None


@dataclass(frozen=True)
class SweepPoint:
    index: int
    label: str
    epsilon: float
    roughness: str
    source_c: float | None
    refine: int
    config: dict = field(compare=False, repr=False)


@dataclass
class ExperimentPlan:
    base: dict
    epsilons: tuple = ()
    roughness: tuple = ()
    source_strengths: tuple = ()
    refinements: tuple = (1,)
    holder: bool = True
    oscillation: OscillationSettings = field(default_factory=OscillationSettings)
    dg: DGSettings = field(default_factory=DGSettings)
    out_dir: str | None = None
    seed: int = 0
    workers: int = 1
    allow_probes: bool = False
    save_fields: bool = False
    cfl_safety: float = 0.4

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentPlan:
        sweep = data.get("sweep", {})
        osc = dict(data.get("oscillation", {}))
        if "centers" in osc:
            osc["centers"] = tuple((float(t), tuple(np.atleast_1d(x).tolist())) for t, x in osc["centers"])
        return cls(
            base=data["base"],
            epsilons=tuple(sweep.get("epsilon", ())),
            roughness=tuple(sweep.get("diffusion", ())),
            source_strengths=tuple(sweep.get("source_c", ())),
            refinements=tuple(sweep.get("refine", (1,))),
            holder=bool(data.get("holder", True)),
            oscillation=OscillationSettings(**osc),
            dg=DGSettings(**data.get("dg", {})),
            out_dir=data.get("out"),
            seed=int(data.get("seed", 0)),
            workers=int(data.get("workers", 1)),
            allow_probes=bool(data.get("allow_probes", False)),
            save_fields=bool(data.get("save_fields", False)),
            cfl_safety=float(data.get("cfl_safety", 0.4)),
        )

    @classmethod
    def load(cls, path: str | Path) -> ExperimentPlan:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def points(self) -> list[SweepPoint]:
        eps_axis = self.epsilons or (self.base.get("epsilon", 0.0),)
        src_axis = self.source_strengths or (None,)
        rough_axis = tuple(enumerate(self.roughness)) or ((None, None),)
        out = []
        for i, (eps, (j, rough), src, ref) in enumerate(itertools.product(eps_axis, rough_axis, src_axis,
                                                                          self.refinements)):
            cfg = copy.deepcopy(self.base)
            cfg["epsilon"] = float(eps)
            name = "base"
            if rough is not None:
                rough = dict(rough)
                name = str(rough.pop("label", f"d{j}"))
                cfg["diffusion"] = rough
            if src is not None:
                cfg.setdefault("source", {"kind": "constant"})
                cfg["source"] = {**cfg["source"], "c": float(src)}
            if ref != 1:
                g = dict(cfg["grid"])
                cells = g["cells"]
                g["cells"] = [int(c) * ref for c in cells] if np.ndim(cells) else int(cells) * ref
                g["h"] = float(g["h"]) / ref
                if "block_cells" in cfg.get("diffusion", {}):
                    cfg["diffusion"] = {**cfg["diffusion"], "block_cells": cfg["diffusion"]["block_cells"] * ref}
                cfg["grid"] = g
            out.append(SweepPoint(i, f"p{i:03d}", float(eps), name, None if src is None else float(src), int(ref), cfg))
        return out


# ---------------------------------------------------------------------------
# per-point results


@dataclass
class CenterResult:
    center_t: float
    center_x: tuple
    params: tuple[float, float]
    profile: OscillationProfile


@dataclass
class DGPointResult:
    label: str
    k0: int
    nonpositive_measure: float
    total_measure: float
    interstitial: list[tuple[int, float, float, float]]
    energy: EnergyReport


@dataclass
class PointResult:
    point: SweepPoint
    status: str = OK
    message: str = ""
    probe: bool = False
    violations: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    centers: list[CenterResult] = field(default_factory=list)
    theory_gamma: float = float("nan")
    dg: DGPointResult | None = None


def _domain_center(spec: ProblemSpec) -> tuple[float, ...]:
    return tuple(0.5 * (lo + hi) for lo, hi in zip(spec.grid.origin, spec.grid.upper))


def oscillation_centers(spec: ProblemSpec, settings: OscillationSettings, seed: int) -> list[tuple[float, tuple]]:
    """Explicit centres, else the domain centre at the final time, plus seeded random ones."""
    grid = spec.grid
    centers = [(float(t), tuple(float(v) for v in x)) for t, x in settings.centers]
    if not centers:
        centers.append((grid.t_end, _domain_center(spec)))
    if settings.random_centers:
        rng = np.random.default_rng(seed)
        mid = np.asarray(_domain_center(spec))
        half = 0.25 * (np.asarray(grid.upper) - np.asarray(grid.origin))
        for _ in range(settings.random_centers):
            centers.append((grid.t_end, tuple((mid + rng.uniform(-half, half)).tolist())))
    return centers


def normalize_field(u: GridField, spec: ProblemSpec, center, settings: OscillationSettings) -> tuple[GridField, ScaleParams]:
    """Map ``u + lam t`` onto ``Q3`` around ``center`` with the largest admissible ``(alpha_w, beta_w)``."""
    grid = u.grid
    t_c, x_c = float(center[0]), np.asarray(center[1], dtype=float)
    vals = u.values + spec.lam * grid.times.reshape((-1,) + (1,) * grid.dim) if settings.drift else u.values
    ubar = GridField(grid, vals)
    s = settings.elapsed if settings.elapsed is not None else (grid.t_end - grid.t_start) / 3
    s = min(s, t_c - grid.t_start)
    rho = float(min(np.min(x_c - np.asarray(grid.origin)), np.min(np.asarray(grid.upper) - x_c))) - grid.h
    if not (s > 0 and rho > 0):
        raise HypothesisViolation("oscillation centre leaves no room for Q3 inside the grid")
    params = normalization_params(float(np.abs(vals).max()), rho, s, spec.p, spec.m, spec.dim, spec.lam0,
                                  settings.lam0_bound)
    w, _ = scale_61(ubar, spec, params, center=(t_c, x_c))
    return w, params


def _holder(u, spec, plan: ExperimentPlan, point: SweepPoint) -> list[CenterResult]:
    st = plan.oscillation
    beta1 = st.resolved_beta1()
    out = []
    for t_c, x_c in oscillation_centers(spec, st, plan.seed + point.index):
        w, params = normalize_field(u, spec, (t_c, x_c), st)
        prof = oscillation_profile(w, st.alpha1, beta1, st.k_max, p=spec.p, center=(0.0, (0.0,) * spec.dim),
                                   min_samples=st.min_samples)
        out.append(CenterResult(t_c, x_c, (params.alpha, params.beta), prof))
    return out


def _dg(u, spec, plan: ExperimentPlan, point: SweepPoint) -> DGPointResult:
    st = plan.dg
    n = spec.dim
    t_c, x_c = oscillation_centers(spec, plan.oscillation, plan.seed + point.index)[0]
    w, _ = normalize_field(u, spec, (t_c, x_c), plan.oscillation)
    exps = compute_exponents(spec.p, spec.m, n)
    k0 = st.k0 if st.mu0 is None else k0_levels(st.mu0, ParabolicCylinder.q2(n).measure())
    small = q_small(k0, exps.e1, exps.e2)
    target = normalized_q3_grid(n, st.target_h, st.target_dt)
    maj = classify_majority(w, small, center=(0.0, (0.0,) * n), target=target)
    rows = []
    vk = maj.v
    for k in range(k0 + 1):
        vk = dg_level_transform(maj.v, k)
        rows.append((k, *interstitial_measure(vk)))
    shifted = GridField(vk.grid, vk.values - 1.0)
    cfg = DG1Config.for_problem(spec.p, spec.m, n, delta0=st.delta0)
    energy = dg1_iterate(shifted, cfg, TruncationLadder(st.ladder_k))
    return DGPointResult(maj.label, k0, maj.nonpositive_measure, maj.total_measure, rows, energy)


def run_point(plan: ExperimentPlan, point: SweepPoint, holder: bool = True, dg: bool = False) -> PointResult:
    """Solve and diagnose one point; every failure becomes a status code on the result."""
    res = PointResult(point)
    try:
        spec = problem_from_config(point.config)
        res.violations = validate_problem(spec)
        if res.violations:
            if not plan.allow_probes:
                res.status, res.message = HYPOTHESIS, "; ".join(res.violations)
                return _persist(plan, res, None)
            res.probe = True
        res.theory_gamma = theoretical_gamma(plan.oscillation.alpha1, plan.oscillation.resolved_beta1(), spec.p)
        u = solve(spec, SchemeConfig(cfl_safety=plan.cfl_safety))
        res.meta = {k: v for k, v in u.meta.items()}
        if holder:
            res.centers = _holder(u, spec, plan, point)
        if dg:
            res.dg = _dg(u, spec, plan, point)
    except (HypothesisViolation, GridError) as exc:
        res.status, res.message = HYPOTHESIS, f"{type(exc).__name__}: {exc}"
        u = None
    except SolverError as exc:
        res.status, res.message = SOLVER, f"{type(exc).__name__}: {exc}"
        u = None
    except Exception as exc:  # crash isolation: anything else is recorded, not raised
        res.status, res.message = ERROR, f"{type(exc).__name__}: {exc}"
        u = None
    return _persist(plan, res, u)


def _persist(plan: ExperimentPlan, res: PointResult, u: GridField | None) -> PointResult:
    if plan.out_dir is None:
        return res
    folder = Path(plan.out_dir) / "points" / res.point.label
    folder.mkdir(parents=True, exist_ok=True)
    (folder / "config.json").write_text(json.dumps(res.point.config, indent=1, sort_keys=True, default=_json_default))
    lines = [f"status={res.status}", f"message={res.message}", f"probe={res.probe}"]
    if res.meta:
        # wall time would make the output tree differ between identical runs
        lines.append(format_meta({k: v for k, v in res.meta.items() if k != "wall_time"}).rstrip("\n"))
    (folder / "meta.txt").write_text("\n".join(lines) + "\n")
    for i, c in enumerate(res.centers):
        (folder / f"oscillation_{i}.csv").write_text(c.profile.to_csv())
    if res.dg is not None:
        (folder / "energy.csv").write_text(res.dg.energy.to_csv())
        (folder / "interstitial.csv").write_text(_interstitial_csv([res]))
    if plan.save_fields and u is not None:
        u.save(folder / "u.bin")
    return res


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _execute(plan: ExperimentPlan, holder: bool, dg: bool) -> list[PointResult]:
    points = plan.points()
    if plan.workers <= 1 or len(points) <= 1:
        return [run_point(plan, pt, holder, dg) for pt in points]
    results: list[PointResult] = []
    with ProcessPoolExecutor(max_workers=plan.workers) as pool:
        futures = [pool.submit(run_point, plan, pt, holder, dg) for pt in points]
        for pt, fut in zip(points, futures):
            try:
                results.append(fut.result())
            except Exception as exc:  # a worker died; keep going with the rest
                results.append(PointResult(pt, ERROR, f"{type(exc).__name__}: {exc}"))
    return results


# ---------------------------------------------------------------------------
# reports


HOLDER_COLUMNS = ("point", "epsilon", "roughness", "source_c", "refine", "center_t", "center_x", "status", "probe",
                  "gamma", "intercept", "residual", "degenerate", "truncated", "levels", "theory_gamma", "alpha_w",
                  "beta_w", "sup_abs", "substeps", "max_gradient", "cfl_ratio_max", "grad_lp_norm", "message")


def _r(x) -> str:
    return "" if x is None else repr(float(x))


@dataclass
class HolderReport:
    rows: list[PointResult] = field(default_factory=list)

    def table(self) -> list[dict]:
        """One record per (point, centre); failed points get a single record without fit values."""
        out = []
        for res in self.rows:
            pt = res.point
            common = {"point": pt.label, "epsilon": pt.epsilon, "roughness": pt.roughness, "source_c": pt.source_c,
                      "refine": pt.refine, "status": res.status, "probe": res.probe,
                      "theory_gamma": res.theory_gamma, "sup_abs": res.meta.get("sup_abs"),
                      "substeps": res.meta.get("substeps"), "max_gradient": res.meta.get("max_gradient"),
                      "cfl_ratio_max": res.meta.get("cfl_ratio_max"), "grad_lp_norm": res.meta.get("grad_lp_norm"),
                      "message": res.message}
            if not res.centers:
                out.append({**common, "center_t": None, "center_x": None, "gamma": None, "intercept": None,
                            "residual": None, "degenerate": None, "truncated": None, "levels": 0,
                            "alpha_w": None, "beta_w": None})
            for c in res.centers:
                p = c.profile
                out.append({**common, "center_t": c.center_t, "center_x": c.center_x, "gamma": p.gamma,
                            "intercept": p.intercept, "residual": p.residual, "degenerate": p.degenerate,
                            "truncated": p.truncated, "levels": len(p.levels), "alpha_w": c.params[0],
                            "beta_w": c.params[1]})
        return out

    def fits(self) -> list[dict]:
        return [r for r in self.table() if r["status"] == OK and r["degenerate"] is False]

    def summary(self) -> dict:
        return summarize(self.fits())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HOLDER_COLUMNS)
        for r in self.table():
            cx = "" if r["center_x"] is None else " ".join(repr(float(v)) for v in r["center_x"])
            w.writerow([r["point"], repr(r["epsilon"]), r["roughness"], _r(r["source_c"]), r["refine"],
                        _r(r["center_t"]), cx, r["status"], int(r["probe"]), _r(r["gamma"]), _r(r["intercept"]),
                        _r(r["residual"]), "" if r["degenerate"] is None else int(r["degenerate"]),
                        "" if r["truncated"] is None else int(r["truncated"]), r["levels"], _r(r["theory_gamma"]),
                        _r(r["alpha_w"]), _r(r["beta_w"]), _r(r["sup_abs"]),
                        "" if r["substeps"] is None else int(r["substeps"]), _r(r["max_gradient"]),
                        _r(r["cfl_ratio_max"]), _r(r["grad_lp_norm"]), r["message"]])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in self.summary().items():
            w.writerow((k, repr(v)))
        return buf.getvalue()


def _ratio(values) -> float:
    values = list(values)
    if not values or min(values) <= 0:
        return float("nan")
    return max(values) / min(values)


def summarize(fits: list[dict]) -> dict:
    """Extremes of gamma overall, across the epsilon axis and across the roughness axis.

    Axis ratios group fits that agree on every other coordinate and report
    the worst group.  Only non-degenerate fits of successful points count.
    """
    out = {"fits": len(fits)}
    gammas = [float(r["gamma"]) for r in fits]
    out["gamma_min"] = min(gammas) if gammas else float("nan")
    out["gamma_max"] = max(gammas) if gammas else float("nan")
    out["gamma_ratio"] = _ratio(gammas)

    def axis_ratio(axis):
        keys = [k for k in ("epsilon", "roughness", "source_c", "refine", "center_x") if k != axis]
        groups: dict = {}
        for r in fits:
            groups.setdefault(tuple(str(r[k]) for k in keys), []).append(float(r["gamma"]))
        ratios = [_ratio(g) for g in groups.values() if len(g) > 1]
        return max(ratios) if ratios else float("nan")

    out["epsilon_axis_ratio"] = axis_ratio("epsilon")
    out["roughness_axis_ratio"] = axis_ratio("roughness")
    return out


def read_holder_csv(path: str | Path) -> list[dict]:
    """Rows of a holder table with numeric fields parsed back."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in ("epsilon", "gamma", "residual", "theory_gamma"):
            r[k] = float(r[k]) if r.get(k) not in (None, "") else None
        r["degenerate"] = None if r["degenerate"] == "" else bool(int(r["degenerate"]))
    return rows


@dataclass
class DGReport:
    rows: list[PointResult] = field(default_factory=list)

    def ok(self) -> list[PointResult]:
        return [r for r in self.rows if r.status == OK and r.dg is not None]


def _interstitial_csv(rows: list[PointResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("point", "label", "k", "below", "between", "above"))
    for res in rows:
        if res.dg is None:
            continue
        for k, below, between, above in res.dg.interstitial:
            w.writerow((res.point.label, res.dg.label, k, repr(below), repr(between), repr(above)))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# entry points


def run_holder_experiment(plan: ExperimentPlan) -> HolderReport:
    """Solve every point, normalize, fit oscillation decay; also runs the DG pipeline when the plan enables it."""
    report = HolderReport(_execute(plan, holder=True, dg=plan.dg.enabled))
    if plan.out_dir is not None:
        out = Path(plan.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "holder.csv").write_text(report.to_csv())
        (out / "summary.csv").write_text(report.summary_csv())
        emit_plotdata(report, out)
    return report


def run_dg_pipeline(plan: ExperimentPlan) -> DGReport:
    """Majority split, ``v_k`` ladder with interstitial measures, and the first-lemma energies per point."""
    report = DGReport(_execute(plan, holder=False, dg=True))
    if plan.out_dir is not None:
        out = Path(plan.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "interstitial.csv").write_text(_interstitial_csv(report.rows))
        emit_plotdata(HolderReport(report.rows), out)
    return report


PLOT_FILES = ("plot_oscillation.csv", "plot_gamma.csv", "plot_energy.csv")


def emit_plotdata(report: HolderReport, out_dir: str | Path) -> list[Path]:
    """Write the three figure tables; headers are always present.

    ``plot_oscillation.csv`` has one row per level and a closing ``fit`` row
    per profile whose two value columns hold ``gamma`` and the intercept.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    osc, gam, eng = (io.StringIO() for _ in range(3))
    wo, wg, we = (csv.writer(b, lineterminator="\n") for b in (osc, gam, eng))
    wo.writerow(("point", "center", "k", "log_scale", "log_osc"))
    wg.writerow(("point", "center", "epsilon", "gamma"))
    we.writerow(("point", "k", "E_k"))
    for res in report.rows:
        if res.status != OK:
            continue
        for i, c in enumerate(res.centers):
            prof = c.profile
            for lv in prof.levels:
                log_osc = math.log(lv.osc) if lv.osc > 0 else float("-inf")
                wo.writerow((res.point.label, i, lv.k, repr(math.log(lv.scale)), repr(log_osc)))
            wo.writerow((res.point.label, i, "fit", repr(prof.gamma), repr(prof.intercept)))
            if not prof.degenerate:
                wg.writerow((res.point.label, i, repr(res.point.epsilon), repr(prof.gamma)))
        if res.dg is not None:
            for lv in res.dg.energy.levels:
                we.writerow((res.point.label, lv.k, repr(lv.energy)))
    paths = []
    for name, buf in zip(PLOT_FILES, (osc, gam, eng)):
        path = out / name
        path.write_text(buf.getvalue())
        paths.append(path)
    return paths


def plan_to_dict(plan: ExperimentPlan) -> dict:
    """Inverse of :meth:`ExperimentPlan.from_dict` (for logging and re-runs)."""
    return {
        "base": plan.base,
        "sweep": {"epsilon": list(plan.epsilons), "diffusion": list(plan.roughness),
                  "source_c": list(plan.source_strengths), "refine": list(plan.refinements)},
        "holder": plan.holder, "oscillation": asdict(plan.oscillation), "dg": asdict(plan.dg), "out": plan.out_dir,
        "seed": plan.seed, "workers": plan.workers, "allow_probes": plan.allow_probes,
        "save_fields": plan.save_fields, "cfl_safety": plan.cfl_safety,
    }
