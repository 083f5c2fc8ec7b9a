"""End-to-end run: decompose, map, check, plan, fields, u, oracle."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import admissibility as adm
from .decomposition import decompose, verify_H1
from .errors import H1UnsatisfiableError, InputError, RefinementExhaustedError
from .fields import (boundary_mass, divergence_residual, make_plan, rasterize)
from .oracle import (cross_cell_mass, cyclical_violation, duality_gap, off_diagonal,
                     ray_support_audit, solve_assignment)
from .partition import auto_refine_until, evaluate_conditions, validate
from .reconstruction import (max_jump, max_principle_violation, rotation_check, total_variation,
                             trace_gap, u_grid)
from .scenarios import Scenario
from .transport_map import build, pushforward_distance

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED = 0, 1, 2
NO_SOLUTION = "no trace-sense solution"


@dataclass
class RunReport:
    scenario: str
    params: dict
    stages: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    costs: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    messages: list = field(default_factory=list)
    exit_code: int = EXIT_OK
    failed_stage: str | None = None
    # live objects for emitters and callers
    objects: dict = field(default_factory=dict, repr=False, compare=False)

    def fail(self, stage: str, code: int, message: str):
        self.stages[stage] = "failed"
        if self.failed_stage is None:
            self.failed_stage = stage
        self.exit_code = max(self.exit_code, code)
        self.messages.append(message)

    def record(self, rep: adm.AdmissibilityReport):
        wit = []
        for w in rep.witnesses[:3]:
            if isinstance(w, adm.CycleWitness):
                wit.append({"points": w.points, "lhs": w.lhs, "rhs": w.rhs, "nodes": w.nodes})
            else:
                wit.append(w)
        self.verdicts[rep.condition] = {"verdict": rep.verdict, "margin": rep.margin,
                                        "witnesses": wit, "notes": list(rep.notes),
                                        "exhaustive": rep.exhaustive}

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_OK

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "params": self.params, "stages": self.stages,
                "verdicts": self.verdicts, "costs": self.costs, "residuals": self.residuals,
                "artifacts": self.artifacts, "messages": self.messages,
                "exit_code": self.exit_code, "failed_stage": self.failed_stage}

    def summary(self) -> str:
        lines = [f"scenario {self.scenario} {self.params}"]
        for c, v in self.verdicts.items():
            lines.append(f"  {c}: {v['verdict']} (margin {v['margin']:.12g})")
        for k, v in {**self.costs, **self.residuals}.items():
            lines.append(f"  {k}: {v:.12g}" if isinstance(v, float) else f"  {k}: {v}")
        lines += [f"  ! {m}" for m in self.messages]
        lines.append(f"  exit {self.exit_code}")
        return "\n".join(lines)


def _check_convex(sc: Scenario, rep: RunReport, k: int):
    f, curve = sc.f, sc.curve
    try:
        d = decompose(f, curve)
    except H1UnsatisfiableError as exc:
        rep.record(adm.AdmissibilityReport("H1", adm.VIOLATED, [{"issue": v} for v in exc.violations],
                                           0.0, [str(exc)]))
        rep.fail("check", EXIT_VIOLATED, "H1 violated: " + str(exc))
        return None, None
    h1 = verify_H1(d, f, curve)
    rep.record(adm.AdmissibilityReport("H1", h1.verdict, [{"issue": v} for v in h1.violations],
                                       0.0 if h1.violations else np.inf))
    tmap = build(d, f, curve)
    reports = [adm.check_H2(tmap, curve), adm.check_H3(tmap, d, k=k), adm.check_S(curve, f, d)]
    for r in reports:
        rep.record(r)
    bad = [r for r in reports if r.verdict != adm.SATISFIED] + ([] if h1.passed else ["H1"])
    if bad:
        names = [getattr(r, "condition", r) for r in bad]
        msg = f"conditions not satisfied: {', '.join(names)}"
        if "H2" in names:
            msg += f"; {NO_SOLUTION} (H2 violated: transport rays leave the open domain)"
        rep.fail("check", EXIT_VIOLATED, msg)
    rep.objects.update(decomposition=d)
    return d, tmap


def _check_partition(sc: Scenario, rep: RunReport, k: int):
    f, curve = sc.f, sc.curve
    conds = list(sc.conditions)
    reps = sc.solver.get("representatives", "arbitrary")
    p = sc.partition
    try:
        p = auto_refine_until(p, conds, int(sc.solver.get("n_max", 64)), f, curve,
                              k=max(k, 2), representatives=reps)
    except RefinementExhaustedError as exc:
        for r in exc.report:
            rep.record(r)
        rep.fail("check", EXIT_VIOLATED, str(exc))
        vp = validate(p, f, curve)
        rep.objects.update(partition=p, validated=vp)
        return vp, vp.tmap
    vp = validate(p, f, curve)
    for r in evaluate_conditions(vp, conds, max(k, 2), reps):
        rep.record(r)
    rep.params["refined_n"] = [fam.n for fam in p.families]
    rep.objects.update(partition=p, validated=vp, decomposition=vp.decomposition)
    return vp, vp.tmap


def run(sc: Scenario, check_only: bool = False, oracle: bool = False, grid: int | None = None,
        atoms: int | None = None, seed: int | None = None, out=None, emit=("csv", "svg")) -> RunReport:
    """Run the pipeline on a scenario and return its report.

    Exit codes: 0 when every requested stage passes, 2 when a condition is
    violated (or undecided), 1 for input and geometry errors.
    """
    solver = sc.solver
    atoms = int(atoms or solver["atoms"])
    grid = int(grid or solver["grid"])
    seed = int(solver["seed"] if seed is None else seed)
    k = int(solver["k"])
    rep = RunReport(sc.name, dict(sc.params))
    rep.objects["scenario"] = sc
    t0 = time.perf_counter()
    try:
        if sc.partition is None:
            d, tmap = _check_convex(sc, rep, k)
        else:
            d, tmap = _check_partition(sc, rep, k)
    except InputError as exc:
        rep.fail("check", EXIT_INPUT, f"{type(exc).__name__}: {exc}")
        return rep
    if rep.stages.get("check") != "failed":
        rep.stages["check"] = "ok"
    log.info("%s: check %s", sc.name, rep.stages["check"])
    rep.objects["tmap"] = tmap
    if tmap is None or check_only:
        rep.stages.setdefault("plan", "skipped")
        _emit(rep, out, emit)
        return rep

    f, curve = sc.f, sc.curve
    plan = make_plan(tmap, f, atoms)
    rep.objects["plan"] = plan
    rep.costs["map_plan"] = plan.cost
    rep.residuals["boundary_mass"] = boundary_mass(plan, curve)
    rep.residuals["pushforward"] = pushforward_distance(tmap, f, seed=seed)
    rep.stages["plan"] = "ok"
    if rep.failed_stage is not None:
        # a violated map still yields its plan for diagnostics, nothing further
        _emit(rep, out, emit)
        return rep

    raster = rasterize(plan, (grid, grid))
    div = divergence_residual(raster, f, curve)
    rep.residuals["divergence"] = float(max(div))
    rep.objects["raster"] = raster
    rep.stages["fields"] = "ok"

    field_u = u_grid(tmap, (grid, grid))
    rep.objects["u"] = field_u
    rep.costs["tv_u"] = total_variation(field_u)[0]
    rep.residuals["rotation"] = rotation_check(field_u, raster)
    rep.residuals["max_principle"] = max_principle_violation(field_u, sc.trace)
    rep.residuals["trace_gap"] = trace_gap(field_u, curve, sc.trace)
    rep.residuals["trace_budget"] = 2 * field_u.h * sc.trace.lipschitz()
    rep.residuals["max_jump"] = max_jump(field_u)
    rep.residuals["invalid_cells"] = field_u.invalid
    rep.stages["u"] = "ok"
    if field_u.invalid:
        rep.messages.append(f"{field_u.invalid} cells in degenerate flat regions")

    if oracle:
        n = int(solver.get("oracle_atoms", 200))
        sp, mass = f.inverse_cdf_sample("+", n)
        sm, _ = f.inverse_cdf_sample("-", n)
        dp = solve_assignment(curve.points(sp), curve.points(sm), mass)
        rep.objects["oracle"] = dp
        mp = make_plan(tmap, f, n)
        rep.costs["oracle"] = dp.cost
        rep.costs["map_plan_oracle_n"] = mp.cost
        rep.residuals["oracle_rel_gap"] = (mp.cost - dp.cost) / dp.cost if dp.cost > 0 else 0.0
        rep.residuals["duality_gap"] = duality_gap(dp)
        rep.residuals["cycle_margin"] = cyclical_violation(dp, seed=seed).margin
        rep.residuals["oracle_interior_fraction"] = ray_support_audit(dp, curve).interior_fraction
        if "validated" in rep.objects:
            M = cross_cell_mass(dp, rep.objects["validated"])
            rep.objects["cross_cell"] = M
            rep.residuals["cross_cell_mass"] = off_diagonal(M)
        rep.stages["oracle"] = "ok"
        if rep.residuals["oracle_rel_gap"] > 1e-3:
            rep.fail("oracle", EXIT_VIOLATED, "oracle beats the map plan: map not optimal")
    rep.objects["seconds"] = time.perf_counter() - t0
    _emit(rep, out, emit)
    return rep


def _emit(rep: RunReport, out, kinds):
    if not out:
        return
    from . import emit as em

    try:
        em.emit_all(rep, Path(out), kinds)
        rep.stages["emit"] = "ok"
    except OSError as exc:
        rep.fail("emit", EXIT_INPUT, f"could not write outputs: {exc}")


def scan(name: str, lo: float, hi: float, condition: str | None = None, tol: float = 1e-6,
         fixed: dict | None = None) -> adm.ScanResult:
    """Bisect a built-in family's frontier in its swept parameter."""
    from .scenarios import SCAN_FAMILIES, builtin

    if name not in SCAN_FAMILIES:
        raise InputError(f"no scan family for {name!r}; choose from {sorted(SCAN_FAMILIES)}")
    param, default_cond, reps, kw = SCAN_FAMILIES[name]
    condition = condition or default_cond
    kw = {**kw, **(fixed or {})}

    def family(x):
        sc = builtin(name, **{**kw, param: x})
        if sc.partition is None:
            d = decompose(sc.f, sc.curve)
            tmap = build(d, sc.f, sc.curve)
            if condition == "H3":
                return adm.check_H3(tmap, d, k=int(sc.solver["k"]))
            if condition == "H2":
                return adm.check_H2(tmap, sc.curve)
            raise InputError(f"condition {condition} does not apply to {name}")
        vp = validate(sc.partition, sc.f, sc.curve)
        return evaluate_conditions(vp, [condition], 8, reps or "arbitrary")[0]

    return adm.threshold_scan(family, lo, hi, tol)
