"""Two-stage solve pipelines: heuristic routing handing off to exact search.

``run_half`` splits the budget evenly between the anytime router and the
warm-started branch-and-bound.  ``run_last`` gives the router the whole
budget, then re-runs the exact search with the time that remained after the
router's last improvement — a best-case estimate of switching at exactly the
right moment.  ``run_standalone`` runs a single engine cold.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cpsolver import build_model, search
from .instance import Instance, ParseError
from .router import solve_anytime
from .schedule import (Schedule, improvement_delta, schedule_from_dict,
                       schedule_to_dict)

ENGINE_ROUTER = "router"
ENGINE_CP = "cp"
ENGINE_HALF = "half"
ENGINE_LAST = "last"
ENGINES = (ENGINE_ROUTER, ENGINE_CP, ENGINE_HALF, ENGINE_LAST)


@dataclass(frozen=True)
class TracePoint:
    t: float          # seconds since the stage started
    makespan: int
    swap_count: int
    source: str       # baseline | greedy | cp


@dataclass
class RunReport:
    instance_id: str
    engine: str
    budget_s: float
    seed: int
    stage_seeds: tuple[int, ...]
    stage1: list[TracePoint] = field(default_factory=list)
    stage2: list[TracePoint] = field(default_factory=list)
    stage2_start_s: float | None = None
    handoff: Schedule | None = None
    final: Schedule | None = None
    status: str = "unsolved"
    cp_status: str | None = None
    delta: float | None = None
    nodes: int = 0

    @property
    def solved(self) -> bool:
        return self.final is not None

    def objective(self) -> tuple[int, int] | None:
        return self.final.objective() if self.final else None


def _stage_seeds(seed: int, n: int = 2) -> tuple[int, ...]:
    rng = random.Random(seed)
    return tuple(rng.getrandbits(32) for _ in range(n))


def _router_stage(instance: Instance, budget_s: float, seed: int,
                  max_restarts: int | None = None):
    result = solve_anytime(instance, budget_s=budget_s, seed=seed,
                           max_restarts=max_restarts)
    points = [TracePoint(i.found_at, i.schedule.makespan,
                         i.schedule.swap_count, i.source)
              for i in result.incumbents]
    return result.best, points


def _cp_stage(instance: Instance, budget_s: float | None, warm: Schedule | None,
              node_budget: int | None):
    model = build_model(instance)
    result = search(model, incumbent=warm, budget_s=budget_s,
                    node_budget=node_budget)
    points = [TracePoint(i.found_at, i.schedule.makespan,
                         i.schedule.swap_count, "cp")
              for i in result.incumbents]
    return result, points


def _finish(report: RunReport, stage1_best: Schedule | None,
            final: Schedule | None) -> RunReport:
    report.final = final
    if final is not None:
        report.status = "solved"
        if stage1_best is not None:
            if stage1_best.makespan > 0 and final.makespan > 0:
                report.delta = improvement_delta(stage1_best.makespan,
                                                 final.makespan)
            else:
                report.delta = 0.0
    return report


def run_half(instance: Instance, budget_s: float, seed: int = 0,
             node_budget: int | None = None) -> RunReport:
    """Half the budget to the router, the rest to warm-started exact search."""
    if budget_s <= 0:
        raise ValueError("budget_s must be positive")
    seeds = _stage_seeds(seed)
    report = RunReport(instance.instance_id, ENGINE_HALF, budget_s, seed, seeds)
    t0 = time.monotonic()
    best, report.stage1 = _router_stage(instance, budget_s / 2, seeds[0])
    if best is None:
        raise RuntimeError("the anytime router produced no schedule")
    report.handoff = best
    report.stage2_start_s = time.monotonic() - t0
    remaining = max(budget_s - report.stage2_start_s, 0.0)
    result, report.stage2 = _cp_stage(instance, remaining, best, node_budget)
    report.cp_status = result.status
    report.nodes = result.nodes
    return _finish(report, best, result.best)


def run_last(instance: Instance, budget_s: float, seed: int = 0,
             node_budget: int | None = None) -> RunReport:
    """Router gets the full budget; exact search gets what was left after the
    router's last improvement (two-pass best-case protocol)."""
    if budget_s <= 0:
        raise ValueError("budget_s must be positive")
    seeds = _stage_seeds(seed)
    report = RunReport(instance.instance_id, ENGINE_LAST, budget_s, seed, seeds)
    best, report.stage1 = _router_stage(instance, budget_s, seeds[0])
    if best is None:
        raise RuntimeError("the anytime router produced no schedule")
    t_last = report.stage1[-1].t
    report.handoff = best
    report.stage2_start_s = t_last
    remaining = max(budget_s - t_last, 0.0)
    result, report.stage2 = _cp_stage(instance, remaining, best, node_budget)
    report.cp_status = result.status
    report.nodes = result.nodes
    return _finish(report, best, result.best)


def run_standalone(instance: Instance, engine: str, budget_s: float,
                   seed: int = 0, node_budget: int | None = None) -> RunReport:
    """One engine, the whole budget; the exact search starts cold."""
    if budget_s <= 0:
        raise ValueError("budget_s must be positive")
    if engine not in (ENGINE_ROUTER, ENGINE_CP):
        raise ValueError(f"unknown standalone engine {engine!r}")
    seeds = _stage_seeds(seed, 1)
    report = RunReport(instance.instance_id, engine, budget_s, seed, seeds)
    if engine == ENGINE_ROUTER:
        best, report.stage1 = _router_stage(instance, budget_s, seeds[0])
        return _finish(report, None, best)
    result, report.stage1 = _cp_stage(instance, budget_s, None, node_budget)
    report.cp_status = result.status
    report.nodes = result.nodes
    return _finish(report, None, result.best)


def run_engine(instance: Instance, engine: str, budget_s: float,
               seed: int = 0, node_budget: int | None = None) -> RunReport:
    """Dispatch on engine name: router | cp | half | last."""
    if engine == ENGINE_HALF:
        return run_half(instance, budget_s, seed, node_budget)
    if engine == ENGINE_LAST:
        return run_last(instance, budget_s, seed, node_budget)
    return run_standalone(instance, engine, budget_s, seed, node_budget)


# ---------------------------------------------------------------------------
# serialization


def _points_to_list(points):
    return [{"t": p.t, "makespan": p.makespan, "swap_count": p.swap_count,
             "source": p.source} for p in points]


def _points_from_list(raw):
    return [TracePoint(p["t"], p["makespan"], p["swap_count"], p["source"])
            for p in raw]


def report_to_dict(report: RunReport) -> dict:
    return {
        "instance_id": report.instance_id,
        "engine": report.engine,
        "budget_s": report.budget_s,
        "seed": report.seed,
        "stage_seeds": list(report.stage_seeds),
        "stage1": _points_to_list(report.stage1),
        "stage2": _points_to_list(report.stage2),
        "stage2_start_s": report.stage2_start_s,
        "handoff": schedule_to_dict(report.handoff) if report.handoff else None,
        "final": schedule_to_dict(report.final) if report.final else None,
        "status": report.status,
        "cp_status": report.cp_status,
        "delta": report.delta,
        "nodes": report.nodes,
    }


def report_from_dict(d: dict) -> RunReport:
    try:
        report = RunReport(
            instance_id=d["instance_id"],
            engine=d["engine"],
            budget_s=d["budget_s"],
            seed=d["seed"],
            stage_seeds=tuple(d.get("stage_seeds", ())),
            stage1=_points_from_list(d.get("stage1", [])),
            stage2=_points_from_list(d.get("stage2", [])),
            stage2_start_s=d.get("stage2_start_s"),
            handoff=schedule_from_dict(d["handoff"]) if d.get("handoff") else None,
            final=schedule_from_dict(d["final"]) if d.get("final") else None,
            status=d.get("status", "unsolved"),
            cp_status=d.get("cp_status"),
            delta=d.get("delta"),
            nodes=d.get("nodes", 0),
        )
    except KeyError as exc:
        raise ParseError(f"missing field {exc} in run report") from exc
    return report


def write_report(report: RunReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n")


def read_report(path: str | Path) -> RunReport:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    return report_from_dict(data)
