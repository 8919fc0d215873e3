"""Run one placement method on one instance and record the outcome."""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .. import kernels
from ..builder import BuildOptions, build_model, extract_placement, warm_start_from_placement
from ..core.geometry import criterion_parts, validate
from ..core.io import read_instance, read_placement, write_placement
from ..core.model import CriterionWeights, Instance, Placement
from ..fdgd import FdgdParams, LegalizationError, fdgd_layout, legalize
from ..matheuristic import MhConfig, MhTrace, run
from ..milp import ContractError, SolveParams, solve

log = logging.getLogger(__name__)

MODES = ("ilp", "fdgd-ilp", "mh")
MH_VARIANTS = ("plain", "diversify", "no-warm-start")
INITIAL_FRACTION = 1 / 3


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "mh"
    mh_variant: str = "plain"
    g: int = 10
    c_C: float = 1.0
    total_budget: float = 60.0
    symmetry_breaking: bool = False
    # P = (1 + wh_slack) * (W + H) of the reference placement
    wh_slack: float | None = None
    reference: str | None = None
    initial: str | None = None
    seed: int = 0
    threads: int = 1
    step_time_limit: float = 10.0
    max_iterations: int | None = None
    logical_clock: bool = False
    feasibility_emphasis: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ContractError(f"mode must be one of {MODES}")
        if self.mh_variant not in MH_VARIANTS:
            raise ContractError(f"mh variant must be one of {MH_VARIANTS}")
        if not self.total_budget > 0:
            raise ContractError("total budget must be positive")
        if self.wh_slack is not None and self.wh_slack < 0:
            raise ContractError("wh slack must be >= 0")

    @property
    def weights(self) -> CriterionWeights:
        return CriterionWeights(1.0, self.c_C)

    @property
    def method(self) -> str:
        if self.mode == "ilp":
            name = "ILP"
        elif self.mode == "fdgd-ilp":
            name = "FDGD-ILP"
        else:
            name = f"MH-{self.g}" + {"plain": "", "diversify": "D", "no-warm-start": "B"}[self.mh_variant]
        if self.symmetry_breaking:
            name += "+SB"
        if self.wh_slack is not None:
            name += "+WH"
        return name


@dataclass
class ResultRecord:
    instance: str
    method: str
    status: str
    criterion: float
    L_A: float
    L_C: float
    area: float
    hpwl: float
    wall_time: float
    placement: str = ""
    trace: str = ""

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[str]:
        return [_fmt(getattr(self, name)) for name in self.header()]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "ResultRecord":
        kw = {}
        for f in fields(cls):
            raw = row[f.name]
            kw[f.name] = float(raw) if f.type in ("float", float) else raw
        return cls(**kw)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def unweighted_hpwl(instance: Instance, placement: Placement) -> float:
    cx, cy = placement.centroids(instance)
    ptr, idx, cost = instance.net_csr
    return kernels.hpwl(np.ascontiguousarray(cx), np.ascontiguousarray(cy), ptr, idx, np.ones_like(cost))


def record_for(instance: Instance, placement: Placement | None, method: str, wall: float,
               weights: CriterionWeights, placement_path: str = "", trace_path: str = "") -> ResultRecord:
    if placement is None:
        nan = math.nan
        return ResultRecord(instance.name, method, "failed", math.inf, nan, nan, nan, nan, wall,
                            "", trace_path)
    crit, l_a, l_c = criterion_parts(instance, placement, weights)
    return ResultRecord(instance.name, method, "ok", crit, l_a, l_c, placement.W * placement.H,
                        unweighted_hpwl(instance, placement), wall, placement_path, trace_path)


@dataclass
class _Clock:
    start: float = field(default_factory=time.perf_counter)

    def elapsed(self) -> float:
        return time.perf_counter() - self.start


def _options(instance: Instance, config: ExperimentConfig, reference: Placement | None) -> BuildOptions:
    P = None
    if config.wh_slack is not None:
        if reference is None:
            raise ContractError("--wh-slack needs a reference placement")
        P = (1.0 + config.wh_slack) * (reference.W + reference.H)
    return BuildOptions(config.weights, config.symmetry_breaking, P)


def solve_full(instance: Instance, options: BuildOptions, budget: float, config: ExperimentConfig,
               start: Placement | None = None) -> Placement | None:
    """Plain full-model solve; returns None when no valid incumbent was found."""
    model, vm = build_model(instance, options)
    if start is not None:
        warm_start_from_placement(model, vm, instance, start)
    res = solve(model, SolveParams(
        time_limit=budget, threads=config.threads, seed=config.seed,
        emphasis="feasibility" if config.feasibility_emphasis else "default",
    ))
    if not res.status.has_solution:
        return None
    pl = extract_placement(instance, vm, res)
    bad = validate(instance, pl)
    if bad:
        log.warning("full solve of %s returned an invalid placement: %s", instance.name, bad[:3])
        return None
    return pl


def _fdgd_ilp(instance, options, budget, config) -> Placement | None:
    clock = _Clock()
    rough = fdgd_layout(instance, FdgdParams(seed=config.seed))
    try:
        return legalize(instance, rough, max(budget - clock.elapsed(), 1e-3), options,
                        SolveParams(threads=config.threads, seed=config.seed))
    except LegalizationError as exc:
        log.warning("%s", exc)
        return None


def run_experiment(instance: Instance | str | Path, config: ExperimentConfig,
                   out_dir: str | Path | None = None) -> ResultRecord:
    """Run ``config`` on ``instance``; write placement, trace and a results row under ``out_dir``."""
    clock = _Clock()
    inst = instance if isinstance(instance, Instance) else read_instance(instance)
    reference = read_placement(config.reference) if config.reference else None
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    stem = f"{inst.name}_{config.method}"
    trace_path = ""
    placement: Placement | None

    if config.mode == "ilp":
        placement = solve_full(inst, _options(inst, config, reference), config.total_budget, config)
    elif config.mode == "fdgd-ilp":
        placement = _fdgd_ilp(inst, _options(inst, config, reference), config.total_budget, config)
    else:
        if config.initial:
            initial = read_placement(config.initial)
        else:
            init_budget = config.total_budget * INITIAL_FRACTION
            base = (_options(inst, config, reference) if reference is not None
                    else BuildOptions(config.weights, config.symmetry_breaking))
            if config.mh_variant == "no-warm-start":
                initial = solve_full(inst, base, init_budget, config)
            else:
                initial = _fdgd_ilp(inst, base, init_budget, config)
        placement = None
        if initial is not None:
            # symmetry breaking pins one rectangle of the full model; restricted models skip it
            mh_options = replace(
                _options(inst, config, reference if reference is not None else initial),
                symmetry_breaking=False,
            )
            mh = MhConfig(
                g=min(config.g, inst.n),
                step_time_limit=config.step_time_limit,
                use_diversification=config.mh_variant == "diversify",
                seed=config.seed,
                total_budget=max(config.total_budget - clock.elapsed(), 0.0),
                options=mh_options,
                threads=config.threads,
                max_iterations=config.max_iterations,
                logical_clock=config.logical_clock,
            )
            placement, trace = run(inst, initial, mh)
            if out is not None:
                trace_path = str(out / f"{stem}.trace.txt")
                trace.write(trace_path)

    wall = clock.elapsed()
    placement_path = ""
    if out is not None and placement is not None:
        placement_path = str(out / f"{stem}.placement.json")
        write_placement(inst, placement, placement_path, config.weights)
    rec = record_for(inst, placement, config.method, wall, config.weights, placement_path, trace_path)
    if out is not None:
        append_results(out / "results.csv", [rec])
    return rec


def append_results(path: str | Path, records) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(ResultRecord.header())
        for rec in records:
            w.writerow(rec.row())


def read_results(path: str | Path) -> list[ResultRecord]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ResultRecord.header():
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [ResultRecord.from_row(r) for r in reader]


def read_trace(path: str | Path) -> MhTrace:
    return MhTrace.parse(Path(path).read_text(encoding="utf-8"))
