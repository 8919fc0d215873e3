"""Average relative deviation (aRD) and best-hit (BH) counts over an instance set."""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import Iterable, Mapping

from ..core.model import CRIT_RTOL

log = logging.getLogger(__name__)

Table = Mapping[str, Mapping[str, float]]


def table_from_records(records: Iterable) -> dict[str, dict[str, float]]:
    """instance -> method -> criterion; failures become +inf."""
    out: dict[str, dict[str, float]] = defaultdict(dict)
    for rec in records:
        out[rec.instance][rec.method] = math.inf if rec.status != "ok" else float(rec.criterion)
    return dict(out)


def _methods(table: Table, methods) -> list[str]:
    if methods is not None:
        return list(methods)
    return sorted({m for row in table.values() for m in row})


def _best(row: Mapping[str, float]) -> float:
    return min(row.values(), default=math.inf)


def _rows(table: Table, methods: list[str]):
    for inst in sorted(table):
        row = table[inst]
        for m in methods:
            if m not in row:
                log.warning("no result for method %s on %s; pair excluded", m, inst)
        yield inst, {m: row[m] for m in methods if m in row}


def ard(table: Table, methods: Iterable[str] | None = None) -> dict[str, float]:
    """Per method: mean over instances of 100 * (L - L_best) / L_best.

    Failed runs (infinite criterion) are left out of the mean; a method with
    no finite result gets NaN.
    """
    methods = _methods(table, methods)
    sums = {m: 0.0 for m in methods}
    counts = {m: 0 for m in methods}
    for inst, row in _rows(table, methods):
        best = _best(row)
        if not math.isfinite(best):
            continue
        if best == 0:
            log.warning("best criterion on %s is zero; instance skipped for aRD", inst)
            continue
        for m, value in row.items():
            if math.isfinite(value):
                sums[m] += 100.0 * (value - best) / best
                counts[m] += 1
    return {m: sums[m] / counts[m] if counts[m] else math.nan for m in methods}


def best_hits(table: Table, methods: Iterable[str] | None = None) -> dict[str, int]:
    """Per method: number of instances where it reaches the best criterion; ties count for all."""
    methods = _methods(table, methods)
    hits = {m: 0 for m in methods}
    for _, row in _rows(table, methods):
        best = _best(row)
        if not math.isfinite(best):
            continue
        for m, value in row.items():
            if value <= best + CRIT_RTOL * abs(best):
                hits[m] += 1
    return hits


def summary_lines(table: Table, methods: Iterable[str] | None = None) -> list[str]:
    methods = _methods(table, methods)
    a, b = ard(table, methods), best_hits(table, methods)
    lines = ["method,aRD,BH"]
    lines += [f"{m},{a[m]:.2f},{b[m]}" for m in methods]
    return lines
