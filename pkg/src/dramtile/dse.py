"""Exhaustive tiling / scheduling search minimizing DRAM word accesses.

Per layer, the search enumerates base tiling factors (Th, Tw, Tj) on a
configurable stride, derives the largest depth factor Ti that fits the
ifmap and weight buffers, checks all three buffer constraints, and
evaluates the analytical access model for every candidate schedule.
Candidates are compared with <= so later candidates win ties, and the
enumeration order is fixed, making the search deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from .access_model import (BASELINE, LOOPS, MODES, ROMANET, AccessCounts,
                           Schedule, layer_accesses, ofm_episodes)
from .net_model import LayerShape, NetworkModel
from .tiling import TilingFactors, TilingPlan, build_plan, buffer_footprint

PRIORITY6 = "priority6"
EXHAUSTIVE24 = "exhaustive24"

# Reuse-priority order -> loop nest (outermost first).  The data type
# highest in the priority stays resident longest, so its indexing loops
# sit outermost.
_PRIORITY_NESTS = {
    ("ifm", "wgh", "ofm"): ("h", "w", "i", "j"),
    ("ifm", "ofm", "wgh"): ("h", "w", "j", "i"),
    ("wgh", "ifm", "ofm"): ("j", "i", "h", "w"),
    ("wgh", "ofm", "ifm"): ("j", "h", "w", "i"),
    ("ofm", "ifm", "wgh"): ("h", "w", "j", "i"),
    ("ofm", "wgh", "ifm"): ("j", "h", "w", "i"),
}

# Baseline scheduling keeps only weight-reuse and ofmap-reuse nests.
_BASELINE_NESTS = (("j", "i", "h", "w"), ("h", "w", "j", "i"))


class Infeasible(Exception):
    """No tiling fits the buffers, even the minimal one."""


@dataclass(frozen=True)
class SearchConfig:
    step_Th: int = 1
    step_Tw: int = 1
    step_Tj: int = 1
    buffers: tuple[int, int, int] = (65536, 65536, 65536)  # bytes
    Dp: int = 1
    schedule_mode: str = PRIORITY6
    objective_mode: str = ROMANET

    def __post_init__(self):
        if min(self.step_Th, self.step_Tw, self.step_Tj) < 1:
            raise ValueError("search steps must be >= 1")
        if len(self.buffers) != 3 or min(self.buffers) <= 0:
            raise ValueError("buffers must be three positive byte counts")
        if self.Dp < 1:
            raise ValueError("Dp must be >= 1")
        if self.schedule_mode not in (PRIORITY6, EXHAUSTIVE24):
            raise ValueError(f"unknown schedule mode {self.schedule_mode!r}")
        if self.objective_mode not in MODES:
            raise ValueError(f"unknown objective mode {self.objective_mode!r}")


def default_steps(layer: LayerShape) -> tuple[int, int, int]:
    """Search strides that keep each axis near 32 candidate points."""
    return (max(1, layer.H // 32), max(1, layer.W // 32),
            max(1, layer.J // 32))


@dataclass
class LayerPlanResult:
    min_accesses: AccessCounts
    plan: TilingPlan
    schedule: Schedule


def candidate_schedules(layer: LayerShape,
                        schedule_mode: str = PRIORITY6,
                        objective_mode: str = ROMANET) -> list[Schedule]:
    """Schedules to evaluate for one layer.

    priority6 maps the six reuse-priority orders to loop nests through a
    fixed table and deduplicates; exhaustive24 tries every permutation.
    Baseline searches are restricted to the weight-reuse and ofmap-reuse
    nests.
    """
    if schedule_mode == EXHAUSTIVE24:
        return [Schedule(nest) for nest in permutations(LOOPS)]
    if objective_mode == BASELINE:
        return [Schedule(nest, origin="baseline")
                for nest in _BASELINE_NESTS]
    out, seen = [], set()
    for order, nest in _PRIORITY_NESTS.items():
        if nest not in seen:
            seen.add(nest)
            out.append(Schedule(nest, origin=">".join(order)))
    return out


def _max_Ti(layer: LayerShape, Th: int, Tw: int, Tj: int,
            cfg: SearchConfig) -> int:
    """Largest depth factor fitting both the ifmap and weight buffers,
    or 0 when none fits."""
    ibits, wbits, _ = (b * 8 for b in cfg.buffers)
    if layer.depthwise:
        ok = (Th * Tw * Tj * layer.bit_ifm <= ibits
              and layer.P * layer.Q * Tj * layer.bit_wgh <= wbits)
        return 1 if ok else 0
    cap_i = ibits // (Th * Tw * layer.bit_ifm)
    cap_w = wbits // (layer.P * layer.Q * Tj * layer.bit_wgh)
    return min(layer.I, cap_i, cap_w)


def _fits(plan: TilingPlan, cfg: SearchConfig) -> bool:
    need = buffer_footprint(plan)
    return all(n <= have for n, have in zip(need, cfg.buffers))


def _axis_candidates(lo: int, hi: int, step: int) -> list[int]:
    """Strided range that always contains both endpoints."""
    vals = list(range(lo, hi + 1, step))
    if vals[-1] != hi:
        vals.append(hi)
    return vals


def _baseline_Tj(layer: LayerShape, cfg: SearchConfig) -> int:
    """The baseline partitioning rule: make the filter-set tile as large
    as the weight buffer allows (depth 1) before anything else."""
    wbits = cfg.buffers[1] * 8
    return min(layer.J, wbits // (layer.P * layer.Q * layer.bit_wgh))


def _bit_volume(layer: LayerShape, counts: AccessCounts,
                schedule: Schedule, plan: TilingPlan) -> int:
    """Traffic in bits: the baseline schedule objective.

    Spilled partial sums move at accumulator precision, so a
    volume-minimizing baseline weighs them accordingly.
    """
    E = ofm_episodes(schedule.nest, plan.trips)
    ofm_bits = layer.bit_psum if E > 1 else layer.bit_ofm
    return (counts.rd_ifm * layer.bit_ifm + counts.rd_wgh * layer.bit_wgh
            + (counts.rd_ofm + counts.wr_ofm) * ofm_bits)


def _search_baseline(layer: LayerShape, cfg: SearchConfig,
                     schedules: list[Schedule]) -> LayerPlanResult | None:
    """Rule-based baseline partitioning.

    The baseline greedily fills the buffers instead of searching: the
    filter-set tile Tj is maximized first, the depth tile Ti next, and
    the spatial tile is the largest one that still fits.  Only the
    schedule choice remains adaptive (weight-reuse vs ofmap-reuse,
    whichever moves fewer bits).
    """
    for Tj in range(_baseline_Tj(layer, cfg), 0, -1):
        chosen = None
        for Th in _axis_candidates(layer.P, layer.H, cfg.step_Th):
            for Tw in _axis_candidates(layer.Q, layer.W, cfg.step_Tw):
                Ti = _max_Ti(layer, Th, Tw, Tj, cfg)
                if Ti < 1:
                    continue
                plan = build_plan(layer, TilingFactors(Th, Tw, Ti, Tj))
                if not _fits(plan, cfg):
                    continue
                if chosen is None or Th * Tw >= chosen[0] * chosen[1]:
                    chosen = (Th, Tw, plan)
        if chosen is None:
            continue
        best, best_vol = None, None
        for schedule in schedules:
            counts = layer_accesses(layer, chosen[2], schedule, cfg.Dp,
                                    BASELINE)
            vol = _bit_volume(layer, counts, schedule, chosen[2])
            if best is None or vol <= best_vol:
                best, best_vol = LayerPlanResult(counts, chosen[2],
                                                 schedule), vol
        return best
    return None


def search_layer(layer: LayerShape, cfg: SearchConfig) -> LayerPlanResult:
    """Exhaustive search for one layer; keeps the last candidate whose
    access total is <= the running minimum."""
    schedules = candidate_schedules(layer, cfg.schedule_mode,
                                    cfg.objective_mode)
    if cfg.objective_mode == BASELINE and cfg.schedule_mode == PRIORITY6:
        best = _search_baseline(layer, cfg, schedules)
        if best is None:
            raise Infeasible(
                f"layer {layer.name!r}: no tiling fits buffers {cfg.buffers}")
        return best
    best: LayerPlanResult | None = None
    for schedule in schedules:
        for Th in _axis_candidates(layer.P, layer.H, cfg.step_Th):
            for Tw in _axis_candidates(layer.Q, layer.W, cfg.step_Tw):
                for Tj in _axis_candidates(1, layer.J, cfg.step_Tj):
                    Ti = _max_Ti(layer, Th, Tw, Tj, cfg)
                    if Ti < 1:
                        continue
                    plan = build_plan(layer, TilingFactors(Th, Tw, Ti, Tj))
                    if not _fits(plan, cfg):
                        continue
                    counts = layer_accesses(layer, plan, schedule, cfg.Dp,
                                            cfg.objective_mode)
                    if (best is None
                            or counts.total_words
                            <= best.min_accesses.total_words):
                        best = LayerPlanResult(counts, plan, schedule)
    if best is None:
        raise Infeasible(
            f"layer {layer.name!r}: no tiling fits buffers {cfg.buffers}")
    return best


def search_network(network: NetworkModel,
                   cfg: SearchConfig) -> list[LayerPlanResult]:
    """Independent per-layer searches over a whole network."""
    results = []
    for layer in network.layers:
        try:
            results.append(search_layer(layer, cfg))
        except Infeasible as exc:
            raise Infeasible(f"{network.name}: {exc}") from exc
    return results


def network_total_words(results: list[LayerPlanResult]) -> int:
    return sum(r.min_accesses.total_words for r in results)
