"""End-to-end experiment orchestration.

Per layer: design-space search -> DRAM layout -> request trace ->
row-buffer simulation -> energy accounting.  Layers execute one at a
time on the accelerator, so each layer gets a fresh device allocation
and the per-layer statistics are summed for network totals.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .access_model import BASELINE, MODES, ROMANET, AccessCounts, layer_accesses
from .dram_map import (CONTINUOUS_BANK, ROW_MAJOR, DramGeometry,
                       RegionAllocator, tile_layout)
from .dram_sim import DramTiming, SimStats, effective_throughput, simulate
from .dse import LayerPlanResult, SearchConfig, default_steps, search_layer
from .energy_model import EnergyParams, EnergyReport, default_params, energy
from .net_model import IFM, KINDS, OFM, WGH, LayerShape, NetworkModel
from .sram_map import SramGeometry
from .tiling import TilingFactors, build_plan
from .trace_gen import BURST, NONBURST, count_trace, generate_layer_trace

POLICY_FOR_MODE = {ROMANET: ROW_MAJOR, BASELINE: CONTINUOUS_BANK}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HardwareConfig:
    """On-chip buffers plus DRAM geometry, timing, and energy parameters."""

    buffers: tuple[int, int, int]
    sram: SramGeometry
    dram: DramGeometry
    timing: DramTiming
    energy: EnergyParams

    @property
    def Dp(self) -> int:
        return self.dram.chips_per_rank


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing field {key!r}")
    return d[key]


def parse_network(doc: dict, where: str = "network") -> NetworkModel:
    layers = []
    for k, row in enumerate(_require(doc, "layers", where)):
        ctx = f"{where}.layers[{k}]"
        kind = _require(row, "kind", ctx)
        if kind not in KINDS:
            raise ConfigError(f"{ctx}: unknown kind {kind!r}")
        bits = row.get("bits", 8)
        layers.append(LayerShape(
            name=_require(row, "name", ctx), kind=kind,
            H=_require(row, "H", ctx), W=_require(row, "W", ctx),
            I=_require(row, "I", ctx), P=_require(row, "P", ctx),
            Q=_require(row, "Q", ctx), J=_require(row, "J", ctx),
            stride=row.get("str", 1),
            bit_ifm=row.get("bit_ifm", bits),
            bit_wgh=row.get("bit_wgh", bits),
            bit_ofm=row.get("bit_ofm", bits),
            bit_psum=row.get("bit_psum", 32)))
    return NetworkModel(name=_require(doc, "name", where), layers=tuple(layers))


def load_network(path) -> NetworkModel:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"network file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_network(doc, str(path))


def parse_hardware(doc: dict, where: str = "hardware") -> HardwareConfig:
    buf = _require(doc, "buffers", where)
    buffers = (_require(buf, "ifm", where + ".buffers"),
               _require(buf, "wgh", where + ".buffers"),
               _require(buf, "ofm", where + ".buffers"))
    sram = SramGeometry(**_require(doc, "sram", where))
    dram = DramGeometry(**_require(doc, "dram", where))
    timing = DramTiming(**doc.get("timing", {}))
    if "energy" in doc:
        eparams = EnergyParams(**doc["energy"])
    else:
        eparams = default_params()
    return HardwareConfig(buffers=buffers, sram=sram, dram=dram,
                          timing=timing, energy=eparams)


def load_hardware(path) -> HardwareConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"hardware file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_hardware(doc, str(path))


def bundled_path(name: str) -> Path:
    """Path of a bundled JSON fixture (network or hardware file)."""
    p = resources.files("dramtile").joinpath("data", f"{name}.json")
    if not p.is_file():
        raise ConfigError(f"no bundled fixture named {name!r}")
    return Path(str(p))


def bundled_network(name: str) -> NetworkModel:
    return load_network(bundled_path(name))


def bundled_hardware(name: str = "tpu_ddr3") -> HardwareConfig:
    return load_hardware(bundled_path(name))


def config_hash(*parts) -> str:
    """Short stable hash identifying the configuration of a report row."""
    blob = json.dumps([repr(p) for p in parts], sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def make_search_config(layer: LayerShape, hw: HardwareConfig, mode: str,
                       steps: int | None = None) -> SearchConfig:
    """Per-layer search configuration; ``steps=None`` picks per-layer
    default strides, an integer forces that stride on every axis."""
    if steps is None:
        sh, sw, sj = default_steps(layer)
    else:
        sh = sw = sj = steps
    return SearchConfig(step_Th=sh, step_Tw=sw, step_Tj=sj,
                        buffers=hw.buffers, Dp=hw.Dp,
                        objective_mode=mode)


@dataclass
class LayerRun:
    """One layer pushed through the full pipeline in one mode."""

    layer: LayerShape
    result: LayerPlanResult
    counts: AccessCounts
    stats: SimStats
    energy: EnergyReport


@dataclass
class NetworkRun:
    """A network's layers run sequentially in one (mode, burst) setting."""

    network: str
    mode: str
    burst: str
    layers: list[LayerRun] = field(default_factory=list)

    @property
    def total_words(self) -> int:
        return sum(r.counts.total_words for r in self.layers)

    @property
    def total_requests(self) -> int:
        return sum(r.stats.n_requests for r in self.layers)

    @property
    def stats(self) -> SimStats:
        total = self.layers[0].stats
        for r in self.layers[1:]:
            total = total.merge(r.stats)
        return total

    @property
    def energy_total(self) -> float:
        return sum(r.energy.total for r in self.layers)

    def throughput(self, timing: DramTiming) -> float:
        return effective_throughput(self.stats, timing)


def run_layer(layer: LayerShape, result: LayerPlanResult, hw: HardwareConfig,
              mode: str, burst: str) -> LayerRun:
    """Trace, simulate, and account one layer under a chosen plan."""
    policy = POLICY_FOR_MODE[mode]
    layout = tile_layout(result.plan, result.schedule, hw.Dp, mode, hw.dram)
    alloc = RegionAllocator(hw.dram, policy)
    for dtype in (IFM, WGH, OFM):
        alloc.allocate((layer.name, dtype), layout.totals[dtype])
    trace = generate_layer_trace(layer, result.plan, result.schedule, alloc,
                                 hw.dram, burst, hw.Dp, mode)
    counts = layer_accesses(layer, result.plan, result.schedule, hw.Dp, mode,
                            geom=hw.dram, alloc=layout)
    stats = simulate(trace, hw.dram, hw.timing)
    return LayerRun(layer=layer, result=result, counts=counts,
                    stats=stats, energy=energy(stats, hw.energy))


def run_network(network: NetworkModel, hw: HardwareConfig, mode: str,
                burst: str = BURST, steps: int | None = None,
                plans: list[LayerPlanResult] | None = None) -> NetworkRun:
    """Full pipeline over every layer of a network in one mode."""
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    if burst not in (BURST, NONBURST):
        raise ConfigError(f"unknown burst mode {burst!r}")
    if plans is None:
        plans = [search_layer(layer, make_search_config(layer, hw, mode, steps))
                 for layer in network.layers]
    run = NetworkRun(network=network.name, mode=mode, burst=burst)
    for layer, result in zip(network.layers, plans):
        run.layers.append(run_layer(layer, result, hw, mode, burst))
    return run


@dataclass
class CompareReport:
    """Both modes of one network side by side."""

    romanet: NetworkRun
    baseline: NetworkRun
    hw: HardwareConfig

    @staticmethod
    def _reduction(base: float, roma: float) -> float:
        if base == 0:
            return 0.0
        return 100.0 * (base - roma) / base

    @property
    def access_reduction_pct(self) -> float:
        return self._reduction(self.baseline.total_words,
                               self.romanet.total_words)

    @property
    def conflict_miss_reduction_pct(self) -> float:
        b, r = self.baseline.stats, self.romanet.stats
        return self._reduction(b.n_conflict + b.n_miss,
                               r.n_conflict + r.n_miss)

    @property
    def energy_reduction_pct(self) -> float:
        return self._reduction(self.baseline.energy_total,
                               self.romanet.energy_total)

    @property
    def throughput_gain_pct(self) -> float:
        b = self.baseline.throughput(self.hw.timing)
        r = self.romanet.throughput(self.hw.timing)
        if b == 0:
            return 0.0
        return 100.0 * (r - b) / b


def compare(network: NetworkModel, hw: HardwareConfig, burst: str = BURST,
            steps: int | None = None) -> CompareReport:
    """Run both modes through the full pipeline."""
    return CompareReport(
        romanet=run_network(network, hw, ROMANET, burst, steps),
        baseline=run_network(network, hw, BASELINE, burst, steps),
        hw=hw)


# ---------------------------------------------------------------------------
# report files

_LAYER_COLUMNS = ["network", "mode", "burst", "layer", "Th", "Tw", "Ti", "Tj",
                  "nest", "rd_ifm", "rd_wgh", "rd_ofm", "wr_ofm",
                  "total_words", "requests", "hits", "misses", "conflicts",
                  "activates", "precharges", "cycles", "energy_pj",
                  "config_hash"]


def write_run_csv(run: NetworkRun, hw: HardwareConfig, path):
    """Per-layer pipeline results, one row per layer."""
    chash = config_hash(run.network, run.mode, run.burst, hw)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(_LAYER_COLUMNS)
        for lr in run.layers:
            f = lr.result.plan.factors
            c, s = lr.counts, lr.stats
            wr.writerow([run.network, run.mode, run.burst, lr.layer.name,
                         f.Th, f.Tw, f.Ti, f.Tj,
                         "".join(lr.result.schedule.nest),
                         c.rd_ifm, c.rd_wgh, c.rd_ofm, c.wr_ofm,
                         c.total_words, s.n_requests, s.n_hit, s.n_miss,
                         s.n_conflict, s.n_act, s.n_pre, s.total_cycles,
                         f"{lr.energy.total:.1f}", chash])


def write_compare_csv(report: CompareReport, path):
    """Network totals of both modes plus percentage deltas."""
    chash = config_hash(report.romanet.network, report.romanet.burst,
                        report.hw)
    rows = []
    for run in (report.romanet, report.baseline):
        s = run.stats
        rows.append([run.network, run.mode, run.burst, run.total_words,
                     run.total_requests, s.n_hit, s.n_miss, s.n_conflict,
                     s.total_cycles, f"{run.energy_total:.1f}",
                     f"{run.throughput(report.hw.timing):.3e}", chash])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["network", "mode", "burst", "total_words", "requests",
                     "hits", "misses", "conflicts", "cycles", "energy_pj",
                     "throughput_Bps", "config_hash"])
        wr.writerows(rows)
        wr.writerow([])
        wr.writerow(["delta", "accesses_pct", "conflict_miss_pct",
                     "energy_pct", "throughput_pct", "config_hash"])
        wr.writerow(["romanet_vs_baseline",
                     f"{report.access_reduction_pct:.2f}",
                     f"{report.conflict_miss_reduction_pct:.2f}",
                     f"{report.energy_reduction_pct:.2f}",
                     f"{report.throughput_gain_pct:.2f}", chash])


def plans_to_doc(network: NetworkModel, plans: list[LayerPlanResult],
                 mode: str) -> dict:
    """Serializable record of per-layer search results."""
    out = []
    for layer, r in zip(network.layers, plans):
        f = r.plan.factors
        out.append({"layer": layer.name,
                    "Th": f.Th, "Tw": f.Tw, "Ti": f.Ti, "Tj": f.Tj,
                    "nest": list(r.schedule.nest),
                    "origin": r.schedule.origin,
                    "predicted_words": r.min_accesses.total_words,
                    "rd_ifm": r.min_accesses.rd_ifm,
                    "rd_wgh": r.min_accesses.rd_wgh,
                    "rd_ofm": r.min_accesses.rd_ofm,
                    "wr_ofm": r.min_accesses.wr_ofm})
    return {"network": network.name, "mode": mode, "plans": out}


def plans_from_doc(doc: dict, network: NetworkModel) -> list[LayerPlanResult]:
    """Re-ingest a plans document into plan results (counts recomputed)."""
    from .access_model import Schedule

    by_name = {l.name: l for l in network.layers}
    mode = doc.get("mode", ROMANET)
    out = []
    for row in doc["plans"]:
        layer = by_name[row["layer"]]
        plan = build_plan(layer, TilingFactors(row["Th"], row["Tw"],
                                               row["Ti"], row["Tj"]))
        schedule = Schedule(tuple(row["nest"]), row.get("origin", "file"))
        counts = layer_accesses(layer, plan, schedule, 1, mode)
        out.append(LayerPlanResult(counts, plan, schedule))
    return out


def sweep_buffers(network: NetworkModel, hw: HardwareConfig,
                  sizes_kb: list[int], mode: str = ROMANET,
                  steps: int | None = None) -> list[tuple[int, int]]:
    """(buffer KB, minimum network words) per uniform buffer size."""
    from dataclasses import replace

    out = []
    for kb in sizes_kb:
        hw_k = replace(hw, buffers=(kb * 1024,) * 3)
        plans = [search_layer(l, make_search_config(l, hw_k, mode, steps))
                 for l in network.layers]
        out.append((kb, sum(p.min_accesses.total_words for p in plans)))
    return out


def sweep_steps(layer: LayerShape, hw: HardwareConfig,
                steps_list: list[int], mode: str = ROMANET) -> list[tuple[int, int]]:
    """(step, minimum layer words) per uniform search stride."""
    out = []
    for s in steps_list:
        r = search_layer(layer, make_search_config(layer, hw, mode, s))
        out.append((s, r.min_accesses.total_words))
    return out
