"""Command-line driver for the tiling search, trace generation,
simulation, and comparison pipeline.

Subcommands: dse, trace, sim, compare, sweep, report.  Network and
hardware files are JSON (see README for schemas); bundled fixtures can
be referenced by bare name (alexnet, vgg16, mobilenet, mobilenet_amc,
tpu_ddr3).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .access_model import BASELINE, MODES, ROMANET
from .dram_map import tile_layout
from .dram_sim import effective_throughput, simulate
from .dse import Infeasible
from .net_model import IFM, OFM, WGH
from .pipeline import (ConfigError, HardwareConfig, bundled_path, compare,
                       config_hash, load_hardware, load_network,
                       make_search_config, plans_to_doc, run_network,
                       sweep_buffers, sweep_steps, write_compare_csv,
                       write_run_csv)
from .trace_gen import BURST, NONBURST, read_trace_file
from .tiling import TilingError


def _resolve(arg: str) -> Path:
    """A real path, or the bundled fixture of that name."""
    p = Path(arg)
    if p.exists():
        return p
    if "/" not in arg and not arg.endswith(".json"):
        return bundled_path(arg)
    raise ConfigError(f"file not found: {arg}")


def _net(args):
    return load_network(_resolve(args.net))


def _hw(args) -> HardwareConfig:
    return load_hardware(_resolve(args.hw))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_dse(args) -> int:
    network, hw = _net(args), _hw(args)
    from .dse import search_layer

    plans = [search_layer(l, make_search_config(l, hw, args.mode, args.steps))
             for l in network.layers]
    out = _outdir(args) / f"{network.name}_{args.mode}_plans.json"
    out.write_text(json.dumps(plans_to_doc(network, plans, args.mode),
                              indent=2))
    total = sum(p.min_accesses.total_words for p in plans)
    print(f"{network.name} [{args.mode}]: {total} DRAM word accesses "
          f"-> {out}")
    return 0


def cmd_trace(args) -> int:
    network, hw = _net(args), _hw(args)
    from .dram_map import RegionAllocator
    from .dse import search_layer
    from .pipeline import POLICY_FOR_MODE
    from .trace_gen import generate_layer_trace

    layer = network.layers[args.layer]
    result = search_layer(layer, make_search_config(layer, hw, args.mode,
                                                    args.steps))
    layout = tile_layout(result.plan, result.schedule, hw.Dp, args.mode,
                         hw.dram)
    alloc = RegionAllocator(hw.dram, POLICY_FOR_MODE[args.mode])
    for dtype in (IFM, WGH, OFM):
        alloc.allocate((layer.name, dtype), layout.totals[dtype])
    trace = generate_layer_trace(layer, result.plan, result.schedule, alloc,
                                 hw.dram, args.burst, hw.Dp, args.mode)
    out = _outdir(args) / f"{network.name}_{layer.name}_{args.mode}_{args.burst}.trace"
    trace.write(out)
    print(f"{layer.name}: {trace.n_requests()} requests -> {out}")
    return 0


def cmd_sim(args) -> int:
    hw = _hw(args)
    requests = read_trace_file(args.trace)
    stats = simulate(requests, hw.dram, hw.timing)
    print(f"requests={stats.n_requests} hits={stats.n_hit} "
          f"misses={stats.n_miss} conflicts={stats.n_conflict} "
          f"cycles={stats.total_cycles} "
          f"throughput={effective_throughput(stats, hw.timing):.3e} B/s")
    return 0


def cmd_compare(args) -> int:
    network, hw = _net(args), _hw(args)
    report = compare(network, hw, args.burst, args.steps)
    out = _outdir(args)
    write_run_csv(report.romanet, hw, out / f"{network.name}_romanet_{args.burst}.csv")
    write_run_csv(report.baseline, hw, out / f"{network.name}_baseline_{args.burst}.csv")
    summary = out / f"{network.name}_compare_{args.burst}.csv"
    write_compare_csv(report, summary)
    print(f"{network.name} [{args.burst}]: "
          f"accesses -{report.access_reduction_pct:.1f}%, "
          f"conflicts+misses -{report.conflict_miss_reduction_pct:.1f}%, "
          f"energy -{report.energy_reduction_pct:.1f}%, "
          f"throughput +{report.throughput_gain_pct:.1f}% -> {summary}")
    return 0


def cmd_sweep(args) -> int:
    network, hw = _net(args), _hw(args)
    import csv

    out = _outdir(args) / f"{network.name}_sweep_{args.axis}.csv"
    chash = config_hash(network.name, args.axis, hw)
    with open(out, "w", newline="") as fh:
        wr = csv.writer(fh)
        if args.axis == "buffer":
            wr.writerow(["buffer_kb", "total_words", "config_hash"])
            for kb, words in sweep_buffers(network, hw,
                                           [16, 32, 64, 128, 256],
                                           args.mode, args.steps):
                wr.writerow([kb, words, chash])
        else:
            wr.writerow(["step", "layer", "total_words", "config_hash"])
            for layer in network.layers:
                for s, words in sweep_steps(layer, hw, [1, 2, 4, 8],
                                            args.mode):
                    wr.writerow([s, layer.name, words, chash])
    print(f"sweep -> {out}")
    return 0


def cmd_report(args) -> int:
    """Print the delta line(s) of compare CSVs under a directory."""
    root = Path(args.out)
    found = False
    for path in sorted(root.glob("*_compare_*.csv")):
        lines = path.read_text().strip().splitlines()
        print(f"{path.name}: {lines[-1]}")
        found = True
    if not found:
        print(f"no compare reports under {root}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dramtile", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, net=True, mode=True, burst=False, steps=True):
        p.add_argument("--hw", default="tpu_ddr3",
                       help="hardware JSON file or bundled name")
        p.add_argument("--out", default="out", help="output directory")
        if net:
            p.add_argument("--net", required=True,
                           help="network JSON file or bundled name")
        if mode:
            p.add_argument("--mode", choices=MODES, default=ROMANET)
        if burst:
            p.add_argument("--burst", choices=(BURST, NONBURST),
                           default=BURST)
        if steps:
            p.add_argument("--steps", type=int, default=None,
                           help="uniform search stride (default: per-layer)")

    p = sub.add_parser("dse", help="search tiling plans for a network")
    common(p)
    p.set_defaults(func=cmd_dse)

    p = sub.add_parser("trace", help="emit the request trace of one layer")
    common(p, burst=True)
    p.add_argument("--layer", type=int, default=0, help="layer index")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("sim", help="simulate a trace file")
    common(p, net=False, mode=False, steps=False)
    p.add_argument("trace", help="trace file to simulate")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("compare", help="run both modes and report deltas")
    common(p, mode=False, burst=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="vary buffer size or search step")
    common(p)
    p.add_argument("--axis", choices=("buffer", "step"), default="buffer")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarize compare CSVs in --out")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, Infeasible, TilingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
