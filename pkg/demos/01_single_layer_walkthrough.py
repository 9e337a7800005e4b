"""Walk one convolution layer through the whole pipeline.

Starting from the layer shape we look at how often each data type is
reused, search for the tiling and loop schedule that minimize DRAM word
accesses, lay the tiles out in DRAM, generate the request trace, and
simulate it against the row-buffer model.  Run from the repository root:

    python demos/01_single_layer_walkthrough.py
"""

from dramtile.access_model import ROMANET
from dramtile.dram_map import RegionAllocator, tile_layout
from dramtile.dram_sim import effective_throughput, simulate
from dramtile.dse import search_layer
from dramtile.energy_model import energy
from dramtile.net_model import IFM, OFM, WGH, reuse_factors, reuse_priority_order
from dramtile.pipeline import POLICY_FOR_MODE, bundled_hardware, bundled_network
from dramtile.pipeline import make_search_config
from dramtile.trace_gen import BURST, generate_layer_trace

hw = bundled_hardware()
layer = bundled_network("vgg16").layers[0]

print(f"layer {layer.name}: {layer.H}x{layer.W}x{layer.I} ifmap, "
      f"{layer.P}x{layer.Q}x{layer.I}x{layer.J} filters, stride {layer.stride}")

# Every ifmap pixel feeds P*Q*J multiply-accumulates, every weight is
# reused across all output positions, and every output accumulates
# P*Q*I products.  The data type with the most reuse should stay
# on-chip longest, which fixes the preferred loop order.
rf = reuse_factors(layer)
print(f"reuse: ifm {rf.rf_ifm}x, wgh {rf.rf_wgh}x, ofm {rf.rf_ofm}x")
print(f"priority: {' > '.join(reuse_priority_order(layer).order)}")

# Search tilings that fit the 64KB ifmap/weight/ofmap buffers.
result = search_layer(layer, make_search_config(layer, hw, ROMANET))
f = result.plan.factors
c = result.min_accesses
print(f"\nbest tiling Th={f.Th} Tw={f.Tw} Ti={f.Ti} Tj={f.Tj}, "
      f"nest {'-'.join(result.schedule.nest)}")
print(f"predicted DRAM words: ifm {c.rd_ifm}, wgh {c.rd_wgh}, "
      f"ofm rd {c.rd_ofm} wr {c.wr_ofm}  (total {c.total_words})")

# Map tiles to DRAM, emit the burst-mode trace, and simulate it.
layout = tile_layout(result.plan, result.schedule, hw.Dp, ROMANET, hw.dram)
alloc = RegionAllocator(hw.dram, POLICY_FOR_MODE[ROMANET])
for dtype in (IFM, WGH, OFM):
    alloc.allocate((layer.name, dtype), layout.totals[dtype])
trace = generate_layer_trace(layer, result.plan, result.schedule, alloc,
                             hw.dram, BURST, hw.Dp, ROMANET)
print(f"\ntrace: {trace.n_requests()} burst requests "
      f"for {trace.total_words} column accesses")

stats = simulate(trace, hw.dram, hw.timing)
print(f"row buffer: {stats.n_hit} hits, {stats.n_miss} misses, "
      f"{stats.n_conflict} conflicts over {stats.total_cycles} cycles")
report = energy(stats, hw.energy)
print(f"energy: {report.total / 1e6:.1f} uJ "
      f"(act {report.activate / 1e6:.2f}, pre {report.precharge / 1e6:.2f}, "
      f"rd {report.read / 1e6:.2f}, wr {report.write / 1e6:.2f}, "
      f"stby {report.standby / 1e6:.2f})")
print(f"throughput: {effective_throughput(stats, hw.timing) / 1e9:.2f} GB/s")
