"""Sensitivity of the mapping to buffer size and request framing.

Two quick studies on AlexNet: how the minimum DRAM traffic falls as the
on-chip buffers grow, and how burst (BL8) framing collapses the request
count relative to single-word requests.  Run from the repository root:

    python demos/03_buffer_and_burst_sweeps.py
"""

from dramtile.access_model import ROMANET
from dramtile.pipeline import (bundled_hardware, bundled_network,
                               run_network, sweep_buffers)
from dramtile.trace_gen import BURST, NONBURST

hw = bundled_hardware()
net = bundled_network("alexnet")

print("minimum DRAM words vs uniform buffer size:")
for kb, words in sweep_buffers(net, hw, [16, 32, 64, 128, 256]):
    print(f"  {kb:>4} KB: {words / 1e6:8.2f} M words")

print("\nrequest counts, burst vs non-burst framing:")
burst = run_network(net, hw, ROMANET, BURST)
nonburst = run_network(net, hw, ROMANET, NONBURST)
ratio = nonburst.total_requests / burst.total_requests
print(f"  burst (BL8): {burst.total_requests:>12,} requests")
print(f"  non-burst:   {nonburst.total_requests:>12,} requests")
print(f"  ratio: {ratio:.2f}x fewer requests with bursts")
