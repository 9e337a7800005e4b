"""Compare the reuse-driven mapping against the greedy baseline.

For each bundled network both pipelines run end to end: tiling search,
DRAM layout (row-major vs continuous-bank), burst-mode trace, row-buffer
simulation, and energy accounting.  The summary prints the percentage
reductions in word accesses, row conflicts+misses, and energy, plus the
throughput gain.  AlexNet finishes in seconds; the full set takes a few
minutes.  Run from the repository root:

    python demos/02_network_comparison.py [network ...]
"""

import sys

from dramtile.pipeline import bundled_hardware, bundled_network, compare

hw = bundled_hardware()
names = sys.argv[1:] or ["alexnet", "vgg16", "mobilenet", "mobilenet_amc"]

print(f"{'network':<14} {'accesses':>9} {'conf+miss':>10} "
      f"{'energy':>8} {'throughput':>11}")
for name in names:
    report = compare(bundled_network(name), hw)
    print(f"{name:<14} {report.access_reduction_pct:>8.1f}% "
          f"{report.conflict_miss_reduction_pct:>9.1f}% "
          f"{report.energy_reduction_pct:>7.1f}% "
          f"{report.throughput_gain_pct:>+10.1f}%")
