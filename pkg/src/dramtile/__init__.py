"""Reuse-driven CNN layer tiling, DRAM data mapping, and trace-driven
row-buffer simulation."""

from .access_model import (BASELINE, ROMANET, AccessCounts, Schedule,
                           layer_accesses, network_accesses)
from .dram_map import (CONTINUOUS_BANK, ROW_MAJOR, DramGeometry,
                       PhysicalAddress, Region, RegionAllocator)
from .dram_sim import DramTiming, SimStats, effective_throughput, simulate
from .dse import (EXHAUSTIVE24, PRIORITY6, Infeasible, LayerPlanResult,
                  SearchConfig, candidate_schedules, search_layer,
                  search_network)
from .energy_model import EnergyParams, EnergyReport, default_params, energy
from .net_model import (CONV, DEPTHWISE, FC, IFM, OFM, WGH, LayerShape,
                        NetworkModel, output_dims, reuse_factors,
                        reuse_priority_order)
from .sram_map import SramGeometry, SramPlacement, place_tile
from .tiling import AxisGrid, TilingFactors, TilingPlan, build_plan
from .trace_gen import (BURST, NONBURST, DramRequest, RequestTrace,
                        count_trace, generate_layer_trace, read_trace_file)

__version__ = "0.1.0"
