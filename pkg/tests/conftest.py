"""Shared fixtures: small layers, geometries, and trace helpers."""

import pytest

from dramtile.dram_map import DramGeometry, RegionAllocator
from dramtile.dram_sim import DramTiming
from dramtile.net_model import IFM, OFM, WGH, LayerShape
from dramtile.pipeline import POLICY_FOR_MODE
from dramtile.trace_gen import generate_layer_trace


@pytest.fixture
def toy_layer():
    """8x8x4 ifmap, 3x3x4x4 filters, stride 1 (single-tile friendly)."""
    return LayerShape(name="toy", kind="conv", H=8, W=8, I=4,
                      P=3, Q=3, J=4, stride=1, bit_ifm=16, bit_wgh=16,
                      bit_ofm=16)


@pytest.fixture
def small_geom():
    """One chip, 8 banks, tiny rows: row effects show up quickly."""
    return DramGeometry(banks_per_chip=8, rows_per_bank=64,
                        columns_per_row=1024)


@pytest.fixture
def timing():
    return DramTiming()


def build_trace(layer, plan, schedule, geom, burst, mode, Dp=1):
    """Allocate fresh regions and emit the layer's trace."""
    from dramtile.dram_map import tile_layout

    layout = tile_layout(plan, schedule, Dp, mode, geom)
    alloc = RegionAllocator(geom, POLICY_FOR_MODE[mode])
    for dtype in (IFM, WGH, OFM):
        alloc.allocate((layer.name, dtype), layout.totals[dtype])
    return generate_layer_trace(layer, plan, schedule, alloc, geom,
                                burst, Dp, mode)
