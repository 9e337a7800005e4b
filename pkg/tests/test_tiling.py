"""Axis grids, tiling plans, and buffer footprints."""

import pytest

from dramtile.net_model import LayerShape
from dramtile.tiling import (TilingError, TilingFactors, build_plan,
                             buffer_footprint, depth_axis_grid,
                             ifm_axis_grid, ofm_tile_dims, spatial_halos)


def conv(name="l", **kw):
    args = dict(kind="conv", H=8, W=8, I=4, P=3, Q=3, J=4, stride=1,
                bit_ifm=16, bit_wgh=16, bit_ofm=16)
    args.update(kw)
    return LayerShape(name=name, **args)


class TestIfmAxisGrid:
    def test_halo_overlap(self):
        grid = ifm_axis_grid(224, 64, 2)
        assert grid.extents == (64, 64, 64, 36)
        assert grid.fetch == (64, 62, 62, 36)
        assert sum(grid.fetch) == 224

    def test_single_tile(self):
        grid = ifm_axis_grid(8, 8, 2)
        assert grid.extents == (8,)
        assert grid.fetch == (8,)

    def test_no_halo_remainder(self):
        grid = ifm_axis_grid(3, 2, 0)
        assert grid.extents == (2, 1)

    def test_fetch_covers_axis(self):
        for full, base, halo in [(224, 64, 2), (100, 7, 3), (9, 3, 1)]:
            assert sum(ifm_axis_grid(full, base, halo).fetch) == full

    def test_invalid(self):
        with pytest.raises(TilingError):
            ifm_axis_grid(8, 9, 0)
        with pytest.raises(TilingError):
            ifm_axis_grid(8, 4, 4)


class TestDepthAxisGrid:
    def test_remainder(self):
        assert depth_axis_grid(3, 2).extents == (2, 1)

    def test_exact(self):
        assert depth_axis_grid(64, 16).extents == (16,) * 4

    def test_long_tail(self):
        grid = depth_axis_grid(1000, 64)
        assert grid.extents == (64,) * 15 + (40,)


class TestOfmTileDims:
    def test_strided(self):
        layer = conv(H=7, W=7, stride=2)
        assert ofm_tile_dims(7, 7, layer)[0] == 3  # ceil(5/2)

    def test_minimal(self):
        layer = conv()
        assert ofm_tile_dims(3, 3, layer) == (1, 1)

    def test_wide(self):
        layer = conv(H=224, W=224)
        assert ofm_tile_dims(3, 36, layer)[1] == 34

    def test_window_too_small(self):
        with pytest.raises(TilingError):
            ofm_tile_dims(2, 8, conv())


class TestBuildPlan:
    def test_single_tile(self):
        layer = conv()
        plan = build_plan(layer, TilingFactors(8, 8, 4, 4))
        assert plan.trips == {"h": 1, "w": 1, "j": 1, "i": 1}
        assert plan.m_extents == (6,)
        assert plan.n_extents == (6,)

    def test_depth_split(self):
        plan = build_plan(conv(), TilingFactors(8, 8, 2, 4))
        assert plan.i_grid.extents == (2, 2)

    def test_vgg_conv1_w_grid(self):
        layer = conv(H=224, W=224, I=3, J=64)
        plan = build_plan(layer, TilingFactors(224, 64, 3, 64))
        assert plan.w_grid.extents == (64, 64, 64, 36)

    def test_halo_is_window_minus_stride(self):
        assert spatial_halos(conv()) == (2, 2)
        assert spatial_halos(conv(H=11, W=11, P=5, Q=5, stride=4)) == (1, 1)
        assert spatial_halos(conv(P=3, Q=3, stride=4)) == (0, 0)

    def test_depthwise_channels_ride_on_j(self):
        dw = conv(kind="depthwise-conv", I=16, J=16)
        plan = build_plan(dw, TilingFactors(8, 8, 1, 4))
        assert plan.i_grid.extents == (1,)
        assert plan.ifm_depth_extents() == (4,) * 4


class TestBufferFootprint:
    def test_spec_values(self):
        layer = conv(bit_ofm=32)
        plan = build_plan(layer, TilingFactors(8, 8, 4, 4))
        assert buffer_footprint(plan) == (512, 288, 576)

    def test_depthwise(self):
        dw = conv(kind="depthwise-conv", I=4, J=4)
        plan = build_plan(dw, TilingFactors(8, 8, 1, 4))
        ifm_b, wgh_b, _ = buffer_footprint(plan)
        assert ifm_b == 8 * 8 * 4 * 2      # channels from Tj
        assert wgh_b == 3 * 3 * 4 * 2      # one P*Q filter per channel
