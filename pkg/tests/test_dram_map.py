"""DRAM address mapping policies, regions, and tile layouts."""

import pytest

from dramtile.access_model import Schedule
from dramtile.dram_map import (CONTINUOUS_BANK, ROW_MAJOR, AddressOutOfRange,
                               CapacityExceeded, DramGeometry, Region,
                               RegionAllocator, RegionOverflow, decompose,
                               element_slots, map_tile_baseline,
                               map_tile_romanet, tile_ids, tile_layout)
from dramtile.net_model import IFM, OFM, WGH, LayerShape
from dramtile.tiling import TilingFactors, build_plan


class TestDecompose:
    def test_row_major_fills_banks_before_rows(self):
        geom = DramGeometry()
        a = decompose(1024, geom, ROW_MAJOR)
        assert (a.bank, a.row, a.column) == (1, 0, 0)
        b = decompose(8 * 1024, geom, ROW_MAJOR)
        assert (b.bank, b.row, b.column) == (0, 1, 0)

    def test_continuous_bank_fills_rows_before_banks(self):
        geom = DramGeometry()
        a = decompose(1024, geom, CONTINUOUS_BANK)
        assert (a.bank, a.row, a.column) == (0, 1, 0)
        b = decompose(32768 * 1024, geom, CONTINUOUS_BANK)
        assert (b.bank, b.row, b.column) == (1, 0, 0)

    def test_column_is_policy_independent(self):
        geom = DramGeometry()
        for policy in (ROW_MAJOR, CONTINUOUS_BANK):
            assert decompose(100, geom, policy).column == 100

    def test_out_of_range(self):
        geom = DramGeometry(rows_per_bank=2, columns_per_row=4,
                            burst_length=4)
        with pytest.raises(AddressOutOfRange):
            decompose(geom.total_words, geom, ROW_MAJOR)


class TestMapTile:
    def test_romanet_2048_spreads_two_banks(self):
        geom = DramGeometry()
        alloc = RegionAllocator(geom, ROW_MAJOR)
        alloc.allocate("default", 2048)
        addrs = map_tile_romanet(2048, alloc, geom)
        assert all(a.row == 0 for a in addrs)
        assert {a.bank for a in addrs[:1024]} == {0}
        assert {a.bank for a in addrs[1024:]} == {1}

    def test_romanet_wraps_to_next_row_after_all_banks(self):
        geom = DramGeometry()
        alloc = RegionAllocator(geom, ROW_MAJOR)
        n = 9 * 1024
        alloc.allocate("default", n)
        addrs = map_tile_romanet(n, alloc, geom)
        for b in range(8):
            chunk = addrs[b * 1024:(b + 1) * 1024]
            assert {(a.bank, a.row) for a in chunk} == {(b, 0)}
        assert {(a.bank, a.row) for a in addrs[8 * 1024:]} == {(0, 1)}

    def test_small_tile_stays_in_one_row(self):
        geom = DramGeometry()
        alloc = RegionAllocator(geom, ROW_MAJOR)
        alloc.allocate("default", 100)
        addrs = map_tile_romanet(100, alloc, geom)
        assert {(a.bank, a.row) for a in addrs} == {(0, 0)}
        assert [a.column for a in addrs] == list(range(100))

    def test_baseline_2048_stacks_rows_in_one_bank(self):
        geom = DramGeometry()
        alloc = RegionAllocator(geom, CONTINUOUS_BANK)
        alloc.allocate("default", 2048)
        addrs = map_tile_baseline(2048, alloc, geom)
        assert all(a.bank == 0 for a in addrs)
        assert {a.row for a in addrs[:1024]} == {0}
        assert {a.row for a in addrs[1024:]} == {1}

    def test_policy_mismatch_rejected(self):
        geom = DramGeometry()
        alloc = RegionAllocator(geom, ROW_MAJOR)
        alloc.allocate("default", 16)
        with pytest.raises(ValueError):
            map_tile_baseline(16, alloc, geom)


class TestRegionAllocator:
    def test_regions_disjoint_and_row_aligned(self):
        geom = DramGeometry()
        alloc = RegionAllocator(geom, ROW_MAJOR)
        a = alloc.allocate("a", 100)
        b = alloc.allocate("b", 100)
        assert a.start + a.n_words <= b.start
        assert b.start % geom.columns_per_row == 0

    def test_capacity_exceeded(self):
        geom = DramGeometry(rows_per_bank=2, columns_per_row=8,
                            burst_length=4)
        alloc = RegionAllocator(geom, ROW_MAJOR)
        with pytest.raises(CapacityExceeded):
            alloc.allocate("big", geom.total_words + 1)

    def test_take_advances_cursor(self):
        geom = DramGeometry()
        alloc = RegionAllocator(geom, ROW_MAJOR)
        alloc.allocate("r", 64)
        _, off0 = alloc.take("r", 16)
        _, off1 = alloc.take("r", 16)
        assert (off0, off1) == (0, 16)
        with pytest.raises(RegionOverflow):
            alloc.take("r", 64)

    def test_region_bounds_checked(self):
        geom = DramGeometry()
        region = Region(ROW_MAJOR, 0, 8)
        with pytest.raises(RegionOverflow):
            region.address(8, geom)


class TestElementSlots:
    def test_wide_element_on_narrow_chip(self):
        assert element_slots(16, DramGeometry(word_bits=8)) == 2

    def test_rank_width_absorbs_element(self):
        assert element_slots(16, DramGeometry(chips_per_rank=4,
                                              word_bits=8)) == 1

    def test_never_below_one(self):
        assert element_slots(4, DramGeometry(word_bits=16)) == 1


class TestTileLayout:
    def layer(self):
        return LayerShape(name="l", kind="conv", H=8, W=8, I=4, P=3, Q=3,
                          J=4, stride=1, bit_ifm=16, bit_wgh=16, bit_ofm=16)

    def test_single_tile_totals(self, small_geom):
        layer = self.layer()
        plan = build_plan(layer, TilingFactors(8, 8, 4, 4))
        layout = tile_layout(plan, Schedule(("h", "w", "j", "i")), 1,
                             "romanet", small_geom)
        # 16-bit elements on an 8-bit chip: two column slots per word
        assert layout.totals[IFM] == 8 * 8 * 4 * 2
        assert layout.totals[WGH] == 3 * 3 * 4 * 4 * 2
        assert layout.totals[OFM] == 6 * 6 * 4 * 2

    def test_spilled_ofm_uses_psum_width(self, small_geom):
        layer = self.layer()
        plan = build_plan(layer, TilingFactors(4, 8, 2, 4))
        nest = ("i", "h", "w", "j")  # spatial trips inside depth: psums spill
        layout = tile_layout(plan, Schedule(nest), 1, "romanet", small_geom)
        assert layout.slots[OFM] == element_slots(layer.bit_psum, small_geom)
        assert layout.totals[OFM] == 6 * 6 * 4 * 4

    def test_ranges_packed_without_gaps(self, small_geom):
        plan = build_plan(self.layer(), TilingFactors(4, 4, 2, 2))
        layout = tile_layout(plan, Schedule(("h", "w", "j", "i")), 1,
                             "romanet", small_geom)
        for dtype in (IFM, WGH, OFM):
            spans = sorted(layout.ranges[dtype].values())
            cursor = 0
            for start, n in spans:
                assert start == cursor
                cursor += n
            assert cursor == layout.totals[dtype]

    def test_depthwise_ifm_tiled_by_j(self, small_geom):
        dw = LayerShape(name="dw", kind="depthwise-conv", H=8, W=8, I=4,
                        P=3, Q=3, J=4, stride=1, bit_ifm=16, bit_wgh=16,
                        bit_ofm=16)
        ids = tile_ids(dw, 0, 1, 2, 0)
        assert ids[IFM] == (0, 1, 2)
        assert ids[OFM] == (0, 1, 2)
