"""Mapping of tile words onto physical DRAM coordinates.

Two policies are supported.  The row-major ("romanet") policy fills all
columns of the current row, then the same row of the next bank, and only
then moves to the next row; a large tile therefore spreads across banks
before it ever reuses a bank with a different row.  The continuous-bank
baseline fills consecutive rows of one bank and advances to the next
bank only when the bank is full, so any tile larger than one row incurs
same-bank row changes.

Logical words are the units of the analytical access model: one word spans
all chips of a rank (chips operate in lock-step), occupying one column
slot per chip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .net_model import IFM, OFM, WGH, LayerShape
from .tiling import TilingPlan


class RegionOverflow(Exception):
    pass


class CapacityExceeded(Exception):
    pass


class AddressOutOfRange(Exception):
    pass


@dataclass(frozen=True)
class DramGeometry:
    """Channel / rank / chip / bank / row / column organization."""

    channels: int = 1
    ranks_per_channel: int = 1
    chips_per_rank: int = 1
    banks_per_chip: int = 8
    rows_per_bank: int = 32768
    columns_per_row: int = 1024
    word_bits: int = 8
    burst_length: int = 8

    def __post_init__(self):
        for f in ("channels", "ranks_per_channel", "chips_per_rank",
                  "banks_per_chip", "rows_per_bank", "columns_per_row",
                  "word_bits"):
            if getattr(self, f) < 1:
                raise ValueError(f"{f} must be >= 1")
        if self.burst_length not in (1, 4, 8):
            raise ValueError("burst_length must be 1, 4, or 8")

    @property
    def total_words(self) -> int:
        return (self.channels * self.ranks_per_channel * self.banks_per_chip
                * self.rows_per_bank * self.columns_per_row)

    @property
    def n_banks_total(self) -> int:
        return self.channels * self.ranks_per_channel * self.banks_per_chip

    @property
    def bytes_per_word(self) -> int:
        return self.chips_per_rank * self.word_bits // 8


@dataclass(frozen=True)
class PhysicalAddress:
    channel: int
    rank: int
    chip: int
    bank: int
    row: int
    column: int

    def check(self, geom: DramGeometry):
        ok = (0 <= self.channel < geom.channels
              and 0 <= self.rank < geom.ranks_per_channel
              and 0 <= self.chip < geom.chips_per_rank
              and 0 <= self.bank < geom.banks_per_chip
              and 0 <= self.row < geom.rows_per_bank
              and 0 <= self.column < geom.columns_per_row)
        if not ok:
            raise AddressOutOfRange(self)


ROW_MAJOR = "romanet"      # columns -> banks -> rows -> ranks -> channels
CONTINUOUS_BANK = "baseline"  # columns -> rows -> banks -> ranks -> channels


def decompose(lin: int, geom: DramGeometry, policy: str) -> PhysicalAddress:
    """Linear word index under a mapping policy to a physical address."""
    col = lin % geom.columns_per_row
    t = lin // geom.columns_per_row
    if policy == ROW_MAJOR:
        bank = t % geom.banks_per_chip
        t //= geom.banks_per_chip
        row = t % geom.rows_per_bank
        t //= geom.rows_per_bank
    else:
        row = t % geom.rows_per_bank
        t //= geom.rows_per_bank
        bank = t % geom.banks_per_chip
        t //= geom.banks_per_chip
    rank = t % geom.ranks_per_channel
    channel = t // geom.ranks_per_channel
    if channel >= geom.channels:
        raise AddressOutOfRange(lin)
    return PhysicalAddress(channel, rank, 0, bank, row, col)


def decompose_arrays(lin: np.ndarray, geom: DramGeometry,
                     policy: str) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized decomposition to (global bank id, row) for simulation."""
    cols = geom.columns_per_row
    t = lin // cols
    if policy == ROW_MAJOR:
        bank = t % geom.banks_per_chip
        t //= geom.banks_per_chip
        row = t % geom.rows_per_bank
        hi = t // geom.rows_per_bank
    else:
        row = t % geom.rows_per_bank
        t //= geom.rows_per_bank
        bank = t % geom.banks_per_chip
        hi = t // geom.banks_per_chip
    gbank = hi * geom.banks_per_chip + bank
    return gbank.astype(np.int64), row.astype(np.int64)


@dataclass(frozen=True)
class Region:
    """A contiguous span in one policy's linear word space."""

    policy: str
    start: int
    n_words: int

    def address(self, idx: int, geom: DramGeometry) -> PhysicalAddress:
        if not 0 <= idx < self.n_words:
            raise RegionOverflow(f"word {idx} outside region of {self.n_words}")
        return decompose(self.start + idx, geom, self.policy)


class RegionAllocator:
    """Bump allocator handing out disjoint regions (and word cursors
    inside them) in a single policy's linear space.

    Regions start at a row boundary, so burst runs inside a region
    segment cleanly at row edges.  Under the row-major policy this lets
    consecutive regions begin in different banks, keeping their access
    streams from colliding on one bank's row buffer.
    """

    def __init__(self, geom: DramGeometry, policy: str):
        if policy not in (ROW_MAJOR, CONTINUOUS_BANK):
            raise ValueError(f"unknown mapping policy {policy!r}")
        self.geom = geom
        self.policy = policy
        self._cursor = 0
        self.regions: dict = {}
        self._offsets: dict = {}

    def _align(self) -> int:
        unit = self.geom.columns_per_row
        return -(-self._cursor // unit) * unit

    def allocate(self, key, n_words: int) -> Region:
        if key in self.regions:
            raise ValueError(f"region {key!r} already allocated")
        start = self._align()
        if start + n_words > self.geom.total_words:
            raise CapacityExceeded(
                f"{key!r}: {n_words} words do not fit "
                f"(device holds {self.geom.total_words})")
        region = Region(self.policy, start, n_words)
        self.regions[key] = region
        self._offsets[key] = 0
        self._cursor = start + n_words
        return region

    def take(self, key, n_words: int) -> tuple[Region, int]:
        """Advance a region's cursor by n_words, returning (region, start)."""
        region = self.regions[key]
        off = self._offsets[key]
        if off + n_words > region.n_words:
            raise RegionOverflow(
                f"{key!r}: {off + n_words} words exceed region "
                f"of {region.n_words}")
        self._offsets[key] = off + n_words
        return region, off


def map_tile_romanet(n_words: int, alloc: RegionAllocator,
                     geom: DramGeometry, key="default") -> list[PhysicalAddress]:
    """Map a tile under the row-major policy, in word order."""
    if alloc.policy != ROW_MAJOR:
        raise ValueError("allocator does not use the row-major policy")
    region, off = alloc.take(key, n_words)
    return [region.address(off + k, geom) for k in range(n_words)]


def map_tile_baseline(n_words: int, alloc: RegionAllocator,
                      geom: DramGeometry, key="default") -> list[PhysicalAddress]:
    """Map a tile under the continuous-bank policy, in word order."""
    if alloc.policy != CONTINUOUS_BANK:
        raise ValueError("allocator does not use the continuous-bank policy")
    region, off = alloc.take(key, n_words)
    return [region.address(off + k, geom) for k in range(n_words)]


def element_slots(bits: int, geom: DramGeometry) -> int:
    """Column slots one element occupies.

    One column access moves chips_per_rank * word_bits bits (all chips
    of the rank in lock-step); wider elements span several columns.
    """
    return max(1, ceil(bits / (geom.word_bits * geom.chips_per_rank)))


@dataclass
class TileLayout:
    """Region-relative column ranges of every tile of one layer.

    Tiles are packed back to back in first-touch order of the schedule,
    so the first sweep of the loop nest reads monotonically increasing
    addresses.  Ranges are in column slots: access words (elements
    already divided across chips-per-rank) times the per-data-type
    element width in columns.
    """

    ranges: dict[str, dict[tuple, tuple[int, int]]]
    totals: dict[str, int]
    slots: dict[str, int]


def tile_ids(layer: LayerShape, h: int, w: int, j: int, i: int) -> dict[str, tuple]:
    if layer.depthwise:
        ifm_id = (h, w, j)
    else:
        ifm_id = (h, w, i)
    return {IFM: ifm_id, WGH: (j, i), OFM: (h, w, j)}


def nest_iter(plan: TilingPlan, nest: tuple[str, ...]):
    """Iterate (h, w, j, i) tile indices in loop-nest order."""
    trips = plan.trips
    idx = dict.fromkeys("hwji", 0)
    import itertools
    for combo in itertools.product(*(range(trips[l]) for l in nest)):
        for loop, v in zip(nest, combo):
            idx[loop] = v
        yield idx["h"], idx["w"], idx["j"], idx["i"]


def tile_layout(plan: TilingPlan, schedule, Dp: int, mode: str,
                geom: DramGeometry | None = None) -> TileLayout:
    """Assign each tile its packed column range in first-touch order."""
    from .access_model import (ifm_tile_word_counts, ofm_tile_word_counts,
                               wgh_tile_word_counts)

    layer = plan.layer
    if geom is None:
        slots = dict.fromkeys((IFM, WGH, OFM), 1)
    else:
        from .access_model import ofm_episodes

        # An ofmap region that receives partial-sum spills holds
        # full-precision accumulators instead of final ofmap words.
        ofm_bits = (layer.bit_psum
                    if ofm_episodes(schedule.nest, plan.trips) > 1
                    else layer.bit_ofm)
        slots = {IFM: element_slots(layer.bit_ifm, geom),
                 WGH: element_slots(layer.bit_wgh, geom),
                 OFM: element_slots(ofm_bits, geom)}
    words = {
        IFM: {k: ceil(v / Dp) * slots[IFM]
              for k, v in ifm_tile_word_counts(plan, mode).items()},
        WGH: {k: ceil(v / Dp) * slots[WGH]
              for k, v in wgh_tile_word_counts(plan).items()},
        OFM: {k: ceil(v / Dp) * slots[OFM]
              for k, v in ofm_tile_word_counts(plan).items()},
    }
    ranges = {d: {} for d in (IFM, WGH, OFM)}
    offsets = dict.fromkeys((IFM, WGH, OFM), 0)
    for h, w, j, i in nest_iter(plan, schedule.nest):
        ids = tile_ids(plan.layer, h, w, j, i)
        for dtype in (IFM, WGH, OFM):
            tid = ids[dtype]
            if tid not in ranges[dtype]:
                n = words[dtype][tid]
                ranges[dtype][tid] = (offsets[dtype], n)
                offsets[dtype] += n
    return TileLayout(ranges=ranges, totals=dict(offsets), slots=slots)


def allocate_regions(layer_layouts: dict[str, TileLayout], geom: DramGeometry,
                     policy: str, shared: bool = False) -> RegionAllocator:
    """Build per-(layer, data type) regions.

    With ``shared=False`` each layer starts from a fresh device (layers
    run sequentially and regions are conceptually freed); ``shared=True``
    stacks all layers into one address space instead.
    """
    alloc = RegionAllocator(geom, policy)
    for layer_name, layout in layer_layouts.items():
        if not shared:
            alloc._cursor = 0
        for dtype in (IFM, WGH, OFM):
            alloc.allocate((layer_name, dtype), layout.totals[dtype])
    return alloc


def dump_layout_csv(region: Region, geom: DramGeometry, path, limit=None):
    """Write word_index,channel,rank,chip,bank,row,column for inspection."""
    import csv

    n = region.n_words if limit is None else min(limit, region.n_words)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["word_index", "channel", "rank", "chip",
                     "bank", "row", "column"])
        for k in range(n):
            a = region.address(k, geom)
            wr.writerow([k, a.channel, a.rank, a.chip, a.bank, a.row, a.column])
