"""Analytical DRAM word-access counts for a (tiling plan, schedule) pair.

This is the objective function of the design space exploration.  Counts
are exact: for every plan and schedule they must equal the tallies of
the generated request trace, which serves as the ground-truth oracle.

A schedule is a permutation of the four tile loops (h, w, j, i):
h/w iterate spatial ifmap tiles, j iterates filter sets, i iterates
channel-depth tiles.  A data type is re-fetched whenever one of its
indexing loops advances; loops that do not index it but sit outside one
of its effective indexing loops multiply the fetch count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

from .net_model import IFM, OFM, WGH, LayerShape
from .tiling import TilingPlan

ROMANET = "romanet"
BASELINE = "baseline"
MODES = (ROMANET, BASELINE)

LOOPS = ("h", "w", "j", "i")


@dataclass(frozen=True)
class Schedule:
    """Loop-nest permutation over tile indices, outermost first."""

    nest: tuple[str, str, str, str]
    origin: str = "exhaustive"

    def __post_init__(self):
        if sorted(self.nest) != sorted(LOOPS):
            raise ValueError(f"nest must permute {LOOPS}, got {self.nest}")


def loop_index_sets(layer: LayerShape) -> dict[str, frozenset[str]]:
    """Which loops select a new tile of each data type.

    Depthwise ifmap channels ride on the filter-set loop j instead of
    the depth loop i.
    """
    ifm = frozenset("hwj") if layer.depthwise else frozenset("hwi")
    return {IFM: ifm, WGH: frozenset("ji"), OFM: frozenset("hwj")}


def fetch_multiplicity(nest: tuple[str, ...], trips: dict[str, int],
                       index_set: frozenset[str]) -> int:
    """How many times each tile of a data type is fetched.

    A tile stays resident while only loops strictly inner to all of its
    effective indexing loops advance.  Loops with a single iteration
    never change the tile and are transparent.
    """
    inner_pos = -1
    for pos, loop in enumerate(nest):
        if loop in index_set and trips[loop] > 1:
            inner_pos = pos
    if inner_pos < 0:  # the tile never changes: fetched exactly once
        return 1
    mult = 1
    for pos, loop in enumerate(nest):
        if pos < inner_pos and loop not in index_set:
            mult *= trips[loop]
    return mult


def ofm_episodes(nest: tuple[str, ...], trips: dict[str, int]) -> int:
    """Accumulation episodes per ofmap tile.

    Partial sums spill to DRAM whenever the depth loop i advances while
    some ofmap-indexing loop with more than one iteration sits inside
    it; otherwise the tile accumulates in one residency episode.
    """
    if trips["i"] <= 1:
        return 1
    i_pos = nest.index("i")
    for pos in range(i_pos + 1, 4):
        if nest[pos] in ("h", "w", "j") and trips[nest[pos]] > 1:
            return trips["i"]
    return 1


@dataclass
class AccessCounts:
    """Word-access and request totals for one layer (words already
    divided by chips-per-rank)."""

    rd_ifm: int = 0
    rd_wgh: int = 0
    rd_ofm: int = 0
    wr_ofm: int = 0
    requests_burst: int = 0
    requests_nonburst: int = 0
    per_tile: list = field(default_factory=list)

    @property
    def total_words(self) -> int:
        return self.rd_ifm + self.rd_wgh + self.rd_ofm + self.wr_ofm

    def read_words(self, dtype: str) -> int:
        return {IFM: self.rd_ifm, WGH: self.rd_wgh, OFM: self.rd_ofm}[dtype]


def accesses_per_tile(dims: tuple[int, ...], Dp: int) -> int:
    """ceil(tile volume / chips-per-rank) word accesses."""
    if Dp < 1:
        raise ValueError("Dp must be >= 1")
    vol = 1
    for d in dims:
        if d < 1:
            raise ValueError("tile dims must be >= 1")
        vol *= d
    return ceil(vol / Dp)


def ifm_tile_word_counts(plan: TilingPlan, mode: str) -> dict[tuple, int]:
    """Fetch word count of every ifmap tile, keyed by tile index."""
    h = plan.h_grid.fetch if mode == ROMANET else plan.h_grid.baseline_fetch()
    w = plan.w_grid.fetch if mode == ROMANET else plan.w_grid.baseline_fetch()
    depth = plan.ifm_depth_extents()
    out = {}
    for a, eh in enumerate(h):
        for b, ew in enumerate(w):
            for c, ed in enumerate(depth):
                out[(a, b, c)] = eh * ew * ed
    return out


def wgh_tile_word_counts(plan: TilingPlan) -> dict[tuple, int]:
    layer = plan.layer
    depth = (1,) * plan.i_grid.n_tiles if layer.depthwise else plan.i_grid.extents
    out = {}
    for jx, ej in enumerate(plan.j_grid.extents):
        for ix, ei in enumerate(depth):
            out[(jx, ix)] = layer.P * layer.Q * ei * ej
    return out


def ofm_tile_word_counts(plan: TilingPlan) -> dict[tuple, int]:
    out = {}
    for a, em in enumerate(plan.m_extents):
        for b, en in enumerate(plan.n_extents):
            for jx, ej in enumerate(plan.j_grid.extents):
                out[(a, b, jx)] = em * en * ej
    return out


def ofm_traffic(nest: tuple[str, ...], trips: dict[str, int],
                plan: TilingPlan, Dp: int) -> tuple[int, int]:
    """(read, write) ofmap word totals over all tiles and episodes."""
    E = ofm_episodes(nest, trips)
    words = sum(accesses_per_tile((v,), Dp)
                for v in ofm_tile_word_counts(plan).values())
    return (E - 1) * words, E * words


def layer_accesses(layer: LayerShape, plan: TilingPlan, schedule: Schedule,
                   Dp: int, mode: str, geom=None, alloc=None,
                   want_per_tile: bool = False) -> AccessCounts:
    """Word-access totals for one layer under a plan and schedule.

    ``romanet`` mode fetches halo-reduced intermediate tiles; ``baseline``
    re-fetches full base extents for every spatial tile.  Request counts
    need the DRAM layout and are filled in only when ``geom`` (and an
    allocation from :mod:`dramtile.dram_map`) is provided.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    nest = schedule.nest
    trips = plan.trips
    sets = loop_index_sets(layer)

    counts = AccessCounts()
    m_ifm = fetch_multiplicity(nest, trips, sets[IFM])
    m_wgh = fetch_multiplicity(nest, trips, sets[WGH])
    if Dp == 1 and not want_per_tile:
        # Sums over the product grids factor into products of axis sums.
        h = plan.h_grid.fetch if mode == ROMANET else plan.h_grid.baseline_fetch()
        w = plan.w_grid.fetch if mode == ROMANET else plan.w_grid.baseline_fetch()
        counts.rd_ifm = (m_ifm * sum(h) * sum(w)
                         * sum(plan.ifm_depth_extents()))
        wgh_depth = (plan.i_grid.n_tiles if layer.depthwise
                     else sum(plan.i_grid.extents))
        counts.rd_wgh = (m_wgh * layer.P * layer.Q
                         * wgh_depth * sum(plan.j_grid.extents))
        E = ofm_episodes(nest, trips)
        ofm_words = (sum(plan.m_extents) * sum(plan.n_extents)
                     * sum(plan.j_grid.extents))
        counts.rd_ofm = (E - 1) * ofm_words
        counts.wr_ofm = E * ofm_words
    else:
        ifm_tiles = ifm_tile_word_counts(plan, mode)
        wgh_tiles = wgh_tile_word_counts(plan)
        counts.rd_ifm = m_ifm * sum(accesses_per_tile((v,), Dp)
                                    for v in ifm_tiles.values())
        counts.rd_wgh = m_wgh * sum(accesses_per_tile((v,), Dp)
                                    for v in wgh_tiles.values())
        counts.rd_ofm, counts.wr_ofm = ofm_traffic(nest, trips, plan, Dp)

    counts.requests_nonburst = counts.total_words
    if geom is not None:
        from .dram_map import element_slots

        # Non-burst issues one request per column slot; wide elements
        # need several.  Spilled ofmap regions hold full-precision
        # partial sums.
        ofm_bits = (layer.bit_psum
                    if ofm_episodes(nest, trips) > 1 else layer.bit_ofm)
        counts.requests_nonburst = (
            (counts.rd_ifm * element_slots(layer.bit_ifm, geom))
            + (counts.rd_wgh * element_slots(layer.bit_wgh, geom))
            + ((counts.rd_ofm + counts.wr_ofm)
               * element_slots(ofm_bits, geom)))
        counts.requests_burst = _burst_requests(layer, plan, schedule, Dp,
                                                mode, geom, alloc)
    if want_per_tile:
        counts.per_tile = (
            [(IFM, k, v) for k, v in ifm_tiles.items()]
            + [(WGH, k, v) for k, v in wgh_tiles.items()]
            + [(OFM, k, v) for k, v in ofm_tile_word_counts(plan).items()])
    return counts


def _burst_requests(layer, plan, schedule, Dp, mode, geom, alloc) -> int:
    """Burst-mode request count: per fetch event, contiguous column runs
    never cross a row boundary and each run needs ceil(run/BL) requests."""
    from .dram_map import tile_layout  # deferred: avoids an import cycle

    layout = alloc if alloc is not None else tile_layout(plan, schedule, Dp,
                                                         mode, geom)
    nest = schedule.nest
    trips = plan.trips
    sets = loop_index_sets(layer)
    cols = geom.columns_per_row
    BL = geom.burst_length

    def requests_per_fetch(start: int, length: int) -> int:
        n = 0
        off = start % cols
        while length > 0:
            seg = min(length, cols - off)
            n += ceil(seg / BL)
            length -= seg
            off = 0
        return n

    total = 0
    for dtype in (IFM, WGH):
        mult = fetch_multiplicity(nest, trips, sets[dtype])
        total += mult * sum(requests_per_fetch(s, n)
                            for s, n in layout.ranges[dtype].values())
    E = ofm_episodes(nest, trips)
    total += (2 * E - 1) * sum(requests_per_fetch(s, n)
                               for s, n in layout.ranges[OFM].values())
    return total


def network_accesses(per_layer: list[AccessCounts]) -> int:
    """Total DRAM word accesses of a network: the per-layer sum."""
    return sum(c.total_words for c in per_layer)
