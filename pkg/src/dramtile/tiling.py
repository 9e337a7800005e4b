"""Tile grids with overlap-aware intermediate and last tiles.

A spatial ifmap axis of length ``full`` tiled with base length ``base``
and halo ``halo`` advances by ``base - halo`` per step: the halo band at
the leading edge of each tile after the first was already fetched with
the previous tile and must not be re-fetched.  Depth-like axes (channel
depth, filter sets) have no halo and reduce to floor/mod splitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil

from .net_model import FC, IFM, OFM, WGH, LayerShape


class TilingError(ValueError):
    pass


@dataclass(frozen=True)
class AxisGrid:
    """Tile decomposition of one axis.

    ``extents`` lists tile lengths in order: the base tile, intermediates
    (reported at their logical base length, which includes the halo), and
    the last tile reported at its net new-data length.  ``fetch`` lists
    the words actually fetched per tile when halo reuse is applied, and
    ``logical`` the window each tile covers (used to derive ofmap tiles).
    """

    full: int
    base: int
    halo: int
    extents: tuple[int, ...]
    fetch: tuple[int, ...]
    logical: tuple[int, ...]

    @property
    def n_tiles(self) -> int:
        return len(self.extents)

    def baseline_fetch(self) -> tuple[int, ...]:
        """Fetch lengths with halo reuse disabled: every tile re-fetches
        the full base extent."""
        return (self.base,) * self.n_tiles


@lru_cache(maxsize=None)
def ifm_axis_grid(full: int, base: int, halo: int) -> AxisGrid:
    """Split an axis into base / intermediate / last tiles.

    The base tile covers ``base`` elements; each subsequent tile advances
    by ``base - halo`` and fetches only the non-overlapped part.  The
    last tile takes whatever remains.
    """
    if not 1 <= base <= full:
        raise TilingError(f"base {base} outside [1, {full}]")
    if not 0 <= halo < base:
        raise TilingError(f"halo {halo} must satisfy 0 <= halo < base {base}")

    advance = base - halo
    remainder = full - base
    n_int = remainder // advance
    last = remainder - n_int * advance

    extents = [base] + [base] * n_int
    fetch = [base] + [advance] * n_int
    logical = [base] + [base] * n_int
    if last > 0:
        extents.append(last)
        fetch.append(last)
        logical.append(last + halo)
    return AxisGrid(full, base, halo,
                    tuple(extents), tuple(fetch), tuple(logical))


def depth_axis_grid(full: int, base: int) -> AxisGrid:
    """Halo-free split: floor(full/base) base tiles plus a remainder tile."""
    return ifm_axis_grid(full, base, 0)


def _merge_short_last(grid: AxisGrid, min_window: int) -> AxisGrid:
    """Fold a last tile too short to hold a filter window into its
    predecessor (only possible with stride > 1)."""
    if grid.n_tiles < 2 or grid.logical[-1] >= min_window:
        return grid
    last = grid.fetch[-1]
    extents = grid.extents[:-2] + (grid.extents[-2] + last,)
    fetch = grid.fetch[:-2] + (grid.fetch[-2] + last,)
    logical = grid.logical[:-2] + (grid.logical[-2] + last,)
    return AxisGrid(grid.full, grid.base, grid.halo, extents, fetch, logical)


@dataclass(frozen=True)
class TilingFactors:
    """Base tiling factors; Tp and Tq are pinned to the filter size."""

    Th: int
    Tw: int
    Ti: int
    Tj: int

    def validate(self, layer: LayerShape):
        depth = 1 if layer.depthwise else layer.I
        if not layer.P <= self.Th <= layer.H:
            raise TilingError(f"Th {self.Th} outside [{layer.P}, {layer.H}]")
        if not layer.Q <= self.Tw <= layer.W:
            raise TilingError(f"Tw {self.Tw} outside [{layer.Q}, {layer.W}]")
        if not 1 <= self.Ti <= depth:
            raise TilingError(f"Ti {self.Ti} outside [1, {depth}]")
        if not 1 <= self.Tj <= layer.J:
            raise TilingError(f"Tj {self.Tj} outside [1, {layer.J}]")


def spatial_halos(layer: LayerShape) -> tuple[int, int]:
    """Sliding-window overlap between adjacent tiles: max(P - str, 0)."""
    s = layer.stride
    return max(layer.P - s, 0), max(layer.Q - s, 0)


def ofm_tile_dims(Th: int, Tw: int, layer: LayerShape) -> tuple[int, int]:
    """Ofmap tile height/width produced from an ifmap tile window."""
    if Th < layer.P or Tw < layer.Q:
        raise TilingError("ifmap tile smaller than the filter window")
    s = layer.stride
    return (ceil((Th - layer.P + 1) / s), ceil((Tw - layer.Q + 1) / s))


@dataclass(frozen=True)
class TilingPlan:
    """All tile grids of one layer for a choice of tiling factors.

    For depthwise layers the channel axis rides on the filter-set grid
    (``j_grid``) and ``i_grid`` is a single unit tile.
    """

    layer: LayerShape
    factors: TilingFactors
    h_grid: AxisGrid
    w_grid: AxisGrid
    i_grid: AxisGrid
    j_grid: AxisGrid
    m_extents: tuple[int, ...]
    n_extents: tuple[int, ...]

    @property
    def trips(self) -> dict[str, int]:
        return {"h": self.h_grid.n_tiles, "w": self.w_grid.n_tiles,
                "j": self.j_grid.n_tiles, "i": self.i_grid.n_tiles}

    def ifm_depth_extents(self) -> tuple[int, ...]:
        """Channel extents of ifmap tiles (the j grid for depthwise)."""
        if self.layer.depthwise:
            return self.j_grid.extents
        return self.i_grid.extents


def build_plan(layer: LayerShape, factors: TilingFactors) -> TilingPlan:
    factors.validate(layer)
    halo_h, halo_w = spatial_halos(layer)
    h_grid = _merge_short_last(
        ifm_axis_grid(layer.H, factors.Th, min(halo_h, factors.Th - 1)),
        layer.P)
    w_grid = _merge_short_last(
        ifm_axis_grid(layer.W, factors.Tw, min(halo_w, factors.Tw - 1)),
        layer.Q)
    depth = 1 if layer.depthwise else layer.I
    i_grid = depth_axis_grid(depth, factors.Ti)
    j_grid = depth_axis_grid(layer.J, factors.Tj)

    m_extents = tuple(ofm_tile_dims(th, layer.Q, layer)[0]
                      for th in h_grid.logical)
    n_extents = tuple(ofm_tile_dims(layer.P, tw, layer)[1]
                      for tw in w_grid.logical)
    return TilingPlan(layer, factors, h_grid, w_grid, i_grid, j_grid,
                      m_extents, n_extents)


def buffer_footprint(plan: TilingPlan) -> tuple[int, int, int]:
    """Bytes needed to hold the largest (base) tile of each data type."""
    layer = plan.layer
    f = plan.factors
    ifm_depth = f.Tj if layer.depthwise else f.Ti
    wgh_depth = 1 if layer.depthwise else f.Ti
    Tm, Tn = ofm_tile_dims(f.Th, f.Tw, layer)
    bytes_ifm = ceil(f.Th * f.Tw * ifm_depth * layer.bit_ifm / 8)
    bytes_wgh = ceil(layer.P * layer.Q * wgh_depth * f.Tj * layer.bit_wgh / 8)
    bytes_ofm = ceil(Tm * Tn * f.Tj * layer.bit_ofm / 8)
    return bytes_ifm, bytes_wgh, bytes_ofm
