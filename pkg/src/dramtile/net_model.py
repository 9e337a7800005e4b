"""Network and layer descriptions, reuse factors, and reuse priority orders.

A layer is described by its ifmap volume (H x W x I), its filter bank
(P x Q x I x J), and the stride.  Fully-connected layers collapse every
spatial dimension to 1.  Depthwise layers are treated as J independent
single-input-channel convolutions (each filter is P x Q x 1 and consumes
only its own ifmap channel).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

CONV = "conv"
FC = "fc"
DEPTHWISE = "depthwise-conv"

KINDS = (CONV, FC, DEPTHWISE)

# The three data types shuttled between DRAM and the on-chip buffers.
IFM = "ifm"
WGH = "wgh"
OFM = "ofm"
DATA_TYPES = (IFM, WGH, OFM)


@dataclass(frozen=True)
class LayerShape:
    """Dimensions and bitwidths of one CONV/FC/depthwise layer."""

    name: str
    kind: str
    H: int
    W: int
    I: int
    P: int
    Q: int
    J: int
    stride: int = 1
    bit_ifm: int = 8
    bit_wgh: int = 8
    bit_ofm: int = 8
    # Partial sums accumulate at full MAC-accumulator precision; when a
    # schedule spills them to DRAM they move at this width.
    bit_psum: int = 32

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        for f in ("H", "W", "I", "P", "Q", "J", "stride",
                  "bit_ifm", "bit_wgh", "bit_ofm", "bit_psum"):
            if getattr(self, f) < 1:
                raise ValueError(f"{self.name}: {f} must be >= 1")
        if self.P > self.H or self.Q > self.W:
            raise ValueError(f"{self.name}: filter larger than ifmap")
        if self.kind == FC:
            if not (self.P == self.Q == self.H == self.W == self.stride == 1):
                raise ValueError(f"{self.name}: fc layers need P=Q=H=W=stride=1")

    @property
    def depthwise(self) -> bool:
        return self.kind == DEPTHWISE


@dataclass(frozen=True)
class NetworkModel:
    """An ordered list of layers processed one at a time."""

    name: str
    layers: tuple[LayerShape, ...]

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ValueError("a network needs at least one layer")

    @property
    def L(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class ReuseFactors:
    """Number of MACs each stored element of a data type participates in."""

    rf_ifm: int
    rf_wgh: int
    rf_ofm: int

    def as_dict(self) -> dict[str, int]:
        return {IFM: self.rf_ifm, WGH: self.rf_wgh, OFM: self.rf_ofm}


@dataclass(frozen=True)
class ReusePriorityOrder:
    """Permutation of the three data types, highest reuse factor first."""

    order: tuple[str, str, str]

    def __post_init__(self):
        if sorted(self.order) != sorted(DATA_TYPES):
            raise ValueError(f"not a permutation of data types: {self.order}")


def output_dims(layer: LayerShape) -> tuple[int, int]:
    """Ofmap height and width (padding is not modeled)."""
    if layer.kind == FC:
        return 1, 1
    s = layer.stride
    M = ceil((layer.H - layer.P + 1) / s)
    N = ceil((layer.W - layer.Q + 1) / s)
    return M, N


def reuse_factors(layer: LayerShape) -> ReuseFactors:
    """Per-element MAC participation counts for each data type.

    For depthwise layers each ifmap channel feeds exactly one filter, so
    the effective input depth and filter count are both 1.
    """
    s = layer.stride
    j_eff = 1 if layer.depthwise else layer.J
    i_eff = 1 if layer.depthwise else layer.I
    rf_ifm = ceil(layer.P / s) * ceil(layer.Q / s) * j_eff
    rf_wgh = ceil((layer.H - layer.P + 1) / s) * ceil((layer.W - layer.Q + 1) / s)
    rf_ofm = layer.P * layer.Q * i_eff
    return ReuseFactors(rf_ifm, rf_wgh, rf_ofm)


# Fixed tie-break: ifm before wgh before ofm on equal reuse factors.
_TIE_RANK = {IFM: 0, WGH: 1, OFM: 2}


def reuse_priority_order(layer: LayerShape) -> ReusePriorityOrder:
    """Sort the three reuse factors descending, ties broken ifm > wgh > ofm."""
    rf = reuse_factors(layer).as_dict()
    order = tuple(sorted(DATA_TYPES, key=lambda d: (-rf[d], _TIE_RANK[d])))
    return ReusePriorityOrder(order)
