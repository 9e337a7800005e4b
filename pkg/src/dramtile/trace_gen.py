"""Loop-nest walk emitting the ordered DRAM request trace.

The trace is the simulator's input and the ground truth for the
analytical access model: for every (plan, schedule, mode) the trace
tallies must equal :func:`dramtile.access_model.layer_accesses` exactly.

Traces are held as compact fetch runs (one run per tile fetch, psum
spill, or store); requests are expanded lazily, either as objects for
small traces and file output or as numpy chunks for simulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .access_model import AccessCounts, Schedule
from .dram_map import (DramGeometry, PhysicalAddress, RegionAllocator,
                       decompose, decompose_arrays, nest_iter, tile_ids,
                       tile_layout)
from .net_model import IFM, OFM, WGH, LayerShape
from .tiling import TilingPlan

READ = "rd"
WRITE = "wr"
BURST = "burst"
NONBURST = "nonburst"


@dataclass(frozen=True)
class DramRequest:
    op: str
    address: PhysicalAddress
    burst_words: int
    tag: str


@dataclass(frozen=True)
class FetchRun:
    """One contiguous burst of word accesses in linear address space."""

    op: str
    dtype: str
    lin_start: int
    n_words: int
    tag: str


@dataclass
class RequestTrace:
    """Ordered DRAM requests for one layer, stored as fetch runs.

    Run lengths are in column slots; ``slots`` records how many columns
    one element of each data type occupies (wider-than-chip elements
    span several columns).
    """

    runs: list[FetchRun]
    mode: str
    geom: DramGeometry
    policy: str
    slots: dict[str, int] | None = None

    @property
    def total_words(self) -> int:
        return sum(r.n_words for r in self.runs)

    def _run_segments(self, run: FetchRun):
        """Split a run at row boundaries of the linear space."""
        cols = self.geom.columns_per_row
        start, left = run.lin_start, run.n_words
        while left > 0:
            seg = min(left, cols - start % cols)
            yield start, seg
            start += seg
            left -= seg

    def n_requests(self) -> int:
        if self.mode == NONBURST:
            return self.total_words
        BL = self.geom.burst_length
        return sum(ceil(seg / BL)
                   for run in self.runs
                   for _, seg in self._run_segments(run))

    def iter_requests(self):
        """Expand to DramRequest objects (small traces and file output)."""
        BL = self.geom.burst_length if self.mode == BURST else 1
        for run in self.runs:
            for seg_start, seg_len in self._run_segments(run):
                for off in range(0, seg_len, BL):
                    words = min(BL, seg_len - off)
                    addr = decompose(seg_start + off, self.geom, self.policy)
                    yield DramRequest(run.op, addr, words, run.tag)

    def iter_request_arrays(self, chunk: int = 1 << 22):
        """Yield (gbank, row, is_write, words) int64 arrays for simulation."""
        cols = self.geom.columns_per_row
        BL = self.geom.burst_length if self.mode == BURST else 1
        buf_lin, buf_wr, buf_words = [], [], []
        size = 0
        for run in self.runs:
            wr = 1 if run.op == WRITE else 0
            for seg_start, seg_len in self._run_segments(run):
                n_req = ceil(seg_len / BL)
                lin = seg_start + BL * np.arange(n_req, dtype=np.int64)
                words = np.full(n_req, BL, dtype=np.int64)
                words[-1] = seg_len - BL * (n_req - 1)
                buf_lin.append(lin)
                buf_wr.append(np.full(n_req, wr, dtype=np.int64))
                buf_words.append(words)
                size += n_req
                if size >= chunk:
                    yield self._flush(buf_lin, buf_wr, buf_words)
                    buf_lin, buf_wr, buf_words = [], [], []
                    size = 0
        if size:
            yield self._flush(buf_lin, buf_wr, buf_words)

    def _flush(self, buf_lin, buf_wr, buf_words):
        lin = np.concatenate(buf_lin)
        gbank, row = decompose_arrays(lin, self.geom, self.policy)
        return gbank, row, np.concatenate(buf_wr), np.concatenate(buf_words)

    def write(self, path):
        """One request per line: op channel rank chip bank row column burst tag."""
        with open(path, "w") as fh:
            for r in self.iter_requests():
                a = r.address
                fh.write(f"{r.op} {a.channel} {a.rank} {a.chip} {a.bank} "
                         f"{a.row} {a.column} {r.burst_words} {r.tag}\n")


def read_trace_file(path) -> list[DramRequest]:
    out = []
    with open(path) as fh:
        for line in fh:
            op, ch, rk, cp, bk, rw, co, burst, tag = line.split()
            addr = PhysicalAddress(int(ch), int(rk), int(cp),
                                   int(bk), int(rw), int(co))
            out.append(DramRequest(op, addr, int(burst), tag))
    return out


def generate_layer_trace(layer: LayerShape, plan: TilingPlan,
                         schedule: Schedule, alloc: RegionAllocator,
                         geom: DramGeometry, mode: str, Dp: int,
                         access_mode: str, layer_key=None) -> RequestTrace:
    """Walk the loop nest and emit the request trace for one layer.

    ``access_mode`` selects halo-aware or full-base-tile fetch volumes
    (it must match the mode used to size the regions); ``mode`` selects
    burst or non-burst request framing.
    """
    if mode not in (BURST, NONBURST):
        raise ValueError(f"unknown trace mode {mode!r}")
    layer_key = layer_key if layer_key is not None else layer.name
    layout = tile_layout(plan, schedule, Dp, access_mode, geom)
    regions = {d: alloc.regions[(layer_key, d)] for d in (IFM, WGH, OFM)}

    def run(op, dtype, tid) -> FetchRun:
        start, n = layout.ranges[dtype][tid]
        tag = f"{layer_key}/{dtype}/" + ".".join(map(str, tid))
        return FetchRun(op, dtype, regions[dtype].start + start, n, tag)

    runs: list[FetchRun] = []
    resident = {IFM: None, WGH: None}
    ofm_resident = None
    ofm_seen: set = set()
    for h, w, j, i in nest_iter(plan, schedule.nest):
        ids = tile_ids(layer, h, w, j, i)
        for dtype in (IFM, WGH):
            tid = ids[dtype]
            if resident[dtype] != tid:
                runs.append(run(READ, dtype, tid))
                resident[dtype] = tid
        otid = ids[OFM]
        if ofm_resident != otid:
            if ofm_resident is not None:
                runs.append(run(WRITE, OFM, ofm_resident))
            if otid in ofm_seen:
                runs.append(run(READ, OFM, otid))
            ofm_seen.add(otid)
            ofm_resident = otid
    if ofm_resident is not None:
        runs.append(run(WRITE, OFM, ofm_resident))
    return RequestTrace(runs=runs, mode=mode, geom=geom,
                        policy=alloc.policy, slots=layout.slots)


def count_trace(trace: RequestTrace) -> AccessCounts:
    """Tally trace word accesses by data type and operation."""
    slots = trace.slots or {IFM: 1, WGH: 1, OFM: 1}
    c = AccessCounts()
    for run in trace.runs:
        words = run.n_words // slots[run.dtype]
        if run.dtype == IFM:
            c.rd_ifm += words
        elif run.dtype == WGH:
            c.rd_wgh += words
        elif run.op == READ:
            c.rd_ofm += words
        else:
            c.wr_ofm += words
    c.requests_nonburst = RequestTrace(trace.runs, NONBURST, trace.geom,
                                       trace.policy).n_requests()
    c.requests_burst = RequestTrace(trace.runs, BURST, trace.geom,
                                    trace.policy).n_requests()
    return c
