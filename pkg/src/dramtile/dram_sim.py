"""Trace-driven DRAM row-buffer simulation.

Requests are served strictly in order (FCFS) under an open-row policy.
Each request is classified against its bank's open row: hit (same row),
miss (no row open, needs activation), or conflict (different row open,
needs precharge then activation).  Activation and precharge of one bank
may overlap another bank's data burst, so the data bus is the floor on
total cycles; consecutive same-row column accesses stream back to back
in burst mode.  Non-burst mode re-pays the column access latency on
every word and transfers one word per request.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dram_map import DramGeometry
from .trace_gen import BURST, DramRequest, RequestTrace

HIT = "hit"
MISS = "miss"
CONFLICT = "conflict"


@dataclass(frozen=True)
class DramTiming:
    """Simplified DDR timing in bus-clock cycles."""

    tRCD: int = 11
    tRP: int = 11
    CL: int = 11
    tBL: int = 4
    clock_mhz: float = 800.0

    def __post_init__(self):
        if min(self.tRCD, self.tRP, self.CL, self.tBL) <= 0:
            raise ValueError("timing parameters must be positive")
        if self.clock_mhz <= 0:
            raise ValueError("clock must be positive")


@dataclass
class BankState:
    open_row: int | None = None


def classify(row: int, state: BankState) -> str:
    """Row-buffer outcome of one access; leaves the requested row open."""
    if state.open_row is None:
        outcome = MISS
    elif state.open_row == row:
        outcome = HIT
    else:
        outcome = CONFLICT
    state.open_row = row
    return outcome


def request_latency(kind: str, timing: DramTiming, burst: bool = True) -> int:
    """Isolated per-request latency by row-buffer outcome."""
    t_data = timing.tBL if burst else 1
    base = timing.CL + t_data
    if kind == HIT:
        return base
    if kind == MISS:
        return timing.tRCD + base
    if kind == CONFLICT:
        return timing.tRP + timing.tRCD + base
    raise ValueError(f"unknown outcome {kind!r}")


@dataclass
class SimStats:
    """Counts, cycles, and moved bytes accumulated over a simulation."""

    n_hit: int = 0
    n_miss: int = 0
    n_conflict: int = 0
    n_rd: int = 0
    n_wr: int = 0
    rd_words: int = 0
    wr_words: int = 0
    total_cycles: int = 0
    bytes_per_word: int = 1

    @property
    def n_act(self) -> int:
        return self.n_miss + self.n_conflict

    @property
    def n_pre(self) -> int:
        return self.n_conflict

    @property
    def n_requests(self) -> int:
        return self.n_rd + self.n_wr

    @property
    def bytes_moved(self) -> int:
        return (self.rd_words + self.wr_words) * self.bytes_per_word

    def merge(self, other: "SimStats") -> "SimStats":
        if self.bytes_per_word != other.bytes_per_word:
            raise ValueError("mismatched word widths")
        return SimStats(
            n_hit=self.n_hit + other.n_hit,
            n_miss=self.n_miss + other.n_miss,
            n_conflict=self.n_conflict + other.n_conflict,
            n_rd=self.n_rd + other.n_rd,
            n_wr=self.n_wr + other.n_wr,
            rd_words=self.rd_words + other.rd_words,
            wr_words=self.wr_words + other.wr_words,
            total_cycles=self.total_cycles + other.total_cycles,
            bytes_per_word=self.bytes_per_word)


@njit(cache=True)
def _fold(gbank, row, is_wr, words, open_row, row_open_t, bank_busy,
          state, CL, tRCD, tRP, t_data, pipelined):
    bus = state[0]
    hits, miss, conf = state[1], state[2], state[3]
    rd, wr, rdw, wrw = state[4], state[5], state[6], state[7]
    for k in range(gbank.size):
        b = gbank[k]
        r = row[k]
        if open_row[b] == r:
            hits += 1
            if pipelined:
                ready = row_open_t[b] + CL
            else:
                ready = bank_busy[b] + CL
        elif open_row[b] < 0:
            miss += 1
            opened = bank_busy[b] + tRCD
            row_open_t[b] = opened
            open_row[b] = r
            ready = opened + CL
        else:
            conf += 1
            opened = bank_busy[b] + tRP + tRCD
            row_open_t[b] = opened
            open_row[b] = r
            ready = opened + CL
        start = bus if bus > ready else ready
        end = start + t_data
        bus = end
        bank_busy[b] = end
        if is_wr[k]:
            wr += 1
            wrw += words[k]
        else:
            rd += 1
            rdw += words[k]
    state[0] = bus
    state[1], state[2], state[3] = hits, miss, conf
    state[4], state[5], state[6], state[7] = rd, wr, rdw, wrw


class _SimState:
    def __init__(self, geom: DramGeometry, open_rows=None):
        n = geom.n_banks_total
        self.open_row = np.full(n, -1, dtype=np.int64)
        self.row_open_t = np.zeros(n, dtype=np.int64)
        self.bank_busy = np.zeros(n, dtype=np.int64)
        self.state = np.zeros(8, dtype=np.int64)
        if open_rows:
            for b, r in open_rows.items():
                self.open_row[b] = r


def _requests_to_arrays(requests, geom: DramGeometry):
    n = len(requests)
    gbank = np.empty(n, dtype=np.int64)
    row = np.empty(n, dtype=np.int64)
    is_wr = np.empty(n, dtype=np.int64)
    words = np.empty(n, dtype=np.int64)
    for k, r in enumerate(requests):
        a = r.address
        a.check(geom)
        gbank[k] = ((a.channel * geom.ranks_per_channel + a.rank)
                    * geom.banks_per_chip + a.bank)
        row[k] = a.row
        is_wr[k] = 1 if r.op == "wr" else 0
        words[k] = r.burst_words
    return gbank, row, is_wr, words


def simulate(trace, geom: DramGeometry, timing: DramTiming,
             open_rows: dict[int, int] | None = None) -> SimStats:
    """Stream a trace through the per-bank row-buffer state machines.

    ``trace`` is either a :class:`RequestTrace` or a list of
    :class:`DramRequest`.  ``open_rows`` optionally pre-opens rows
    (global bank id -> row) before the first request.
    """
    st = _SimState(geom, open_rows)
    if isinstance(trace, RequestTrace):
        t_data = timing.tBL if trace.mode == BURST else 1
        pipelined = trace.mode == BURST
        chunks = trace.iter_request_arrays()
    else:
        t_data = timing.tBL
        pipelined = True
        chunks = [_requests_to_arrays(list(trace), geom)]
    for gbank, row, is_wr, words in chunks:
        if gbank.size and (gbank.max() >= geom.n_banks_total
                           or row.max() >= geom.rows_per_bank):
            from .dram_map import AddressOutOfRange
            raise AddressOutOfRange("trace address outside geometry")
        _fold(gbank, row, is_wr, words, st.open_row, st.row_open_t,
              st.bank_busy, st.state, timing.CL, timing.tRCD, timing.tRP,
              t_data, pipelined)
    s = st.state
    return SimStats(n_hit=int(s[1]), n_miss=int(s[2]), n_conflict=int(s[3]),
                    n_rd=int(s[4]), n_wr=int(s[5]),
                    rd_words=int(s[6]), wr_words=int(s[7]),
                    total_cycles=int(s[0]),
                    bytes_per_word=geom.bytes_per_word)


def effective_throughput(stats: SimStats, timing: DramTiming) -> float:
    """Sustained data rate in bytes per second."""
    if stats.total_cycles == 0:
        return 0.0
    return stats.bytes_moved * timing.clock_mhz * 1e6 / stats.total_cycles
