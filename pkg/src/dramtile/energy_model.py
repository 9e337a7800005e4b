"""Linear per-command DRAM energy accounting.

Energy is a weighted sum of simulator event counts: one cost per
activation, per precharge, per word read or written, plus standby power
integrated over the busy window.  Default coefficients are derived from
datasheet IDD currents of a DDR3-1600 2Gb x8 device.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dram_sim import DramTiming, SimStats


@dataclass(frozen=True)
class EnergyParams:
    """Per-event energies in picojoules; standby in pJ per clock cycle."""

    e_act: float
    e_pre: float
    e_rd_word: float
    e_wr_word: float
    p_standby: float

    def __post_init__(self):
        for f in ("e_act", "e_pre", "e_rd_word", "e_wr_word", "p_standby"):
            if getattr(self, f) < 0:
                raise ValueError(f"{f} must be non-negative")


def params_from_idd(idd0_ma: float = 95.0, idd3n_ma: float = 62.0,
                    idd4r_ma: float = 190.0, idd4w_ma: float = 205.0,
                    vdd: float = 1.5, t_ck_ns: float = 1.25,
                    t_rc_ns: float = 48.75, t_ras_ns: float = 35.0,
                    t_rp_ns: float = 13.75,
                    words_per_burst: int = 8,
                    t_burst_ns: float = 5.0) -> EnergyParams:
    """Derive per-event energies from IDD currents.

    The activate/precharge pair costs (IDD0 - IDD3N)*VDD over one tRC,
    split between the two events in tRAS : tRP proportion.  Read and
    write word energies are the incremental burst current over one burst
    interval, divided by the words it moves.
    """
    e_pair = (idd0_ma - idd3n_ma) * vdd * t_rc_ns  # mA * V * ns = pJ
    e_act = e_pair * t_ras_ns / (t_ras_ns + t_rp_ns)
    e_pre = e_pair - e_act
    e_rd = (idd4r_ma - idd3n_ma) * vdd * t_burst_ns / words_per_burst
    e_wr = (idd4w_ma - idd3n_ma) * vdd * t_burst_ns / words_per_burst
    p_stby = idd3n_ma * vdd * t_ck_ns
    return EnergyParams(e_act=e_act, e_pre=e_pre, e_rd_word=e_rd,
                        e_wr_word=e_wr, p_standby=p_stby)


def default_params() -> EnergyParams:
    return params_from_idd()


@dataclass(frozen=True)
class EnergyReport:
    """Energy breakdown in picojoules."""

    activate: float
    precharge: float
    read: float
    write: float
    standby: float

    @property
    def total(self) -> float:
        return (self.activate + self.precharge + self.read
                + self.write + self.standby)


def energy(stats: SimStats, params: EnergyParams) -> EnergyReport:
    """Fold simulation statistics through the linear energy model."""
    return EnergyReport(
        activate=stats.n_act * params.e_act,
        precharge=stats.n_pre * params.e_pre,
        read=stats.rd_words * params.e_rd_word,
        write=stats.wr_words * params.e_wr_word,
        standby=stats.total_cycles * params.p_standby)


def energy_per_bit(report: EnergyReport, stats: SimStats) -> float:
    """pJ per data bit moved."""
    bits = stats.bytes_moved * 8
    if bits == 0:
        return 0.0
    return report.total / bits


def dump_energy_csv(reports: dict[str, EnergyReport], path):
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["label", "activate_pj", "precharge_pj", "read_pj",
                     "write_pj", "standby_pj", "total_pj"])
        for label, r in reports.items():
            wr.writerow([label, r.activate, r.precharge, r.read,
                         r.write, r.standby, r.total])
