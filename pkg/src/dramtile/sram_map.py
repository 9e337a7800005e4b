"""Placement of on-chip tiles across SRAM buffer banks.

Words of a tile are striped across banks, filling the same row of every
bank before advancing to the next row, so that any group of consecutive
words can be streamed in parallel from distinct banks.  Filters are
assigned to banks modulo the bank count so each systolic-array column
can be fed from a dedicated bank.
"""

from __future__ import annotations

from dataclasses import dataclass


class BufferOverflow(Exception):
    pass


@dataclass(frozen=True)
class SramGeometry:
    banks: int
    rows_per_bank: int
    word_bytes: int

    def __post_init__(self):
        if self.banks < 1 or self.rows_per_bank < 1 or self.word_bytes < 1:
            raise ValueError("SRAM geometry fields must be >= 1")

    @property
    def capacity_bytes(self) -> int:
        return self.banks * self.rows_per_bank * self.word_bytes

    @property
    def capacity_words(self) -> int:
        return self.banks * self.rows_per_bank


@dataclass(frozen=True)
class SramPlacement:
    geom: SramGeometry
    n_words: int

    def location(self, word_index: int) -> tuple[int, int]:
        """(bank, row) of one tile word."""
        if not 0 <= word_index < self.n_words:
            raise BufferOverflow(f"word {word_index} outside placed tile")
        return word_index % self.geom.banks, word_index // self.geom.banks

    @property
    def assignments(self) -> dict[int, tuple[int, int]]:
        return {k: self.location(k) for k in range(self.n_words)}

    @property
    def rows_used(self) -> int:
        return -(-self.n_words // self.geom.banks)

    @property
    def unused_row_fraction(self) -> float:
        """Fraction of buffer rows a power-gating scheme could switch off."""
        return 1.0 - self.rows_used / self.geom.rows_per_bank


def place_tile(n_words: int, geom: SramGeometry) -> SramPlacement:
    """Stripe a tile across banks, same row across all banks first."""
    if n_words > geom.capacity_words:
        raise BufferOverflow(
            f"{n_words} words exceed buffer capacity of {geom.capacity_words}")
    return SramPlacement(geom, n_words)


def assign_filters(Tj: int, banks: int) -> dict[int, int]:
    """Filter index -> bank, round-robin across banks."""
    if Tj < 1 or banks < 1:
        raise ValueError("Tj and banks must be >= 1")
    return {j: j % banks for j in range(Tj)}


def dump_placement_csv(placement: SramPlacement, path):
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["word_index", "bank", "row"])
        for k in range(placement.n_words):
            bank, row = placement.location(k)
            wr.writerow([k, bank, row])
