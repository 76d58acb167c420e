"""Pure-Python (NumPy) implementation of the iterative decode kernel.

The kernel operates on a packed codebook: ``codes[c, r]`` is the preamble
index candidate c activates in RAO r, or -1 if the RAO is idle for c.  Per
received RAO the kernel

1. prunes candidates whose newly observed active cell is missing from the
   observation (their prefix can no longer be contained), and
2. reports as decoded every still-viable candidate that is the only viable
   cover of some active observed cell (cells covered by no candidate at all
   are ignored: with false alarms they would otherwise force bogus reports).

Reports are never retracted; the *contained* output is the set of candidates
whose full grid survives pruning, which is exactly the end-of-frame
containment decode.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np


def _pack_owner_csr(codes: np.ndarray, M: int):
    """CSR of cell -> candidate ids, for unique-cover owner lookup."""
    T, L = codes.shape
    cand, rows = np.nonzero(codes >= 0)
    cols = codes[cand, rows].astype(np.int64)
    cell_ids = rows.astype(np.int64) * M + cols
    order = np.argsort(cell_ids, kind="stable")
    sorted_cells = cell_ids[order]
    owners = cand[order].astype(np.int64)
    starts = np.searchsorted(sorted_cells, np.arange(L * M + 1))
    return starts, owners


class DecodeState:
    """Stateful per-RAO decoder; rows must be fed strictly in order."""

    def __init__(self, codes: np.ndarray, M: int):
        codes = np.ascontiguousarray(codes, dtype=np.int16)
        if codes.ndim != 2:
            raise ValueError("codes must be (T, L)")
        self.codes = codes
        self.T, self.L = codes.shape
        self.M = int(M)
        self.viable = np.ones(self.T, dtype=bool)
        self.report_rao = np.zeros(self.T, dtype=np.int32)  # 0 = unreported
        self.next_row = 0
        self.y = np.zeros((self.L, self.M), dtype=np.uint8)
        self.handled = np.zeros((self.L, self.M), dtype=bool)
        self.viable_trace: list[int] = []
        self.decoded_trace: list[int] = []

        # per-candidate active cells (CSR by candidate) for cover bookkeeping
        cand, rows = np.nonzero(codes >= 0)
        cols = codes[cand, rows].astype(np.int64)
        counts = np.bincount(cand, minlength=self.T)
        self._cand_ptr = np.concatenate(([0], np.cumsum(counts)))
        order = np.argsort(cand, kind="stable")
        self._cand_rows = rows[order]
        self._cand_cols = cols[order]

        self.cover = np.zeros((self.L, self.M), dtype=np.int32)
        np.add.at(self.cover, (rows, cols), 1)

        self._owner_starts, self._owners = _pack_owner_csr(codes, self.M)

    def step(self, row_bits: np.ndarray) -> None:
        """Consume the next RAO's M-bit observation row."""
        i = self.next_row
        if i >= self.L:
            raise ValueError("all RAOs already received")
        row = np.ascontiguousarray(row_bits, dtype=np.uint8)
        if row.shape != (self.M,):
            raise ValueError(f"row must have shape ({self.M},)")
        self.y[i] = row
        self.next_row = i + 1

        # prune on the newly observed row
        col = self.codes[:, i]
        active = col >= 0
        hit = row[np.where(active, col, 0)] > 0
        killed = self.viable & active & ~hit
        if killed.any():
            for c in np.nonzero(killed)[0]:
                lo, hi = self._cand_ptr[c], self._cand_ptr[c + 1]
                self.cover[self._cand_rows[lo:hi], self._cand_cols[lo:hi]] -= 1
            self.viable &= ~killed

        # necessity reports: uniquely covered active cells of the prefix
        upto = i + 1
        fresh = (
            (self.y[:upto] > 0)
            & (self.cover[:upto] == 1)
            & ~self.handled[:upto]
        )
        if fresh.any():
            for r, p in np.argwhere(fresh):
                cell = int(r) * self.M + int(p)
                lo, hi = self._owner_starts[cell], self._owner_starts[cell + 1]
                owner_ids = self._owners[lo:hi]
                owner = owner_ids[self.viable[owner_ids]]
                # cover == 1 guarantees exactly one viable owner
                c = int(owner[0])
                if self.report_rao[c] == 0:
                    self.report_rao[c] = upto
                self.handled[r, p] = True

        self.viable_trace.append(int(self.viable.sum()))
        self.decoded_trace.append(int((self.report_rao > 0).sum()))

    def flush(self) -> None:
        """End of frame: report everything still viable and unreported.

        The flush belongs to RAO L, so the final trace record includes it.
        """
        if self.next_row != self.L:
            raise ValueError(f"only {self.next_row} of {self.L} RAOs received")
        late = self.viable & (self.report_rao == 0)
        self.report_rao[late] = self.L
        if self.decoded_trace:
            self.decoded_trace[-1] = int((self.report_rao > 0).sum())


def decode_frame(
    codes: np.ndarray, y: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Run the full iterative decode over a complete observation grid.

    Returns ``(report_rao, contained, viable_trace, decoded_trace)`` where
    ``report_rao[c]`` is the 1-based RAO at which candidate c was reported
    decoded (0 = never), and ``contained[c]`` flags full containment.
    """
    codes = np.ascontiguousarray(codes, dtype=np.int16)
    y = np.ascontiguousarray(y, dtype=np.uint8)
    T, L = codes.shape
    if y.shape[0] != L:
        raise ValueError(f"observation has {y.shape[0]} rows, codes expect {L}")
    state = DecodeState(codes, y.shape[1])
    for r in range(L):
        state.step(y[r])
    state.flush()
    return (
        state.report_rao,
        state.viable.copy(),
        np.asarray(state.viable_trace, dtype=np.int32),
        np.asarray(state.decoded_trace, dtype=np.int32),
    )
