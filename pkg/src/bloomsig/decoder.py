"""Signature decoding at the base station.

Two routes exist and must agree on the final containment decision:

* :func:`decode_full` -- test every codebook entry against the complete
  observation (the straightforward end-of-frame decode).
* :func:`decode_iterative` -- process the frame RAO by RAO, pruning the
  viable set and reporting candidates early once they uniquely explain part
  of the observation.  Early reports cut connection-setup latency; they are
  never retracted, so with detection noise the reported set can exceed the
  containment set.  The ``decoded`` result is always containment-based and
  therefore identical to :func:`decode_full`'s output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set

import numpy as np

from . import kernels
from ._decode_py import DecodeState
from .codec import Codebook
from .ormac import ObservationFrame, ShapeMismatchError


class OutOfOrderError(ValueError):
    """RAOs were delivered to the iterative decoder out of order."""


@dataclass
class DecodeTrace:
    """Per-RAO counts of potentially active and already reported signatures."""

    viable: List[int] = field(default_factory=list)
    decoded: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.viable)


@dataclass
class DecodeResult:
    decoded: Set[int]          # identities whose full signature is contained
    reported: Dict[int, int]   # identity -> 1-based RAO of the decode report
    trace: DecodeTrace


def _check_shapes(observation: ObservationFrame, codebook: Codebook) -> None:
    if observation.shape != (codebook.L, codebook.M):
        raise ShapeMismatchError(
            f"observation shape {observation.shape} != codebook shape "
            f"{(codebook.L, codebook.M)}"
        )


def decode_full(observation: ObservationFrame, codebook: Codebook) -> Set[int]:
    """Identities of all codebook entries contained in the full observation."""
    _check_shapes(observation, codebook)
    if observation.rao_count != codebook.L:
        raise ValueError("decode_full needs the complete frame")
    codes = codebook.packed_rows()
    active = codes >= 0
    safe = np.where(active, codes, 0)
    hits = observation.grid[np.arange(codebook.L)[None, :], safe] > 0
    contained = (~active | hits).all(axis=1)
    return {codebook.identities[i].u for i in np.nonzero(contained)[0]}


def decode_iterative(
    observation: ObservationFrame,
    codebook: Codebook,
    kernel: Optional[str] = None,
) -> DecodeResult:
    """Run the per-RAO decode over a complete frame via the selected kernel."""
    _check_shapes(observation, codebook)
    if observation.rao_count != codebook.L:
        raise ValueError("decode_iterative needs the complete frame")
    fn = kernels.decode_frame if kernel is None else kernels.get_kernel(kernel)
    report_rao, contained, viable_trace, decoded_trace = fn(
        codebook.packed_rows(), observation.grid
    )
    idents = codebook.identities
    decoded = {idents[i].u for i in np.nonzero(contained)[0]}
    reported = {
        idents[i].u: int(report_rao[i]) for i in np.nonzero(report_rao > 0)[0]
    }
    return DecodeResult(
        decoded=decoded,
        reported=reported,
        trace=DecodeTrace(viable_trace.tolist(), decoded_trace.tolist()),
    )


class IterativeDecoder:
    """Feed-one-RAO-at-a-time interface around the decode state.

    ``feed`` expects 1-based RAO indices in strict order and returns the
    identities newly reported at that RAO.
    """

    def __init__(self, codebook: Codebook):
        self.codebook = codebook
        self._state = DecodeState(codebook.packed_rows(), codebook.M)
        self._reported_mask = np.zeros(len(codebook), dtype=bool)

    @property
    def next_rao(self) -> int:
        return self._state.next_row + 1

    def feed(self, rao: int, row_bits: Sequence[int]) -> List[int]:
        if rao != self.next_rao:
            raise OutOfOrderError(f"expected RAO {self.next_rao}, got {rao}")
        self._state.step(np.asarray(row_bits, dtype=np.uint8))
        now = self._state.report_rao > 0
        fresh = now & ~self._reported_mask
        self._reported_mask = now
        return [self.codebook.identities[i].u for i in np.nonzero(fresh)[0]]

    def finish(self) -> DecodeResult:
        if self._state.next_row != self.codebook.L:
            raise ValueError(
                f"only {self._state.next_row} of {self.codebook.L} RAOs fed"
            )
        self._state.flush()
        idents = self.codebook.identities
        decoded = {idents[i].u for i in np.nonzero(self._state.viable)[0]}
        reported = {
            idents[i].u: int(self._state.report_rao[i])
            for i in np.nonzero(self._state.report_rao > 0)[0]
        }
        return DecodeResult(
            decoded=decoded,
            reported=reported,
            trace=DecodeTrace(
                list(self._state.viable_trace), list(self._state.decoded_trace)
            ),
        )


def write_trace(trace: DecodeTrace, path) -> None:
    """Export the per-RAO trace as CSV with header ``rao,viable,decoded``."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rao", "viable", "decoded"])
        for i, (v, d) in enumerate(zip(trace.viable, trace.decoded), start=1):
            writer.writerow([i, v, d])
