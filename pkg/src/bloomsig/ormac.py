"""Binary preamble-activation grids and the OR multiple-access channel.

A contender is represented by an L x M binary grid: rows are random access
opportunities (RAOs), columns are the M orthogonal preambles available in
each RAO.  The base station sees the bit-wise OR of all transmitted grids,
degraded by imperfect preamble detection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np


class ShapeMismatchError(ValueError):
    """Grids with incompatible (L, M) dimensions were combined."""


@dataclass(frozen=True)
class ChannelParams:
    """Per-preamble detection performance at the base station.

    ``p_d`` is the probability that an activated preamble is detected,
    ``p_f`` the probability that an idle preamble is falsely detected.
    Requires 0 <= p_f < p_d <= 1.
    """

    p_d: float = 1.0
    p_f: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_f < self.p_d <= 1.0):
            raise ValueError(
                f"need 0 <= p_f < p_d <= 1, got p_f={self.p_f}, p_d={self.p_d}"
            )

    @property
    def ideal(self) -> bool:
        return self.p_d == 1.0 and self.p_f == 0.0


IDEAL_CHANNEL = ChannelParams(1.0, 0.0)


def _as_grid(grid) -> np.ndarray:
    g = np.ascontiguousarray(grid, dtype=np.uint8)
    if g.ndim != 2:
        raise ValueError(f"grid must be 2-D (L, M), got shape {g.shape}")
    if g.max(initial=0) > 1:
        raise ValueError("grid cells must be 0 or 1")
    return g


class Signature:
    """A device's activation pattern: at most one active preamble per RAO."""

    __slots__ = ("grid",)

    def __init__(self, grid) -> None:
        g = _as_grid(grid)
        if g.size and (g.sum(axis=1) > 1).any():
            raise ValueError("a signature activates at most one preamble per RAO")
        g.setflags(write=False)
        self.grid = g

    @classmethod
    def from_cells(cls, L: int, M: int, cells: Iterable[Tuple[int, int]]) -> "Signature":
        """Build a signature from 0-based (rao, preamble) cell coordinates."""
        g = np.zeros((L, M), dtype=np.uint8)
        for r, p in cells:
            g[r, p] = 1
        return cls(g)

    @classmethod
    def from_rows(cls, row_preambles: Sequence[int], M: int) -> "Signature":
        """Build from per-RAO preamble indices, -1 marking an idle RAO."""
        rows = np.asarray(row_preambles, dtype=np.int64)
        g = np.zeros((len(rows), M), dtype=np.uint8)
        active = rows >= 0
        g[np.nonzero(active)[0], rows[active]] = 1
        return cls(g)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    @property
    def L(self) -> int:
        return self.grid.shape[0]

    @property
    def M(self) -> int:
        return self.grid.shape[1]

    @property
    def weight(self) -> int:
        """Number of RAOs with an active preamble."""
        return int(self.grid.any(axis=1).sum())

    def row_preambles(self) -> np.ndarray:
        """Per-RAO active preamble index, -1 where the RAO is idle."""
        out = np.full(self.L, -1, dtype=np.int16)
        rows, cols = np.nonzero(self.grid)
        out[rows] = cols.astype(np.int16)
        return out

    def active_cells(self) -> list[Tuple[int, int]]:
        rows, cols = np.nonzero(self.grid)
        return list(zip(rows.tolist(), cols.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return self.shape == other.shape and bool((self.grid == other.grid).all())

    def __hash__(self) -> int:
        return hash((self.shape, self.grid.tobytes()))

    def __repr__(self) -> str:
        return f"Signature(L={self.L}, M={self.M}, weight={self.weight})"


class ObservationFrame:
    """The grid seen by the base station, possibly only partially received.

    Rows at index >= ``rao_count`` are undefined and ignored by consumers.
    """

    __slots__ = ("grid", "rao_count")

    def __init__(self, grid, rao_count: Optional[int] = None) -> None:
        g = _as_grid(grid)
        self.grid = g
        self.rao_count = g.shape[0] if rao_count is None else int(rao_count)
        if not 0 <= self.rao_count <= g.shape[0]:
            raise ValueError(f"rao_count must be in [0, {g.shape[0]}]")
        g.setflags(write=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    @property
    def L(self) -> int:
        return self.grid.shape[0]

    @property
    def M(self) -> int:
        return self.grid.shape[1]

    def __repr__(self) -> str:
        return f"ObservationFrame(L={self.L}, M={self.M}, rao_count={self.rao_count})"


def superpose(
    signatures: Iterable[Signature],
    channel: ChannelParams = IDEAL_CHANNEL,
    rng: Optional[np.random.Generator] = None,
    shape: Optional[Tuple[int, int]] = None,
) -> ObservationFrame:
    """OR-combine transmitted signatures and apply detection noise.

    Every cell active in the OR survives with probability ``p_d`` (one draw
    per cell, regardless of how many devices activated it) and every idle
    cell is falsely activated with probability ``p_f``.  ``shape`` is
    required when ``signatures`` is empty.
    """
    sigs = list(signatures)
    if sigs:
        first = sigs[0].shape
        for s in sigs[1:]:
            if s.shape != first:
                raise ShapeMismatchError(f"signature shapes differ: {first} vs {s.shape}")
        if shape is not None and tuple(shape) != first:
            raise ShapeMismatchError(f"explicit shape {shape} != signature shape {first}")
        combined = np.zeros(first, dtype=np.uint8)
        for s in sigs:
            np.bitwise_or(combined, s.grid, out=combined)
    else:
        if shape is None:
            raise ValueError("shape is required when superposing zero signatures")
        combined = np.zeros(shape, dtype=np.uint8)

    if channel.ideal:
        observed = combined
    else:
        if rng is None:
            raise ValueError("a seeded rng is required for a noisy channel")
        u = rng.random(combined.shape)
        active = combined.astype(bool)
        observed = np.where(active, u < channel.p_d, u < channel.p_f).astype(np.uint8)
    return ObservationFrame(observed, rao_count=combined.shape[0])


def contains(
    candidate: Signature,
    observation: ObservationFrame,
    upto: Optional[int] = None,
) -> bool:
    """True iff every active cell of ``candidate`` in RAOs 0..upto-1 is active in ``observation``.

    ``upto`` defaults to the number of RAOs received; it may not exceed it.
    """
    if candidate.shape != observation.shape:
        raise ShapeMismatchError(
            f"candidate shape {candidate.shape} != observation shape {observation.shape}"
        )
    if upto is None:
        upto = observation.rao_count
    if not 0 <= upto <= observation.rao_count:
        raise ValueError(f"upto={upto} exceeds received rao_count={observation.rao_count}")
    cand = candidate.grid[:upto]
    obs = observation.grid[:upto]
    return bool((cand & ~obs).max(initial=0) == 0)
