"""Diagonal interleaving of a block code over a packet stream.

Diagonal ``i`` holds symbol 0 of frame ``i``, symbol 1 of frame ``i + 1``,
and so on up to symbol ``k - 1`` of frame ``i + k - 1``.  A node
that starts diagonal ``i`` at slot ``i + offset`` sends its symbol for local
position ``d`` at slot ``i + offset + d``, so the packet sent at slot ``t``
holds, in position ``d``, a symbol of diagonal ``t - offset - d``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .mds import CodedSymbol, GeneratorMatrix


class RateZeroError(ValueError):
    """The requested delay cannot tolerate the erasure budget (rate 0)."""


class SourceFrame(NamedTuple):
    time: int
    values: tuple[int, ...]


class Packet(NamedTuple):
    time: int
    sender: int
    symbols: tuple[CodedSymbol, ...]

    @property
    def headers(self) -> tuple[int, ...]:
        return tuple(s.header for s in self.symbols)


@dataclass(frozen=True)
class BlockCode:
    """An (n, k, T) point-to-point block code applied along diagonals."""

    n: int
    k: int
    delay: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got ({self.n}, {self.k})")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")

    def __str__(self) -> str:
        return f"({self.n},{self.k},{self.delay})"


def p2p_code_params(T: int, N: int) -> BlockCode:
    """The (T+1, T-N+1, T) code that achieves point-to-point capacity."""
    if T < 0 or N < 0:
        raise ValueError("T and N must be non-negative")
    if T < N:
        raise RateZeroError(f"T={T} < N={N}: no positive-rate code")
    return BlockCode(T + 1, T - N + 1, T)


def parse_block_code(text: str) -> BlockCode:
    """Parse an explicit ``n,k,T`` triple."""
    n, k, t = (int(x) for x in text.replace("(", "").replace(")", "").split(","))
    return BlockCode(n, k, t)


def diagonal_of(time: int, position: int, offset: int = 0) -> int:
    return time - offset - position


class SourceEncoder:
    """Single-owner encoder emitting one packet per slot.

    ``column_ids`` are the master-generator columns used, in transmission order; the
    canonical choice is ``1..n``.
    """

    def __init__(self, gmax: GeneratorMatrix, n: int | None = None, sender: int = 0,
                 start_time: int = 0, column_ids: Sequence[int] | None = None):
        self.gmax = gmax
        self.k = gmax.k
        self.n = n if n is not None else gmax.n
        self.column_ids = tuple(column_ids) if column_ids else tuple(range(1, self.n + 1))
        if len(self.column_ids) != self.n:
            raise ValueError("column_ids must have length n")
        for d, c in enumerate(self.column_ids):
            needed = c - 1 if c <= gmax.k else gmax.k - 1
            if needed > d:
                raise ValueError(f"column {c} at position {d} would need future frames")
        self.sender = sender
        self.clock = start_time
        self.gf = gmax.gf
        self._columns = [gmax.column(c) for c in self.column_ids]
        # frames older than n slots are never referenced again
        self._history: deque[tuple[int, ...]] = deque(maxlen=self.n)
        self._zero = (0,) * self.k

    def _frame(self, time: int) -> tuple[int, ...]:
        back = self.clock - time
        if back < 0 or back >= len(self._history):
            return self._zero
        return self._history[-1 - back]

    def encode_slot(self, frame: SourceFrame) -> Packet:
        if frame.time != self.clock:
            raise ValueError(f"frame time {frame.time} != encoder clock {self.clock}")
        if len(frame.values) != self.k:
            raise ValueError(f"frame must have k={self.k} symbols")
        self._history.append(tuple(frame.values))
        t = self.clock
        k = self.k
        dot = self.gf.dot
        symbols = []
        for d in range(self.n):
            col = self._columns[d]
            base = t - d
            if d < k and self.column_ids[d] == d + 1:
                value = frame.values[d]
            else:
                value = dot([self._frame(base + v)[v] for v in range(k)], col)
            symbols.append(CodedSymbol(self.column_ids[d], value))
        self.clock += 1
        return Packet(t, self.sender, tuple(symbols))


def source_encode_slot(state: SourceEncoder, frame: SourceFrame) -> Packet:
    return state.encode_slot(frame)
