"""Erasure patterns: budgeted, periodic, sliding-window and i.i.d.

Random patterns use numpy's counter-based Philox generator.  A trial's
stream is keyed by ``(seed, shard, link)`` through :class:`numpy.random.SeedSequence`,
so shards can be generated independently and in any order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .diagonal import Packet


@dataclass(frozen=True)
class ErasurePattern:
    """Per-slot erasure bits (1 = erased) for one link over ``horizon`` slots."""

    link: int
    bits: tuple[int, ...]

    @property
    def horizon(self) -> int:
        return len(self.bits)

    @property
    def count(self) -> int:
        return sum(self.bits)

    def erased(self, t: int) -> bool:
        return 0 <= t < len(self.bits) and self.bits[t] == 1

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    @classmethod
    def from_string(cls, text: str, link: int = 1) -> "ErasurePattern":
        text = text.strip()
        if set(text) - {"0", "1"}:
            raise ValueError(f"pattern must be a 0/1 string, got {text!r}")
        return cls(link, tuple(int(c) for c in text))

    @classmethod
    def clear(cls, horizon: int, link: int = 1) -> "ErasurePattern":
        return cls(link, (0,) * horizon)

    @classmethod
    def at(cls, horizon: int, slots: Sequence[int], link: int = 1) -> "ErasurePattern":
        bits = [0] * horizon
        for s in slots:
            bits[s] = 1
        return cls(link, tuple(bits))


@dataclass(frozen=True)
class ChannelParams:
    alphas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise ValueError("erasure probabilities must lie in [0, 1]")


def apply_erasure(packet: Packet | None, erased: int | bool) -> Packet | None:
    """Whole-packet erasure channel: ``None`` marks an erased packet."""
    return None if erased else packet


def gen_periodic(period: int, burst: int, horizon: int, link: int = 1) -> ErasurePattern:
    """Erase the last ``burst`` slots of every period of length ``period``."""
    if period < 1:
        raise ValueError("period must be positive")
    if burst > period:
        raise ValueError(f"burst {burst} exceeds period {period}")
    bits = tuple(1 if t % period >= period - burst else 0 for t in range(horizon))
    return ErasurePattern(link, bits)


def count_budgeted(horizon: int, budget: int) -> int:
    return sum(math.comb(horizon, u) for u in range(min(budget, horizon) + 1))


def enumerate_budgeted(horizon: int, budget: int, link: int = 1) -> Iterator[ErasurePattern]:
    """All patterns with at most ``budget`` erasures, fewest erasures first."""
    for u in range(min(budget, horizon) + 1):
        for slots in itertools.combinations(range(horizon), u):
            yield ErasurePattern.at(horizon, slots, link)


def max_window_count(bits: Sequence[int], window: int) -> int:
    if window <= 0 or not bits:
        return 0
    arr = np.asarray(bits, dtype=np.int64)
    if len(arr) <= window:
        return int(arr.sum())
    csum = np.concatenate(([0], np.cumsum(arr)))
    return int((csum[window:] - csum[:-window]).max())


def is_sliding_admissible(pattern: ErasurePattern | Sequence[int], T: int, N: int) -> bool:
    """True iff every window of ``T + 1`` consecutive slots has at most ``N`` erasures."""
    bits = pattern.bits if isinstance(pattern, ErasurePattern) else pattern
    return max_window_count(bits, T + 1) <= N


def link_generator(seed: int, shard: int, link: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed, shard, link])
    return np.random.Generator(np.random.Philox(ss))


def sample_bits(alpha: float, horizon: int, rng: np.random.Generator) -> np.ndarray:
    if alpha <= 0.0:
        return np.zeros(horizon, dtype=np.uint8)
    if alpha >= 1.0:
        return np.ones(horizon, dtype=np.uint8)
    return (rng.random(horizon) < alpha).astype(np.uint8)


def sample_iid(params: ChannelParams | Sequence[float], horizon: int, seed: int,
               shard: int = 0) -> list[ErasurePattern]:
    """One i.i.d. Bernoulli pattern per link, reproducible from ``seed``."""
    alphas = params.alphas if isinstance(params, ChannelParams) else tuple(params)
    out = []
    for j, a in enumerate(alphas, start=1):
        bits = sample_bits(a, horizon, link_generator(seed, shard, j))
        out.append(ErasurePattern(j, tuple(int(b) for b in bits)))
    return out
