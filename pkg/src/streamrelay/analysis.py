"""Closed-form rates, code dimensions and the i.i.d. loss bound.

Rates are exact :class:`fractions.Fraction` values so identities can be
tested with equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .diagonal import BlockCode, RateZeroError
from .field import FieldParams


@dataclass(frozen=True)
class NetworkConfig:
    """A chain of ``L`` relays with per-link erasure budgets and delay ``T``."""

    L: int
    T: int
    budgets: tuple[int, ...]
    field: FieldParams = field(default_factory=FieldParams)

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if self.L < 0 or self.T < 0:
            raise ValueError("L and T must be non-negative")
        if len(self.budgets) != self.L + 1:
            raise ValueError(f"need L+1={self.L + 1} budgets, got {len(self.budgets)}")
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be non-negative")

    @property
    def links(self) -> int:
        return self.L + 1

    def offset(self, j: int) -> int:
        """Slot at which node ``j`` (0 = source) starts a diagonal, relative to its base.

        Equals ``N_1 + ... + N_j`` (0 for the source).
        """
        return sum(self.budgets[:j])


@dataclass(frozen=True)
class CodeDimensions:
    k: int
    n: tuple[int, ...]
    n_max: int
    link_delays: tuple[int, ...]


def capacity_p2p(T: int, N: int) -> Fraction:
    if T < N:
        return Fraction(0)
    return Fraction(T - N + 1, T + 1)


def capacity_upper(T: int, budgets: Sequence[int]) -> Fraction:
    total = sum(budgets)
    if T < total:
        return Fraction(0)
    others = min(total - n for n in budgets)
    return Fraction(T - total + 1, T - others + 1)


def header_bits(n_max: int) -> int:
    """ceil(log2 n_max) bits per header."""
    return (n_max - 1).bit_length() if n_max > 1 else 0


def achievable_rate_with_header(T: int, budgets: Sequence[int], field_bits: int) -> Fraction:
    total = sum(budgets)
    if T < total:
        return Fraction(0)
    dims = code_dimensions(NetworkConfig(len(budgets) - 1, T, tuple(budgets)))
    if field_bits < 1 or (1 << field_bits) < dims.n_max:
        raise ValueError(f"2^{field_bits} < n_max = {dims.n_max}: field too small")
    others = min(total - n for n in budgets)
    overhead = Fraction(dims.n_max * header_bits(dims.n_max), field_bits)
    return Fraction(T - total + 1) / (T - others + 1 + overhead)


def code_dimensions(config: NetworkConfig) -> CodeDimensions:
    T, budgets = config.T, config.budgets
    total = sum(budgets)
    if T < total:
        raise RateZeroError(f"T={T} < sum(N)={total}: rate is zero")
    k = T - total + 1
    n = tuple(k + nj for nj in budgets)
    delays = tuple(T - (total - nj) for nj in budgets)
    return CodeDimensions(k, n, max(n), delays)


def mdf_rate(T: int, budgets: Sequence[int]) -> tuple[Fraction, tuple[int, ...]]:
    """Best message-wise DF rate over integer delay splits with sum <= T.

    Depth-first search in lexicographic order keeps the first split that
    attains the maximum, so ties go to the lexicographically smallest one.
    """
    budgets = tuple(budgets)
    m = len(budgets)
    if T < sum(budgets):
        return Fraction(0), tuple(budgets)
    best = [Fraction(-1), None]

    def search(j: int, left: int, prefix: tuple[int, ...], current: Fraction):
        if j == m:
            if current > best[0]:
                best[0], best[1] = current, prefix
            return
        # each later hop can at best receive everything that is left
        bound = min([current] + [capacity_p2p(left, budgets[l]) for l in range(j, m)])
        if bound <= best[0]:
            return
        for tj in range(left + 1):
            rate = min(current, capacity_p2p(tj, budgets[j]))
            search(j + 1, left - tj, prefix + (tj,), rate)

    search(0, T, (), Fraction(1))
    return best[0], best[1]


def mdf_codes(T: int, budgets: Sequence[int]) -> tuple[BlockCode, ...]:
    """Per-hop codes for message-wise DF sharing one message length ``k``.

    Hop ``j`` gets a ``(k + N_j, k, T_j)`` code from the best split, which is
    decodable within ``T_j`` because ``k + N_j - 1 <= T_j``.
    """
    rate, split = mdf_rate(T, budgets)
    if rate == 0:
        raise RateZeroError("message-wise DF has rate zero for these budgets")
    k = min(tj - nj + 1 for tj, nj in zip(split, budgets))
    return tuple(BlockCode(k + nj, k, tj) for tj, nj in zip(split, budgets))


def if_rate(T: int, budgets: Sequence[int]) -> Fraction:
    return capacity_p2p(T, sum(budgets))


def _binomial_tail(n: int, lo: int, p: float) -> list[float]:
    return [math.comb(n, u) * p**u * (1 - p) ** (n - u) for u in range(lo, n + 1)]


def loss_upper_bound(alphas: float | Sequence[float], T: int, budgets: Sequence[int]) -> float:
    """Union bound on the per-frame loss probability of symbol-wise DF.

    Link ``j`` contributes ``P[Binomial(2k + 2N_j + 1, alpha_j) > N_j]``.
    Terms are summed in descending magnitude; the result is clamped to [0, 1].
    """
    budgets = tuple(budgets)
    alphas = _broadcast(alphas, len(budgets))
    total = sum(budgets)
    if T < total:
        return 1.0
    k = T - total + 1
    terms = []
    for a, nj in zip(alphas, budgets):
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"erasure probability {a} outside [0, 1]")
        width = 2 * k + 2 * nj + 1
        terms.extend(_binomial_tail(width, nj + 1, a))
    terms.sort(reverse=True)
    return min(1.0, max(0.0, math.fsum(terms)))


def _broadcast(alphas, m: int) -> tuple[float, ...]:
    if isinstance(alphas, (int, float)):
        return (float(alphas),) * m
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) == 1:
        return alphas * m
    if len(alphas) != m:
        raise ValueError(f"need 1 or {m} erasure probabilities, got {len(alphas)}")
    return alphas
