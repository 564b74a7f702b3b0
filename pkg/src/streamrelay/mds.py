"""Systematic Cauchy MDS codes, column selection and erasure decoding.

The master generator is ``[I_k | C]`` with ``C`` a Cauchy matrix, so every
square submatrix of ``C`` is nonsingular and every k columns of the
generator are independent.  Per-link codes are column selections of it, and
a symbol's header is its 1-based column index in the master generator.
"""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field as dc_field
from typing import Iterable, NamedTuple, Sequence

from .field import FieldParams, GaloisField, get_field


class CodeError(ValueError):
    """Invalid code construction parameters."""


class DecodeError(RuntimeError):
    """Not enough symbols, or an internally inconsistent system."""


class CodedSymbol(NamedTuple):
    header: int
    value: int


VOID = CodedSymbol(0, 0)


class DiagonalMessage(NamedTuple):
    values: tuple[int, ...]
    base_time: int = 0


@dataclass(eq=False)
class GeneratorMatrix:
    k: int
    n: int
    entries: tuple[tuple[int, ...], ...]
    column_ids: tuple[int, ...]
    gf: GaloisField
    _inverse_cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.entries) != self.k or any(len(r) != self.n for r in self.entries):
            raise CodeError("entries must be a k x n matrix")
        if len(self.column_ids) != self.n or len(set(self.column_ids)) != self.n:
            raise CodeError("column_ids must be n distinct indices")
        # columns keyed by header for O(1) lookup in the hot path
        self._columns = {
            cid: tuple(row[c] for row in self.entries)
            for c, cid in enumerate(self.column_ids)
        }

    def column(self, column_id: int) -> tuple[int, ...]:
        try:
            return self._columns[column_id]
        except KeyError:
            raise CodeError(f"column {column_id} not in this code") from None

    def submatrix(self, column_ids: Sequence[int]) -> list[list[int]]:
        cols = [self.column(c) for c in column_ids]
        return [[col[r] for col in cols] for r in range(self.k)]

    def inverse_for(self, column_ids: tuple[int, ...]) -> list[list[int]]:
        """Inverse of the k x k column submatrix, cached per column set."""
        inv = self._inverse_cache.get(column_ids)
        if inv is None:
            inv = invert_matrix(self.submatrix(column_ids), self.gf)
            self._inverse_cache[column_ids] = inv
        return inv


def invert_matrix(mat: list[list[int]], gf: GaloisField) -> list[list[int]]:
    """Gauss-Jordan inversion over GF(2^m).  Raises DecodeError if singular."""
    n = len(mat)
    a = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(mat)]
    mul, inv = gf.mul, gf.inv
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            raise DecodeError("singular submatrix: generator is not MDS")
        a[col], a[pivot] = a[pivot], a[col]
        p_inv = inv(a[col][col])
        a[col] = [mul(x, p_inv) for x in a[col]]
        for r in range(n):
            f = a[r][col]
            if r != col and f:
                pr = a[col]
                a[r] = [x ^ mul(f, y) for x, y in zip(a[r], pr)]
    return [row[n:] for row in a]


def determinant(mat: list[list[int]], gf: GaloisField) -> int:
    n = len(mat)
    a = [list(r) for r in mat]
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            return 0
        a[col], a[pivot] = a[pivot], a[col]
        det = gf.mul(det, a[col][col])
        p_inv = gf.inv(a[col][col])
        for r in range(col + 1, n):
            f = gf.mul(a[r][col], p_inv)
            if f:
                a[r] = [x ^ gf.mul(f, y) for x, y in zip(a[r], a[col])]
    return det


def build_gmax(k: int, n_max: int, field: FieldParams | GaloisField | None = None) -> GeneratorMatrix:
    """Systematic ``[I_k | Cauchy]`` generator of an (n_max, k) MDS code.

    Evaluation points are the first n_max field elements in numeric order:
    rows use ``0..k-1`` and parity columns use ``k..n_max-1``.
    """
    return _build_gmax(k, n_max, _as_field(field))


@functools.lru_cache(maxsize=64)
def _build_gmax(k: int, n_max: int, gf: GaloisField) -> GeneratorMatrix:
    # shared instances also share their cache of inverted submatrices
    if not 1 <= k <= n_max:
        raise CodeError(f"need 1 <= k <= n_max, got k={k}, n_max={n_max}")
    if gf.order < n_max:
        raise CodeError(
            f"|F| = {gf.order} < n_max = {n_max}: an (n_max, k) MDS code needs |F| >= n_max"
        )
    xs = range(k)
    ys = range(k, n_max)
    rows = []
    for r, x in enumerate(xs):
        ident = [1 if c == r else 0 for c in range(k)]
        parity = [gf.inv(x ^ y) for y in ys]
        rows.append(tuple(ident + parity))
    return GeneratorMatrix(k, n_max, tuple(rows), tuple(range(1, n_max + 1)), gf)


def derive_link_code(gmax: GeneratorMatrix, column_ids: Sequence[int]) -> GeneratorMatrix:
    """Puncture and permute ``gmax`` to the given 1-based column order."""
    ids = tuple(column_ids)
    if len(set(ids)) != len(ids):
        raise CodeError(f"duplicate column ids in {ids}")
    bad = [c for c in ids if c not in gmax._columns]
    if bad:
        raise CodeError(f"column ids {bad} out of range 1..{gmax.n}")
    if len(ids) < gmax.k:
        raise CodeError(f"need at least k={gmax.k} columns, got {len(ids)}")
    cols = [gmax.column(c) for c in ids]
    entries = tuple(tuple(col[r] for col in cols) for r in range(gmax.k))
    return GeneratorMatrix(gmax.k, len(ids), entries, ids, gmax.gf)


def encode_symbol(msg: DiagonalMessage | Sequence[int], column_id: int, gmax: GeneratorMatrix) -> CodedSymbol:
    values = msg.values if isinstance(msg, DiagonalMessage) else msg
    return CodedSymbol(column_id, gmax.gf.dot(values, gmax.column(column_id)))


def decode_message(
    received: Iterable[CodedSymbol], gmax: GeneratorMatrix, base_time: int = 0, verify: bool = True
) -> DiagonalMessage:
    """Recover the k message symbols from any k distinct-header symbols.

    The k smallest headers are used so the result does not depend on
    arrival order; with ``verify`` every received symbol is re-encoded and
    compared.
    """
    by_header: dict[int, int] = {}
    for sym in received:
        if sym.header == 0:
            continue
        prev = by_header.setdefault(sym.header, sym.value)
        if prev != sym.value:
            raise DecodeError(f"conflicting values for header {sym.header}")
    k = gmax.k
    if len(by_header) < k:
        raise DecodeError(f"insufficient: {len(by_header)} distinct headers, need {k}")
    chosen = tuple(sorted(by_header)[:k])
    inv = gmax.inverse_for(chosen)
    rhs = [by_header[h] for h in chosen]
    # message row vector m satisfies m * G_S = rhs, so m = rhs * G_S^{-1}
    gf = gmax.gf
    values = tuple(gf.dot(rhs, [inv[r][c] for r in range(k)]) for c in range(k))
    if verify:
        for h, v in by_header.items():
            if gf.dot(values, gmax.column(h)) != v:
                raise DecodeError(f"re-encoding mismatch on header {h}")
    return DiagonalMessage(values, base_time)


def is_mds(gen: GeneratorMatrix, samples: int | None = None, seed: int = 0) -> bool:
    """Check that every k-subset of columns is invertible.

    Exhaustive unless ``samples`` is given, in which case that many random
    subsets are tested.
    """
    ids = gen.column_ids
    if samples is None:
        subsets: Iterable = itertools.combinations(ids, gen.k)
    else:
        rng = random.Random(seed)
        subsets = (tuple(rng.sample(ids, gen.k)) for _ in range(samples))
    return all(determinant(gen.submatrix(s), gen.gf) != 0 for s in subsets)


def _as_field(field) -> GaloisField:
    if field is None:
        return get_field()
    if isinstance(field, GaloisField):
        return field
    return get_field(field.m, field.reduction_polynomial)
