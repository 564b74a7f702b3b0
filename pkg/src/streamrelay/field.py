"""Arithmetic in GF(2^m).

Elements are plain ints in ``[0, 2^m)``; bit ``i`` is the coefficient of
``x^i``.  For ``m <= 8`` multiplication goes through a flat product table
built from log/antilog tables; wider fields use carry-less multiply and
reduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

# One irreducible (primitive) polynomial per degree, x^m term included.
DEFAULT_POLYNOMIALS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}

MAX_BITS = 16


class FieldError(ValueError):
    """Raised for invalid field parameters or domain errors (inverse of 0)."""


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, mod: int) -> int:
    deg = mod.bit_length() - 1
    while a.bit_length() - 1 >= deg:
        a ^= mod << (a.bit_length() - 1 - deg)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for cand in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, cand) == 0:
                return False
    return True


@dataclass(frozen=True)
class FieldParams:
    """Exponent ``m`` and reduction polynomial (bit mask, x^m bit set)."""

    m: int = 8
    reduction_polynomial: int = 0

    def __post_init__(self):
        if not 1 <= self.m <= MAX_BITS:
            raise FieldError(f"field exponent must be in 1..{MAX_BITS}, got {self.m}")
        if self.reduction_polynomial == 0:
            object.__setattr__(self, "reduction_polynomial", DEFAULT_POLYNOMIALS[self.m])
        poly = self.reduction_polynomial
        if poly.bit_length() - 1 != self.m:
            raise FieldError(f"polynomial {poly:#x} does not have degree {self.m}")
        if not _irreducible_cached(poly):
            raise FieldError(f"polynomial {poly:#x} is reducible")

    @property
    def order(self) -> int:
        return 1 << self.m

    @property
    def symbol_bytes(self) -> int:
        return (self.m + 7) // 8


@lru_cache(maxsize=None)
def _irreducible_cached(poly: int) -> bool:
    return is_irreducible(poly)


class GaloisField:
    """GF(2^m) with precomputed tables.  Immutable once built."""

    def __init__(self, params: FieldParams | None = None):
        self.params = params or FieldParams()
        self.m = self.params.m
        self.order = 1 << self.m
        self.poly = self.params.reduction_polynomial
        self.generator = self._find_generator()
        self.exp, self.log = self._build_log_tables()
        if self.m <= 8:
            self._mul_table = self._build_mul_table()
        else:
            self._mul_table = None

    def _find_generator(self) -> int:
        # The multiplicative group is cyclic of order q-1; g generates it iff
        # g^((q-1)/p) != 1 for every prime p dividing q-1.
        q1 = self.order - 1
        if q1 == 1:
            return 1
        primes = _prime_factors(q1)
        for g in range(2, self.order):
            if all(self._slow_pow(g, q1 // p) != 1 for p in primes):
                return g
        raise FieldError("no generator found; polynomial is not irreducible")

    def _slow_mul(self, a: int, b: int) -> int:
        return poly_mod(clmul(a, b), self.poly)

    def _slow_pow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._slow_mul(result, a)
            a = self._slow_mul(a, a)
            e >>= 1
        return result

    def _build_log_tables(self):
        q1 = self.order - 1
        exp = [0] * (2 * q1 + 1)
        log = [0] * self.order
        x = 1
        for i in range(q1):
            exp[i] = x
            log[x] = i
            x = self._slow_mul(x, self.generator)
        for i in range(q1, 2 * q1 + 1):
            exp[i] = exp[i - q1]
        return exp, log

    def _build_mul_table(self) -> list[int]:
        q = self.order
        exp, log = self.exp, self.log
        table = [0] * (q * q)
        for a in range(1, q):
            la = log[a]
            row = a * q
            for b in range(1, q):
                table[row + b] = exp[la + log[b]]
        return table

    def check(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise FieldError(f"{a} is not an element of GF(2^{self.m})")
        return a

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        # operands are trusted here (hot path); validate with check()
        if self._mul_table is not None:
            return self._mul_table[a * self.order + b]
        if a == 0 or b == 0:
            return 0
        return poly_mod(clmul(a, b), self.poly)

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        if self._mul_table is not None:
            return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        """Square-and-multiply; independent of the log tables."""
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def dot(self, xs, ys) -> int:
        acc = 0
        mul = self.mul
        for x, y in zip(xs, ys):
            if x and y:
                acc ^= mul(x, y)
        return acc

    def __repr__(self) -> str:
        return f"GaloisField(m={self.m}, poly={self.poly:#x})"


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def get_field(m: int = 8, reduction_polynomial: int = 0) -> GaloisField:
    """Shared, cached field instance."""
    return GaloisField(FieldParams(m, reduction_polynomial))


def ff_add(a: int, b: int) -> int:
    return a ^ b


def ff_mul(a: int, b: int, field: GaloisField | None = None) -> int:
    return (field or get_field()).mul(a, b)


def ff_inv(a: int, field: GaloisField | None = None) -> int:
    return (field or get_field()).inv(a)
