import itertools
import random

import pytest

from streamrelay.field import FieldParams, get_field
from streamrelay.mds import (
    VOID,
    CodeError,
    CodedSymbol,
    DecodeError,
    build_gmax,
    decode_message,
    derive_link_code,
    determinant,
    encode_symbol,
    invert_matrix,
    is_mds,
)


def brute_rank(rows, gf):
    # row reduction written out independently of mds.invert_matrix
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = gf.inv(rows[rank][c])
        rows[rank] = [gf.mul(inv, x) for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][c]:
                f = rows[r][c]
                rows[r] = [x ^ gf.mul(f, y) for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def test_systematic_shape():
    g = build_gmax(4, 6)
    assert g.k == 4 and g.n == 6
    for c in range(1, 5):
        assert g.column(c) == tuple(1 if r == c - 1 else 0 for r in range(4))
    assert g.column_ids == (1, 2, 3, 4, 5, 6)


@pytest.mark.parametrize("k,n", [(1, 3), (2, 3), (2, 4), (3, 5), (4, 6), (5, 8)])
def test_every_k_columns_full_rank(k, n):
    g = build_gmax(k, n)
    assert is_mds(g)
    for cols in itertools.combinations(g.column_ids, k):
        assert brute_rank(g.submatrix(cols), g.gf) == k


def test_small_field_boundary():
    # |F| >= n_max suffices with the chosen evaluation points
    g = build_gmax(2, 4, FieldParams(2))
    assert is_mds(g)
    with pytest.raises(CodeError):
        build_gmax(2, 5, FieldParams(2))


def test_sampled_mds_check():
    g = build_gmax(8, 20)
    assert is_mds(g, samples=200, seed=3)


def test_decode_from_any_k_symbols():
    gf = get_field(8)
    g = build_gmax(3, 6, gf)
    rng = random.Random(1)
    for _ in range(20):
        msg = tuple(rng.randrange(256) for _ in range(3))
        code = [encode_symbol(msg, h, g) for h in g.column_ids]
        for subset in itertools.combinations(code, 3):
            assert decode_message(subset, g).values == msg


def test_decode_ignores_void_and_arrival_order():
    g = build_gmax(2, 3)
    msg = (17, 99)
    syms = [encode_symbol(msg, h, g) for h in (3, 2)]
    assert decode_message([VOID] + syms, g, base_time=5).values == msg
    assert decode_message(list(reversed(syms)), g).base_time == 0


def test_decode_errors():
    g = build_gmax(2, 3)
    with pytest.raises(DecodeError):
        decode_message([CodedSymbol(1, 4)], g)
    with pytest.raises(DecodeError):
        decode_message([CodedSymbol(1, 4), CodedSymbol(1, 5), CodedSymbol(2, 1)], g)
    good = [encode_symbol((1, 2), h, g) for h in (1, 2)]
    bad_parity = CodedSymbol(3, encode_symbol((1, 2), 3, g).value ^ 1)
    with pytest.raises(DecodeError):
        decode_message(good + [bad_parity], g)


def test_invert_and_determinant():
    gf = get_field(8)
    rng = random.Random(7)
    for _ in range(30):
        m = [[rng.randrange(256) for _ in range(4)] for _ in range(4)]
        if determinant(m, gf) == 0:
            assert brute_rank(m, gf) < 4
            continue
        inv = invert_matrix(m, gf)
        for r in range(4):
            for c in range(4):
                v = gf.dot(m[r], [inv[x][c] for x in range(4)])
                assert v == (1 if r == c else 0)
    with pytest.raises(DecodeError):
        invert_matrix([[1, 1], [1, 1]], gf)


def test_derive_link_code():
    g = build_gmax(2, 4)
    sub = derive_link_code(g, (2, 1, 3))
    assert sub.column_ids == (2, 1, 3)
    assert sub.column(3) == g.column(3)
    assert is_mds(sub)
    with pytest.raises(CodeError):
        derive_link_code(g, (1, 1, 2))
    with pytest.raises(CodeError):
        derive_link_code(g, (1, 5))
    with pytest.raises(CodeError):
        derive_link_code(g, (3,))


def test_bad_dimensions():
    with pytest.raises(CodeError):
        build_gmax(0, 3)
    with pytest.raises(CodeError):
        build_gmax(4, 3)
