from hypothesis import assume, given, settings
from hypothesis import strategies as st

from streamrelay.analysis import NetworkConfig, code_dimensions, loss_upper_bound
from streamrelay.channel import ErasurePattern, is_sliding_admissible
from streamrelay.field import get_field
from streamrelay.mds import CodedSymbol, build_gmax, decode_message, encode_symbol
from streamrelay.relay import wire_decode, wire_encode
from streamrelay.sim import run_chain


@st.composite
def code_and_message(draw):
    m = draw(st.sampled_from([4, 8, 10]))
    n = draw(st.integers(1, min(12, 1 << m)))
    k = draw(st.integers(1, n))
    msg = tuple(draw(st.lists(st.integers(0, (1 << m) - 1), min_size=k, max_size=k)))
    keep = draw(st.permutations(range(1, n + 1)))[:k]
    return m, n, k, msg, keep


@given(code_and_message())
@settings(max_examples=150, deadline=None)
def test_any_k_symbols_decode(case):
    m, n, k, msg, keep = case
    g = build_gmax(k, n, get_field(m))
    syms = [encode_symbol(msg, h, g) for h in keep]
    assert decode_message(syms, g).values == msg


@st.composite
def chain_within_budget(draw):
    L = draw(st.integers(0, 3))
    budgets = tuple(draw(st.lists(st.integers(0, 2), min_size=L + 1, max_size=L + 1)))
    T = sum(budgets) + draw(st.integers(0, 3))
    cfg = NetworkConfig(L, T, budgets)
    k = code_dimensions(cfg).k
    H = T + k + sum(budgets) + 4
    pats = []
    for j, n in enumerate(budgets):
        slots = draw(st.lists(st.integers(0, H - 1), max_size=n, unique=True))
        pats.append(ErasurePattern.at(H, slots, j + 1))
    seed = draw(st.integers(0, 1000))
    return cfg, pats, seed


@given(chain_within_budget())
@settings(max_examples=200, deadline=None)
def test_symbolwise_df_meets_deadline_within_budget(case):
    cfg, pats, seed = case
    rep = run_chain(cfg, "sdf", pats, seed=seed)
    assert rep.lost == 0
    assert rep.details["fallbacks"] == 0
    # every per-diagonal column selection is distinct and of full length
    dims = code_dimensions(cfg)
    for j, codes in enumerate(rep.details["codes"]):
        for _, headers in codes:
            assert len(headers) == dims.n[j + 1] == len(set(headers))


@st.composite
def sliding_case(draw):
    L = draw(st.integers(0, 2))
    budgets = tuple(draw(st.lists(st.integers(1, 2), min_size=L + 1, max_size=L + 1)))
    T = sum(budgets) + draw(st.integers(0, 2))
    H = 3 * (T + 1)
    pats = []
    for j, n in enumerate(budgets):
        bits = draw(st.lists(st.integers(0, 1), min_size=H, max_size=H))
        pats.append(ErasurePattern(j + 1, tuple(bits)))
    return NetworkConfig(L, T, budgets), pats


@given(sliding_case())
@settings(max_examples=200, deadline=None)
def test_symbolwise_df_under_sliding_windows(case):
    cfg, pats = case
    assume(all(is_sliding_admissible(p, cfg.T, n) for p, n in zip(pats, cfg.budgets)))
    assert run_chain(cfg, "sdf", pats).lost == 0


@given(st.floats(0, 0.3), st.floats(0, 0.3))
def test_bound_monotone_in_alpha(a, b):
    lo, hi = sorted((a, b))
    assert loss_upper_bound(lo, 9, (2, 2, 2)) <= loss_upper_bound(hi, 9, (2, 2, 2))


@given(st.lists(st.tuples(st.integers(0, 65535), st.integers(0, 255)), max_size=20))
def test_wire_roundtrip(pairs):
    syms = tuple(CodedSymbol(h, v) for h, v in pairs)
    assert wire_decode(wire_encode(syms)) == syms
