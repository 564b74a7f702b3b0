import random

import numpy as np
import pytest

from streamrelay.analysis import NetworkConfig
from streamrelay.channel import ErasurePattern, sample_iid
from streamrelay.diagonal import BlockCode, RateZeroError
from streamrelay.sim import (
    CSV_HEADER,
    SimulationError,
    _shard_losses,
    frame_losses_from_bits,
    iter_patterns,
    make_scheme,
    run_chain,
    run_monte_carlo,
    verify_exhaustive,
    verify_sliding,
)


def clear(config, horizon):
    return [ErasurePattern.clear(horizon, j + 1) for j in range(config.links)]


@pytest.mark.parametrize("scheme,config", [
    ("sdf", NetworkConfig(2, 9, (2, 2, 2))),
    ("mdf", NetworkConfig(2, 6, (1, 1, 1))),
    ("if", NetworkConfig(2, 9, (1, 1, 1))),
    ("sdf", NetworkConfig(0, 3, (2,))),
])
def test_clear_channel_loses_nothing(scheme, config):
    rep = run_chain(config, scheme, clear(config, 30))
    assert rep.lost == 0 and rep.frames == 30 - config.T
    assert rep.loss_ratio == 0.0


def test_run_chain_input_checks():
    cfg = NetworkConfig(1, 3, (1, 1))
    with pytest.raises(SimulationError):
        run_chain(cfg, "sdf", clear(cfg, 10)[:1])
    with pytest.raises(SimulationError):
        run_chain(cfg, "sdf", [ErasurePattern.clear(10, 1), ErasurePattern.clear(11, 2)])
    with pytest.raises(SimulationError):
        make_scheme("xyz", cfg)
    with pytest.raises(RateZeroError):
        make_scheme("sdf", NetworkConfig(1, 1, (1, 1)))
    with pytest.raises(SimulationError):
        make_scheme("mdf", cfg, mdf_code=BlockCode(3, 2, 2))  # 2+2 > T=3
    with pytest.raises(SimulationError):
        make_scheme("if", cfg, if_code=BlockCode(10, 7, 9))


def test_exhaustive_single_relay_counts():
    rep = verify_exhaustive(NetworkConfig(1, 3, (1, 1)), horizon=10)
    assert rep.passed and rep.combinations == 11**2
    assert rep.frames == 121 * 7


def test_exhaustive_two_relays():
    rep = verify_exhaustive(NetworkConfig(2, 4, (1, 1, 1)), horizon=10)
    assert rep.passed and rep.combinations == 11**3
    assert rep.details["fallbacks"] == 0
    assert rep.details["decode_time_violations"] == 0


def test_exhaustive_zero_budgets():
    rep = verify_exhaustive(NetworkConfig(2, 2, (0, 0, 0)))
    assert rep.passed and rep.combinations == 1


def test_exhaustive_baselines_pass_within_their_budgets():
    assert verify_exhaustive(NetworkConfig(2, 6, (1, 1, 1)), horizon=10, scheme="mdf").passed
    assert verify_exhaustive(NetworkConfig(1, 4, (1, 1)), horizon=10, scheme="if").passed


def test_exhaustive_reports_first_counterexample():
    cfg = NetworkConfig(1, 3, (1, 1))
    weak = make_scheme("if", cfg, if_code=BlockCode(4, 3, 3))  # only 1 erasure end to end
    rep = verify_exhaustive(cfg, horizon=8, scheme=weak)
    assert not rep.passed
    ce = rep.counterexample
    assert [p.count for p in ce] == [1, 1]
    assert run_chain(cfg, weak, ce).lost > 0
    # enumeration order: nothing earlier in the cross product fails
    for pats in iter_patterns(cfg, 8):
        if pats == ce:
            break
        assert run_chain(cfg, weak, pats).lost == 0


def test_tree_walk_agrees_with_direct_replay():
    cfg = NetworkConfig(1, 4, (2, 1))
    H = 9
    rep = verify_exhaustive(cfg, horizon=H)
    assert rep.passed
    rng = random.Random(4)
    combos = list(iter_patterns(cfg, H))
    for pats in rng.sample(combos, 60):
        assert run_chain(cfg, "sdf", pats).lost == 0


def test_exhaustive_guard():
    with pytest.raises(SimulationError, match="smaller horizon"):
        verify_exhaustive(NetworkConfig(2, 9, (2, 2, 2)), limit=1000)


def test_sliding_vacuous_and_excluded():
    cfg = NetworkConfig(1, 3, (1, 1))
    rep = verify_sliding(cfg, samples=0)
    assert rep.passed and rep.combinations == 0
    H = 14
    bad = (ErasurePattern.at(H, [3, 4], 1), ErasurePattern.clear(H, 2))
    good = (ErasurePattern.at(H, [3, 8], 1), ErasurePattern.at(H, [0, 5, 10], 2))
    rep = verify_sliding(cfg, horizon=H, samples=5, extra=[bad, good])
    assert rep.excluded == 1 and rep.combinations == 6 and rep.passed


def test_sliding_samples_are_admissible_and_pass():
    rep = verify_sliding(NetworkConfig(1, 3, (1, 1)), samples=300, seed=2)
    assert rep.passed and rep.combinations == 300


def test_beyond_budget_shows_up_as_loss():
    cfg = NetworkConfig(1, 3, (1, 1))
    pats = [ErasurePattern.at(12, [4, 5], 1), ErasurePattern.clear(12, 2)]
    rep = run_chain(cfg, "sdf", pats)
    assert rep.lost > 0


@pytest.mark.parametrize("scheme,config,alpha", [
    ("sdf", NetworkConfig(2, 9, (2, 2, 2)), 0.15),
    ("sdf", NetworkConfig(1, 4, (1, 2)), 0.2),
    ("sdf", NetworkConfig(0, 3, (1,)), 0.25),
    ("mdf", NetworkConfig(2, 6, (1, 1, 1)), 0.15),
    ("if", NetworkConfig(2, 9, (1, 1, 1)), 0.1),
])
def test_fast_path_equals_full_replay(scheme, config, alpha):
    sch = make_scheme(scheme, config)
    H = 300
    for seed in range(3):
        pats = sample_iid([alpha] * config.links, H, seed=seed)
        full = run_chain(config, sch, pats, score_from=config.T)
        fast = frame_losses_from_bits(config, sch, [np.array(p.bits) for p in pats],
                                      config.T, H - 2 * config.T)
        assert full.details["lost_frames"] == [config.T + int(i) for i in np.nonzero(fast)[0]]


def test_monte_carlo_zero_erasure():
    for scheme, cfg in (("sdf", NetworkConfig(2, 9, (2, 2, 2))), ("mdf", NetworkConfig(2, 6, (1, 1, 1)))):
        rep = run_monte_carlo(cfg, scheme, 0.0, 5000)
        assert rep.lost == 0 and rep.ci95 == 0.0


def test_monte_carlo_deterministic_and_sharded():
    cfg = NetworkConfig(2, 9, (2, 2, 2))
    a = run_monte_carlo(cfg, "sdf", 0.05, 30_000, seed=9, shard_frames=10_000)
    b = run_monte_carlo(cfg, "sdf", 0.05, 30_000, seed=9, shard_frames=10_000)
    assert a.csv_row() == b.csv_row()
    assert a.details["shards"] == 3
    sch = make_scheme("sdf", cfg)
    parts = [_shard_losses(cfg, sch, (0.05,) * 3, 10_000, 9, s, None)[0] for s in (2, 0, 1)]
    assert sum(parts) == a.lost
    c = run_monte_carlo(cfg, "sdf", 0.05, 30_000, seed=10, shard_frames=10_000)
    assert c.lost != a.lost or c.erasures != a.erasures


def test_monte_carlo_report_fields():
    cfg = NetworkConfig(2, 9, (2, 2, 2))
    rep = run_monte_carlo(cfg, "sdf", [0.02, 0.02, 0.02], 20_000, seed=1)
    row = rep.csv_row()
    assert len(row) == len(CSV_HEADER)
    assert row[0] == "sdf" and row[3] == "2;2;2" and row[4] == "0.02"
    assert rep.bound is not None and rep.loss_ratio == rep.lost / rep.frames
    assert run_monte_carlo(cfg, "if", 0.02, 1000).bound is None
    with pytest.raises(SimulationError):
        run_monte_carlo(cfg, "sdf", 0.1, 0)
    with pytest.raises(SimulationError):
        run_monte_carlo(cfg, "sdf", (0.1, 0.2), 10)


def test_monte_carlo_tracks_bound_at_high_loss():
    cfg = NetworkConfig(1, 4, (1, 1))
    rep = run_monte_carlo(cfg, "sdf", 0.05, 50_000, seed=2)
    assert rep.loss_ratio <= rep.bound + 3 * rep.ci95
