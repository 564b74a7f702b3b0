"""Drive source -> relays -> destination chains against erasure patterns.

``run_chain`` is the slot-by-slot replay of one pattern set.  Exhaustive
verification walks the cross product of per-link budgeted patterns as a
tree: relay j's output only depends on the patterns of links
``1..j``, so each relay prefix is simulated once and shared by all of its
extensions.  Monte Carlo runs use the fact that every diagonal evolves
independently of the others; each distinct per-diagonal erasure
footprint is pushed through the same relay state machines once and cached.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .analysis import NetworkConfig, code_dimensions, loss_upper_bound, mdf_codes
from .channel import (
    ErasurePattern,
    apply_erasure,
    count_budgeted,
    enumerate_budgeted,
    is_sliding_admissible,
    link_generator,
    sample_bits,
)
from .diagonal import BlockCode, Packet, SourceEncoder, SourceFrame, p2p_code_params
from .field import get_field
from .mds import GeneratorMatrix, build_gmax
from .relay import Destination, DiagonalState, ForwardRelay, MdfRelay, SdfRelay

SCHEMES = ("sdf", "mdf", "if")
EXHAUSTIVE_LIMIT = 10**7
MC_SHARD_FRAMES = 250_000


class SimulationError(ValueError):
    """Configuration and scheme do not fit together, or a guard was exceeded."""


@dataclass(frozen=True)
class Scheme:
    """A coding scheme for a chain: SDF, MDF with per-hop codes, or IF with one code."""

    name: str
    hop_codes: tuple[BlockCode, ...] = ()
    p2p_code: BlockCode | None = None

    @property
    def label(self) -> str:
        if self.name == "mdf":
            return "mdf" + "".join(str(c) for c in self.hop_codes)
        if self.name == "if":
            return f"if{self.p2p_code}"
        return self.name


def make_scheme(name: str, config: NetworkConfig, mdf_code: BlockCode | None = None,
                if_code: BlockCode | None = None) -> Scheme:
    name = name.lower()
    if name == "sdf":
        code_dimensions(config)
        return Scheme("sdf")
    if name == "mdf":
        codes = (mdf_code,) * config.links if mdf_code else mdf_codes(config.T, config.budgets)
        if sum(c.delay for c in codes) > config.T:
            raise SimulationError(f"hop delays {[c.delay for c in codes]} exceed T={config.T}")
        if any(c.delay < c.n - 1 for c in codes):
            raise SimulationError("each hop code must be decodable within its own delay")
        return Scheme("mdf", hop_codes=tuple(codes))
    if name == "if":
        code = if_code or p2p_code_params(config.T, sum(config.budgets))
        if code.delay > config.T or code.delay < code.n - 1:
            raise SimulationError(f"IF code {code} does not fit delay T={config.T}")
        return Scheme("if", p2p_code=code)
    raise SimulationError(f"unknown scheme {name!r}; choose from {SCHEMES}")


@dataclass
class SimReport:
    scheme: str
    config: NetworkConfig
    frames: int
    lost: int
    erasures: tuple[int, ...] = ()
    bound: float | None = None
    ci95: float | None = None
    seed: int = 0
    alpha: tuple[float, ...] | None = None
    counterexample: tuple[ErasurePattern, ...] | None = None
    combinations: int = 0
    excluded: int = 0
    details: dict = field(default_factory=dict)

    @property
    def loss_ratio(self) -> float:
        return self.lost / self.frames if self.frames else 0.0

    @property
    def passed(self) -> bool:
        return self.lost == 0 and self.counterexample is None

    def csv_row(self) -> list[str]:
        alpha = "" if self.alpha is None else ";".join(repr(a) for a in _dedupe(self.alpha))
        return [
            self.scheme,
            str(self.config.L),
            str(self.config.T),
            ";".join(str(n) for n in self.config.budgets),
            alpha,
            str(self.frames),
            str(self.lost),
            f"{self.loss_ratio:.6e}",
            "" if self.ci95 is None else f"{self.ci95:.6e}",
            "" if self.bound is None else f"{self.bound:.6e}",
            str(self.seed),
        ]


CSV_HEADER = ["scheme", "L", "T", "budgets", "alpha", "frames", "losses", "loss_ratio", "ci95", "bound", "seed"]


def _dedupe(alphas: tuple[float, ...]) -> tuple[float, ...]:
    return alphas[:1] if len(set(alphas)) == 1 else alphas


# --------------------------------------------------------------------------
# chain construction


class Chain:
    """The nodes of one chain instance plus the bookkeeping to score frames."""

    def __init__(self, config: NetworkConfig, scheme: Scheme, seed: int = 0):
        self.config = config
        self.scheme = scheme
        gf = get_field(config.field.m, config.field.reduction_polynomial)
        L = config.L
        if scheme.name == "sdf":
            dims = code_dimensions(config)
            self.k = dims.k
            self.gmax = build_gmax(dims.k, dims.n_max, gf)
            self.start = -(self.k - 1)
            self.source = SourceEncoder(self.gmax, n=dims.n[0], start_time=self.start)
            self.relays = [
                SdfRelay(j, self.gmax, dims.n[j - 1], dims.n[j], config.offset(j - 1),
                         config.offset(j), self.start)
                for j in range(1, L + 1)
            ]
            self.dest = Destination(self.gmax, dims.n[L], config.offset(L), self.start)
            self.delay = config.T
            self.dest_shift = 0
        elif scheme.name == "mdf":
            codes = scheme.hop_codes
            self.k = codes[0].k
            if any(c.k != self.k for c in codes):
                raise SimulationError("message-wise DF hops must share k")
            gms = [build_gmax(c.k, c.n, gf) for c in codes]
            self.start = -(self.k - 1)
            self.source = SourceEncoder(gms[0], start_time=self.start)
            shifts = list(itertools.accumulate([0] + [c.delay for c in codes]))
            self.relays = [
                MdfRelay(j, codes[j - 1], gms[j - 1], gms[j], shifts[j - 1], self.start)
                for j in range(1, L + 1)
            ]
            self.dest = Destination(gms[L], codes[L].n, 0, self.start)
            self.delay = shifts[-1]
            self.dest_shift = shifts[L]
        elif scheme.name == "if":
            code = scheme.p2p_code
            self.k = code.k
            gm = build_gmax(code.k, code.n, gf)
            self.start = -(self.k - 1)
            self.source = SourceEncoder(gm, start_time=self.start)
            self.relays = [ForwardRelay(j, code.n, self.start) for j in range(1, L + 1)]
            self.dest = Destination(gm, code.n, 0, self.start)
            self.delay = code.delay
            self.dest_shift = 0
        else:
            raise SimulationError(f"unknown scheme {scheme.name!r}")
        rng = random.Random(seed)
        self._rng = rng
        self._order = gf.order
        self.frames: dict[int, tuple[int, ...]] = {}

    def frame(self, t: int) -> SourceFrame:
        if t < 0:
            return SourceFrame(t, (0,) * self.k)
        vals = self.frames.get(t)
        if vals is None:
            vals = self.frames[t] = tuple(self._rng.randrange(self._order) for _ in range(self.k))
        return SourceFrame(t, vals)

    def recovered_ok(self, i: int) -> bool:
        """Frame ``i`` reached the destination intact by its deadline."""
        if self.scheme.name == "mdf":
            if any(i in r.lost for r in self.relays):
                return False
        f = i + self.dest_shift
        rec = self.dest.recovered.get(f)
        if rec is None:
            return False
        t, vals = rec
        return t <= f + (self.delay - self.dest_shift) and vals == self.frame(i).values


def run_chain(config: NetworkConfig, scheme: Scheme | str, patterns: Sequence[ErasurePattern],
              seed: int = 0, record: bool = False, score_from: int = 0) -> SimReport:
    """Replay one set of per-link erasure patterns slot by slot.

    Frames ``score_from .. H - T - 1`` are scored: each must be decoded, with
    the correct values, no later than its deadline.
    """
    if isinstance(scheme, str):
        scheme = make_scheme(scheme, config)
    if len(patterns) != config.links:
        raise SimulationError(f"need {config.links} patterns, got {len(patterns)}")
    horizon = patterns[0].horizon
    if any(p.horizon != horizon for p in patterns):
        raise SimulationError("all patterns must share one horizon")
    chain = Chain(config, scheme, seed)
    bits = [p.bits for p in patterns]
    trace: list[list[Packet | None]] | None = [] if record else None
    for t in range(chain.start, horizon):
        x = chain.source.encode_slot(chain.frame(t))
        row = [x] if record else None
        for j, relay in enumerate(chain.relays):
            y = apply_erasure(x, t >= 0 and bits[j][t])
            x = relay.step(y)
            if record:
                row.append(y)
                row.append(x)
        y = apply_erasure(x, t >= 0 and bits[-1][t])
        chain.dest.step(y)
        if record:
            row.append(y)
            trace.append(row)
    last = horizon - config.T - 1
    scored = range(score_from, last + 1)
    lost_frames = [i for i in scored if not chain.recovered_ok(i)]
    details = {
        "lost_frames": lost_frames,
        "fallbacks": sum(getattr(r, "fallbacks", 0) for r in chain.relays),
    }
    if scheme.name == "sdf":
        details["codes"] = [r.codes for r in chain.relays]
        details["decode_times"] = [r.decode_times for r in chain.relays]
        details["gmax"] = chain.gmax
    if record:
        details["trace"] = trace
        details["chain"] = chain
    return SimReport(
        scheme=scheme.name,
        config=config,
        frames=len(scored),
        lost=len(lost_frames),
        erasures=tuple(p.count for p in patterns),
        details=details,
    )


# --------------------------------------------------------------------------
# exhaustive verification


def default_horizon(config: NetworkConfig) -> int:
    dims = code_dimensions(config)
    return config.T + dims.k + sum(config.budgets) + 2


def _run_node(node, inputs: Sequence[Packet | None]) -> list[Packet]:
    return [node.step(x) for x in inputs]


def _erase(stream: Sequence[Packet], bits: Sequence[int], start: int) -> list[Packet | None]:
    # slots before time 0 are never erased
    return [None if t >= 0 and bits[t] else x for t, x in zip(range(start, start + len(stream)), stream)]


def verify_exhaustive(config: NetworkConfig, horizon: int | None = None, scheme: Scheme | str = "sdf",
                      seed: int = 0, limit: int = EXHAUSTIVE_LIMIT,
                      collect_codes: bool = True) -> SimReport:
    """Check delay-T recovery for every combination of per-link patterns with
    at most ``N_j`` erasures on link ``j``.

    Returns a passing report, or one carrying the first failing pattern set
    (in enumeration order) as ``counterexample``.
    """
    if isinstance(scheme, str):
        scheme = make_scheme(scheme, config)
    H = horizon if horizon is not None else default_horizon(config)
    counts = [count_budgeted(H, n) for n in config.budgets]
    total = math.prod(counts)
    if total > limit:
        raise SimulationError(
            f"{total} pattern combinations exceed the guard of {limit}; use a smaller horizon"
        )
    per_link = [list(enumerate_budgeted(H, n, link=j + 1)) for j, n in enumerate(config.budgets)]
    template = Chain(config, scheme, seed)
    start = template.start
    source_stream = [template.source.encode_slot(template.frame(t)) for t in range(start, H)]
    last = H - config.T - 1

    codes: set[tuple[int, tuple[int, ...]]] = set()
    fallbacks = 0
    decode_violations = 0
    dims = code_dimensions(config) if scheme.name == "sdf" else None
    state = {"checked": 0, "failure": None}

    def descend(j: int, stream: list[Packet], prefix: tuple, lost: frozenset):
        nonlocal fallbacks, decode_violations
        if state["failure"] is not None:
            return
        if j == config.L:
            for pat in per_link[j]:
                chain = Chain(config, scheme, seed)
                chain.frames = template.frames
                _run_node(chain.dest, _erase(stream, pat.bits, start))
                state["checked"] += 1
                for i in range(0, last + 1):
                    if i in lost or not _dest_ok(chain, i):
                        state["failure"] = prefix + (pat,)
                        return
            return
        for pat in per_link[j]:
            chain = Chain(config, scheme, seed)
            relay = chain.relays[j]
            out = _run_node(relay, _erase(stream, pat.bits, start))
            new_lost = lost
            if scheme.name == "sdf":
                fallbacks += relay.fallbacks
                if collect_codes:
                    codes.update((j + 1, c) for _, c in relay.codes)
                expected = config.offset(j + 1) + dims.k - 1
                decode_violations += sum(
                    1 for b, dt in relay.decode_times.items() if dt != b + expected
                )
            elif scheme.name == "mdf":
                new_lost = lost | frozenset(i for i in relay.lost if i >= 0)
            descend(j + 1, out, prefix + (pat,), new_lost)
            if state["failure"] is not None:
                return

    descend(0, source_stream, (), frozenset())
    failure = state["failure"]
    details = {"fallbacks": fallbacks, "decode_time_violations": decode_violations}
    if scheme.name == "sdf":
        details["gmax"] = template.gmax
        details["codes"] = codes
    if failure is not None:
        replay = run_chain(config, scheme, failure, seed=seed)
        details["replay"] = replay
        lost = max(replay.lost, 1)
    else:
        lost = 0
    return SimReport(
        scheme=scheme.name,
        config=config,
        frames=(last + 1) * state["checked"],
        lost=lost,
        seed=seed,
        counterexample=failure,
        combinations=state["checked"],
        details=details,
    )


def _dest_ok(chain: Chain, i: int) -> bool:
    f = i + chain.dest_shift
    rec = chain.dest.recovered.get(f)
    if rec is None:
        return False
    t, vals = rec
    return t <= f + (chain.delay - chain.dest_shift) and vals == chain.frame(i).values


def verify_sliding(config: NetworkConfig, horizon: int | None = None, samples: int = 10_000,
                   seed: int = 0, extra: Sequence[Sequence[ErasurePattern]] = (),
                   scheme: Scheme | str = "sdf", max_attempts: int | None = None) -> SimReport:
    """Recovery under sampled sliding-window-admissible patterns.

    Candidates are drawn i.i.d. per slot and kept only if every window of
    ``T + 1`` slots on link ``j`` holds at most ``N_j`` erasures (rejection
    sampling).  ``extra`` pattern sets are checked too; inadmissible ones are
    excluded from the verdict and counted in ``excluded``.
    """
    if isinstance(scheme, str):
        scheme = make_scheme(scheme, config)
    dims = code_dimensions(config)
    H = horizon if horizon is not None else max(default_horizon(config), 3 * (config.T + 1) + dims.k)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x5117])))
    window = config.T + 1
    max_attempts = max_attempts or 1000 * max(samples, 1)

    def admissible(pats: Sequence[ErasurePattern]) -> bool:
        return all(is_sliding_admissible(p, config.T, n) for p, n in zip(pats, config.budgets))

    candidates: list[tuple[ErasurePattern, ...]] = []
    excluded = 0
    for pats in extra:
        if admissible(pats):
            candidates.append(tuple(pats))
        else:
            excluded += 1
    # Links are independent, so conditioning each link on its own window
    # constraint is the same as rejecting whole pattern sets, only cheaper.
    per_link: list[list[tuple[int, ...]]] = []
    rejected = 0
    for j, n in enumerate(config.budgets):
        p = min(0.5, n / window)
        kept: list[tuple[int, ...]] = []
        attempts = 0
        while len(kept) < samples:
            if attempts >= max_attempts:
                raise SimulationError(
                    f"link {j + 1}: only {len(kept)} admissible samples after {attempts} draws"
                )
            batch = min(max(4 * (samples - len(kept)), 64), max_attempts - attempts)
            draws = (rng.random((batch, H)) < p).astype(np.uint8)
            attempts += batch
            for row in draws:
                if is_sliding_admissible(row.tolist(), config.T, n):
                    kept.append(tuple(row.tolist()))
                    if len(kept) == samples:
                        break
                else:
                    rejected += 1
        per_link.append(kept)
    for i in range(samples):
        candidates.append(tuple(ErasurePattern(j + 1, per_link[j][i]) for j in range(config.links)))

    failure = None
    frames = lost = 0
    fallbacks = 0
    for pats in candidates:
        rep = run_chain(config, scheme, pats, seed=seed)
        frames += rep.frames
        fallbacks += rep.details["fallbacks"]
        if rep.lost:
            lost += rep.lost
            if failure is None:
                failure = pats
    return SimReport(
        scheme=scheme.name,
        config=config,
        frames=frames,
        lost=lost,
        seed=seed,
        counterexample=failure,
        combinations=len(candidates),
        excluded=excluded,
        details={"rejected": rejected, "fallbacks": fallbacks, "horizon": H},
    )


# --------------------------------------------------------------------------
# Monte Carlo


def _p2p_known(bits: tuple[int, ...], code: BlockCode) -> tuple[bool, ...]:
    """Which message positions of one diagonal are known by their deadline.

    Position ``v`` is sent uncoded at local slot ``v``; the whole diagonal is
    known from the slot at which its ``k``-th unerased symbol arrives.
    """
    k = code.k
    seen = 0
    decoded_at = None
    for u, b in enumerate(bits):
        if not b:
            seen += 1
            if seen == k:
                decoded_at = u
                break
    return tuple(
        (not bits[v]) or (decoded_at is not None and decoded_at <= v + code.delay)
        for v in range(k)
    )


def sdf_diagonal_outcome(config: NetworkConfig, link_bits: Sequence[Sequence[int]],
                         gmax: GeneratorMatrix | None = None) -> tuple[tuple[bool, ...], int]:
    """Push one diagonal through the symbol-wise DF chain.

    ``link_bits[j]`` are the erasure bits of link ``j + 1`` at the diagonal's
    local slots ``0..n-1`` of that link.  Returns which source positions the
    destination knows (all arrive by the deadline) and the relay fallback count.
    """
    dims = code_dimensions(config)
    k = dims.k
    if gmax is None:
        gmax = build_gmax(k, dims.n_max, get_field(config.field.m, config.field.reduction_polynomial))
    rng = random.Random(0)
    msg = tuple(rng.randrange(gmax.gf.order) for _ in range(k))
    states = [DiagonalState(0) for _ in range(config.L)]
    sink = DiagonalState(0)
    offsets = [config.offset(j) for j in range(config.L + 1)]
    for tau in range(config.T + 1):
        for j in range(config.L + 1):
            u = tau - offsets[j]
            if not 0 <= u < dims.n[j]:
                continue
            if j == 0:
                h = u + 1
                sym_h, sym_v = h, gmax.gf.dot(msg, gmax.column(h))
            else:
                sym = states[j - 1].emit(u, gmax, tau)
                sym_h, sym_v = sym.header, sym.value
            if link_bits[j][u] or sym_h == 0:
                continue
            (states[j] if j < config.L else sink).store(sym_h, sym_v)
    decoded = len(sink.received) >= k
    if decoded:
        sink.try_decode(gmax, config.T)
        if sink.decoded.values != msg:
            raise AssertionError("destination decoded a wrong diagonal")
    known = tuple(decoded or (v + 1) in sink.received for v in range(k))
    return known, sum(s.fallbacks for s in states)


def _windows(bits: np.ndarray, first: int, count: int, width: int, start: int) -> np.ndarray:
    """Rows ``d = 0..count-1`` hold ``bits[first + d + start + u]``, ``u < width``."""
    idx = first + start + np.arange(count)[:, None] + np.arange(width)[None, :]
    return bits[idx]


def _row_keys(mat: np.ndarray) -> np.ndarray:
    if mat.shape[1] <= 62:
        weights = (np.int64(1) << np.arange(mat.shape[1], dtype=np.int64))
        return mat.astype(np.int64) @ weights
    packed = np.packbits(mat, axis=1)
    return np.array([r.tobytes() for r in packed], dtype=object)


def _known_matrix(rows: np.ndarray, outcome) -> np.ndarray:
    """Map each row of erasure bits to its known-position flags, with caching."""
    count = rows.shape[0]
    keys = _row_keys(rows)
    uniq, first_idx, inverse = np.unique(keys, return_index=True, return_inverse=True)
    table = np.array([outcome(tuple(int(b) for b in rows[i])) for i in first_idx], dtype=bool)
    return table[inverse.reshape(count)]


def _frame_losses(known: np.ndarray, first_diag: int, first_frame: int, frames: int, k: int) -> np.ndarray:
    """Frame ``f`` is lost if some ``v`` has ``known[f - v][v]`` false."""
    lost = np.zeros(frames, dtype=bool)
    for v in range(k):
        rows = first_frame - v - first_diag + np.arange(frames)
        lost |= ~known[rows, v]
    return lost


def _shard_losses(config: NetworkConfig, scheme: Scheme, alphas: Sequence[float], frames: int,
                  seed: int, shard: int, gmax: GeneratorMatrix | None) -> tuple[int, list[int]]:
    """Lost frames among ``frames`` consecutive frames of one independent chain.

    Frames ``T .. T + frames - 1`` are scored so the start-up transient is skipped.
    """
    T = config.T
    first_frame = T
    horizon = first_frame + frames + 2 * T + 2
    bits = [sample_bits(a, horizon, link_generator(seed, shard, j + 1)) for j, a in enumerate(alphas)]
    erasures = [int(b.sum()) for b in bits]
    lost = frame_losses_from_bits(config, scheme, bits, first_frame, frames, gmax)
    return int(lost.sum()), erasures


def frame_losses_from_bits(config: NetworkConfig, scheme: Scheme, bits: Sequence[np.ndarray],
                           first_frame: int, frames: int,
                           gmax: GeneratorMatrix | None = None) -> np.ndarray:
    """Per-frame loss flags for frames ``first_frame .. first_frame + frames - 1``.

    ``bits[j]`` is link ``j + 1``'s erasure timeline from slot 0 and must
    cover every slot those frames' diagonals use.  ``first_frame`` must be
    at least ``T`` so no diagonal reaches back before slot 0.
    """
    bits = [np.asarray(b, dtype=np.uint8) for b in bits]
    if first_frame < config.T:
        raise SimulationError("first_frame must be >= T")
    if scheme.name == "sdf":
        dims = code_dimensions(config)
        k = dims.k
        first_diag = first_frame - (k - 1)
        count = frames + k - 1
        parts = [
            _windows(bits[j], first_diag, count, dims.n[j], config.offset(j))
            for j in range(config.links)
        ]
        rows = np.concatenate(parts, axis=1)
        splits = np.cumsum([0] + list(dims.n))
        cache: dict = {}

        def outcome(row: tuple[int, ...]):
            if row not in cache:
                link_bits = [row[splits[j]:splits[j + 1]] for j in range(config.links)]
                cache[row] = sdf_diagonal_outcome(config, link_bits, gmax)[0]
            return cache[row]

        known = _known_matrix(rows, outcome)
        lost = _frame_losses(known, first_diag, first_frame, frames, k)
    elif scheme.name == "if":
        code = scheme.p2p_code
        k = code.k
        merged = np.zeros(len(bits[0]), dtype=np.uint8)
        for b in bits:
            merged |= b
        first_diag = first_frame - (k - 1)
        rows = _windows(merged, first_diag, frames + k - 1, code.n, 0)
        known = _known_matrix(rows, lambda r: _p2p_known(r, code))
        lost = _frame_losses(known, first_diag, first_frame, frames, k)
    else:
        codes = scheme.hop_codes
        k = codes[0].k
        lost = np.zeros(frames, dtype=bool)
        shift = 0
        for j, code in enumerate(codes):
            hop_first = first_frame + shift
            first_diag = hop_first - (k - 1)
            rows = _windows(bits[j], first_diag, frames + k - 1, code.n, 0)
            known = _known_matrix(rows, lambda r, c=code: _p2p_known(r, c))
            lost |= _frame_losses(known, first_diag, hop_first, frames, k)
            shift += code.delay
    return lost


def run_monte_carlo(config: NetworkConfig, scheme: Scheme | str, alphas: float | Sequence[float],
                    frames: int, seed: int = 0, shard_frames: int = MC_SHARD_FRAMES) -> SimReport:
    """Frame loss ratio under i.i.d. erasures with a 95% binomial half-width.

    The run is split into fixed-size shards, each an independent chain fed by
    its own ``(seed, shard, link)`` Philox stream; shard results are summed, so
    the report depends only on ``(config, scheme, alphas, frames, seed)``.
    """
    if frames < 1:
        raise SimulationError("frames must be >= 1")
    if isinstance(scheme, str):
        scheme = make_scheme(scheme, config)
    if isinstance(alphas, (int, float)):
        alphas = (float(alphas),) * config.links
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) == 1:
        alphas = alphas * config.links
    if len(alphas) != config.links:
        raise SimulationError(f"need 1 or {config.links} erasure probabilities")
    gmax = None
    if scheme.name == "sdf":
        dims = code_dimensions(config)
        gmax = build_gmax(dims.k, dims.n_max, get_field(config.field.m, config.field.reduction_polynomial))
    lost = 0
    erasures = [0] * config.links
    done = 0
    shard = 0
    while done < frames:
        size = min(shard_frames, frames - done)
        shard_lost, shard_er = _shard_losses(config, scheme, alphas, size, seed, shard, gmax)
        lost += shard_lost
        erasures = [a + b for a, b in zip(erasures, shard_er)]
        done += size
        shard += 1
    p = lost / frames
    ci = 1.96 * math.sqrt(max(p * (1 - p), 0.0) / frames)
    bound = loss_upper_bound(alphas, config.T, config.budgets) if scheme.name == "sdf" else None
    return SimReport(
        scheme=scheme.name,
        config=config,
        frames=frames,
        lost=lost,
        erasures=tuple(erasures),
        bound=bound,
        ci95=ci,
        seed=seed,
        alpha=alphas,
        details={"shards": shard},
    )


def iter_patterns(config: NetworkConfig, horizon: int) -> Iterator[tuple[ErasurePattern, ...]]:
    """Cross product of per-link budgeted patterns, in verification order."""
    per_link = [list(enumerate_budgeted(horizon, n, link=j + 1)) for j, n in enumerate(config.budgets)]
    return itertools.product(*per_link)
