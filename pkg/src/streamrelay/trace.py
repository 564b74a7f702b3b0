"""Plain-text per-slot tables of what every node sends.

Times are printed relative to an anchor slot ``i`` and symbols by name:
frame ``f`` has symbols ``a_f, b_f, ...`` (``s0_f, s1_f, ...`` beyond 26),
and a parity symbol is written as the sum of the diagonal's symbols, with
its column number prefixed when the code has more than one parity column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .analysis import NetworkConfig
from .channel import ErasurePattern
from .diagonal import Packet
from .mds import CodedSymbol
from .relay import header_string
from .sim import Chain, Scheme, make_scheme, run_chain

SEP = " | "
_ERASE_RE = re.compile(r"^\s*(\d+)\s*:\s*(i)?\s*([+-]\s*\d+)?\s*$")


def parse_erasure(spec: str) -> tuple[int, int | None, int]:
    """``"2:i+2"`` -> (link 2, relative, +2); ``"1:7"`` -> (link 1, absolute, 7)."""
    m = _ERASE_RE.match(spec)
    if not m or (m.group(2) is None and m.group(3) is None):
        raise ValueError(f"bad erasure spec {spec!r}; expected LINK:i[+-d] or LINK:SLOT")
    link = int(m.group(1))
    delta = int(m.group(3).replace(" ", "")) if m.group(3) else 0
    if m.group(2):
        return link, None, delta
    return link, delta, 0


def time_label(t: int, anchor: int) -> str:
    d = t - anchor
    if d == 0:
        return "i"
    return f"i{d:+d}"


def symbol_name(frame: int, position: int, anchor: int) -> str:
    letter = chr(ord("a") + position) if position < 26 else f"s{position}"
    return f"{letter}_{{{time_label(frame, anchor)}}}"


def symbol_label(sym: CodedSymbol, base: int, k: int, n_max: int, anchor: int) -> str:
    if sym.header == 0:
        return "-"
    if sym.header <= k:
        v = sym.header - 1
        return symbol_name(base + v, v, anchor)
    parts = "+".join(symbol_name(base + v, v, anchor) for v in range(k))
    if n_max - k > 1:
        return f"p{sym.header - k}:{parts}"
    return parts


@dataclass
class TraceResult:
    text: str
    headers: dict[str, list[str]]
    report: object


def _render_table(title: str, times: Sequence[int], anchor: int, header_row: Sequence[str] | None,
                  rows: Sequence[Sequence[str]]) -> str:
    lines = [title]
    cells = [["Time"] + [time_label(t, anchor) for t in times]]
    if header_row is not None:
        cells.append(["Header"] + list(header_row))
    for r in rows:
        cells.append([""] + list(r))
    widths = [max(len(c[i]) for c in cells) for i in range(len(cells[0]))]
    for c in cells:
        lines.append(SEP.join(x.ljust(w) for x, w in zip(c, widths)).rstrip())
    return "\n".join(lines)


def render_trace(config: NetworkConfig, erasures: Sequence[str] = (), scheme: Scheme | str = "sdf",
                 anchor: int | None = None, first: int = -1, last: int = 4,
                 seed: int = 0) -> TraceResult:
    """Replay a scenario and tabulate every node's packets over ``i+first .. i+last``.

    ``erasures`` are ``LINK:SLOT`` specs (slot ``i``, ``i+2``, or absolute).
    The destination table lists, per slot ``t``, frame ``t - T`` if it has
    been recovered by then and ``?`` otherwise.
    """
    if isinstance(scheme, str):
        scheme = make_scheme(scheme, config)
    probe = Chain(config, scheme, seed)
    k = probe.k
    if anchor is None:
        anchor = config.T + k + 1
    horizon = max(anchor + last + config.T + 2, anchor + 1)
    slots: dict[int, list[int]] = {j: [] for j in range(1, config.links + 1)}
    for spec in erasures:
        link, absolute, delta = parse_erasure(spec)
        if not 1 <= link <= config.links:
            raise ValueError(f"link {link} out of range 1..{config.links}")
        t = absolute if absolute is not None else anchor + delta
        if not 0 <= t < horizon:
            raise ValueError(f"erasure slot {t} outside 0..{horizon - 1}")
        slots[link].append(t)
    patterns = [ErasurePattern.at(horizon, slots[j], j) for j in range(1, config.links + 1)]
    report = run_chain(config, scheme, patterns, seed=seed, record=True)
    chain: Chain = report.details["chain"]
    trace = report.details["trace"]
    start = chain.start
    times = [t for t in range(anchor + first, anchor + last + 1) if t >= start]

    def row_at(t: int) -> list:
        return trace[t - start]

    if scheme.name == "sdf":
        offsets = [config.offset(j) for j in range(config.links)]
        n_max = chain.gmax.n
    else:
        offsets = [0] * config.links
        n_max = None
    blocks = []
    headers: dict[str, list[str]] = {}
    for j in range(config.links):
        name = "source r0" if j == 0 else f"relay r{j}"
        packets: list[Packet] = [row_at(t)[2 * j] for t in times]
        if scheme.name == "mdf":
            gm = chain.source.gmax if j == 0 else chain.relays[j - 1].encoder.gmax
            shift = 0 if j == 0 else chain.relays[j - 1].stream_shift + chain.relays[j - 1].delay
        else:
            gm = chain.gmax if scheme.name == "sdf" else chain.source.gmax
            shift = 0
        width = max(len(p.symbols) for p in packets)
        hdrs = [header_string(p.headers) for p in packets]
        headers[name] = hdrs
        body = []
        for d in range(width):
            cells = []
            for t, p in zip(times, packets):
                if d >= len(p.symbols):
                    cells.append("")
                    continue
                base = t - offsets[j] - d - shift
                cells.append(symbol_label(p.symbols[d], base, k, n_max or gm.n, anchor))
            body.append(cells)
        erased = [time_label(t, anchor) for t in slots[j + 1]]
        note = f" (link {j + 1} erased at {', '.join(erased)})" if erased else ""
        blocks.append(_render_table(f"{name} -> r{j + 1}{note}", times, anchor, hdrs, body))

    est_rows = []
    for v in range(k):
        cells = []
        for t in times:
            f = t - config.T
            rec = chain.dest.recovered.get(f + chain.dest_shift)
            ok = f < 0 or (rec is not None and rec[0] <= t)
            cells.append(symbol_name(f, v, anchor) if ok else "?")
        est_rows.append(cells)
    blocks.append(_render_table(f"destination r{config.links} estimates (frame t-{config.T})",
                                times, anchor, None, est_rows))
    summary = f"frames scored {report.frames}, lost {report.lost}"
    text = "\n\n".join(blocks) + "\n\n" + summary + "\n"
    return TraceResult(text, headers, report)
