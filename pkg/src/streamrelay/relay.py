"""Per-node state machines for the relay chain.

* :class:`SdfRelay` - state-dependent symbol-wise decode-and-forward.
* :class:`MdfRelay` - message-wise decode-and-forward (per-hop streaming codes).
* :class:`ForwardRelay` - instantaneous forwarding.
* :class:`StreamReceiver` - header-driven diagonal decoder used by the
  destination and by message-wise relays.

Every node is advanced once per slot, in chain order, with the packet its
upstream link delivered in that slot (``None`` when erased).  Processing and
propagation delays are zero, so a relay may forward in the same slot it
receives.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .diagonal import BlockCode, Packet, SourceEncoder, SourceFrame
from .mds import VOID, CodedSymbol, DiagonalMessage, GeneratorMatrix, decode_message


class InvariantViolation(AssertionError):
    """A relay emitted a header twice on one diagonal, or decoded wrongly."""


class DiagonalState:
    """What one node knows about one diagonal."""

    __slots__ = ("base_time", "received", "forwarded", "decoded", "decode_time", "fallbacks")

    def __init__(self, base_time: int):
        self.base_time = base_time
        # header -> value, in arrival order
        self.received: dict[int, int] = {}
        self.forwarded: list[int] = []
        self.decoded: DiagonalMessage | None = None
        self.decode_time: int | None = None
        self.fallbacks = 0

    def store(self, header: int, value: int) -> bool:
        if header == 0 or header in self.received:
            return False
        self.received[header] = value
        return True

    def try_decode(self, gmax: GeneratorMatrix, now: int) -> bool:
        if self.decoded is None and len(self.received) >= gmax.k:
            self.decoded = decode_message(
                (CodedSymbol(h, v) for h, v in self.received.items()), gmax, self.base_time
            )
            self.decode_time = now
        return self.decoded is not None

    def _oldest_unforwarded(self) -> int | None:
        fwd = self.forwarded
        for h in self.received:
            if h not in fwd:
                return h
        return None

    def emit(self, local_slot: int, gmax: GeneratorMatrix, now: int) -> CodedSymbol:
        """The symbol-wise DF rule for one output position.

        Local slots ``0..k-2`` forward the oldest received, not yet forwarded
        symbol unchanged.  From slot ``k-1`` the diagonal is decoded and the
        smallest master-generator column this node has not yet emitted is re-encoded.
        If decoding fails, fall back to forwarding, else emit a void symbol.
        """
        k = gmax.k
        if local_slot >= k - 1 and self.try_decode(gmax, now):
            fwd = self.forwarded
            h = 1
            while h in fwd:
                h += 1
            value = self.received.get(h)
            if value is None:
                value = gmax.gf.dot(self.decoded.values, gmax.column(h))
            fwd.append(h)
            return CodedSymbol(h, value)
        h = self._oldest_unforwarded()
        if local_slot >= k - 1:
            self.fallbacks += 1
        if h is None:
            if local_slot < k - 1:
                self.fallbacks += 1
            return VOID
        self.forwarded.append(h)
        return CodedSymbol(h, self.received[h])


class SdfRelay:
    """State-dependent symbol-wise DF relay number ``index``.

    ``in_offset`` / ``out_offset`` are the slots, relative to a diagonal's
    base time, at which the upstream node and this node start sending it
    (``N_1 + ... + N_{j-1}`` and ``N_1 + ... + N_j``).
    """

    def __init__(self, index: int, gmax: GeneratorMatrix, n_in: int, n_out: int,
                 in_offset: int, out_offset: int, start_time: int = 0):
        if n_out > gmax.n:
            raise ValueError(f"n_out={n_out} exceeds n_max={gmax.n}")
        self.index = index
        self.gmax = gmax
        self.k = gmax.k
        self.n_in, self.n_out = n_in, n_out
        self.in_offset, self.out_offset = in_offset, out_offset
        self.clock = start_time
        self.diagonals: dict[int, DiagonalState] = {}
        self.fallbacks = 0
        self.codes: list[tuple[int, tuple[int, ...]]] = []
        self.decode_times: dict[int, int] = {}

    def _state(self, base: int) -> DiagonalState:
        st = self.diagonals.get(base)
        if st is None:
            st = self.diagonals[base] = DiagonalState(base)
        return st

    def step(self, incoming: Packet | None) -> Packet:
        t = self.clock
        if incoming is not None:
            k = self.k
            for d, sym in enumerate(incoming.symbols):
                base = t - self.in_offset - d
                if sym.header and base > -k:
                    self._state(base).store(sym.header, sym.value)
        out = []
        k = self.k
        last = self.n_out - 1
        for d in range(self.n_out):
            base = t - self.out_offset - d
            if base <= -k:
                # all-zero diagonal, known to every node
                out.append(CodedSymbol(d + 1, 0))
                continue
            st = self._state(base)
            out.append(st.emit(d, self.gmax, t))
            if d == last:
                self._retire(base, st)
        self.clock += 1
        return Packet(t, self.index, tuple(out))

    def _retire(self, base: int, st: DiagonalState) -> None:
        if len(set(st.forwarded)) != len(st.forwarded):
            raise InvariantViolation(f"relay {self.index} repeated a header on diagonal {base}")
        self.fallbacks += st.fallbacks
        self.codes.append((base, tuple(st.forwarded)))
        if st.decode_time is not None:
            self.decode_times[base] = st.decode_time
        del self.diagonals[base]


class StreamReceiver:
    """Recover source symbols from a diagonally interleaved, headered stream.

    Symbol ``v`` of frame ``f`` becomes known when header ``v + 1`` of diagonal
    ``f - v`` arrives or that diagonal collects ``k`` distinct headers.
    """

    def __init__(self, gmax: GeneratorMatrix, n_in: int, in_offset: int, start_time: int = 0):
        self.gmax = gmax
        self.k = gmax.k
        self.n_in = n_in
        self.in_offset = in_offset
        self.clock = start_time
        self.diagonals: dict[int, DiagonalState] = {}
        self.partial: dict[int, list] = {}
        self.recovered: dict[int, tuple[int, tuple[int, ...]]] = {}

    def _learn(self, frame: int, pos: int, value: int, t: int, newly: list[int]) -> None:
        if frame < 0 or frame in self.recovered:
            return
        slots = self.partial.get(frame)
        if slots is None:
            slots = self.partial[frame] = [None] * self.k
        if slots[pos] is None:
            slots[pos] = value
            if all(v is not None for v in slots):
                self.recovered[frame] = (t, tuple(slots))
                del self.partial[frame]
                newly.append(frame)

    def step(self, incoming: Packet | None) -> list[int]:
        """Absorb one slot; return the frames completed in this slot."""
        t = self.clock
        newly: list[int] = []
        k = self.k
        if incoming is not None:
            for d, sym in enumerate(incoming.symbols):
                h = sym.header
                if not h:
                    continue
                base = t - self.in_offset - d
                if base <= -k:
                    continue
                st = self.diagonals.get(base)
                if st is None:
                    st = self.diagonals[base] = DiagonalState(base)
                if not st.store(h, sym.value):
                    continue
                if h <= k:
                    self._learn(base + h - 1, h - 1, sym.value, t, newly)
                if st.decoded is None and len(st.received) >= k:
                    st.try_decode(self.gmax, t)
                    for v, value in enumerate(st.decoded.values):
                        self._learn(base + v, v, value, t, newly)
        # diagonals whose last symbol has gone by can be dropped
        stale = t - self.in_offset - self.n_in
        for base in [b for b in self.diagonals if b <= stale]:
            del self.diagonals[base]
        self.clock += 1
        return newly

    def frame(self, f: int) -> tuple[int, ...] | None:
        """Values of frame ``f`` if fully known, with unknown positions as None otherwise."""
        if f < 0:
            return (0,) * self.k
        rec = self.recovered.get(f)
        if rec is not None:
            return rec[1]
        return None

    def partial_frame(self, f: int) -> tuple[int, ...]:
        slots = self.partial.get(f)
        if slots is None:
            return (0,) * self.k
        return tuple(0 if v is None else v for v in slots)


class Destination(StreamReceiver):
    """End node; keeps recovery times for deadline accounting."""

    def recovery_time(self, f: int) -> int | None:
        rec = self.recovered.get(f)
        return None if rec is None else rec[0]

    def estimate(self, f: int) -> tuple[int, ...] | None:
        return self.frame(f)


class MdfRelay:
    """Message-wise DF relay: decode each frame by its hop deadline, re-encode.

    Hop ``j``'s stream carries original frame ``f`` at stream index
    ``f + sum(T_1..T_{j-1})``.  A frame not fully decoded by its hop deadline
    is re-encoded with zeros in its unknown positions and reported lost, so
    later frames are unaffected.
    """

    def __init__(self, index: int, in_code: BlockCode, in_gmax: GeneratorMatrix,
                 out_gmax: GeneratorMatrix, stream_shift: int, start_time: int = 0):
        if in_gmax.k != out_gmax.k:
            raise ValueError("message-wise DF hops must share k")
        self.index = index
        self.delay = in_code.delay
        self.receiver = StreamReceiver(in_gmax, in_code.n, 0, start_time)
        self.encoder = SourceEncoder(out_gmax, sender=index, start_time=start_time)
        self.stream_shift = stream_shift  # original frame = stream index - shift
        self.lost: set[int] = set()
        self.clock = start_time

    def step(self, incoming: Packet | None) -> Packet:
        t = self.clock
        self.receiver.step(incoming)
        f = t - self.delay
        values = self.receiver.frame(f)
        if values is None:
            values = self.receiver.partial_frame(f)
            self.lost.add(f - self.stream_shift)
        self.clock += 1
        return self.encoder.encode_slot(SourceFrame(t, values))


class ForwardRelay:
    """Instantaneous forwarding: copy, or a void packet when the input was erased."""

    def __init__(self, index: int, n: int, start_time: int = 0):
        self.index = index
        self.n = n
        self.clock = start_time

    def step(self, incoming: Packet | None) -> Packet:
        t = self.clock
        self.clock += 1
        if incoming is None:
            return Packet(t, self.index, (VOID,) * self.n)
        return Packet(t, self.index, incoming.symbols)


def sdf_relay_step(state: SdfRelay, incoming: Packet | None) -> Packet:
    return state.step(incoming)


def sdf_destination_step(state: Destination, incoming: Packet | None) -> list[int]:
    return state.step(incoming)


def mdf_relay_step(state: MdfRelay, incoming: Packet | None) -> Packet:
    return state.step(incoming)


def if_forward_step(state: ForwardRelay, incoming: Packet | None) -> Packet:
    return state.step(incoming)


def header_string(headers: Iterable[int]) -> str:
    """``"123"`` style when every header is a single digit, else comma separated."""
    hs = list(headers)
    if all(0 <= h <= 9 for h in hs):
        return "".join(str(h) for h in hs)
    return ",".join(str(h) for h in hs)


def wire_encode(packet: Packet | Sequence[CodedSymbol], symbol_bytes: int = 1) -> bytes:
    """16-bit little-endian header then ``symbol_bytes`` of value, per symbol."""
    symbols = packet.symbols if isinstance(packet, Packet) else packet
    out = bytearray()
    for s in symbols:
        out += s.header.to_bytes(2, "little")
        out += s.value.to_bytes(symbol_bytes, "little")
    return bytes(out)


def wire_decode(data: bytes, symbol_bytes: int = 1) -> tuple[CodedSymbol, ...]:
    step = 2 + symbol_bytes
    if len(data) % step:
        raise ValueError(f"packet length {len(data)} is not a multiple of {step}")
    return tuple(
        CodedSymbol(int.from_bytes(data[i:i + 2], "little"),
                    int.from_bytes(data[i + 2:i + step], "little"))
        for i in range(0, len(data), step)
    )
