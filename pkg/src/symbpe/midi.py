"""Standard MIDI File reader for formats 0 and 1.

Covers exactly the subset the tokenizers need: note-on/note-off (velocity-0
note-on counts as note-off), tempo and time-signature meta events. Everything
else is decoded far enough to be skipped. Timing is converted from ticks to
beats by dividing by the header's ticks-per-quarter; velocities are discarded.

The reader is total on arbitrary byte input: it either returns a Score or
raises MidiParseError naming the byte offset of the problem.
"""

from __future__ import annotations

from collections import defaultdict, deque

from .score import NoteEvent, Score, TimeSignature, make_score


class MidiParseError(ValueError):
    """Malformed or truncated SMF data; ``offset`` is the failing byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


class UnsupportedMidiError(MidiParseError):
    """Well-formed but outside the supported subset (format 2, SMPTE timing)."""


class _Reader:
    """Bounds-checked cursor over the raw bytes."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def need(self, n: int, what: str) -> None:
        if self.pos + n > len(self.data):
            raise MidiParseError(f"truncated {what} (needed {n} bytes)", self.pos)

    def take(self, n: int, what: str) -> bytes:
        self.need(n, what)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u16(self, what: str) -> int:
        b = self.take(2, what)
        return (b[0] << 8) | b[1]

    def u32(self, what: str) -> int:
        b = self.take(4, what)
        return (b[0] << 24) | (b[1] << 16) | (b[2] << 8) | b[3]

    def varlen(self, what: str) -> int:
        value = 0
        for _ in range(4):
            byte = self.u8(what)
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value
        raise MidiParseError(f"variable-length {what} exceeds 4 bytes", self.pos - 1)


# Data byte counts for channel voice messages, by high status nibble.
_CHANNEL_DATA_LEN = {0x8: 2, 0x9: 2, 0xA: 2, 0xB: 2, 0xC: 1, 0xD: 1, 0xE: 2}


def parse_midi(data: bytes) -> Score:
    """Parse SMF bytes into an unquantized Score timed in beats."""
    r = _Reader(data)
    if r.take(4, "header chunk id") != b"MThd":
        raise MidiParseError("not a Standard MIDI File (missing MThd)", 0)
    header_len = r.u32("header length")
    if header_len < 6:
        raise MidiParseError(f"header length {header_len} < 6", r.pos - 4)
    fmt = r.u16("format")
    ntrks = r.u16("track count")
    division = r.u16("division")
    r.take(header_len - 6, "header padding")

    if fmt == 2:
        raise UnsupportedMidiError("format 2 files are not supported", 8)
    if fmt not in (0, 1):
        raise MidiParseError(f"unknown SMF format {fmt}", 8)
    if division & 0x8000:
        raise UnsupportedMidiError("SMPTE division is not supported", 12)
    if division == 0:
        raise MidiParseError("ticks-per-quarter must be positive", 12)

    notes: list[NoteEvent] = []
    signatures: dict[float, TimeSignature] = {}
    tracks_seen = 0
    while tracks_seen < ntrks:
        if r.pos >= len(r.data):
            raise MidiParseError(
                f"expected {ntrks} tracks, found {tracks_seen}", r.pos
            )
        chunk_id = r.take(4, "chunk id")
        chunk_len = r.u32("chunk length")
        chunk_end = r.pos + chunk_len
        if chunk_end > len(r.data):
            raise MidiParseError(f"truncated chunk {chunk_id!r}", r.pos - 4)
        if chunk_id != b"MTrk":
            r.pos = chunk_end  # alien chunk: skip
            continue
        _parse_track(r, chunk_end, tracks_seen, division, notes, signatures)
        tracks_seen += 1

    sigs = [signatures[beat] for beat in sorted(signatures)] or None
    return make_score(notes, sigs)


def _parse_track(
    r: _Reader,
    chunk_end: int,
    track_index: int,
    tpq: int,
    notes: list[NoteEvent],
    signatures: dict[float, TimeSignature],
) -> None:
    tick = 0
    running_status: int | None = None
    # FIFO queues resolve overlapping identical pitches: first on, first off.
    pending: dict[tuple[int, int], deque[int]] = defaultdict(deque)

    while r.pos < chunk_end:
        tick += r.varlen("delta time")
        status_offset = r.pos
        first = r.u8("event status")
        if first & 0x80:
            status = first
            if status < 0xF0:
                running_status = status
        else:
            if running_status is None:
                raise MidiParseError("data byte with no running status", status_offset)
            status = running_status
            r.pos = status_offset  # re-read as first data byte

        if status == 0xFF:
            meta_type = r.u8("meta type")
            meta_len = r.varlen("meta length")
            payload = r.take(meta_len, "meta payload")
            running_status = None
            if meta_type == 0x2F:  # end of track
                r.pos = chunk_end
                break
            if meta_type == 0x58 and meta_len >= 2:
                beat = tick / tpq
                signatures[beat] = TimeSignature(beat, payload[0], 1 << payload[1])
            # tempo (0x51) and all other meta events carry no beat-domain
            # information we keep
            continue
        if status in (0xF0, 0xF7):  # sysex: length-prefixed, skipped
            r.take(r.varlen("sysex length"), "sysex payload")
            running_status = None
            continue
        if status >= 0xF0:
            raise MidiParseError(f"unexpected status byte 0x{status:02X}", status_offset)

        kind = status >> 4
        data = r.take(_CHANNEL_DATA_LEN[kind], "channel message data")
        if any(b & 0x80 for b in data):
            raise MidiParseError("data byte with high bit set", r.pos - len(data))
        channel = status & 0x0F

        if kind == 0x9 and data[1] > 0:  # note on
            pending[(channel, data[0])].append(tick)
        elif kind == 0x8 or (kind == 0x9 and data[1] == 0):  # note off
            queue = pending.get((channel, data[0]))
            if queue:
                start = queue.popleft()
                duration_ticks = max(1, tick - start)
                notes.append(
                    NoteEvent(
                        onset=start / tpq,
                        track=track_index,
                        pitch=data[0],
                        duration=duration_ticks / tpq,
                    )
                )
        # other channel messages skipped

    if r.pos > chunk_end:
        raise MidiParseError("event ran past end of track chunk", chunk_end)
    r.pos = chunk_end
    # note-ons never closed by the end of the track are dropped
