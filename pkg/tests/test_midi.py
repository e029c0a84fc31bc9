import pytest
from hypothesis import given, settings, strategies as st

from symbpe import MidiParseError, UnsupportedMidiError, parse_midi

from smf_writer import midi_file, simple_midi, track_chunk, vlq


def notes_of(score):
    return [(n.track, n.pitch, n.onset, n.duration) for n in score.notes]


class TestBasicParsing:
    def test_zero_note_file(self):
        data = simple_midi([[]])
        assert parse_midi(data).notes == ()

    def test_single_note_unit_conversion(self):
        data = simple_midi([[(60, 0, 480)]], tpq=480)
        assert notes_of(parse_midi(data)) == [(0, 60, 0.0, 1.0)]

    def test_velocity_is_discarded(self):
        quiet = simple_midi([[(60, 0, 480)]], velocity=1)
        loud = simple_midi([[(60, 0, 480)]], velocity=127)
        assert parse_midi(quiet) == parse_midi(loud)

    def test_note_on_velocity_zero_ends_note(self):
        data = simple_midi([[(72, 120, 240)]], tpq=240, noteoff_via_velocity0=True)
        assert notes_of(parse_midi(data)) == [(0, 72, 0.5, 1.0)]

    def test_running_status(self):
        # velocity-0 endings keep every event on status 0x90 so the writer
        # can actually elide repeated status bytes
        notes = [(60, 0, 240), (64, 240, 240), (67, 480, 240)]
        plain = simple_midi([notes], tpq=240)
        packed = simple_midi(
            [notes], tpq=240, use_running_status=True, noteoff_via_velocity0=True
        )
        assert len(packed) < len(plain)
        assert parse_midi(packed) == parse_midi(plain)

    def test_three_track_file_matches_construction(self, rng):
        # ground truth by construction: the writer is independent of the parser
        tracks = []
        expected = []
        for track_index in range(3):
            notes = []
            tick = rng.randint(0, 100)
            for _ in range(rng.randint(5, 20)):
                pitch = rng.randint(20, 100)
                dur = rng.randint(1, 960)
                notes.append((pitch, tick, dur))
                expected.append((track_index, pitch, tick / 480, dur / 480))
                tick += rng.randint(1, 960)
            tracks.append(notes)
        data = simple_midi(tracks, tpq=480, channel=0)
        parsed = notes_of(parse_midi(data))
        assert sorted(parsed) == sorted(expected)

    def test_fifo_pairing_of_overlapping_identical_pitches(self):
        # on(60)@0, on(60)@100, off(60)@200, off(60)@300: first on pairs first off
        body = bytearray()
        body += vlq(0) + bytes([0x90, 60, 80])
        body += vlq(100) + bytes([0x90, 60, 80])
        body += vlq(100) + bytes([0x80, 60, 0])
        body += vlq(100) + bytes([0x80, 60, 0])
        body += vlq(0) + bytes([0xFF, 0x2F, 0])
        chunk = b"MTrk" + len(body).to_bytes(4, "big") + bytes(body)
        score = parse_midi(midi_file([chunk], fmt=0, tpq=100))
        assert notes_of(score) == [(0, 60, 0.0, 2.0), (0, 60, 1.0, 2.0)]

    def test_unmatched_note_off_ignored(self):
        body = vlq(0) + bytes([0x80, 60, 0]) + vlq(0) + bytes([0xFF, 0x2F, 0])
        chunk = b"MTrk" + len(body).to_bytes(4, "big") + body
        assert parse_midi(midi_file([chunk], fmt=0)).notes == ()

    def test_skips_unrelated_events(self):
        extra = [
            (0, bytes([0xC0, 5])),          # program change
            (10, bytes([0xB0, 7, 100])),    # CC volume
            (20, bytes([0xE0, 0, 64])),     # pitch bend
            (30, bytes([0xF0]) + vlq(3) + b"abc"),  # sysex
            (40, bytes([0xFF, 0x01]) + vlq(5) + b"hello"),  # text meta
        ]
        with_extras = simple_midi([[(60, 0, 480)]], extra_events=extra)
        plain = simple_midi([[(60, 0, 480)]])
        assert parse_midi(with_extras) == parse_midi(plain)

    def test_time_signature_parsed(self):
        data = simple_midi([[(60, 0, 480)]], time_signatures=[(0, 3, 4)])
        sigs = parse_midi(data).time_signatures
        assert (sigs[0].numerator, sigs[0].denominator) == (3, 4)

    def test_tempo_event_tolerated(self):
        data = simple_midi([[(60, 0, 480)]], tempo=500000)
        assert len(parse_midi(data).notes) == 1

    def test_alien_chunk_skipped(self):
        alien = b"XFIH" + (4).to_bytes(4, "big") + b"\x00\x00\x00\x00"
        track = track_chunk([(60, 0, 480)])
        data = midi_file([track], fmt=0) + b""
        data = data[:14] + alien + data[14:]
        assert len(parse_midi(data).notes) == 1


class TestErrors:
    def test_not_a_midi_file(self):
        with pytest.raises(MidiParseError) as err:
            parse_midi(b"RIFFxxxx")
        assert err.value.offset == 0

    def test_truncated_header(self):
        with pytest.raises(MidiParseError):
            parse_midi(b"MThd\x00\x00")

    def test_truncated_track_chunk(self):
        data = simple_midi([[(60, 0, 480)]])
        with pytest.raises(MidiParseError) as err:
            parse_midi(data[:-5])
        assert "truncated" in str(err.value)

    def test_format_2_unsupported(self):
        data = midi_file([track_chunk([])], fmt=2)
        with pytest.raises(UnsupportedMidiError):
            parse_midi(data)

    def test_smpte_division_unsupported(self):
        header = (1).to_bytes(2, "big") + (1).to_bytes(2, "big") + (0x8000 | 0x1900).to_bytes(2, "big")
        data = b"MThd" + (6).to_bytes(4, "big") + header + track_chunk([])
        with pytest.raises(UnsupportedMidiError):
            parse_midi(data)

    def test_missing_tracks(self):
        data = midi_file([], fmt=1)  # header claims 0 tracks, fine; now claim 2
        data = midi_file([track_chunk([])], fmt=1)
        broken = data[:10] + (2).to_bytes(2, "big") + data[12:]
        with pytest.raises(MidiParseError):
            parse_midi(broken)

    def test_error_offsets_are_in_range(self):
        data = simple_midi([[(60, 0, 480)]])
        for cut in range(4, len(data), 3):
            try:
                parse_midi(data[:cut])
            except MidiParseError as e:
                assert 0 <= e.offset <= cut


class TestFuzz:
    @given(st.binary(max_size=300))
    @settings(max_examples=300)
    def test_never_crashes_on_arbitrary_bytes(self, data):
        try:
            parse_midi(data)
        except MidiParseError:
            pass

    @given(st.data())
    @settings(max_examples=200)
    def test_never_crashes_on_mutated_valid_file(self, data):
        base = bytearray(simple_midi([[(60, 0, 480), (64, 480, 480)]]))
        index = data.draw(st.integers(0, len(base) - 1))
        base[index] = data.draw(st.integers(0, 255))
        try:
            parse_midi(bytes(base))
        except MidiParseError:
            pass
