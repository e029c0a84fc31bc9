import pytest
from hypothesis import given

from symbpe import (
    NoteEvent,
    PolyphonyError,
    RemiConfig,
    StructuredConfig,
    TimeSignature,
    TokenKind,
    TokenStructureError,
    detokenize_remi,
    detokenize_structured_intervals,
    filter_pitch_only,
    make_score,
    parse_token,
    quantize,
    remi_vocabulary,
    render_sequence,
    structured_vocabulary,
    tokenize_remi,
    tokenize_structured_intervals,
)
from symbpe.tokens import AtomicToken, render_tokens

from conftest import monophonic_scores, quantized_scores


def note(onset, pitch, duration, track=0):
    return NoteEvent(onset=onset, track=track, pitch=pitch, duration=duration)


def q(notes, sigs=None, res=4):
    return quantize(make_score(notes, sigs), res)


def rendered(seq, vocab):
    return render_sequence(seq, vocab)


class TestRemi:
    def test_empty_score(self):
        assert tokenize_remi(q([])).ids == ()

    def test_single_quarter_note(self):
        # hand trace: bar marker, onset slot 0, pitch, quarter = 4 grid units
        seq = tokenize_remi(q([note(0.0, 60, 1.0)]))
        assert rendered(seq, remi_vocabulary()) == "Bar(0), Position(0), Pitch(60), Duration(4)"

    def test_simultaneous_notes_pitch_ascending(self):
        seq = tokenize_remi(q([note(0.0, 64, 1.0), note(0.0, 60, 1.0)]))
        assert rendered(seq, remi_vocabulary()) == (
            "Bar(0), Position(0), Pitch(60), Duration(4), Pitch(64), Duration(4)"
        )

    def test_empty_bars_are_emitted(self):
        # note in bar 2 of 4/4: bars 0 and 1 appear empty before it
        seq = tokenize_remi(q([note(9.0, 60, 1.0)]))
        assert rendered(seq, remi_vocabulary()) == (
            "Bar(0), Bar(0), Bar(0), Position(4), Pitch(60), Duration(4)"
        )

    def test_position_once_per_onset(self):
        seq = tokenize_remi(q([note(0.5, 60, 0.25), note(0.5, 64, 0.5), note(1.0, 67, 1.0)]))
        kinds = [remi_vocabulary().atoms[i].kind for i in seq.ids]
        assert kinds.count(TokenKind.POSITION) == 2

    def test_three_four_positions(self):
        sigs = [TimeSignature(0.0, 3, 4)]
        seq = tokenize_remi(q([note(3.0, 60, 1.0)], sigs))
        # second bar of 3/4 starts at beat 3
        assert rendered(seq, remi_vocabulary()) == (
            "Bar(0), Bar(0), Position(0), Pitch(60), Duration(4)"
        )

    def test_duration_clamped_with_warning_count(self):
        cfg = RemiConfig(max_duration=8)
        seq = tokenize_remi(q([note(0.0, 60, 10.0)]), cfg)
        assert seq.meta == {"clamped_durations": 1}
        assert "Duration(8)" in rendered(seq, remi_vocabulary(cfg))

    def test_requires_matching_resolution(self):
        with pytest.raises(ValueError):
            tokenize_remi(q([note(0.0, 60, 1.0)], res=8))


class TestDetokenizeRemi:
    def test_empty(self):
        from symbpe.tokens import make_sequence

        vocab = remi_vocabulary()
        assert detokenize_remi(make_sequence([], vocab.vocab_id)).notes == ()

    def test_inverse_of_single_note(self):
        score = q([note(0.0, 60, 1.0)])
        assert detokenize_remi(tokenize_remi(score)) == score

    def test_position_before_bar_is_structural_error(self):
        vocab = remi_vocabulary()
        index = vocab.atom_index()
        from symbpe.tokens import make_sequence

        seq = make_sequence([index[AtomicToken(TokenKind.POSITION, 0)]], vocab.vocab_id)
        with pytest.raises(TokenStructureError) as err:
            detokenize_remi(seq)
        assert err.value.index == 0

    def test_dangling_pitch_is_structural_error(self):
        vocab = remi_vocabulary()
        index = vocab.atom_index()
        from symbpe.tokens import make_sequence

        ids = [
            index[AtomicToken(TokenKind.BAR, 0)],
            index[AtomicToken(TokenKind.POSITION, 0)],
            index[AtomicToken(TokenKind.PITCH, 60)],
        ]
        with pytest.raises(TokenStructureError) as err:
            detokenize_remi(make_sequence(ids, vocab.vocab_id))
        assert err.value.index == 2

    @given(quantized_scores(track_count=1))
    def test_round_trip_single_track(self, score):
        back = detokenize_remi(tokenize_remi(score), time_signatures=score.time_signatures)
        assert back.notes == score.notes

    @given(quantized_scores(track_count=3))
    def test_round_trip_note_sets_multi_track(self, score):
        back = detokenize_remi(tokenize_remi(score), time_signatures=score.time_signatures)
        expected = {(n.pitch, n.onset, n.duration) for n in score.notes}
        assert {(n.pitch, n.onset, n.duration) for n in back.notes} == expected


class TestStructuredIntervals:
    def test_rising_fourth_after_quarter_upbeat(self):
        # quarter upbeat then a perfect fourth above: the second note's
        # triplet reads Duration(4), TShift(4), PitchInterval(+5)
        score = q([note(0.0, 60, 1.0), note(1.0, 65, 1.0)])
        seq = tokenize_structured_intervals(score)
        text = rendered(seq, structured_vocabulary())
        assert text == (
            "Duration(4), TShift(0), PitchInterval(0), "
            "Duration(4), TShift(4), PitchInterval(+5)"
        )

    def test_three_descending_sixteenths(self):
        # consecutive 16ths stepping down 5, 3, then 4 semitones
        score = q(
            [
                note(0.00, 72, 0.25),
                note(0.25, 67, 0.25),
                note(0.50, 64, 0.25),
                note(0.75, 60, 0.25),
            ]
        )
        seq = tokenize_structured_intervals(score)
        text = rendered(seq, structured_vocabulary())
        assert text.endswith(
            "Duration(1), TShift(1), PitchInterval(-5), "
            "Duration(1), TShift(1), PitchInterval(-3), "
            "Duration(1), TShift(1), PitchInterval(-4)"
        )

    def test_single_note_first_conventions(self):
        seq = tokenize_structured_intervals(q([note(0.5, 70, 0.5)]))
        assert rendered(seq, structured_vocabulary()) == (
            "Duration(2), TShift(2), PitchInterval(0)"
        )

    def test_empty_score(self):
        assert tokenize_structured_intervals(q([])).ids == ()

    def test_polyphony_rejected_naming_pair(self):
        score = q([note(0.0, 60, 2.0), note(1.0, 64, 1.0)])
        with pytest.raises(PolyphonyError) as err:
            tokenize_structured_intervals(score)
        assert "60" in str(err.value) and "64" in str(err.value)

    def test_interval_clamped(self):
        cfg = StructuredConfig(max_interval=12)
        score = q([note(0.0, 40, 1.0), note(1.0, 90, 1.0)])
        seq = tokenize_structured_intervals(score, cfg)
        assert seq.meta == {"clamped_payloads": 1}
        assert "PitchInterval(+12)" in rendered(seq, structured_vocabulary(cfg))

    @given(monophonic_scores())
    def test_length_is_three_per_note(self, score):
        assert len(tokenize_structured_intervals(score)) == 3 * len(score.notes)

    @given(monophonic_scores())
    def test_pitch_reconstruction_round_trip(self, score):
        seq = tokenize_structured_intervals(score)
        if not score.notes:
            return
        back = detokenize_structured_intervals(seq, first_pitch=score.notes[0].pitch)
        assert [n.pitch for n in back.notes] == [n.pitch for n in score.notes]
        assert back.notes == score.notes


class TestPitchOnly:
    def test_no_pitch_tokens_gives_empty(self):
        from symbpe.tokens import make_sequence

        vocab = remi_vocabulary()
        index = vocab.atom_index()
        ids = [index[AtomicToken(TokenKind.BAR, 0)], index[AtomicToken(TokenKind.POSITION, 3)]]
        out = filter_pitch_only(make_sequence(ids, vocab.vocab_id), vocab)
        assert out.ids == ()

    def test_keeps_pitches_in_order(self):
        vocab = remi_vocabulary()
        seq = tokenize_remi(q([note(0.0, 60, 1.0), note(0.0, 64, 1.0)]))
        out = filter_pitch_only(seq, vocab)
        from symbpe.tokenizers import pitch_only_vocabulary

        assert rendered(out, pitch_only_vocabulary()) == "Pitch(60), Pitch(64)"

    def test_rejects_supertokens(self):
        from symbpe import train
        from symbpe.tokens import make_sequence

        vocab = remi_vocabulary()
        seq = tokenize_remi(q([note(i * 1.0, 60, 1.0) for i in range(8)]))
        model = train([seq], vocab, 2)
        encoded_vocab = model.vocab
        with pytest.raises(ValueError):
            filter_pitch_only(make_sequence([0], encoded_vocab.vocab_id), encoded_vocab)

    @given(quantized_scores())
    def test_output_length_counts_pitch_tokens(self, score):
        vocab = remi_vocabulary()
        seq = tokenize_remi(score)
        out = filter_pitch_only(seq, vocab)
        pitch_count = sum(1 for i in seq.ids if vocab.atoms[i].kind is TokenKind.PITCH)
        assert len(out) == pitch_count == len(score.notes)


class TestTokenText:
    def test_velocity_kind_not_representable(self):
        assert all("VELOCITY" != k.name for k in TokenKind)
        assert "Velocity" not in {k.value for k in TokenKind}

    @pytest.mark.parametrize(
        "token,text",
        [
            (AtomicToken(TokenKind.TIME_SHIFT, 4), "TShift(4)"),
            (AtomicToken(TokenKind.PITCH_INTERVAL, 5), "PitchInterval(+5)"),
            (AtomicToken(TokenKind.PITCH_INTERVAL, -3), "PitchInterval(-3)"),
            (AtomicToken(TokenKind.PITCH_INTERVAL, 0), "PitchInterval(0)"),
            (AtomicToken(TokenKind.BAR, 0), "Bar(0)"),
            (AtomicToken(TokenKind.DURATION, 12), "Duration(12)"),
        ],
    )
    def test_rendering(self, token, text):
        assert token.render() == text
        assert parse_token(text) == token

    def test_render_tokens_line(self):
        line = render_tokens(
            [AtomicToken(TokenKind.DURATION, 4), AtomicToken(TokenKind.TIME_SHIFT, 4)]
        )
        assert line == "Duration(4), TShift(4)"
