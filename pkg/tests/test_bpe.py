import random

import pytest
from hypothesis import given, settings, strategies as st

from symbpe import (
    AtomicToken,
    TokenKind,
    Vocabulary,
    VocabularyMismatchError,
    decode,
    encode,
    load_model,
    make_sequence,
    save_model,
    train,
)
from symbpe.bpe import MergeRule, ModelLoadError, merge_pair, pair_counts

import reference_bpe


def small_vocab(n=6):
    return Vocabulary(atoms=tuple(AtomicToken(TokenKind.PITCH, i) for i in range(n)), name="toy")


def seqs_of(vocab, id_lists):
    return [make_sequence(ids, vocab.vocab_id, f"p{i}") for i, ids in enumerate(id_lists)]


corpora = st.lists(
    st.lists(st.integers(0, 5), max_size=40),
    min_size=1,
    max_size=8,
)


class TestVocabulary:
    def test_rejects_forward_reference(self):
        with pytest.raises(ValueError):
            Vocabulary(atoms=small_vocab().atoms, supertokens=((0, 7),))

    def test_expansions(self):
        v = Vocabulary(atoms=small_vocab().atoms, supertokens=((0, 1), (6, 2)))
        assert v.expansion(0) == (0,)
        assert v.expansion(6) == (0, 1)
        assert v.expansion(7) == (0, 1, 2)

    def test_expansion_length_additivity(self):
        v = Vocabulary(atoms=small_vocab().atoms, supertokens=((0, 1), (6, 6), (7, 2)))
        for k, (left, right) in enumerate(v.supertokens):
            i = v.num_atoms + k
            assert len(v.expansion(i)) == len(v.expansion(left)) + len(v.expansion(right))

    def test_vocab_id_stable_and_content_sensitive(self):
        a, b = small_vocab(), small_vocab()
        assert a.vocab_id == b.vocab_id
        c = Vocabulary(atoms=a.atoms, supertokens=((0, 1),), name="toy")
        assert c.vocab_id != a.vocab_id


class TestPairCounting:
    def test_run_counting_no_overlap(self):
        assert pair_counts([0, 0, 0]) == {(0, 0): 1}
        assert pair_counts([0, 0, 0, 0]) == {(0, 0): 2}
        assert pair_counts([0, 0, 1]) == {(0, 0): 1, (0, 1): 1}

    def test_alternating(self):
        assert pair_counts([0, 1, 0, 1, 0, 1]) == {(0, 1): 3, (1, 0): 2}

    @given(st.lists(st.integers(0, 3), max_size=50))
    def test_matches_reference_per_pair(self, seq):
        counts = pair_counts(seq)
        candidates = {(seq[i], seq[i + 1]) for i in range(len(seq) - 1)}
        for pair in candidates:
            assert counts[pair] == reference_bpe.count_pair(seq, pair)
        assert set(counts) == candidates
        # the two naive counting mechanisms agree with each other too
        assert dict(counts) == reference_bpe.scan_counts(seq)

    @given(corpora, st.integers(0, 16))
    @settings(max_examples=40)
    def test_naive_references_agree(self, id_lists, merges):
        by_pair = reference_bpe.naive_train(id_lists, 6, merges)
        by_scan = reference_bpe.naive_train_scan(id_lists, 6, merges)
        assert by_pair == by_scan

    @given(st.lists(st.integers(0, 3), max_size=50), st.integers(0, 3), st.integers(0, 3))
    def test_merge_removes_count_tokens(self, seq, a, b):
        merged = merge_pair(seq, (a, b), 99)
        assert len(seq) - len(merged) == pair_counts(seq).get((a, b), 0)


class TestTrain:
    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            train([], small_vocab(), 1)

    def test_mixed_vocabulary_rejected(self):
        v1, v2 = small_vocab(), Vocabulary(
            atoms=tuple(AtomicToken(TokenKind.PITCH, i) for i in range(4)), name="other"
        )
        seqs = seqs_of(v1, [[0, 1]]) + seqs_of(v2, [[0, 1]])
        with pytest.raises(VocabularyMismatchError):
            train(seqs, v1, 1)

    def test_zero_merges_identity_encode(self):
        v = small_vocab()
        seqs = seqs_of(v, [[0, 1, 2, 3]])
        model = train(seqs, v, 0)
        assert model.merges == ()
        assert encode(seqs[0], model).ids == seqs[0].ids

    def test_ababab_hand_count(self):
        # (A,B) occurs 3 times, (B,A) only 2: one merge gives Z Z Z
        v = small_vocab()
        seqs = seqs_of(v, [[0, 1, 0, 1, 0, 1]])
        model = train(seqs, v, 1)
        assert model.merges[0].pair == (0, 1)
        assert model.merges[0].count_at_merge == 3
        assert encode(seqs[0], model).ids == (6, 6, 6)

    def test_stops_when_best_count_below_two(self):
        v = small_vocab()
        model = train(seqs_of(v, [[0, 1, 2, 3, 4, 5]]), v, 10)
        assert model.merges == ()

    def test_never_merges_across_pieces(self):
        # pair (1, 0) only ever arises if piece boundaries leak
        v = small_vocab()
        seqs = seqs_of(v, [[0, 1], [0, 1], [0, 1]])
        model = train(seqs, v, 5)
        assert all(r.pair == (0, 1) for r in model.merges)
        assert len(model.merges) == 1

    def test_default_tie_break_smallest_pair(self):
        v = small_vocab()
        seqs = seqs_of(v, [[0, 1, 0, 1], [2, 3, 2, 3]])
        model = train(seqs, v, 1)
        assert model.merges[0].pair == (0, 1)

    def test_custom_tie_break(self):
        v = small_vocab()
        seqs = seqs_of(v, [[0, 1, 0, 1], [2, 3, 2, 3]])
        model = train(seqs, v, 1, tie_break=lambda p: (-p[0], -p[1]))
        assert model.merges[0].pair == (2, 3)

    def test_aaa_counts_one_and_does_not_merge(self):
        v = small_vocab()
        model = train(seqs_of(v, [[0, 0, 0]]), v, 1)
        assert model.merges == ()

    def test_aaaaa_merges_left_to_right(self):
        v = small_vocab()
        seqs = seqs_of(v, [[0, 0, 0, 0, 0]])
        model = train(seqs, v, 1)
        assert model.merges[0] == MergeRule(pair=(0, 0), new_id=6, count_at_merge=2)
        assert encode(seqs[0], model).ids == (6, 6, 0)

    def test_determinism_across_runs(self, rng):
        v = small_vocab()
        id_lists = [[rng.randint(0, 5) for _ in range(rng.randint(0, 60))] for _ in range(10)]
        seqs = seqs_of(v, id_lists)
        m1 = train(seqs, v, 24)
        m2 = train(seqs, v, 24)
        assert m1.merges == m2.merges

    @given(corpora, st.integers(0, 24))
    @settings(max_examples=60)
    def test_oracle_equivalence(self, id_lists, merges):
        v = small_vocab()
        seqs = seqs_of(v, id_lists)
        model = train(seqs, v, merges)
        ref_merges, ref_final = reference_bpe.naive_train(id_lists, v.num_atoms, merges)
        assert [(r.pair, r.count_at_merge) for r in model.merges] == ref_merges
        for seq, expected in zip(seqs, ref_final):
            assert list(encode(seq, model).ids) == expected

    @given(corpora, st.integers(0, 24))
    @settings(max_examples=40)
    def test_compression_accounting(self, id_lists, merges):
        # every merge removes exactly count_at_merge tokens corpus-wide
        v = small_vocab()
        seqs = seqs_of(v, id_lists)
        model = train(seqs, v, merges)
        initial = sum(len(s.ids) for s in seqs)
        final = sum(len(encode(s, model).ids) for s in seqs)
        assert final == initial - sum(r.count_at_merge for r in model.merges)
        assert all(r.count_at_merge >= 2 for r in model.merges)


class TestEncodeDecode:
    def test_direct_substitution(self):
        v = small_vocab()
        seqs = seqs_of(v, [[0, 1, 0, 1]])
        model = train(seqs, v, 1)
        assert encode(seqs[0], model).ids == (6, 6)
        assert decode(encode(seqs[0], model), model).ids == (0, 1, 0, 1)

    def test_unknown_atomic_id_rejected(self):
        v = small_vocab()
        model = train(seqs_of(v, [[0, 1, 0, 1]]), v, 1)
        bad = make_sequence([0, 99], model.atom_vocab_id, "bad")
        with pytest.raises(VocabularyMismatchError):
            encode(bad, model)

    def test_vocab_mismatch_rejected(self):
        v = small_vocab()
        model = train(seqs_of(v, [[0, 1, 0, 1]]), v, 1)
        with pytest.raises(VocabularyMismatchError):
            encode(make_sequence([0, 1], "nonsense", "bad"), model)

    def test_decode_atomic_sequence_unchanged(self):
        v = small_vocab()
        model = train(seqs_of(v, [[0, 1, 0, 1]]), v, 1)
        seq = make_sequence([2, 3, 4], model.atom_vocab_id, "atoms")
        assert decode(seq, model).ids == (2, 3, 4)

    @given(corpora, st.lists(st.integers(0, 5), max_size=60), st.integers(0, 24))
    @settings(max_examples=60)
    def test_losslessness(self, id_lists, fresh, merges):
        v = small_vocab()
        model = train(seqs_of(v, id_lists), v, merges)
        seq = make_sequence(fresh, v.vocab_id, "fresh")
        assert decode(encode(seq, model), model).ids == tuple(fresh)

    @given(corpora, st.lists(st.integers(0, 5), max_size=60), st.integers(0, 24))
    @settings(max_examples=40)
    def test_encode_matches_naive_reference(self, id_lists, fresh, merges):
        v = small_vocab()
        model = train(seqs_of(v, id_lists), v, merges)
        seq = make_sequence(fresh, v.vocab_id, "fresh")
        expected = reference_bpe.naive_encode(
            fresh, [r.pair for r in model.merges], v.num_atoms
        )
        assert list(encode(seq, model).ids) == expected


class TestModelIO:
    def _model(self, merges=4, seed=1):
        rng = random.Random(seed)
        v = small_vocab()
        id_lists = [[rng.randint(0, 5) for _ in range(80)] for _ in range(6)]
        return train(seqs_of(v, id_lists), v, merges, corpus_name="toy-corpus")

    def test_empty_model_round_trip(self):
        v = small_vocab()
        model = train(seqs_of(v, [[0, 1]]), v, 0)
        assert load_model(save_model(model)) == model

    def test_many_merge_round_trip_bit_exact(self):
        model = self._model(merges=128, seed=3)
        data = save_model(model)
        loaded = load_model(data)
        assert loaded == model
        assert save_model(loaded) == data

    def test_flipped_byte_raises_load_error(self):
        data = bytearray(save_model(self._model()))
        for index in range(0, len(data), 7):
            mutated = bytearray(data)
            mutated[index] ^= 0x41
            with pytest.raises(ModelLoadError):
                load_model(bytes(mutated))

    def test_version_mismatch(self):
        import json

        doc = json.loads(save_model(self._model()))
        doc["version"] = 999
        with pytest.raises(ModelLoadError):
            load_model(json.dumps(doc).encode())

    def test_metadata_preserved(self):
        model = self._model()
        loaded = load_model(save_model(model))
        assert loaded.meta.corpus_name == "toy-corpus"
        assert loaded.meta.initial_corpus_length == 480
        assert loaded.meta.atom_vocab_id == model.meta.atom_vocab_id
