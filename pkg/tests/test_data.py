import json
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sple.data import (
    SyntheticSpec,
    binary_frame_size,
    binary_header_size,
    class_means,
    generate_synthetic_corpus,
    load_corpus,
    load_records,
    select_unlabeled,
    write_corpus,
    write_records,
)
from sple.errors import ConfigurationError, DataFormatError, DataIntegrityError, SizeError

from conftest import random_record_set
from oracles import oracle_nearest_mean


class TestSyntheticCorpus:
    def test_zero_noise_places_samples_on_class_means(self):
        spec = SyntheticSpec(
            n_classes=2, dimension=2, samples_per_class=1, separation=1.0, noise_sigma=0.0, seed=0
        )
        corpus = generate_synthetic_corpus(spec)
        assert len(corpus) == 2
        np.testing.assert_array_equal(corpus.samples[0].features, [1.0, 0.0])
        np.testing.assert_array_equal(corpus.samples[1].features, [0.0, 1.0])
        assert [s.gold_label for s in corpus.samples] == [0, 1]

    def test_same_seed_gives_identical_corpora(self):
        spec = SyntheticSpec(seed=7, samples_per_class=20)
        a = generate_synthetic_corpus(spec)
        b = generate_synthetic_corpus(spec)
        for sa, sb in zip(a.samples, b.samples):
            assert sa.sample_id == sb.sample_id
            assert sa.gold_label == sb.gold_label
            assert sa.features.tobytes() == sb.features.tobytes()

    def test_nearest_mean_oracle_scores_at_least_90_percent(self):
        # Well-separated blobs must be nearly nearest-mean-classifiable.
        spec = SyntheticSpec(
            n_classes=2, dimension=8, samples_per_class=500, separation=2.0, noise_sigma=1.0, seed=3
        )
        corpus = generate_synthetic_corpus(spec)
        acc = oracle_nearest_mean(
            [s.features for s in corpus.samples],
            [s.gold_label for s in corpus.samples],
            class_means(spec),
        )
        assert acc >= 0.90

    @pytest.mark.parametrize(
        "bad",
        [
            dict(samples_per_class=0),
            dict(n_classes=1),
            dict(separation=0.0),
            dict(noise_sigma=-1.0),
            dict(n_classes=4, dimension=3),
        ],
    )
    def test_invalid_spec_rejected(self, bad):
        with pytest.raises(ConfigurationError):
            generate_synthetic_corpus(SyntheticSpec(**bad))


class TestSelectUnlabeled:
    def test_full_pool_leaves_empty_eval(self):
        corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=10, seed=1))
        pool, held = select_unlabeled(corpus, len(corpus), seed=0)
        assert len(pool) == len(corpus) and held == []

    def test_empty_pool(self):
        corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=10, seed=1))
        pool, held = select_unlabeled(corpus, 0, seed=0)
        assert pool == [] and len(held) == len(corpus)

    def test_deterministic_selection(self):
        corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=50, seed=2))
        ids1 = [s.sample_id for s in select_unlabeled(corpus, 30, seed=11)[0]]
        ids2 = [s.sample_id for s in select_unlabeled(corpus, 30, seed=11)[0]]
        assert ids1 == ids2 and len(ids1) == 30

    def test_pool_and_eval_partition_the_corpus(self):
        corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=25, seed=5))
        pool, held = select_unlabeled(corpus, 17, seed=4)
        pool_ids = {s.sample_id for s in pool}
        held_ids = {s.sample_id for s in held}
        assert pool_ids.isdisjoint(held_ids)
        assert pool_ids | held_ids == {s.sample_id for s in corpus.samples}
        assert all(s.gold_label is None for s in pool)
        assert all(s.gold_label is not None for s in held)

    def test_oversized_request_raises(self):
        corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=5, seed=0))
        with pytest.raises(SizeError):
            select_unlabeled(corpus, len(corpus) + 1, seed=0)


class TestRecordFiles:
    @pytest.mark.parametrize("fmt", ["jsonl", "binary"])
    def test_round_trip_is_lossless(self, rng, fmt, tmp_path):
        rs = random_record_set(rng)
        path = tmp_path / f"records.{fmt}"
        write_records(rs, path, format=fmt)
        assert load_records(path) == rs

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_round_trip_property_both_formats(self, seed, tmp_path_factory):
        rng = np.random.default_rng(seed)
        rs = random_record_set(rng)
        base = tmp_path_factory.mktemp("rt")
        for fmt in ("jsonl", "binary"):
            path = base / f"{seed}.{fmt}"
            write_records(rs, path, format=fmt)
            assert load_records(path) == rs

    def test_binary_payload_size_matches_format_arithmetic(self, rng, tmp_path):
        rs = random_record_set(rng, m=3, n=2, e_dim=4, n_classes=2)
        path = tmp_path / "records.bin"
        write_records(rs, path, format="binary")
        expected = binary_header_size() + 3 * 2 * binary_frame_size(2, 4)
        assert os.path.getsize(path) == expected

    def test_corrupted_magic_is_a_format_error(self, rng, tmp_path):
        rs = random_record_set(rng)
        path = tmp_path / "records.bin"
        write_records(rs, path, format="binary")
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(DataFormatError, match="magic"):
            load_records(path)

    def test_truncated_binary_names_byte_offset(self, rng, tmp_path):
        rs = random_record_set(rng, m=2, n=2, e_dim=3, n_classes=2)
        path = tmp_path / "records.bin"
        write_records(rs, path, format="binary")
        blob = path.read_bytes()
        path.write_bytes(blob[:-5])
        with pytest.raises(DataFormatError, match="byte"):
            load_records(path)

    def test_jsonl_line_count_mismatch_is_a_format_error(self, rng, tmp_path):
        rs = random_record_set(rng, m=2, n=2)
        path = tmp_path / "records.jsonl"
        write_records(rs, path, format="jsonl")
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(DataFormatError, match="record lines"):
            load_records(path)

    def test_missing_pass_is_an_integrity_error(self, rng, tmp_path):
        rs = random_record_set(rng, m=3, n=2, e_dim=2, n_classes=2)
        path = tmp_path / "records.jsonl"
        write_records(rs, path, format="jsonl")
        lines = path.read_text().splitlines()
        # Retag one record to another sample: pass multiset now broken.
        obj = json.loads(lines[1])
        donor = json.loads(lines[-1])
        obj["sample_id"] = donor["sample_id"]
        obj["pass"] = donor["pass"]
        lines[1] = json.dumps(obj)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataIntegrityError):
            load_records(path)


class TestCorpusFiles:
    def test_corpus_round_trip(self, tmp_path):
        corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=12, seed=9))
        path = tmp_path / "corpus.jsonl"
        write_corpus(corpus, path)
        loaded = load_corpus(path)
        assert loaded.dimension == corpus.dimension
        assert loaded.n_classes == corpus.n_classes
        assert loaded.task_kind == corpus.task_kind
        for a, b in zip(loaded.samples, corpus.samples):
            assert a.sample_id == b.sample_id
            assert a.gold_label == b.gold_label
            assert a.features.tobytes() == b.features.tobytes()

    def test_bad_corpus_magic(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"magic":"NOPE"}\n')
        with pytest.raises(DataFormatError, match="magic"):
            load_corpus(path)
