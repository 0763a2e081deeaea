"""Planted-corpus generator: determinism, geometry, and encoder semantics."""

import json
from pathlib import Path

import cv2
import numpy as np
import pytest

from tzr.core import Box
from tzr.encoders import TestEncoder
from tzr.index import load_eval_pairs
from tzr.synthetic import generate_planted_corpus, make_planted_frame


class TestMakePlantedFrame:
    def test_square_geometry(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            image, box = make_planted_frame(bucket=4, rng=rng)
            assert image.shape == (512, 512, 3)
            assert image.dtype == np.uint8
            assert box.x1 - box.x0 == 48 and box.y1 - box.y0 == 48
            assert 0 <= box.x0 and box.x1 <= 512 and 0 <= box.y0 and box.y1 <= 512

    def test_square_is_aligned_to_detector_stride(self):
        rng = np.random.default_rng(52)
        for _ in range(20):
            _, box = make_planted_frame(bucket=0, rng=rng)
            assert box.x0 % 32 == 0
            assert box.y0 % 32 == 0

    def test_square_crop_encodes_to_its_bucket(self, encoder):
        rng = np.random.default_rng(53)
        for bucket in (0, 7, 15):
            image, box = make_planted_frame(bucket=bucket, rng=rng)
            crop = image[box.y0 : box.y1, box.x0 : box.x1]
            emb = encoder.encode_image(crop).embedding
            expect = np.zeros(16)
            expect[bucket] = 1.0
            assert np.allclose(emb, expect, atol=1e-12)

    def test_square_sits_in_a_dark_neighborhood(self):
        # The 16px ring around the square is dark corner noise, far dimmer
        # than the bright clutter field.
        rng = np.random.default_rng(54)
        image, box = make_planted_frame(bucket=3, rng=rng)
        ring = Box(box.x0 - 16, box.y0 - 16, box.x1 + 16, box.y1 + 16).clamp(512, 512)
        patch = image[ring.y0 : ring.y1, ring.x0 : ring.x1].astype(float)
        inner = image[box.y0 : box.y1, box.x0 : box.x1].astype(float)
        assert patch.mean() < 80
        assert image.astype(float).mean() > 100
        assert inner.max() <= 64  # dim square: value 0.25

    def test_attention_is_low_over_the_square(self, encoder):
        rng = np.random.default_rng(55)
        image, box = make_planted_frame(bucket=9, rng=rng)
        att = encoder.encode_image(image, want_attention=True).attention
        cell = att.values[box.y0 // 32, box.x0 // 32]
        assert cell < 0.4

    def test_clutter_pollutes_global_histogram(self, encoder):
        # The global embedding must NOT be the planted bucket's basis
        # vector; clutter blobs dominate the saturated-pixel histogram.
        rng = np.random.default_rng(56)
        image, _ = make_planted_frame(bucket=2, rng=rng)
        emb = encoder.encode_image(image).embedding
        assert emb[2] < 0.9
        assert np.count_nonzero(emb > 0.01) > 3


class TestGeneratePlantedCorpus:
    def test_layout_and_truth_file(self, small_corpus):
        root = Path(small_corpus.directory)
        frames = sorted(root.glob("frame_*.png"))
        assert len(frames) == 8
        truth = json.loads((root / "truth.json").read_text())
        assert truth["frame_size"] == 512
        assert truth["buckets"] == list(small_corpus.buckets)
        assert [Box(*b) for b in truth["squares"]] == list(small_corpus.squares)

    def test_buckets_rotate_round_robin(self, small_corpus):
        assert list(small_corpus.buckets) == [i % 16 for i in range(8)]

    def test_pairs_cover_every_bucket_in_use(self, small_corpus):
        loaded = load_eval_pairs(Path(small_corpus.directory) / "pairs.jsonl")
        assert loaded == list(small_corpus.pairs)
        by_query = {p.query: p.relevant for p in loaded}
        for frame_id, bucket in enumerate(small_corpus.buckets):
            assert frame_id in by_query[f"color:{bucket}"]

    def test_deterministic_across_runs(self, tmp_path):
        a = generate_planted_corpus(tmp_path / "a", n_frames=4, seed=99)
        b = generate_planted_corpus(tmp_path / "b", n_frames=4, seed=99)
        assert a.buckets == b.buckets
        assert a.squares == b.squares
        for i in range(4):
            pa = (tmp_path / "a" / f"frame_{i:04d}.png").read_bytes()
            pb = (tmp_path / "b" / f"frame_{i:04d}.png").read_bytes()
            assert pa == pb

    def test_seed_changes_content(self, tmp_path):
        a = generate_planted_corpus(tmp_path / "a", n_frames=2, seed=1)
        b = generate_planted_corpus(tmp_path / "b", n_frames=2, seed=2)
        assert a.squares != b.squares

    def test_saved_frames_decode_to_generated_pixels(self, tmp_path, encoder):
        corpus = generate_planted_corpus(tmp_path / "c", n_frames=1, seed=5)
        img = cv2.cvtColor(
            cv2.imread(str(tmp_path / "c" / "frame_0000.png")), cv2.COLOR_BGR2RGB
        )
        box = corpus.squares[0]
        crop = img[box.y0 : box.y1, box.x0 : box.x1]
        emb = encoder.encode_image(crop).embedding
        assert int(np.argmax(emb)) == corpus.buckets[0]
        assert emb[corpus.buckets[0]] == pytest.approx(1.0, abs=1e-6)

    def test_bucket_population_cap(self, benchmark_corpus):
        from collections import Counter

        population = Counter(benchmark_corpus.buckets)
        assert len(benchmark_corpus.buckets) == 100
        assert max(population.values()) <= 7
