"""Shared fixtures: encoders, planted corpora, and a tiny video file."""

from __future__ import annotations

import cv2
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tzr import TestEncoder
from tzr.synthetic import generate_planted_corpus

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def encoder():
    return TestEncoder()


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """8 planted frames; enough for ingest/service plumbing tests."""
    root = tmp_path_factory.mktemp("small_corpus")
    return generate_planted_corpus(root / "frames", n_frames=8, seed=11)


@pytest.fixture(scope="session")
def benchmark_corpus(tmp_path_factory):
    """The full 100-frame benchmark corpus used by the acceptance suite."""
    root = tmp_path_factory.mktemp("benchmark_corpus")
    return generate_planted_corpus(root / "frames", n_frames=100, seed=7)


@pytest.fixture(scope="session")
def tiny_video(tmp_path_factory):
    """10-second 4 fps video whose frames encode their index in gray level."""
    path = tmp_path_factory.mktemp("video") / "clip.avi"
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"), 4.0, (64, 64))
    assert writer.isOpened()
    for i in range(40):
        writer.write(np.full((64, 64, 3), min(255, i * 6), np.uint8))
    writer.release()
    return str(path)
