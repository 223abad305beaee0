"""Shared helpers: subprocess CLI runner and fixture files."""

from __future__ import annotations

import os
import subprocess
import sys

import pytest


def run_cli(*args, env_extra=None, expect_code=0):
    env = os.environ.copy()
    if env_extra:
        env.update(env_extra)
    completed = subprocess.run(
        [sys.executable, "-m", "modix.cli", *map(str, args)],
        capture_output=True, text=True, env=env,
    )
    assert completed.returncode == expect_code, (
        f"exit {completed.returncode} != {expect_code}\nstdout: {completed.stdout}\n"
        f"stderr: {completed.stderr}"
    )
    return completed


@pytest.fixture
def fixture_memb(tmp_path):
    """Low-rank-vision synthetic container on disk."""
    path = tmp_path / "fixture.memb"
    run_cli("gen", "--n-t", 6, "--n-v", 12, "--d", 8, "--vision-rank", 1,
            "--seed", 7, "--output", path)
    return path


@pytest.fixture
def symmetric_memb(tmp_path):
    """Container whose vision rows equal its text rows."""
    import numpy as np

    from modix.seqio import Modality, MultimodalSequence, save_sequence

    rng = np.random.default_rng(40)
    shared = rng.standard_normal((5, 4)).astype(np.float32).astype(np.float64)
    path = tmp_path / "symmetric.memb"
    save_sequence(MultimodalSequence(((Modality.TEXT, shared), (Modality.VISION, shared.copy()))), path)
    return path
