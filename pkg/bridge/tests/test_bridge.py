"""Bridge behavior: structured errors, handle lifecycle, config plumbing."""

from __future__ import annotations

import numpy as np
import pytest

from modix_bridge import IO, OK, VALIDATION, analyze_v1, open_bridge, rescale_v1


@pytest.fixture
def handle():
    with open_bridge() as h:
        yield h


def matrices(seed=0, n_t=4, n_v=6, d=5):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_t, d)), rng.standard_normal((n_v, d))


def test_analyze_returns_structured_document(handle):
    text, vision = matrices()
    result = analyze_v1(handle, text, vision)
    assert result.ok and result.code == OK
    assert result.document["c_tilde"]["text"] + result.document["c_tilde"]["vision"] == pytest.approx(
        1.0, abs=1e-12)
    assert result.raw.endswith(b"\n")


def test_analyze_symmetric_matrices_split_evenly(handle):
    text, _ = matrices(seed=5)
    result = analyze_v1(handle, text, text.copy())
    assert result.ok
    assert result.document["c_tilde"]["text"] == pytest.approx(0.5, abs=1e-9)


def test_analyze_dimension_mismatch_is_structured(handle):
    result = analyze_v1(handle, np.ones((2, 3)), np.ones((2, 4)))
    assert not result.ok
    assert result.code == VALIDATION
    assert "DimensionMismatch" in result.message
    assert result.document is None


def test_analyze_non_finite_is_structured(handle):
    result = analyze_v1(handle, np.array([[np.nan, 1.0]]), np.ones((1, 2)))
    assert result.code == VALIDATION
    assert "NonFiniteValue" in result.message


def test_analyze_config_flags_reach_the_core():
    with open_bridge({"alpha": 1.0, "epsilon": 1e-4, "normalization": "shift"}) as handle:
        text, vision = matrices(seed=7)
        result = analyze_v1(handle, text, vision)
        assert result.ok
        assert result.document["alpha"] == 1.0
        assert result.document["epsilon"] == 1e-4
        assert result.document["c_tilde"]["text"] == result.document["i_intra"]["text"]


def test_released_handle_fails_cleanly():
    handle = open_bridge()
    handle.release()
    text, vision = matrices()
    assert analyze_v1(handle, text, vision).code == VALIDATION
    assert rescale_v1(handle, 3, 2, 1.0).code == VALIDATION


def test_broken_core_command_is_io_error():
    handle = open_bridge(command=["/nonexistent/interpreter"])
    text, vision = matrices()
    result = analyze_v1(handle, text, vision)
    assert result.code == IO
    assert not result.ok


def test_rescale_explicit_delta(handle):
    result = rescale_v1(handle, 3, 2, 2.0)
    assert result.ok
    np.testing.assert_array_equal(result.indices, [0.0, 1.0, 2.0, 4.0, 6.0])


def test_rescale_unit_delta_is_baseline(handle):
    result = rescale_v1(handle, 3, 2, 1.0)
    assert result.ok
    np.testing.assert_array_equal(result.indices, [0.0, 1.0, 2.0, 3.0, 4.0])


def test_rescale_config_delta_override():
    with open_bridge({"delta_override": 0.5}) as handle:
        result = handle.rescale(2, 3)
        assert result.ok
        np.testing.assert_array_equal(result.indices, [0.0, 1.0, 1.5, 2.0, 2.5])


def test_rescale_zero_delta_is_invalid(handle):
    result = rescale_v1(handle, 3, 2, 0.0)
    assert result.code == VALIDATION
    assert "InvalidStride" in result.message


def test_rescale_without_any_delta_is_invalid(handle):
    result = rescale_v1(handle, 3, 2)
    assert result.code == VALIDATION
    assert "InvalidStride" in result.message


def test_rescale_bad_counts_are_invalid(handle):
    assert rescale_v1(handle, 0, 2, 1.0).code == VALIDATION
    assert rescale_v1(handle, 2, -1, 1.0).code == VALIDATION
