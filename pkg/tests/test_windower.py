import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szdetect.edf import AnnotationSet, recording_from_physical
from szdetect.windower import WindowConfig, WindowConfigError, segment, segment_array, window_count, window_labels


def flat_recording(seconds, fs=256, channels=2):
    data = np.tile(np.arange(seconds * fs, dtype=float) % 1000, (channels, 1))
    return recording_from_physical("r", [f"C{i}" for i in range(channels)], data, fs=fs)


def test_hour_of_8s_windows():
    assert window_count(3600, WindowConfig(8)) == 450
    rec = flat_recording(3600, fs=16, channels=1)
    windows, starts, labels = segment_array(rec, None, WindowConfig(8))
    assert len(windows) == 450 and starts[-1] == 3592


def test_no_annotations_all_zero():
    rec = flat_recording(64)
    labels = [w.label for w in segment(rec, AnnotationSet("r"), WindowConfig(4))]
    assert labels == [0] * 16


def test_seizure_overlap_labels():
    rec = flat_recording(24)
    wins = list(segment(rec, AnnotationSet("r", ((10, 20),)), WindowConfig(4)))
    got = {w.start_s: w.label for w in wins}
    assert got == {0.0: 0, 4.0: 0, 8.0: 1, 12.0: 1, 16.0: 1, 20.0: 0}


def test_touching_boundary_is_not_overlap():
    assert window_labels(np.array([0.0, 8.0]), 8, AnnotationSet("r", ((16.0, 20.0),))).tolist() == [0, 0]


def test_trailing_partial_window_dropped():
    rec = flat_recording(21)
    _, starts, _ = segment_array(rec, None, WindowConfig(8))
    assert starts.tolist() == [0.0, 8.0]


def test_windows_tile_the_signal():
    rec = flat_recording(40, channels=3)
    windows, starts, _ = segment_array(rec, None, WindowConfig(8))
    np.testing.assert_array_equal(np.concatenate(list(windows), axis=1), rec.data[:, : 5 * 8 * 256])


def test_overlapping_stride():
    rec = flat_recording(16)
    windows, starts, _ = segment_array(rec, None, WindowConfig(8, stride_s=2))
    assert starts.tolist() == [0, 2, 4, 6, 8]
    np.testing.assert_array_equal(windows[1], rec.data[:, 512:512 + 2048])


@pytest.mark.parametrize("kw", [dict(window_len_s=3), dict(window_len_s=2, stride_s=4), dict(window_len_s=2, stride_s=0)])
def test_bad_config(kw):
    with pytest.raises(WindowConfigError):
        WindowConfig(**kw)


def test_too_few_samples_for_dwt():
    with pytest.raises(WindowConfigError):
        WindowConfig(2).samples(4)


def test_empty_and_short_recordings():
    with pytest.raises(ValueError, match="empty"):
        segment_array(recording_from_physical("e", ["A"], np.zeros((1, 0))), None, WindowConfig(2))
    with pytest.raises(ValueError, match="shorter"):
        segment_array(flat_recording(1), None, WindowConfig(2))


@given(st.integers(8, 4000), st.sampled_from([2, 4, 8]), st.sampled_from([0.5, 1, 2]))
def test_window_count_formula(duration, length, stride_frac):
    cfg = WindowConfig(length, length * stride_frac if stride_frac <= 1 else None)
    assert window_count(duration, cfg) == math.floor((duration - length) / cfg.stride_s) + 1


@given(
    st.floats(0, 100), st.floats(0.1, 50), st.floats(0, 20), st.floats(0, 20), st.sampled_from([2, 4, 8])
)
def test_enlarging_seizure_never_unlabels(a, span, grow_left, grow_right, length):
    starts = np.arange(0, 200, length / 2)
    small = window_labels(starts, length, AnnotationSet("r", ((a, a + span),)))
    big = window_labels(starts, length, AnnotationSet("r", ((max(0.0, a - grow_left), a + span + grow_right),)))
    assert np.all(big >= small)
