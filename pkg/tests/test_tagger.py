import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from quotesum.tagger import (DEFAULT_TAGS, DimensionMismatch, DomainError,
                             TaggerTensors, classify_paragraph, decode_bio,
                             joint_loss, load_tagger_tensors,
                             save_tagger_tensors, sigmoid, softmax_rows,
                             token_label_probs)


def test_sigmoid_fixed_points():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(math.log(3.0)) == pytest.approx(0.75, abs=1e-12)
    assert sigmoid(-math.log(3.0)) == pytest.approx(0.25, abs=1e-12)


def test_sigmoid_saturates_without_overflow():
    assert sigmoid(1000.0) == pytest.approx(1.0)
    assert sigmoid(-1000.0) == pytest.approx(0.0)


@given(arrays(np.float64, (4, 6), elements=st.floats(-30, 30)))
def test_softmax_rows_sum_to_one(h):
    rows = softmax_rows(h)
    assert np.allclose(rows.sum(axis=1), 1.0, atol=1e-9)
    assert (rows >= 0).all()


@given(arrays(np.float64, (3, 5), elements=st.floats(-20, 20)),
       st.floats(-50, 50))
def test_softmax_shift_invariance(h, c):
    assert np.allclose(softmax_rows(h), softmax_rows(h + c), atol=1e-9)


def _tensors(H=None, h_cls=None, w_cls=None, b_cls=0.3):
    return TaggerTensors(
        H=np.ones((4, 3)) if H is None else H,
        h_cls=np.array([1.0, -2.0, 0.5]) if h_cls is None else h_cls,
        w_cls=np.array([0.2, 0.1, -0.4]) if w_cls is None else w_cls,
        b_cls=b_cls, W_sp=np.zeros((7, 3)), b_sp=np.zeros(7))


def test_classify_paragraph_is_sigmoid_of_dot():
    t = _tensors()
    expected = sigmoid(float(t.w_cls @ t.h_cls) + t.b_cls)
    assert classify_paragraph(t) == pytest.approx(expected, abs=1e-12)


def test_token_label_probs_shape():
    probs = token_label_probs(_tensors())
    assert probs.shape == (4, 7)
    assert np.allclose(probs.sum(axis=1), 1.0)


def test_joint_loss_hand_case():
    # p=0.5 gold=1 gives ln 2; uniform 3-way with gold tag 0 gives ln 3
    probs = np.full((1, 3), 1.0 / 3.0)
    loss = joint_loss(0.5, 1, probs, [0], alpha=1.0, beta=0.4)
    assert loss == pytest.approx(math.log(2) + 0.4 * math.log(3), abs=1e-6)


def test_joint_loss_perfect_prediction():
    probs = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert joint_loss(1.0, 1, probs, [0, 1], alpha=1.0, beta=0.4) < 1e-9


def test_joint_loss_clamps_zero_probability():
    probs = np.array([[0.0, 1.0]])
    loss = joint_loss(0.5, 1, probs, [0], alpha=1.0, beta=1.0)
    assert math.isfinite(loss)
    assert loss > 20  # -ln(1e-12) dominates


def test_joint_loss_rejects_bad_inputs():
    probs = np.full((1, 2), 0.5)
    with pytest.raises(DomainError):
        joint_loss(1.5, 1, probs, [0], alpha=1.0, beta=0.4)
    with pytest.raises(DomainError):
        joint_loss(0.5, 2, probs, [0], alpha=1.0, beta=0.4)
    with pytest.raises(DomainError):
        joint_loss(0.5, 1, probs, [5], alpha=1.0, beta=0.4)
    with pytest.raises(DomainError):
        joint_loss(0.5, 1, probs, [0], alpha=-1.0, beta=0.4)


def test_joint_loss_empty_sequence_has_no_tag_term():
    probs = np.zeros((0, 3))
    loss = joint_loss(0.5, 0, probs, [], alpha=1.0, beta=0.4)
    assert loss == pytest.approx(math.log(2), abs=1e-9)


def test_decode_simple_spans():
    # O B-speaker I-speaker O B-cue
    tags = DEFAULT_TAGS
    idx = {t: i for i, t in enumerate(tags)}
    rows = ["O", "B-source", "I-source", "O", "B-cue"]
    probs = np.zeros((len(rows), len(tags)))
    for r, t in enumerate(rows):
        probs[r, idx[t]] = 1.0
    assert decode_bio(probs, tags) == [
        ("source", (1, 3)), ("cue", (4, 5))]


def test_decode_repairs_orphan_inside_tag():
    tags = DEFAULT_TAGS
    idx = {t: i for i, t in enumerate(tags)}
    rows = ["O", "I-content", "I-content", "I-source"]
    probs = np.zeros((len(rows), len(tags)))
    for r, t in enumerate(rows):
        probs[r, idx[t]] = 1.0
    # orphan I-content becomes a new span; kind switch forces another
    assert decode_bio(probs, tags) == [
        ("content", (1, 3)), ("source", (3, 4))]


def test_tensor_validation():
    ok = TaggerTensors(
        H=np.zeros((5, 4)), h_cls=np.zeros(4), w_cls=np.zeros(4),
        b_cls=0.0, W_sp=np.zeros((7, 4)), b_sp=np.zeros(7))
    assert ok.H.dtype == np.float64
    with pytest.raises(DimensionMismatch):
        TaggerTensors(H=np.zeros((5, 4)), h_cls=np.zeros(3),
                      w_cls=np.zeros(4), b_cls=0.0,
                      W_sp=np.zeros((7, 4)), b_sp=np.zeros(7))
    with pytest.raises(DimensionMismatch):
        TaggerTensors(H=np.zeros((5, 4)), h_cls=np.zeros(4),
                      w_cls=np.zeros(4), b_cls=0.0,
                      W_sp=np.zeros((7, 3)), b_sp=np.zeros(7))


def test_tensor_tag_set_validation():
    with pytest.raises(DimensionMismatch):
        TaggerTensors(
            H=np.zeros((2, 4)), h_cls=np.zeros(4), w_cls=np.zeros(4),
            b_cls=0.0, W_sp=np.zeros((3, 4)), b_sp=np.zeros(3),
            tag_set=("O", "B-source", "I-cue"))  # I-cue missing its B


def test_tensor_file_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    tensors = TaggerTensors(
        H=rng.normal(size=(6, 4)), h_cls=rng.normal(size=4),
        w_cls=rng.normal(size=4), b_cls=0.25,
        W_sp=rng.normal(size=(7, 4)), b_sp=rng.normal(size=7))
    path = tmp_path / "tensors.json"
    save_tagger_tensors(tensors, path)
    again = load_tagger_tensors(path)
    assert np.array_equal(again.H, tensors.H)
    assert np.array_equal(again.W_sp, tensors.W_sp)
    assert again.b_cls == tensors.b_cls
    assert again.tag_set == tensors.tag_set


def test_tensor_file_missing_key(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"H": [[1.0]]}))
    with pytest.raises(DimensionMismatch):
        load_tagger_tensors(path)


@given(arrays(np.float64, (6, 7), elements=st.floats(0.001, 1.0)))
def test_decode_spans_are_disjoint_and_ordered(probs):
    spans = decode_bio(probs, DEFAULT_TAGS)
    prev_end = 0
    for _, (s, e) in spans:
        assert 0 <= s < e <= 6
        assert s >= prev_end
        prev_end = e
