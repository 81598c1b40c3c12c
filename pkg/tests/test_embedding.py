import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xamr.embedding import HashingEmbedder, cosine, embed
from xamr.errors import DimensionMismatch

# frozen from the documented formula, computed independently before the build
GOLDEN_NEAR = 0.5163977794943224
GOLDEN_FAR = 0.0


def test_unit_norm_or_zero():
    for text in ("HP acquired EYP", "a", "", " .,;!", "x " * 500):
        v = embed(text)
        norm = np.linalg.norm(v)
        assert norm == pytest.approx(1.0, abs=1e-12) or norm == 0.0


def test_empty_text_zero_vector():
    assert np.all(embed("") == 0.0)
    assert np.all(embed("!!! ???") == 0.0)


def test_deterministic_same_process():
    a = embed("HP acquired EYP")
    b = embed("HP acquired EYP")
    assert np.array_equal(a, b)


def test_golden_cosines():
    e1 = embed("HP acquired EYP")
    e2 = embed("HP acquires EYP Mission Critical")
    e3 = embed("quarterly weather report")
    assert cosine(e1, e2) == pytest.approx(GOLDEN_NEAR, abs=1e-12)
    assert cosine(e1, e3) == pytest.approx(GOLDEN_FAR, abs=1e-12)
    assert cosine(e1, e2) > cosine(e1, e3)


def test_case_and_punctuation_insensitive():
    assert np.array_equal(embed("HP, acquired; EYP!"), embed("hp acquired eyp"))


def test_cosine_identity_and_zero():
    v = embed("HP acquired EYP")
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)
    assert cosine(v, np.zeros_like(v)) == 0.0


def test_cosine_hand_value():
    a = np.array([1.0, 0.0, 0.0, 0.0])
    b = np.array([0.6, 0.8, 0.0, 0.0])
    assert cosine(a, b) == pytest.approx(0.6, abs=1e-12)


def test_cosine_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cosine(np.zeros(4), np.zeros(5))


def test_cosine_scale_invariant():
    a = embed("HP acquired EYP")
    b = embed("HP acquires EYP Mission Critical")
    assert cosine(3.5 * a, b) == pytest.approx(cosine(a, b), abs=1e-12)


def test_custom_dimension():
    small = HashingEmbedder(dim=16)
    assert small.embed("HP acquired EYP").shape == (16,)


@given(st.text(max_size=80))
def test_embed_total_and_bounded(text):
    v = embed(text)
    assert v.shape == (256,)
    assert np.isfinite(v).all()
    norm = np.linalg.norm(v)
    assert norm == 0.0 or abs(norm - 1.0) < 1e-9
