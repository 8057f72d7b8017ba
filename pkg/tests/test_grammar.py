"""Caption grammar: instance form, injectivity, exact round trip."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chatbrush.scenes import (CaptionParseError, ObjectSpec, SceneSpec,
                              caption, parse_caption, sample_scene)


def test_single_object_caption_shape():
    s = SceneSpec("white", "plain", (ObjectSpec("circle", "red", "small", "center"),))
    assert caption(s) == "a small red circle at the center on a white background"


def test_style_clause_present_iff_not_plain():
    s = SceneSpec("white", "night", (ObjectSpec("circle", "red", "small", "center"),))
    assert caption(s).endswith("in night style")
    assert "style" not in caption(SceneSpec("white", "plain", s.objects))


def test_round_trip_1k_scenes():
    for seed in range(1000):
        s = sample_scene(seed)
        assert parse_caption(caption(s)) == s


def test_captions_injective_over_10k_seeds():
    by_caption = {}
    for seed in range(10_000):
        s = sample_scene(seed)
        c = caption(s)
        if c in by_caption:
            assert by_caption[c] == s
        else:
            by_caption[c] = s


def test_garbage_rejected_with_diagnostic():
    with pytest.raises(CaptionParseError):
        parse_caption("colorless green ideas sleep furiously")


def test_unknown_color_names_offending_token():
    with pytest.raises(CaptionParseError) as exc:
        parse_caption("a small vermilion circle at the center on a white background")
    assert "vermilion" in str(exc.value)
    assert exc.value.token == "vermilion"


def test_truncated_caption_rejected():
    with pytest.raises(CaptionParseError):
        parse_caption("a small red circle at the")


def test_trailing_tokens_rejected():
    good = "a small red circle at the center on a white background"
    with pytest.raises(CaptionParseError):
        parse_caption(good + " extra words")


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_round_trip_property(seed):
    s = sample_scene(seed)
    assert parse_caption(caption(s)) == s
