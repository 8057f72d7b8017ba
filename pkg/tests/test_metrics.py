"""FID and PRD oracles plus the edit-quality report."""
import numpy as np
import pytest

from chatbrush import DataError
from chatbrush.embed import EmbedModel
from chatbrush.evals import FeatureSet, edit_quality_report, fid, prd
from chatbrush.evals.prd import prd_curve_from_histograms
from chatbrush.imaging import load_png
from chatbrush.synth import build_datasets, load_pairs

RNG = np.random.default_rng(0)


def test_fid_identity():
    a = RNG.normal(size=(150, 64))
    assert fid(a, a) < 1e-6


def test_fid_symmetry():
    a = RNG.normal(size=(150, 16))
    b = RNG.normal(loc=0.5, size=(140, 16))
    assert abs(fid(a, b) - fid(b, a)) < 1e-8
    assert fid(a, b) > 0


def test_fid_1d_delta_distributions():
    # deltas at 0 and 1: closed form (mu1-mu2)^2 + (s1-s2)^2 = 1
    a = np.zeros((12, 1))
    b = np.ones((12, 1))
    assert abs(fid(a, b) - 1.0) < 1e-12


def test_fid_closed_form_1d_gaussians():
    rng = np.random.default_rng(3)
    a = rng.normal(0.0, 1.0, size=(200_000, 1))
    b = rng.normal(2.0, 3.0, size=(200_000, 1))
    expected = (0.0 - 2.0) ** 2 + (1.0 - 3.0) ** 2
    assert abs(fid(a, b) - expected) < 0.15


def test_fid_input_guards():
    with pytest.raises(DataError):
        FeatureSet(np.zeros((64, 64)))  # n < d+1
    with pytest.raises(DataError):
        FeatureSet(np.full((10, 2), np.nan))
    with pytest.raises(DataError):
        fid(np.zeros((5, 2)), np.zeros((5, 3)))


def test_prd_identical_sets():
    a = RNG.normal(size=(100, 8))
    res = prd(a, a.copy())
    assert abs(res["max_f1"] - 1.0) < 1e-6


def test_prd_disjoint_sets():
    a = RNG.normal(loc=0.0, size=(100, 8))
    b = RNG.normal(loc=100.0, size=(100, 8))
    res = prd(a, b)
    assert res["max_f1"] < 1e-6


def test_prd_bounds_and_tradeoff():
    a = RNG.normal(size=(120, 4))
    b = np.concatenate([a[:60], RNG.normal(loc=5.0, size=(60, 4))])
    res = prd(a, b)
    assert np.all((res["precision"] >= 0) & (res["precision"] <= 1))
    assert np.all((res["recall"] >= 0) & (res["recall"] <= 1))
    assert 0 < res["max_f1"] <= 1
    # curve sweeps the likelihood ratio: precision rises as recall falls
    p, r = prd_curve_from_histograms(np.array([0.7, 0.3]), np.array([0.3, 0.7]))
    assert np.all(np.diff(p) >= -1e-9)
    assert np.all(np.diff(r) <= 1e-9)


def test_prd_needs_enough_samples():
    with pytest.raises(DataError):
        prd(np.zeros((5, 2)), np.zeros((100, 2)), k_clusters=20)


@pytest.fixture(scope="module")
def report_fixture(tmp_path_factory):
    out = tmp_path_factory.mktemp("repds")
    build_datasets(2, 80, seed=9, out_dir=str(out),
                   pair_kinds=("recolor", "replace_shape"))
    pairs = load_pairs(str(out))[:70]
    import os
    inputs = np.stack([load_png(os.path.join(out, p.original_image)) for p in pairs])
    truths = np.stack([load_png(os.path.join(out, p.edited_image)) for p in pairs])
    model = EmbedModel(rng=np.random.default_rng(1))
    model.trained = True
    return pairs, inputs, truths, model


def test_report_perfect_generator(report_fixture):
    pairs, inputs, truths, model = report_fixture
    rep = edit_quality_report(pairs, inputs, truths, truths.copy(), model)
    assert rep["mean_mse_to_truth"] == 0.0
    assert rep["fid_truth_vs_generated"] < 1e-6
    assert rep["fraction_closer_to_truth"] == 1.0
    assert abs(rep["prd"]["max_f1"] - 1.0) < 1e-6
    assert set(rep["per_kind"]) <= {"recolor", "replace_shape"}


def test_report_untrained_generator_is_finite(report_fixture):
    pairs, inputs, truths, model = report_fixture
    rng = np.random.default_rng(5)
    garbage = rng.random(truths.shape).astype(np.float32)
    rep = edit_quality_report(pairs, inputs, truths, garbage, model)
    for key in ("mean_mse_to_truth", "mean_mse_to_input", "fid_truth_vs_generated",
                "mean_directional_similarity"):
        assert np.isfinite(rep[key])
