"""Noise schedule invariants and the forward process closed form."""
import numpy as np
import pytest

from chatbrush import DataError
from chatbrush.diffusion import NoiseSchedule, forward_diffuse


def test_linear_schedule_invariants():
    s = NoiseSchedule.linear()
    assert s.T == 1000
    assert s.alpha_bars[0] == 1.0
    assert np.all(np.diff(s.alpha_bars) < 0)
    assert 0 < s.betas[0] <= s.betas[-1] < 1


def test_bad_schedules_rejected():
    with pytest.raises(DataError):
        NoiseSchedule(np.array([0.02, 0.01]))  # decreasing
    with pytest.raises(DataError):
        NoiseSchedule(np.array([0.0, 0.01]))  # zero beta
    with pytest.raises(DataError):
        NoiseSchedule(np.array([0.5, 1.0]))  # beta_T >= 1


def test_forward_diffuse_exact_formula():
    s = NoiseSchedule.linear(T=100)
    rng = np.random.default_rng(0)
    z0 = rng.normal(size=(2, 3, 4, 4)).astype(np.float32)
    eps = rng.normal(size=z0.shape).astype(np.float32)
    t = np.array([10, 60])
    zt = forward_diffuse(z0, t, eps, s)
    ab = s.alpha_bar(t).astype(np.float32).reshape(2, 1, 1, 1)
    ref = np.sqrt(ab) * z0 + np.sqrt(1 - ab) * eps
    assert np.array_equal(zt, ref)


def test_forward_diffuse_at_abar_one_is_identity():
    # a schedule with beta so tiny that abar_1 ~ 1; use t where abar exactly 1:
    # abar(0) == 1 by definition, and forward at t=1 with eps=0 returns sqrt(abar_1) z0
    s = NoiseSchedule.linear(T=10)
    z0 = np.ones((1, 1, 2, 2), dtype=np.float64)
    zt = forward_diffuse(z0, 1, np.zeros_like(z0), s)
    assert np.allclose(zt, np.sqrt(s.alpha_bar(1)) * z0)


def test_forward_diffuse_shape_and_range_guards():
    s = NoiseSchedule.linear(T=10)
    z0 = np.zeros((1, 3, 4, 4))
    with pytest.raises(DataError):
        forward_diffuse(z0, 1, np.zeros((1, 3, 4, 5)), s)
    with pytest.raises(DataError):
        forward_diffuse(z0, 0, np.zeros_like(z0), s)
    with pytest.raises(DataError):
        forward_diffuse(z0, 11, np.zeros_like(z0), s)


def test_terminal_correlation_matches_root_abar():
    """corr(z_T, z0) over draws approximates sqrt(abar_T)."""
    s = NoiseSchedule.linear()
    rng = np.random.default_rng(42)
    n = 10_000
    z0 = rng.normal(size=n)
    eps = rng.normal(size=n)
    zt = np.sqrt(s.alpha_bar(s.T)) * z0 + np.sqrt(1 - s.alpha_bar(s.T)) * eps
    corr = np.corrcoef(z0, zt)[0, 1]
    assert abs(corr - np.sqrt(s.alpha_bar(s.T))) < 0.02


@pytest.mark.parametrize("t_frac", [0.001, 0.5, 1.0])
def test_marginal_mean_and_variance_monte_carlo(t_frac):
    """Elementwise MC mean/var within 3-sigma of the closed form."""
    s = NoiseSchedule.linear()
    t = max(1, int(round(t_frac * s.T)))
    rng = np.random.default_rng(7)
    z0 = rng.normal(size=(4, 3)).astype(np.float64)
    n = 10_000
    eps = rng.standard_normal((n,) + z0.shape)
    zt = forward_diffuse(np.broadcast_to(z0, (n,) + z0.shape).copy(),
                         np.full(n, t), eps, s)
    ab = s.alpha_bar(t)
    mean_se = np.sqrt((1 - ab) / n)
    assert np.all(np.abs(zt.mean(axis=0) - np.sqrt(ab) * z0) < 3 * mean_se + 1e-12)
    var = zt.var(axis=0)
    var_se = (1 - ab) * np.sqrt(2.0 / (n - 1))
    assert np.all(np.abs(var - (1 - ab)) < 3 * var_se + 1e-12)
