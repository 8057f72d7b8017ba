"""Frechet distance between Gaussian fits of two feature sets.

fid = ||mu_A - mu_B||^2 + Tr(S_A + S_B - 2 (S_A S_B)^{1/2})

The matrix square root comes from eigendecompositions of symmetric PSD
matrices; eigenvalues in [-1e-8, 0) are clamped to zero, anything more
negative is a hard error.
"""
import numpy as np

from chatbrush import DataError

EIG_CLAMP_TOL = -1e-8


class FeatureSet:
    """n x d matrix of image features with enough rows for covariance."""

    def __init__(self, features):
        feats = np.asarray(features, dtype=np.float64)
        if feats.ndim != 2:
            raise DataError("features must be a 2-D (n, d) matrix")
        n, d = feats.shape
        if n < d + 1:
            raise DataError(f"need at least d+1={d + 1} samples for covariance, got {n}")
        if not np.isfinite(feats).all():
            raise DataError("features contain non-finite entries")
        self.features = feats
        self.n = n
        self.d = d

    @property
    def mean(self):
        return self.features.mean(axis=0)

    @property
    def cov(self):
        return np.cov(self.features, rowvar=False).reshape(self.d, self.d)


def _psd_sqrt(mat):
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    if vals.min() < EIG_CLAMP_TOL * max(1.0, abs(vals).max()):
        raise DataError(f"matrix is not PSD within tolerance (min eig {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(a, b):
    """Frechet distance; symmetric, >= 0, and 0 for identical sets."""
    a = a if isinstance(a, FeatureSet) else FeatureSet(a)
    b = b if isinstance(b, FeatureSet) else FeatureSet(b)
    if a.d != b.d:
        raise DataError(f"feature dims differ: {a.d} vs {b.d}")
    mu_diff = a.mean - b.mean
    ca, cb = a.cov, b.cov
    # Tr((S_A S_B)^{1/2}) via the similar symmetric product S_B^{1/2} S_A S_B^{1/2}
    sb_half = _psd_sqrt(cb)
    inner = sb_half @ ca @ sb_half
    vals = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    if vals.min() < EIG_CLAMP_TOL * max(1.0, abs(vals).max()):
        raise DataError(f"cross term not PSD within tolerance (min eig {vals.min():.3e})")
    tr_sqrt = np.sqrt(np.clip(vals, 0.0, None)).sum()
    value = float(mu_diff @ mu_diff + np.trace(ca) + np.trace(cb) - 2.0 * tr_sqrt)
    return max(value, 0.0)
