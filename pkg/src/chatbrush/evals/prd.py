"""Precision-recall analysis of generative distributions.

Cluster-histogram method: joint k-means over both feature sets, per-set
cluster histograms, then the PR trade-off curve over a sweep of likelihood
ratios. Summarised by max F1 and the F_beta pair (beta = 8 and 1/8).
"""
import numpy as np
from sklearn.cluster import KMeans

from chatbrush import DataError

DEFAULT_CLUSTERS = 20
DEFAULT_ANGLES = 1001
KMEANS_SEED = 0


def cluster_histograms(a, b, k_clusters=DEFAULT_CLUSTERS, seed=KMEANS_SEED):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < k_clusters or len(b) < k_clusters:
        raise DataError(f"need at least k={k_clusters} samples in each set")
    km = KMeans(n_clusters=k_clusters, random_state=seed, n_init=10)
    labels = km.fit_predict(np.concatenate([a, b], axis=0))
    la, lb = labels[:len(a)], labels[len(a):]
    p = np.bincount(la, minlength=k_clusters) / len(a)
    q = np.bincount(lb, minlength=k_clusters) / len(b)
    return p, q


def prd_curve_from_histograms(p, q, n_angles=DEFAULT_ANGLES):
    """PR pairs over angles in (0, pi/2); precision for q, recall for p."""
    angles = np.linspace(1e-10, np.pi / 2.0 - 1e-10, n_angles)
    slopes = np.tan(angles)
    precision = np.minimum(slopes[:, None] * p[None, :], q[None, :]).sum(axis=1)
    recall = precision / np.maximum(slopes, 1e-300)
    return np.clip(precision, 0.0, 1.0), np.clip(recall, 0.0, 1.0)


def _f_beta(precision, recall, beta):
    num = (1.0 + beta ** 2) * precision * recall
    den = beta ** 2 * precision + recall
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(den > 0, num / den, 0.0)
    return float(f.max())


def prd(a, b, k_clusters=DEFAULT_CLUSTERS, n_angles=DEFAULT_ANGLES, seed=KMEANS_SEED):
    """Full PRD result: curve plus {max_f1, f_8, f_1_8} summary."""
    p, q = cluster_histograms(a, b, k_clusters=k_clusters, seed=seed)
    precision, recall = prd_curve_from_histograms(p, q, n_angles=n_angles)
    return {
        "precision": precision,
        "recall": recall,
        "max_f1": _f_beta(precision, recall, 1.0),
        "f_8": _f_beta(precision, recall, 8.0),
        "f_1_8": _f_beta(precision, recall, 1.0 / 8.0),
    }
