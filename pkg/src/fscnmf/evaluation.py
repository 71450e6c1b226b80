"""Downstream evaluation of embeddings.

k-means with permutation-matched accuracy for clustering, and a k-nearest
neighbour classifier with macro/micro F1 on stratified splits.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.base import BaseEstimator, ClassifierMixin, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ParameterError, ShapeError, StratificationError, ValidationError


@dataclass
class ClusteringResult:
    assignments: np.ndarray
    inertia: float
    accuracy: float = None
    centers: np.ndarray = None
    n_iter: int = 0
    history: list = field(default_factory=list)


@dataclass
class ClassificationReport:
    macro_f1: float
    micro_f1: float
    per_class: dict
    train_fraction: float = None


def _kmeans_pp(X, K, rng):
    n = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers[c] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[c]) ** 2, axis=1))
    return centers


def _sq_distances(X, centers):
    return np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)


def _assign(X, centers):
    """Nearest-centre labels; an empty cluster takes the point farthest from its own centre."""
    dist = _sq_distances(X, centers)
    labels = np.argmin(dist, axis=1)
    for c in range(len(centers)):
        if not np.any(labels == c):
            own = dist[np.arange(len(X)), labels]
            counts = np.bincount(labels, minlength=len(centers))
            own[counts[labels] <= 1] = -1.0
            far = int(np.argmax(own))
            labels[far] = c
            centers[c] = X[far]
            dist[:, c] = np.sum((X - centers[c]) ** 2, axis=1)
    return labels, float(dist[np.arange(len(X)), labels].sum())


def _lloyd(X, centers, max_iters, tol):
    history = []
    for it in range(1, max_iters + 1):
        labels, inertia = _assign(X, centers)
        history.append(inertia)
        new_centers = np.array([X[labels == c].mean(axis=0) for c in range(len(centers))])
        shift = float(np.sum((new_centers - centers) ** 2))
        centers = new_centers
        if shift <= tol:
            break
    labels, inertia = _assign(X, centers)
    history.append(inertia)
    return labels, centers, inertia, it, history


def kmeans(X, K, seed=0, n_init=10, max_iters=300, tol=1e-6):
    """Lloyd's algorithm from k-means++ seeds; best of ``n_init`` restarts by inertia."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= K <= n:
        raise ParameterError(f"K={K} must lie in [1, n={n}]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        centers = _kmeans_pp(X, K, rng)
        labels, centers, inertia, n_iter, history = _lloyd(X, centers, max_iters, tol)
        if best is None or inertia < best.inertia:
            best = ClusteringResult(labels, inertia, None, centers, n_iter, history)
    return best


def _densify_labels(y):
    _, codes = np.unique(np.asarray(y), return_inverse=True)
    return codes.ravel()


def confusion_counts(pred, truth):
    pred = _densify_labels(pred)
    truth = _densify_labels(truth)
    size = max(pred.max(initial=-1), truth.max(initial=-1)) + 1
    counts = np.zeros((size, size), dtype=np.int64)
    np.add.at(counts, (pred, truth), 1)
    return counts


def unsup_accuracy(pred, truth):
    """Best-permutation accuracy, via optimal assignment on the confusion matrix."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(f"pred {pred.shape} and truth {truth.shape} differ in length")
    if pred.size == 0:
        raise ValidationError("cannot score an empty labelling")
    counts = confusion_counts(pred, truth)
    rows, cols = linear_sum_assignment(counts, maximize=True)
    return float(counts[rows, cols].sum()) / pred.size


def stratified_split(labels, train_fraction, seed=0):
    """Per-class shuffled split; every class keeps at least one train and one test member."""
    labels = np.asarray(labels)
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < 2:
            raise StratificationError(f"class {cls!r} has {members.size} member(s); need >= 2")
        members = members[rng.permutation(members.size)]
        n_train = int(np.floor(train_fraction * members.size + 0.5))
        n_train = min(max(n_train, 1), members.size - 1)
        train.append(members[:n_train])
        test.append(members[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def knn_classify(train_X, train_y, test_X, k_neighbors=5, chunk=64):
    """Majority vote among the ``k_neighbors`` nearest training points (Euclidean).

    Distance ties go to the lower training index, vote ties to the smallest label.
    """
    train_X = np.asarray(train_X, dtype=np.float64)
    test_X = np.asarray(test_X, dtype=np.float64)
    train_y = np.asarray(train_y)
    if train_X.shape[0] == 0:
        raise ValidationError("empty training set")
    if not 1 <= k_neighbors <= train_X.shape[0]:
        raise ParameterError(f"k_neighbors={k_neighbors} must lie in [1, {train_X.shape[0]}]")
    classes, codes = np.unique(train_y, return_inverse=True)
    out = np.empty(test_X.shape[0], dtype=np.int64)
    for start in range(0, test_X.shape[0], chunk):
        block = test_X[start : start + chunk]
        dist = _sq_distances(block, train_X)
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k_neighbors]
        for row, idx in enumerate(nearest):
            votes = np.bincount(codes[idx], minlength=classes.size)
            out[start + row] = int(np.argmax(votes))
    return classes[out]


def f1_scores(pred, truth, train_fraction=None):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(f"pred {pred.shape} and truth {truth.shape} differ in length")
    per_class = {}
    tp_all = fp_all = fn_all = 0
    for cls in np.union1d(pred, truth):
        tp = int(np.sum((pred == cls) & (truth == cls)))
        fp = int(np.sum((pred == cls) & (truth != cls)))
        fn = int(np.sum((pred != cls) & (truth == cls)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        key = cls.item() if hasattr(cls, "item") else cls
        per_class[key] = {"precision": precision, "recall": recall, "f1": f1}
        tp_all, fp_all, fn_all = tp_all + tp, fp_all + fp, fn_all + fn
    present = [c.item() if hasattr(c, "item") else c for c in np.unique(truth)]
    macro = float(np.mean([per_class[c]["f1"] for c in present])) if present else 0.0
    micro = 2 * tp_all / (2 * tp_all + fp_all + fn_all) if tp_all + fp_all + fn_all else 0.0
    return ClassificationReport(macro, float(micro), per_class, train_fraction)


class SeededKMeans(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`kmeans`."""

    def __init__(self, n_clusters=8, n_init=10, max_iter=300, tol=1e-6, random_state=0):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X)
        result = kmeans(X, self.n_clusters, self.random_state, self.n_init, self.max_iter, self.tol)
        self.labels_ = result.assignments
        self.cluster_centers_ = result.centers
        self.inertia_ = result.inertia
        self.n_iter_ = result.n_iter
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X)
        return np.argmin(_sq_distances(X, self.cluster_centers_), axis=1)


class NearestNeighborVote(ClassifierMixin, BaseEstimator):
    """Estimator wrapper around :func:`knn_classify`."""

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        self.X_ = check_array(X)
        self.y_ = np.asarray(y)
        self.classes_ = np.unique(self.y_)
        return self

    def predict(self, X):
        check_is_fitted(self, "X_")
        return knn_classify(self.X_, self.y_, check_array(X), self.n_neighbors)
