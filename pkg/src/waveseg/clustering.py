"""Hard (K-means) and fuzzy (FCM) clustering of per-pixel feature vectors.

Both algorithms take a :class:`~waveseg.wavelets.FeatureField` (or a plain
``(N, D)`` / ``(H, W, D)`` array). With a one-component intensity field they
are the conventional intensity-only algorithms.

All cross-pixel reductions go through ``ndarray.sum``/``mean`` on contiguous
arrays, never BLAS, so results do not depend on the thread count.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .wavelets import FeatureField


@dataclass
class ClusterResult:
    labels: np.ndarray
    centroids: np.ndarray
    objective_trace: list[float]
    iterations: int
    converged: bool
    seed: int
    membership: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _matrix(ff):
    """Return ``(X, spatial_shape)`` with ``X`` a contiguous ``(N, D)`` float array."""
    if isinstance(ff, FeatureField):
        v = ff.vectors
    else:
        v = np.asarray(ff, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim == 3:
        return np.ascontiguousarray(v.reshape(-1, v.shape[2]), dtype=np.float64), v.shape[:2]
    if v.ndim == 2:
        return np.ascontiguousarray(v, dtype=np.float64), (v.shape[0],)
    raise ConfigError(f"cannot interpret features of shape {v.shape}")


def squared_distances(X, centroids) -> np.ndarray:
    """``(N, C)`` matrix of squared Euclidean distances."""
    X = np.asarray(X, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    out = np.empty((X.shape[0], centroids.shape[0]))
    for k, c in enumerate(centroids):
        diff = X - c
        out[:, k] = (diff * diff).sum(axis=1)
    return out


def kmeans_plus_plus(X, C, rng) -> np.ndarray:
    """k-means++ seeding; indices drawn from ``rng``."""
    n = X.shape[0]
    idx = [int(rng.integers(n))]
    d2 = squared_distances(X, X[idx])[:, 0]
    for _ in range(1, C):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        d2 = np.minimum(d2, squared_distances(X, X[nxt : nxt + 1])[:, 0])
    return X[idx].copy()


def assign_hard(ff, centroids) -> np.ndarray:
    """Nearest centroid per pixel; ties go to the lowest class index."""
    X, shape = _matrix(ff)
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    if centroids.shape[1] != X.shape[1]:
        raise ConfigError(
            f"centroid dim {centroids.shape[1]} does not match feature dim {X.shape[1]}"
        )
    return np.argmin(squared_distances(X, centroids), axis=1).reshape(shape)


def _means(X, labels, C):
    cen = np.zeros((C, X.shape[1]))
    for k in range(C):
        members = X[labels == k]
        if len(members):
            cen[k] = members.mean(axis=0)
    return cen


def _fill_empty(X, labels, C):
    """Move the point farthest from its class mean into each empty class."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=C)
    for k in np.flatnonzero(counts == 0):
        cen = _means(X, labels, C)
        d2 = ((X - cen[labels]) ** 2).sum(axis=1)
        # never empty a class to fill another
        d2[np.bincount(labels, minlength=C)[labels] <= 1] = -1.0
        far = int(np.argmax(d2))
        labels[far] = k
    return labels


def update_centroids(ff, labels, C: int) -> np.ndarray:
    """Class means. An empty class receives the point farthest from its own mean."""
    X, _ = _matrix(ff)
    labels = np.asarray(labels).ravel()
    labels = _fill_empty(X, labels, C)
    return _means(X, labels, C)


def kmeans_objective(X, labels, centroids) -> float:
    diff = X - centroids[labels]
    return float((diff * diff).sum())


def _check_classes(n, C):
    if C < 1:
        raise ConfigError("need at least one class")
    if C > n:
        raise ConfigError(f"{C} classes requested for {n} pixels")


def kmeans_w(ff, C: int = 2, max_iter: int = 300, tol: float = 1e-6, seed: int = 0,
             init=None, callback=None) -> ClusterResult:
    """Lloyd iterations on the feature vectors.

    Stops when no label changes, the objective drops by less than ``tol``, or
    after ``max_iter`` iterations. ``init`` overrides the k-means++ seeding.
    """
    X, shape = _matrix(ff)
    _check_classes(X.shape[0], C)
    rng = np.random.default_rng(seed)
    cen = kmeans_plus_plus(X, C, rng) if init is None else np.array(init, dtype=np.float64)
    labels = None
    trace: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        new = np.argmin(squared_distances(X, cen), axis=1)
        new = _fill_empty(X, new, C)
        cen = _means(X, new, C)
        trace.append(kmeans_objective(X, new, cen))
        if callback is not None:
            callback(it, new, cen)
        if labels is not None:
            changed = int(np.count_nonzero(new != labels))
            if changed == 0 or trace[-2] - trace[-1] < tol:
                labels = new
                converged = True
                break
        labels = new
        if C == 1:
            converged = True
            break
    return ClusterResult(labels.reshape(shape), cen, trace, it, converged, seed)


def fcm_membership_update(ff, centroids, q: float = 2.0) -> np.ndarray:
    """u_jk = 1 / sum_l (d_jk / d_jl)^(2/(q-1)), rows summing to one.

    A pixel that coincides with one or more centroids splits its membership
    equally among them.
    """
    if not q > 1:
        raise ConfigError(f"fuzzifier must exceed 1, got {q}")
    X, shape = _matrix(ff)
    d2 = squared_distances(X, centroids)
    u = np.empty_like(d2)
    zero = d2 == 0.0
    hit = zero.any(axis=1)
    if hit.any():
        z = zero[hit].astype(np.float64)
        u[hit] = z / z.sum(axis=1, keepdims=True)
    rest = ~hit
    if rest.any():
        r = d2[rest]
        r = r / r.min(axis=1, keepdims=True)
        inv = r ** (-1.0 / (q - 1.0))
        u[rest] = inv / inv.sum(axis=1, keepdims=True)
    return u.reshape(*shape, -1)


def fcm_centroid_update(ff, u, q: float = 2.0) -> np.ndarray:
    """F_k = sum_j u_jk^q F_j / sum_j u_jk^q.

    A class whose membership column is all zero is re-seeded at the pixel
    farthest from its nearest other centroid.
    """
    X, _ = _matrix(ff)
    u = np.asarray(u, dtype=np.float64).reshape(X.shape[0], -1)
    wq = u**q
    C = u.shape[1]
    cen = np.zeros((C, X.shape[1]))
    # one contiguous 1-D sum per component, the same order a scalar FCM uses
    XT = np.ascontiguousarray(X.T)
    empty = []
    for k in range(C):
        wk = np.ascontiguousarray(wq[:, k])
        s = wk.sum()
        if s <= 1e-300:
            empty.append(k)
            continue
        cen[k] = [(wk * xd).sum() / s for xd in XT]
    if empty:
        good = [k for k in range(C) if k not in empty]
        for k in empty:
            if good:
                d2 = squared_distances(X, cen[good]).min(axis=1)
                cen[k] = X[int(np.argmax(d2))]
            else:
                cen[k] = X.mean(axis=0)
            good.append(k)
    return cen


def fcm_objective(X, u, centroids, q) -> float:
    return float((u**q * squared_distances(X, centroids)).sum())


def fcm_w(ff, C: int = 2, q: float = 2.0, max_iter: int = 300, tol: float = 1e-6,
          seed: int = 0, init=None, callback=None) -> ClusterResult:
    """Alternating membership/centroid updates; converged when max |du| < tol.

    ``callback(iteration, u, centroids)`` is invoked after every iteration.
    """
    if not q > 1:
        raise ConfigError(f"fuzzifier must exceed 1, got {q}")
    X, shape = _matrix(ff)
    _check_classes(X.shape[0], C)
    rng = np.random.default_rng(seed)
    cen = kmeans_plus_plus(X, C, rng) if init is None else np.array(init, dtype=np.float64)
    u = fcm_membership_update(X, cen, q)
    trace: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        cen = fcm_centroid_update(X, u, q)
        trace.append(fcm_objective(X, u, cen, q))
        if callback is not None:
            callback(it, u, cen)
        new = fcm_membership_update(X, cen, q)
        delta = float(np.max(np.abs(new - u)))
        u = new
        if delta < tol:
            converged = True
            break
    labels = defuzzify(u).reshape(shape)
    return ClusterResult(labels, cen, trace, it, converged, seed,
                         membership=u.reshape(*shape, C))


def defuzzify(u) -> np.ndarray:
    """Per-pixel argmax over the last axis; ties go to the lowest class index."""
    return np.argmax(np.asarray(u), axis=-1)
