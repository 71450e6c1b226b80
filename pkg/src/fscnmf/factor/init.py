import warnings

import numpy as np

from ..exceptions import ConvergenceError, ParameterError
from ..linalg import truncated_svd
from .params import FactorState, canonical_variant


def _mean(X):
    return float(X.sum()) / (X.shape[0] * X.shape[1])


def nndsvd(X, k, seed=0, fill_zeros=False):
    """Non-negative double SVD start ``X ~ W H``.

    The leading singular pair is used in absolute value; for every further
    pair, the dominant of its positive and negative sections is kept.
    With ``fill_zeros`` (the "-a" flavour) exact zeros are replaced by the mean
    of ``X`` so multiplicative updates can move them.
    """
    try:
        u, s, vt = truncated_svd(X, k, seed=seed)
    except ConvergenceError as exc:
        # a starting point does not need fully converged singular vectors
        warnings.warn(f"NNDSVD: {exc}; using the last iterate", stacklevel=2)
        u, s, vt = exc.result
    n_rows, n_cols = X.shape
    W = np.zeros((n_rows, k))
    H = np.zeros((k, n_cols))

    W[:, 0] = np.sqrt(s[0]) * np.abs(u[:, 0])
    H[0, :] = np.sqrt(s[0]) * np.abs(vt[0, :])
    for j in range(1, k):
        x, y = u[:, j], vt[j, :]
        xp, yp = np.maximum(x, 0), np.maximum(y, 0)
        xn, yn = np.maximum(-x, 0), np.maximum(-y, 0)
        xp_norm, yp_norm = np.linalg.norm(xp), np.linalg.norm(yp)
        xn_norm, yn_norm = np.linalg.norm(xn), np.linalg.norm(yn)
        mp, mn = xp_norm * yp_norm, xn_norm * yn_norm
        if mp == 0 and mn == 0:
            continue
        if mp > mn:
            a, b, sigma = xp / xp_norm, yp / yp_norm, mp
        else:
            a, b, sigma = xn / xn_norm, yn / yn_norm, mn
        scale = np.sqrt(s[j] * sigma)
        W[:, j] = scale * a
        H[j, :] = scale * b

    if fill_zeros:
        avg = _mean(X)
        W[W == 0] = avg
        H[H == 0] = avg
    return W, H


def init_factors(M, C, k, method="nndsvd", seed=0, variant="als"):
    """Starting FactorState: (B1, B2) from ``M`` and (U, V) from ``C``."""
    n, d = C.shape
    if M.shape != (n, n):
        raise ParameterError(f"M must be {n}x{n}, got {M.shape}")
    if int(k) != k or not 1 <= k < min(n, d):
        raise ParameterError(f"k={k} must satisfy 1 <= k < min(n={n}, d={d})")
    k = int(k)
    variant = canonical_variant(variant)

    if method == "nndsvd":
        fill = variant != "als"
        B1, B2 = nndsvd(M, k, seed=seed, fill_zeros=fill)
        U, V = nndsvd(C, k, seed=seed + 1, fill_zeros=fill)
    elif method == "random":
        rng = np.random.default_rng(seed)
        low = np.finfo(np.float64).tiny
        B1 = rng.uniform(low, 1.0, (n, k))
        B2 = rng.uniform(low, 1.0, (k, n))
        U = rng.uniform(low, 1.0, (n, k))
        V = rng.uniform(low, 1.0, (k, d))
    else:
        raise ParameterError(f"unknown init method {method!r}")
    return FactorState(B1, B2, U, V)

