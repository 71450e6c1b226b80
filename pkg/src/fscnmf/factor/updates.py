"""Factor update rules.

Three families share one calling convention:

* projected closed-form (ALS) solves, ``[(X H^T + a W_ref)(H H^T + (a + b) I)^-1]_+``;
* multiplicative rules, ``W * (negative gradient part) / (positive gradient part)``;
* the L1 variant of the multiplicative rules for the content factors.

Each rule works row block by row block (columns for the right-hand factors,
via the transposed problem). Blocks have a fixed size and only read shared
inputs, so ``n_jobs > 1`` spreads them over threads and reproduces the
single-threaded result bit for bit.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.sparse as sp

from ..linalg import as_csr, inverse_small

EPS = 1e-12
BLOCK_ROWS = 256
LINE_SEARCH_FLOOR = 1e-12


def _blockwise(n_rows, n_cols, fn, n_jobs=1):
    out = np.empty((n_rows, n_cols))
    slices = [slice(i, min(i + BLOCK_ROWS, n_rows)) for i in range(0, n_rows, BLOCK_ROWS)]
    if n_jobs is None or n_jobs == 1 or len(slices) < 2:
        for sl in slices:
            out[sl] = fn(sl)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            for sl, block in zip(slices, pool.map(fn, slices)):
                out[sl] = block
    return out


def _rows(X):
    """Row-sliceable view of a data matrix (CSR for sparse, ndarray otherwise)."""
    if sp.issparse(X):
        return as_csr(X)
    return np.asarray(X, dtype=np.float64)


def _cols(X):
    """Row-sliceable view of ``X.T``."""
    if sp.issparse(X):
        return as_csr(X).T.tocsr()
    return np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)


def _dense(x):
    return np.asarray(x.toarray() if sp.issparse(x) else x)


def _clip(x, project):
    return np.maximum(x, 0.0) if project else x


# --- projected closed-form updates -------------------------------------------------


def _left_solve(X, H, W_ref, coupling, ridge, project, n_jobs):
    """``[(X H^T + coupling * W_ref)(H H^T + (coupling + ridge) I)^-1]_+``."""
    k = H.shape[0]
    ginv = inverse_small(H @ H.T + (coupling + ridge) * np.eye(k))
    Xr = _rows(X)
    Ht = np.ascontiguousarray(H.T)

    def block(sl):
        rhs = _dense(Xr[sl] @ Ht) + coupling * W_ref[sl]
        return _clip(rhs @ ginv, project)

    return _blockwise(Xr.shape[0], k, block, n_jobs)


def _right_solve(X, W, ridge, project, n_jobs):
    """``[(W^T W + ridge I)^-1 W^T X]_+``, computed on the transposed problem."""
    k = W.shape[1]
    ginv_t = inverse_small(W.T @ W + ridge * np.eye(k)).T
    Xt = _cols(X)

    def block(sl):
        return _clip(_dense(Xt[sl] @ W) @ ginv_t, project)

    return np.ascontiguousarray(_blockwise(Xt.shape[0], k, block, n_jobs).T)


def update_b1_als(M, B2, U, alpha1, alpha2, project=True, n_jobs=1):
    return _left_solve(M, B2, U, alpha1, alpha2, project, n_jobs)


def update_b2_als(M, B1, alpha3, project=True, n_jobs=1):
    return _right_solve(M, B1, alpha3, project, n_jobs)


def update_u_als(C, V, B1, beta1, beta2, project=True, n_jobs=1):
    return _left_solve(C, V, B1, beta1, beta2, project, n_jobs)


def update_v_als(C, U, beta3, project=True, n_jobs=1):
    return _right_solve(C, U, beta3, project, n_jobs)


# --- multiplicative updates ----------------------------------------------------------


def _ratio(W, num, den):
    """``num / (den + EPS)`` with the ratio pinned to 0 wherever ``W`` is 0."""
    return np.where(W > 0, num / (den + EPS), 0.0)


def _left_ratio(X, W, H, W_ref, coupling, ridge, l1, n_jobs):
    HHt = H @ H.T
    Xr = _rows(X)
    Ht = np.ascontiguousarray(H.T)

    def block(sl):
        w = W[sl]
        num = _dense(Xr[sl] @ Ht) + coupling * W_ref[sl]
        if l1:
            num = np.maximum(num - ridge, 0.0)
            den = w @ HHt + coupling * w
        else:
            den = w @ HHt + (coupling + ridge) * w
        return _ratio(w, num, den)

    return _blockwise(W.shape[0], W.shape[1], block, n_jobs)


def _right_ratio(X, W, H, ridge, l1, n_jobs):
    WtW = W.T @ W
    Xt = _cols(X)
    Ht = np.ascontiguousarray(H.T)

    def block(sl):
        h = Ht[sl]
        num = _dense(Xt[sl] @ W)
        if l1:
            num = np.maximum(num - ridge, 0.0)
            den = h @ WtW
        else:
            den = h @ WtW + ridge * h
        return _ratio(h, num, den)

    return np.ascontiguousarray(_blockwise(Ht.shape[0], H.shape[0], block, n_jobs).T)


def multiplicative_ratio_u(C, U, V, B1, beta1, beta2, n_jobs=1):
    """The elementwise step ratio ``P`` with ``U_new = U * P``."""
    return _left_ratio(C, U, V, B1, beta1, beta2, False, n_jobs)


def line_search_alpha(C, U, V, B1, P):
    """Damping factor for the step ``U -> U + alpha (U * P - U)``.

    ``alpha = |2 (C - U V) V^T - 4 U + 2 B1|_F / |D V V^T + 2 D|_F`` with
    ``D = U * (P - 1)``, clamped to (0, 1]. A numerator or denominator below
    1e-12 (zero up to rounding) gives alpha = 1, the plain multiplicative step.
    """
    U = np.asarray(U, dtype=np.float64)
    VVt = V @ V.T
    resid_grad = 2.0 * (_dense(_rows(C) @ V.T) - U @ VVt) - 4.0 * U + 2.0 * B1
    D = U * (P - 1.0)
    num = np.linalg.norm(resid_grad)
    den = np.linalg.norm(D @ VVt + 2.0 * D)
    if den < LINE_SEARCH_FLOOR or num < LINE_SEARCH_FLOOR:
        return 1.0
    return float(min(num / den, 1.0))


def _apply(W, P, X, H, W_ref, line_search):
    if not line_search:
        return W * P
    alpha = line_search_alpha(X, W, H, W_ref, P)
    if alpha == 1.0:
        return W * P
    return np.maximum(W + alpha * (W * P - W), 0.0)


def update_u_mult(C, U, V, B1, beta1, beta2, line_search=False, n_jobs=1):
    P = _left_ratio(C, U, V, B1, beta1, beta2, False, n_jobs)
    return _apply(U, P, C, V, B1, line_search)


def update_v_mult(C, U, V, beta3, n_jobs=1):
    return V * _right_ratio(C, U, V, beta3, False, n_jobs)


def update_b1_mult(M, B1, B2, U, alpha1, alpha2, line_search=False, n_jobs=1):
    P = _left_ratio(M, B1, B2, U, alpha1, alpha2, False, n_jobs)
    return _apply(B1, P, M, B2, U, line_search)


def update_b2_mult(M, B1, B2, alpha3, n_jobs=1):
    return B2 * _right_ratio(M, B1, B2, alpha3, False, n_jobs)


def update_u_l1(C, U, V, B1, beta1, beta2, n_jobs=1):
    return U * _left_ratio(C, U, V, B1, beta1, beta2, True, n_jobs)


def update_v_l1(C, U, V, beta3, n_jobs=1):
    return V * _right_ratio(C, U, V, beta3, True, n_jobs)
