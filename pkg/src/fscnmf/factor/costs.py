"""The two coupled objectives.

Both use the unhalved convention ``|X - WH|_F^2 + sum(weight * |.|_F^2)``.
The data-fit term is expanded as ``|X|^2 - 2<X, WH> + tr(W^T W H H^T)`` so that
a sparse ``X`` never has to be densified.
"""

import numpy as np
import scipy.sparse as sp

from ..exceptions import ShapeError
from ..linalg import frobenius_sq


def _fit_term(X, W, H):
    if X.shape != (W.shape[0], H.shape[1]) or W.shape[1] != H.shape[0]:
        raise ShapeError(f"cannot compare X{X.shape} with W{W.shape} @ H{H.shape}")
    xh = X @ H.T if sp.issparse(X) else np.asarray(X) @ H.T
    cross = float(np.sum(np.asarray(xh) * W))
    gram = float(np.sum((W.T @ W) * (H @ H.T)))
    return max(frobenius_sq(X) - 2.0 * cross + gram, 0.0)


def structure_cost(M, B1, B2, U, alpha1, alpha2, alpha3):
    if B1.shape != U.shape:
        raise ShapeError(f"B1 {B1.shape} and U {U.shape} differ in shape")
    return (
        _fit_term(M, B1, B2)
        + alpha1 * frobenius_sq(B1 - U)
        + alpha2 * frobenius_sq(B1)
        + alpha3 * frobenius_sq(B2)
    )


def content_cost(C, U, V, B1, beta1, beta2, beta3):
    if B1.shape != U.shape:
        raise ShapeError(f"B1 {B1.shape} and U {U.shape} differ in shape")
    return (
        _fit_term(C, U, V)
        + beta1 * frobenius_sq(U - B1)
        + beta2 * frobenius_sq(U)
        + beta3 * frobenius_sq(V)
    )


def cost_d1(M, s, hp):
    return structure_cost(M, s.B1, s.B2, s.U, hp.alpha1, hp.alpha2, hp.alpha3)


def cost_d2(C, s, hp):
    return content_cost(C, s.U, s.V, s.B1, hp.beta1, hp.beta2, hp.beta3)
