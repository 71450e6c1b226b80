"""Numerical probe of the 2x2 multiplicative-descent claim for the content factor.

The claim concerns ``beta1 = 0, beta2 = beta3 = 1`` with equal rows in both
matrices and all entries >= 1. The probe only reports whether the objective
went down; it never asserts it.
"""

import numpy as np

from ..exceptions import ValidationError


def _objective(C, X):
    return 0.5 * float(np.sum((C - X) ** 2)) + 0.5 * float(np.sum(X**2))


def lemma_step(U, C):
    """The 2x2 step matrix ``P`` such that the proposed update is ``U * P``."""
    (c1, c2), (c3, c4) = C
    (u1, u2), (u3, u4) = U
    return np.array(
        [
            [(c1 * u1 + c2 * u2) / (2 * u1), (c1 * u3 + c2 * u4) / (2 * u2)],
            [(c3 * u1 + c4 * u2) / (2 * u3), (c3 * u3 + c4 * u4) / (2 * u4)],
        ]
    )


def lemma_probe(C, U):
    """Return ``(f(U), f(U * P), f(U * P) <= f(U))`` for the 2x2 setting."""
    C = np.asarray(C, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    if C.shape != (2, 2) or U.shape != (2, 2):
        raise ValidationError("lemma_probe expects 2x2 matrices")
    if not (np.array_equal(C[0], C[1]) and np.array_equal(U[0], U[1])):
        raise ValidationError("lemma_probe requires equal rows in C and in U")
    if C.min() < 1 or U.min() < 1:
        raise ValidationError("lemma_probe requires all entries >= 1")
    before = _objective(C, U)
    after = _objective(C, U * lemma_step(U, C))
    return before, after, after <= before


def lemma_hold_rate(n_instances=1000, seed=0, high=10.0):
    """Fraction of random admissible instances (entries uniform in [1, high]) where descent holds."""
    rng = np.random.default_rng(seed)
    holds = 0
    for _ in range(n_instances):
        c = rng.uniform(1.0, high, 2)
        u = rng.uniform(1.0, high, 2)
        holds += lemma_probe(np.vstack([c, c]), np.vstack([u, u]))[2]
    return holds / n_instances
