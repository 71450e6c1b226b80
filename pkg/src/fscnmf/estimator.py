import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_non_negative

from .exceptions import ShapeError
from .factor import Hyperparams, combine, run_fscnmf, update_u_als
from .graph import proximity_matrix


def check_adjacency(adjacency, n):
    """Validate a square non-negative adjacency matrix with ``n`` rows."""
    if adjacency is None:
        raise ValueError("fit requires the adjacency matrix (pass adjacency=...)")
    A = check_array(adjacency, accept_sparse="csr", dtype=np.float64)
    if A.shape != (n, n):
        raise ShapeError(f"adjacency must be {n}x{n} to match X, got {A.shape}")
    check_non_negative(A, "FSCNMF adjacency")
    return sp.csr_matrix(A)


class FSCNMF(TransformerMixin, BaseEstimator):
    """Node embeddings from link structure and node content.

    The adjacency (or its higher-order proximity average) is factorized as
    ``B1 @ B2`` and the content matrix ``X`` as ``U @ V``, with each side's
    node factor pulled towards the other's. The embedding is
    ``gamma * B1 + (1 - gamma) * U``.

    Parameters
    ----------
    n_components : int or None
        Embedding dimension k. ``None`` uses ``10 * n_classes`` from ``y``.
    alpha1, alpha2, alpha3 : float
        Structure side: coupling to U, ridge on B1, ridge on B2.
    beta1, beta2, beta3 : float
        Content side: coupling to B1, ridge on U, ridge on V.
    gamma : float in [0, 1]
        Weight of the structure factor in the returned embedding.
    order : int
        Proximity order m; the structure matrix is ``(A + ... + A^m) / m``.
    variant : {"als", "multiplicative", "multiplicative-l1"}
        Update family. ``"mult"`` and ``"mult-l1"`` are accepted aliases.
    line_search : bool
        Damped multiplicative steps for B1 and U (multiplicative variants only).
    inner_iters, max_outer, tol
        Inner sweeps per subproblem, outer iteration cap, relative tolerance on
        the change of D1 + D2 per outer iteration.
    init : {"nndsvd", "random"}
    random_state : int
    n_jobs : int
        Threads for the row-blocked updates; results do not depend on it.

    Attributes
    ----------
    embedding_ : ndarray (n, k)
    structure_embedding_ : ndarray (n, k), the B1 factor
    content_embedding_ : ndarray (n, k), the U factor
    structure_components_ : ndarray (k, n), the B2 factor
    components_ : ndarray (k, d), the V factor
    cost_trace_ : CostTrace
    n_iter_ : int
    """

    def __init__(
        self,
        n_components=None,
        alpha1=1.0,
        alpha2=1.0,
        alpha3=1.0,
        beta1=1.0,
        beta2=1.0,
        beta3=1.0,
        gamma=0.5,
        order=1,
        variant="als",
        line_search=False,
        inner_iters=3,
        max_outer=100,
        tol=1e-4,
        init="nndsvd",
        random_state=0,
        n_jobs=1,
    ):
        self.n_components = n_components
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.alpha3 = alpha3
        self.beta1 = beta1
        self.beta2 = beta2
        self.beta3 = beta3
        self.gamma = gamma
        self.order = order
        self.variant = variant
        self.line_search = line_search
        self.inner_iters = inner_iters
        self.max_outer = max_outer
        self.tol = tol
        self.init = init
        self.random_state = random_state
        self.n_jobs = n_jobs

    def hyperparams(self, n_classes=None):
        hp = Hyperparams(
            k=self.n_components,
            alpha1=self.alpha1,
            alpha2=self.alpha2,
            alpha3=self.alpha3,
            beta1=self.beta1,
            beta2=self.beta2,
            beta3=self.beta3,
            gamma=self.gamma,
            m_order=self.order,
            inner_iters=self.inner_iters,
            max_outer=self.max_outer,
            rel_tol=self.tol,
            variant=self.variant,
            line_search=self.line_search,
            seed=self.random_state,
            init=self.init,
        )
        return hp.with_default_k(n_classes)

    def fit(self, X, y=None, adjacency=None):
        C = check_array(X, accept_sparse="csr", dtype=np.float64)
        check_non_negative(C, "FSCNMF content matrix")
        A = check_adjacency(adjacency, C.shape[0])
        n_classes = None if y is None else np.unique(np.asarray(y)).size
        hp = self.hyperparams(n_classes).validate(*C.shape)

        M = proximity_matrix(A, hp.m_order).matrix
        state, trace = run_fscnmf(M, sp.csr_matrix(C), hp, n_jobs=self.n_jobs)

        self.hyperparams_ = hp
        self.structure_embedding_ = state.B1
        self.structure_components_ = state.B2
        self.content_embedding_ = state.U
        self.components_ = state.V
        self.cost_trace_ = trace
        self.n_iter_ = trace.n_outer
        self.n_features_in_ = C.shape[1]
        self.embedding_ = self.combine(hp.gamma)
        return self

    def fit_transform(self, X, y=None, adjacency=None):
        return self.fit(X, y, adjacency=adjacency).embedding_

    def combine(self, gamma):
        """Re-blend the fitted factors with a different ``gamma`` (no refit)."""
        check_is_fitted(self, "structure_embedding_")
        hp = self.hyperparams_
        provenance = {"variant": hp.variant, "m_order": hp.m_order, "seed": hp.seed}
        return combine(self.structure_embedding_, self.content_embedding_, gamma, provenance).matrix

    def transform(self, X):
        """Content-only embedding of (possibly new) nodes against the fitted ``V``.

        Solves the content subproblem for U with the structure coupling off:
        ``[(X V^T)(V V^T + beta2 I)^-1]_+``.
        """
        check_is_fitted(self, "components_")
        C = check_array(X, accept_sparse="csr", dtype=np.float64)
        if C.shape[1] != self.n_features_in_:
            raise ShapeError(f"X has {C.shape[1]} features, expected {self.n_features_in_}")
        check_non_negative(C, "FSCNMF content matrix")
        zeros = np.zeros((C.shape[0], self.components_.shape[0]))
        return update_u_als(C, self.components_, zeros, 0.0, self.hyperparams_.beta2)
