import logging

import numpy as np

from ..exceptions import NumericalFailureError, ShapeError
from ..linalg import as_csr
from . import updates
from .costs import cost_d1, cost_d2
from .init import init_factors
from .params import CostTrace

logger = logging.getLogger(__name__)


def _structure_step(M, s, hp, n_jobs):
    if hp.variant == "als":
        s.B1 = updates.update_b1_als(M, s.B2, s.U, hp.alpha1, hp.alpha2, n_jobs=n_jobs)
        s.B2 = updates.update_b2_als(M, s.B1, hp.alpha3, n_jobs=n_jobs)
    else:
        s.B1 = updates.update_b1_mult(
            M, s.B1, s.B2, s.U, hp.alpha1, hp.alpha2, line_search=hp.line_search, n_jobs=n_jobs
        )
        s.B2 = updates.update_b2_mult(M, s.B1, s.B2, hp.alpha3, n_jobs=n_jobs)


def _content_step(C, s, hp, n_jobs):
    if hp.variant == "als":
        s.U = updates.update_u_als(C, s.V, s.B1, hp.beta1, hp.beta2, n_jobs=n_jobs)
        s.V = updates.update_v_als(C, s.U, hp.beta3, n_jobs=n_jobs)
    elif hp.variant == "multiplicative":
        s.U = updates.update_u_mult(
            C, s.U, s.V, s.B1, hp.beta1, hp.beta2, line_search=hp.line_search, n_jobs=n_jobs
        )
        s.V = updates.update_v_mult(C, s.U, s.V, hp.beta3, n_jobs=n_jobs)
    else:
        s.U = updates.update_u_l1(C, s.U, s.V, s.B1, hp.beta1, hp.beta2, n_jobs=n_jobs)
        s.V = updates.update_v_l1(C, s.U, s.V, hp.beta3, n_jobs=n_jobs)


def run_fscnmf(M, C, hp, state=None, n_jobs=1, callback=None):
    """Alternate the structure and content subproblems until the joint cost settles.

    Every outer iteration runs ``hp.inner_iters`` alternating (B1, B2) updates
    against the current U, then ``hp.inner_iters`` alternating (U, V) updates
    against the new B1. The loop stops once ``D1 + D2`` changes by less than
    ``hp.rel_tol`` (relative) over an outer iteration, or after
    ``hp.max_outer`` iterations.

    ``callback(outer, state, trace)``, when given, runs after every outer
    iteration (and once for the starting point with ``outer=0``).

    Returns the final FactorState and the CostTrace of every inner step.
    """
    M = as_csr(M)
    C = as_csr(C)
    n, d = C.shape
    if M.shape != (n, n):
        raise ShapeError(f"M must be {n}x{n} to match C {C.shape}, got {M.shape}")
    hp.validate(n, d)
    if state is None:
        state = init_factors(M, C, hp.k, hp.init, hp.seed, hp.variant)
    else:
        state = state.copy()

    trace = CostTrace()

    def checkpoint(outer, phase, inner):
        if not state.is_finite():
            raise NumericalFailureError(
                f"non-finite factor entries after outer {outer}, {phase} step {inner}", trace
            )
        d1, d2 = cost_d1(M, state, hp), cost_d2(C, state, hp)
        if not (np.isfinite(d1) and np.isfinite(d2)):
            raise NumericalFailureError(f"non-finite cost after outer {outer}", trace)
        trace.record(outer, phase, inner, d1, d2)
        return d1 + d2

    previous = checkpoint(0, "init", 0)
    if callback is not None:
        callback(0, state, trace)
    for outer in range(1, hp.max_outer + 1):
        for inner in range(1, hp.inner_iters + 1):
            _structure_step(M, state, hp, n_jobs)
            checkpoint(outer, "structure", inner)
        for inner in range(1, hp.inner_iters + 1):
            _content_step(C, state, hp, n_jobs)
            total = checkpoint(outer, "content", inner)
        change = abs(previous - total) / abs(previous) if previous else abs(total)
        logger.debug("outer %d: D1+D2 = %.6g (relative change %.3g)", outer, total, change)
        if callback is not None:
            callback(outer, state, trace)
        if change < hp.rel_tol:
            trace.converged = True
            break
        previous = total
    return state, trace
