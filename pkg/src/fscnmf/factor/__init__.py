from .costs import content_cost, cost_d1, cost_d2, structure_cost
from .init import init_factors, nndsvd
from .params import (
    VARIANTS,
    CostTrace,
    Embedding,
    FactorState,
    Hyperparams,
    canonical_variant,
    combine,
)
from .probe import lemma_hold_rate, lemma_probe
from .solver import run_fscnmf
from .updates import (
    line_search_alpha,
    multiplicative_ratio_u,
    update_b1_als,
    update_b1_mult,
    update_b2_als,
    update_b2_mult,
    update_u_als,
    update_u_l1,
    update_u_mult,
    update_v_als,
    update_v_l1,
    update_v_mult,
)

__all__ = [
    "VARIANTS",
    "CostTrace",
    "Embedding",
    "FactorState",
    "Hyperparams",
    "canonical_variant",
    "combine",
    "content_cost",
    "cost_d1",
    "cost_d2",
    "init_factors",
    "lemma_hold_rate",
    "lemma_probe",
    "line_search_alpha",
    "multiplicative_ratio_u",
    "nndsvd",
    "run_fscnmf",
    "structure_cost",
    "update_b1_als",
    "update_b1_mult",
    "update_b2_als",
    "update_b2_mult",
    "update_u_als",
    "update_u_l1",
    "update_u_mult",
    "update_v_als",
    "update_v_l1",
    "update_v_mult",
]
