import csv
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..exceptions import ParameterError, ShapeError

VARIANTS = ("als", "multiplicative", "multiplicative-l1")
VARIANT_ALIASES = {"mult": "multiplicative", "mult-l1": "multiplicative-l1"}
INITS = ("nndsvd", "random")


def canonical_variant(name):
    name = VARIANT_ALIASES.get(name, name)
    if name not in VARIANTS:
        raise ParameterError(f"unknown variant {name!r}; expected one of {VARIANTS}")
    return name


@dataclass
class Hyperparams:
    """All knobs of one factorization run.

    ``k=None`` means "derive from the number of communities" and must be
    resolved (see :meth:`with_default_k`) before the run starts.
    """

    k: int = None
    alpha1: float = 1.0
    alpha2: float = 1.0
    alpha3: float = 1.0
    beta1: float = 1.0
    beta2: float = 1.0
    beta3: float = 1.0
    gamma: float = 0.5
    m_order: int = 1
    inner_iters: int = 3
    max_outer: int = 100
    rel_tol: float = 1e-4
    variant: str = "als"
    line_search: bool = False
    seed: int = 0
    init: str = "nndsvd"

    def __post_init__(self):
        self.variant = canonical_variant(self.variant)

    def with_default_k(self, n_classes):
        """Apply the ``k = 10 * #communities`` rule when k is unset."""
        if self.k is not None:
            return self
        if not n_classes:
            raise ParameterError("k is unset and the number of communities is unknown")
        return Hyperparams(**{**asdict(self), "k": 10 * int(n_classes)})

    def validate(self, n=None, d=None):
        for name in ("alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be a finite non-negative number, got {value}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ParameterError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.k is None or int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if n is not None and d is not None and not self.k < min(n, d):
            raise ParameterError(f"k={self.k} must be smaller than min(n={n}, d={d})")
        if int(self.m_order) != self.m_order or self.m_order < 1:
            raise ParameterError(f"m_order must be an integer >= 1, got {self.m_order}")
        if self.inner_iters < 1:
            raise ParameterError("inner_iters must be >= 1")
        if self.max_outer < 1:
            raise ParameterError("max_outer must be >= 1")
        if not self.rel_tol >= 0:
            raise ParameterError("rel_tol must be >= 0")
        if self.init not in INITS:
            raise ParameterError(f"unknown init {self.init!r}; expected one of {INITS}")
        canonical_variant(self.variant)
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ParameterError(f"unknown hyperparameter(s): {sorted(unknown)}")
        return cls(**values)


@dataclass
class FactorState:
    B1: np.ndarray
    B2: np.ndarray
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        n, k = self.B1.shape
        if self.B2.shape != (k, n) or self.U.shape != (n, k) or self.V.shape[0] != k:
            raise ShapeError(
                f"inconsistent factor shapes B1{self.B1.shape} B2{self.B2.shape} "
                f"U{self.U.shape} V{self.V.shape}"
            )

    def copy(self):
        return FactorState(self.B1.copy(), self.B2.copy(), self.U.copy(), self.V.copy())

    def is_finite(self):
        return all(np.all(np.isfinite(x)) for x in (self.B1, self.B2, self.U, self.V))


@dataclass
class CostTrace:
    """Chronological (outer, phase, inner, d1, d2) records of one run.

    Outer index 0 holds a single ``init`` record for the starting point.
    """

    records: list = field(default_factory=list)
    converged: bool = False

    def record(self, outer, phase, inner, d1, d2):
        self.records.append((int(outer), phase, int(inner), float(d1), float(d2)))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def n_outer(self):
        return self.records[-1][0] if self.records else 0

    def outer_totals(self):
        """D1 + D2 at the end of every outer iteration; entry 0 is the initial state."""
        totals = {}
        for outer, _, _, d1, d2 in self.records:
            totals[outer] = d1 + d2
        return [totals[o] for o in sorted(totals)]

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["outer", "phase", "inner", "d1", "d2"])
            for outer, phase, inner, d1, d2 in self.records:
                writer.writerow([outer, phase, inner, f"{d1:.17g}", f"{d2:.17g}"])


@dataclass
class Embedding:
    matrix: np.ndarray
    gamma_used: float
    provenance: dict = field(default_factory=dict)


def combine(B1, U, gamma, provenance=None):
    """Convex combination ``gamma * B1 + (1 - gamma) * U``."""
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError(f"gamma must lie in [0, 1], got {gamma}")
    B1 = np.asarray(B1, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    if B1.shape != U.shape:
        raise ShapeError(f"B1 {B1.shape} and U {U.shape} differ in shape")
    if gamma == 1.0:
        matrix = B1.copy()
    elif gamma == 0.0:
        matrix = U.copy()
    else:
        matrix = gamma * B1 + (1.0 - gamma) * U
    return Embedding(matrix, float(gamma), dict(provenance or {}))
