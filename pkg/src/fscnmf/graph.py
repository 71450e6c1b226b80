"""Attributed graphs: edge-list loading, labels and higher-order proximity."""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .exceptions import CompletenessError, NodeReferenceError, ParameterError, ParseError
from .linalg import sparse_from_triplets

DENSE_SWITCH = 0.5


@dataclass(frozen=True)
class AttributedGraph:
    node_ids: list
    adjacency: sp.csr_matrix
    directed: bool = False
    labels: np.ndarray = None
    label_names: list = None
    self_loops_dropped: int = 0
    index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", {node: i for i, node in enumerate(self.node_ids)})
        if len(self.index) != len(self.node_ids):
            raise ParameterError("node ids must be unique")

    @property
    def n(self):
        return len(self.node_ids)

    @property
    def n_classes(self):
        return None if self.label_names is None else len(self.label_names)


@dataclass(frozen=True)
class ProximityMatrix:
    order: int
    matrix: sp.csr_matrix


def _split(line):
    return line.split("\t") if "\t" in line else line.split()


def load_edge_list(path, directed=False, default_weight=1.0, nodes=None):
    """Load a tab-separated edge list into an AttributedGraph.

    Node ids get indices in order of first appearance; when ``nodes`` is given
    those ids are registered first (in that order), which keeps isolated nodes
    and aligns the graph with an external node-order file.
    """
    index = {}
    node_ids = []

    def intern(name):
        i = index.get(name)
        if i is None:
            i = index[name] = len(node_ids)
            node_ids.append(name)
        return i

    for name in nodes or ():
        intern(name)

    rows, cols, vals = [], [], []
    loops = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = _split(line)
            if len(parts) not in (2, 3):
                raise ParseError("expected 'src<TAB>dst' or 'src<TAB>dst<TAB>weight'", lineno)
            weight = default_weight
            if len(parts) == 3:
                try:
                    weight = float(parts[2])
                except ValueError:
                    raise ParseError(f"non-numeric weight {parts[2]!r}", lineno) from None
                if not np.isfinite(weight) or weight < 0:
                    raise ParseError(f"invalid weight {parts[2]!r}", lineno)
            src, dst = intern(parts[0]), intern(parts[1])
            if src == dst:
                loops += 1
                continue
            rows.append(src)
            cols.append(dst)
            vals.append(weight)
            if not directed:
                rows.append(dst)
                cols.append(src)
                vals.append(weight)

    if loops:
        warnings.warn(f"dropped {loops} self-loop(s) from {path}", stacklevel=2)
    n = len(node_ids)
    adjacency = sparse_from_triplets(rows, cols, vals, (n, n))
    return AttributedGraph(node_ids, adjacency, directed=directed, self_loops_dropped=loops)


def load_labels(path, g):
    """Attach ground-truth labels, densified to 0..K-1 in lexicographic label order."""
    raw = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = _split(line)
            if len(parts) != 2:
                raise ParseError("expected 'node_id<TAB>label'", lineno)
            node, label = parts
            if node not in g.index:
                raise NodeReferenceError(f"line {lineno}: unknown node id {node!r}")
            raw[g.index[node]] = label
    if len(raw) != g.n:
        missing = [g.node_ids[i] for i in range(g.n) if i not in raw]
        raise CompletenessError(f"{len(missing)} node(s) without a label, e.g. {missing[:3]}")
    names = sorted(set(raw.values()))
    code = {name: c for c, name in enumerate(names)}
    labels = np.array([code[raw[i]] for i in range(g.n)], dtype=np.int64)
    return replace(g, labels=labels, label_names=names)


def proximity_matrix(g, m_order):
    """Average of adjacency powers, ``(A + A^2 + ... + A^m) / m``.

    Powers are accumulated with sparse products; once an intermediate gets
    denser than ``DENSE_SWITCH`` the remaining products run on dense arrays.
    """
    if int(m_order) != m_order or m_order < 1:
        raise ParameterError(f"proximity order must be an integer >= 1, got {m_order!r}")
    m_order = int(m_order)
    a = g.adjacency if isinstance(g, AttributedGraph) else sp.csr_matrix(g, dtype=np.float64)
    if m_order == 1:
        return ProximityMatrix(1, a.copy())

    n = a.shape[0]
    power = a.copy()
    total = a.copy()
    dense = False
    for _ in range(1, m_order):
        power = power @ a
        if not dense and sp.issparse(power) and power.nnz > DENSE_SWITCH * n * n:
            dense = True
            power = power.toarray()
            total = total.toarray()
        total = total + power
    total = sp.csr_matrix(total / m_order)
    total.eliminate_zeros()
    total.sort_indices()
    return ProximityMatrix(m_order, total)


def write_node_order(path, node_ids):
    with open(path, "w", encoding="utf-8") as fh:
        for node in node_ids:
            fh.write(f"{node}\n")


def read_node_order(path):
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]
