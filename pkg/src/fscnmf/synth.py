"""Planted-partition graphs with class-correlated bag-of-words content.

:func:`generate` draws everything from one ``numpy.random.Generator`` over the
PCG64 bit generator, seeded with ``SynthConfig.seed``, in this fixed order:

1. edges: for each node ``i`` in index order, ``n - i - 1`` uniform doubles
   decide the pairs ``(i, i+1), ..., (i, n-1)``;
2. content: for each node in index order, ``doc_len`` uniform doubles pick
   class-block vs noise-block, then ``doc_len`` uniform doubles pick the word
   inside the chosen block (``floor(u * block_size)``).
"""

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import ParameterError
from .graph import AttributedGraph
from .linalg import sparse_from_triplets


@dataclass
class SynthConfig:
    n: int = 300
    K: int = 3
    p_in: float = 0.1
    p_out: float = 0.01
    vocab_size: int = 200
    q: float = 0.8
    doc_len: int = 50
    seed: int = 7

    def validate(self):
        if self.K < 1 or self.n < self.K:
            raise ParameterError(f"need 1 <= K <= n, got n={self.n}, K={self.K}")
        for name in ("p_in", "p_out", "q"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}")
        if self.vocab_size < 2 * self.K:
            raise ParameterError(f"vocab_size={self.vocab_size} must be >= 2K={2 * self.K}")
        if self.doc_len < 0:
            raise ParameterError("doc_len must be >= 0")
        if self.p_out > self.p_in:
            warnings.warn(f"p_out={self.p_out} exceeds p_in={self.p_in}", stacklevel=2)
        return self

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _split_sizes(total, parts):
    base, extra = divmod(total, parts)
    return [base + (1 if b < extra else 0) for b in range(parts)]


def block_labels(n, K):
    return np.repeat(np.arange(K), _split_sizes(n, K))


def node_names(n):
    return [f"n{i}" for i in range(n)]


def vocabulary_blocks(vocab_size, K):
    """Word lists for the K class blocks followed by the shared noise block."""
    sizes = _split_sizes(vocab_size, K + 1)
    blocks = [[f"c{b}w{j}" for j in range(sizes[b])] for b in range(K)]
    blocks.append([f"noise{j}" for j in range(sizes[K])])
    return blocks


def _generator(seed):
    return np.random.Generator(np.random.PCG64(seed))


def planted_partition(cfg, rng=None):
    """Undirected, unweighted planted-partition graph with its block labels attached."""
    cfg.validate()
    rng = _generator(cfg.seed) if rng is None else rng
    labels = block_labels(cfg.n, cfg.K)
    rows, cols = [], []
    for i in range(cfg.n - 1):
        others = np.arange(i + 1, cfg.n)
        prob = np.where(labels[others] == labels[i], cfg.p_in, cfg.p_out)
        hit = others[rng.random(others.size) < prob]
        rows.append(np.full(hit.size, i))
        cols.append(hit)
    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    both_r = np.concatenate([rows, cols])
    both_c = np.concatenate([cols, rows])
    adjacency = sparse_from_triplets(both_r, both_c, np.ones(both_r.size), (cfg.n, cfg.n))
    return AttributedGraph(
        node_names(cfg.n),
        adjacency,
        directed=False,
        labels=labels,
        label_names=[f"class{b}" for b in range(cfg.K)],
    )


def class_content(labels, cfg, rng=None):
    """One token list per node: class-block words with probability q, noise words otherwise."""
    cfg.validate()
    # standalone calls use a stream distinct from the edge stream of the same seed
    rng = _generator([cfg.seed, 1]) if rng is None else rng
    blocks = vocabulary_blocks(cfg.vocab_size, cfg.K)
    noise = blocks[-1]
    docs = []
    for label in labels:
        own = blocks[int(label)]
        use_class = rng.random(cfg.doc_len) < cfg.q
        pick = rng.random(cfg.doc_len)
        doc = []
        for from_class, u in zip(use_class, pick):
            block = own if from_class else noise
            doc.append(block[int(u * len(block))])
        docs.append(doc)
    return docs


def generate(cfg):
    """Graph and documents from a single generator stream (edges first, then content)."""
    rng = _generator(cfg.seed)
    g = planted_partition(cfg, rng)
    docs = class_content(g.labels, cfg, rng)
    return g, docs


def edge_pairs(g):
    """Each undirected edge once as (i, j) with i < j, in row-major order."""
    upper = g.adjacency.tocoo()
    keep = upper.row < upper.col
    order = np.lexsort((upper.col[keep], upper.row[keep]))
    return list(zip(upper.row[keep][order].tolist(), upper.col[keep][order].tolist()))
