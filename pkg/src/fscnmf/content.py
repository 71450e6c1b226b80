"""Bag-of-words content matrices: tokenization, vocabulary and tf-idf."""

import math
import string
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError, ShapeError, ValidationError
from .linalg import read_sparse_text, sparse_from_triplets, write_sparse_text

TFIDF_VARIANT = "raw-count*ln(n/df), unsmoothed, no row normalization"

_EDGE_CHARS = string.punctuation + "“”‘’"


@dataclass(frozen=True)
class Vocabulary:
    terms: list
    doc_freq: list

    def __len__(self):
        return len(self.terms)

    def index(self):
        return {t: i for i, t in enumerate(self.terms)}


@dataclass(frozen=True)
class ContentMatrix:
    matrix: sp.csr_matrix
    vocab: Vocabulary = None
    variant: str = TFIDF_VARIANT


def tokenize(text, transform=None):
    """Whitespace split, lowercase, strip punctuation from token edges.

    ``transform`` is an optional per-token hook (e.g. a stemmer); tokens it
    maps to an empty string are dropped.
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_CHARS)
        if tok and transform is not None:
            tok = transform(tok)
        if tok:
            tokens.append(tok)
    return tokens


def read_documents(path, transform=None):
    """One document per line; line i belongs to node index i."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [tokenize(line, transform) for line in lines]


def read_stopwords(path):
    with open(path, encoding="utf-8") as fh:
        return {w for w in (line.strip().lower() for line in fh) if w}


def build_vocabulary(docs, stopwords=None, min_df=1):
    """Terms outside ``stopwords`` with document frequency >= ``min_df``, sorted."""
    if min_df < 1:
        raise ParameterError(f"min_df must be >= 1, got {min_df}")
    if len(docs) == 0:
        raise ValidationError("cannot build a vocabulary from an empty corpus")
    stopwords = stopwords or set()
    df = Counter()
    for doc in docs:
        df.update(set(doc))
    terms = sorted(t for t, c in df.items() if c >= min_df and t not in stopwords)
    return Vocabulary(terms, [df[t] for t in terms])


def tfidf(docs, vocab):
    """Entry (i, t) = count of t in doc i times ln(n / df_t); OOV tokens are ignored."""
    n = len(docs)
    lookup = vocab.index()
    idf = np.array([math.log(n / df) if df else 0.0 for df in vocab.doc_freq])
    rows, cols, vals = [], [], []
    for i, doc in enumerate(docs):
        counts = Counter(tok for tok in doc if tok in lookup)
        for tok in sorted(counts):
            j = lookup[tok]
            w = counts[tok] * idf[j]
            if w != 0.0:
                rows.append(i)
                cols.append(j)
                vals.append(w)
    matrix = sparse_from_triplets(rows, cols, vals, (n, len(vocab)))
    return ContentMatrix(matrix, vocab)


def load_content_matrix(path, n):
    matrix = read_sparse_text(path)
    if matrix.shape[0] != n:
        raise ShapeError(f"content matrix has {matrix.shape[0]} rows, graph has {n} nodes")
    if matrix.nnz and matrix.data.min() < 0:
        raise ValidationError("content matrix entries must be non-negative")
    return ContentMatrix(matrix, None, variant="precomputed")


def save_content_matrix(path, content):
    matrix = content.matrix if isinstance(content, ContentMatrix) else content
    write_sparse_text(path, matrix)
