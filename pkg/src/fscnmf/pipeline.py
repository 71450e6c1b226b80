"""End-to-end helpers shared by the CLI and the experiment tests."""

from dataclasses import dataclass

import numpy as np

from .content import ContentMatrix, build_vocabulary, load_content_matrix, read_documents, tfidf
from .evaluation import f1_scores, kmeans, knn_classify, stratified_split, unsup_accuracy
from .exceptions import ParameterError, ShapeError
from .factor import CostTrace, FactorState, Hyperparams, combine, run_fscnmf
from .graph import load_edge_list, load_labels, proximity_matrix, read_node_order
from .synth import SynthConfig, generate


@dataclass
class EmbedResult:
    state: FactorState
    trace: CostTrace
    hyperparams: Hyperparams

    def embedding(self, gamma=None):
        gamma = self.hyperparams.gamma if gamma is None else gamma
        hp = self.hyperparams
        provenance = {"variant": hp.variant, "m_order": hp.m_order, "seed": hp.seed}
        return combine(self.state.B1, self.state.U, gamma, provenance).matrix


def content_from_docs(docs, stopwords=None, min_df=1):
    vocab = build_vocabulary(docs, stopwords=stopwords, min_df=min_df)
    return tfidf(docs, vocab)


def synth_dataset(cfg=None, **overrides):
    """Synthetic graph plus its tf-idf content matrix (``min_df=1``, no stopwords)."""
    cfg = cfg or SynthConfig(**overrides)
    g, docs = generate(cfg)
    return g, content_from_docs(docs)


def load_dataset(edges, docs=None, content_matrix=None, labels=None, nodes=None,
                 directed=False, min_df=1, stopwords=None):
    node_order = read_node_order(nodes) if nodes else None
    g = load_edge_list(edges, directed=directed, nodes=node_order)
    if (docs is None) == (content_matrix is None):
        raise ParameterError("give exactly one of a documents file or a content matrix")
    if docs is not None:
        documents = read_documents(docs)
        if len(documents) != g.n:
            raise ShapeError(f"documents file has {len(documents)} lines, graph has {g.n} nodes")
        content = content_from_docs(documents, stopwords=stopwords, min_df=min_df)
    else:
        content = load_content_matrix(content_matrix, g.n)
    if labels is not None:
        g = load_labels(labels, g)
    return g, content


def embed(g, content, hp, n_jobs=1):
    """Resolve k, build the proximity matrix and run the factorization."""
    C = content.matrix if isinstance(content, ContentMatrix) else content
    hp = hp.with_default_k(g.n_classes).validate(*C.shape)
    M = proximity_matrix(g, hp.m_order).matrix
    state, trace = run_fscnmf(M, C, hp, n_jobs=n_jobs)
    return EmbedResult(state, trace, hp)


def cluster_embedding(X, labels=None, K=None, seed=0):
    if K is None:
        if labels is None:
            raise ParameterError("clustering needs K or ground-truth labels")
        K = int(np.unique(labels).size)
    result = kmeans(X, K, seed=seed)
    if labels is not None:
        result.accuracy = unsup_accuracy(result.assignments, labels)
    return result


def classify_embedding(X, labels, train_fraction=0.5, seed=0, k_neighbors=5):
    train, test = stratified_split(labels, train_fraction, seed)
    k_neighbors = min(k_neighbors, train.size)
    pred = knn_classify(X[train], labels[train], X[test], k_neighbors)
    return f1_scores(pred, labels[test], train_fraction)
