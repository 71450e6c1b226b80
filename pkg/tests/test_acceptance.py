"""Acceptance criteria, each checked at its stated tolerance.

Every test reports a single PASS/FAIL line through ``report_criterion``; the
lines are repeated together in the pytest terminal summary.
"""

import itertools
import statistics
import time
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from fscnmf.cli import main
from fscnmf.evaluation import unsup_accuracy
from fscnmf.factor import (
    Hyperparams,
    lemma_hold_rate,
    lemma_probe,
    run_fscnmf,
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
from fscnmf.graph import proximity_matrix
from fscnmf.pipeline import cluster_embedding, embed, synth_dataset
from fscnmf.synth import SynthConfig

# --- independent dense oracles --------------------------------------------------------


def dense_d1(M, B1, B2, U, a1=1.0, a2=1.0, a3=1.0):
    return np.sum((M - B1 @ B2) ** 2) + a1 * np.sum((B1 - U) ** 2) + a2 * np.sum(B1**2) + a3 * np.sum(B2**2)


def dense_d2(C, U, V, B1, b1=1.0, b2=1.0, b3=1.0):
    return np.sum((C - U @ V) ** 2) + b1 * np.sum((U - B1) ** 2) + b2 * np.sum(U**2) + b3 * np.sum(V**2)


def central_gradient(f, X, h=1e-5):
    grad = np.empty_like(X)
    for idx in np.ndindex(X.shape):
        orig = X[idx]
        X[idx] = orig + h
        up = f(X)
        X[idx] = orig - h
        down = f(X)
        X[idx] = orig
        grad[idx] = (up - down) / (2 * h)
    return grad


def one_hot_factor(rng, rows, k):
    """Non-negative rows x k factor with a single positive entry per row (orthogonal columns)."""
    W = np.zeros((rows, k))
    W[np.arange(rows), rng.integers(0, k, rows)] = rng.uniform(0.2, 1.0, rows)
    return W


def sparse_nonneg(rng, rows, cols, density):
    return np.where(rng.random((rows, cols)) < density, rng.uniform(0.1, 1.0, (rows, cols)), 0.0)


# --- 1 --------------------------------------------------------------------------------


def test_als_stationarity(report_criterion):
    """Each closed-form update zeroes its block gradient when the projection does not bite.

    The fixed partner factor has orthogonal non-negative columns, which makes its
    Gram matrix diagonal and the unprojected solution provably non-negative.
    """
    start = time.perf_counter()
    n, d, k = 30, 40, 5
    worst = 0.0
    inactive = True
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        M = sparse_nonneg(rng, n, n, 0.2)
        C = sparse_nonneg(rng, n, d, 0.2)
        Ms, Cs = sp.csr_matrix(M), sp.csr_matrix(C)
        U, B1_ref = rng.random((n, k)), rng.random((n, k))
        B2_fix, V_fix = one_hot_factor(rng, n, k).T, one_hot_factor(rng, d, k).T
        B1_fix, U_fix = one_hot_factor(rng, n, k), one_hot_factor(rng, n, k)

        checks = []
        B1 = update_b1_als(Ms, B2_fix, U, 1.0, 1.0, project=False)
        checks.append((B1, lambda X: dense_d1(M, X, B2_fix, U)))
        B2 = update_b2_als(Ms, B1_fix, 1.0, project=False)
        checks.append((B2, lambda X: dense_d1(M, B1_fix, X, U)))
        Un = update_u_als(Cs, V_fix, B1_ref, 1.0, 1.0, project=False)
        checks.append((Un, lambda X: dense_d2(C, X, V_fix, B1_ref)))
        V = update_v_als(Cs, U_fix, 1.0, project=False)
        checks.append((V, lambda X: dense_d2(C, U_fix, X, B1_ref)))

        for X, f in checks:
            inactive &= bool(X.min() >= 0)
            grad = central_gradient(f, X.copy())
            worst = max(worst, np.abs(grad).max() / (1.0 + f(X)))
    elapsed = time.perf_counter() - start
    passed = inactive and worst < 1e-5 and elapsed < 10
    report_criterion(1, "ALS stationarity", passed,
                     f"max |grad|/(1+cost) = {worst:.2e} (< 1e-5), projection inactive: {inactive}, {elapsed:.2f}s (< 10s)")
    assert passed


# --- 2 --------------------------------------------------------------------------------


def random_state_with_zeros(rng):
    n, d, k = (int(x) for x in rng.integers(2, 16, 3))
    k = min(k, 6)

    def nonneg(shape):
        x = rng.random(shape) * rng.choice([0.01, 1.0, 100.0])
        x[rng.random(shape) < 0.3] = 0.0
        return x

    M = sp.csr_matrix(sparse_nonneg(rng, n, n, rng.uniform(0, 0.6)))
    C = sp.csr_matrix(sparse_nonneg(rng, n, d, rng.uniform(0, 0.6)))
    return M, C, nonneg((n, k)), nonneg((k, n)), nonneg((n, k)), nonneg((k, d))


def test_nonnegativity_and_zero_locking(report_criterion):
    rng = np.random.default_rng(2)
    violations = {"als": 0, "multiplicative": 0, "multiplicative-l1": 0}
    calls = dict.fromkeys(violations, 0)
    w = lambda: float(rng.choice([0.0, rng.uniform(0, 5)]))  # noqa: E731
    ridge = lambda: float(rng.uniform(0.01, 5))  # noqa: E731
    for variant in violations:
        for i in range(1000):
            M, C, B1, B2, U, V = random_state_with_zeros(rng)
            which = i % 4
            if variant == "als":
                before = None
                out = [
                    lambda: update_b1_als(M, B2, U, w(), ridge()),
                    lambda: update_b2_als(M, B1, ridge()),
                    lambda: update_u_als(C, V, B1, w(), ridge()),
                    lambda: update_v_als(C, U, ridge()),
                ][which]()
            elif variant == "multiplicative":
                ls = bool(rng.integers(2))
                before, out = [
                    (B1, lambda: update_b1_mult(M, B1, B2, U, w(), w(), line_search=ls)),
                    (B2, lambda: update_b2_mult(M, B1, B2, w())),
                    (U, lambda: update_u_mult(C, U, V, B1, w(), w(), line_search=ls)),
                    (V, lambda: update_v_mult(C, U, V, w())),
                ][which]
                out = out()
            else:
                before, out = [
                    (U, lambda: update_u_l1(C, U, V, B1, w(), w())),
                    (V, lambda: update_v_l1(C, U, V, w())),
                ][which % 2]
                out = out()
            calls[variant] += 1
            bad = np.count_nonzero(~(out >= 0))
            if before is not None:
                bad += np.count_nonzero(out[before == 0] != 0)
            violations[variant] += bad
    passed = all(v == 0 for v in violations.values())
    detail = ", ".join(f"{k}: {violations[k]} violations / {calls[k]} calls" for k in violations)
    report_criterion(2, "non-negativity and zero-locking", passed, detail)
    assert passed


# --- 3 --------------------------------------------------------------------------------


def test_multiplicative_descent(report_criterion):
    rng = np.random.default_rng(3)
    worst = -np.inf
    failures = []
    for i in range(100):
        n, d, k = int(rng.integers(3, 25)), int(rng.integers(3, 25)), int(rng.integers(1, 6))
        C = sparse_nonneg(rng, n, d, rng.uniform(0.1, 1.0)) * rng.choice([1.0, 10.0])
        U, V, B1 = rng.random((n, k)), rng.random((k, d)), rng.random((n, k))
        b1, b2, b3 = rng.uniform(0, 2, 3)
        Cs = sp.csr_matrix(C)
        base = dense_d2(C, U, V, B1, b1, b2, b3)
        U2 = update_u_mult(Cs, U, V, B1, b1, b2)
        after_u = dense_d2(C, U2, V, B1, b1, b2, b3)
        V2 = update_v_mult(Cs, U2, V, b3)
        after_v = dense_d2(C, U2, V2, B1, b1, b2, b3)
        for before, after in ((base, after_u), (after_u, after_v)):
            rel = (after - before) / (1.0 + before)
            worst = max(worst, rel)
            if rel > 1e-9:
                failures.append((i, rel))
    passed = not failures
    report_criterion(3, "multiplicative descent", passed,
                     f"200 steps on 100 instances, worst relative change {worst:.2e} (<= 1e-9), violations {failures[:3]}")
    assert passed


# --- 4 --------------------------------------------------------------------------------


def stationary_content_instance(rng, n, d, k):
    """Interior point where the gradients of the content cost in U and V vanish.

    Pick a positive residual E and positive U, then V = U^T E / b3 cancels the
    V gradient and C = U V + E stays non-negative; B1 is solved from the U
    gradient with b2 large enough to keep it non-negative.
    """
    U = rng.uniform(0.2, 1.0, (n, k))
    E = rng.uniform(0.0, 1.0, (n, d))
    b3 = rng.uniform(0.1, 2.0)
    V = U.T @ E / b3
    C = U @ V + E
    b1 = rng.uniform(0.5, 2.0)
    b2 = float(np.max(E @ V.T / U)) + rng.uniform(0.1, 1.0)
    B1 = U + (b2 * U - E @ V.T) / b1
    return C, U, V, B1, b1, b2, b3


def test_multiplicative_fixed_point(report_criterion):
    rng = np.random.default_rng(4)
    worst_move, worst_grad, admissible = 0.0, 0.0, True
    for _ in range(50):
        n, d, k = int(rng.integers(4, 20)), int(rng.integers(4, 20)), int(rng.integers(1, 4))
        C, U, V, B1, b1, b2, b3 = stationary_content_instance(rng, n, d, k)
        admissible &= bool(C.min() >= 0 and B1.min() >= 0 and U.min() > 1e-6 and V.min() > 1e-6)
        grad_u = 2 * ((U @ V - C) @ V.T + b1 * (U - B1) + b2 * U)
        grad_v = 2 * (U.T @ (U @ V - C) + b3 * V)
        worst_grad = max(worst_grad, np.abs(grad_u).max(), np.abs(grad_v).max())
        Cs = sp.csr_matrix(C)
        moves = [
            (update_u_mult(Cs, U, V, B1, b1, b2), U),
            (update_v_mult(Cs, U, V, b3), V),
            # structure side by the A<->C, B1<->U, B2<->V symmetry
            (update_b1_mult(Cs, U, V, B1, b1, b2), U),
            (update_b2_mult(Cs, U, V, b3), V),
        ]
        for new, old in moves:
            worst_move = max(worst_move, float(np.max(np.abs(new - old) / old)))
    passed = worst_move < 1e-8 and worst_grad < 1e-10 and admissible
    report_criterion(4, "multiplicative fixed point", passed,
                     f"max relative displacement {worst_move:.2e} (< 1e-8) at 50 interior points with max |grad| {worst_grad:.1e}")
    assert passed


# --- 5 --------------------------------------------------------------------------------


def test_proximity_oracle(report_criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        n, m = int(rng.integers(1, 51)), int(rng.integers(1, 6))
        a = (rng.random((n, n)) < rng.uniform(0.02, 0.5)).astype(float)
        np.fill_diagonal(a, 0)
        if rng.integers(2):
            a = np.maximum(a, a.T)
        oracle = np.zeros((n, n))
        power = np.eye(n)
        for _ in range(m):
            power = power @ a
            oracle += power
        oracle /= m
        got = proximity_matrix(sp.csr_matrix(a), m).matrix.toarray()
        worst = max(worst, float(np.abs(got - oracle).max()))
    passed = worst <= 1e-12
    report_criterion(5, "proximity oracle", passed, f"50 graphs, n <= 50, m <= 5, max-abs error {worst:.1e} (<= 1e-12)")
    assert passed


# --- 6 --------------------------------------------------------------------------------


def brute_force_accuracy(pred, truth):
    pred_names, truth_names = sorted(set(pred)), sorted(set(truth))
    targets = truth_names + [None] * max(0, len(pred_names) - len(truth_names))
    best = 0
    for perm in itertools.permutations(targets, len(pred_names)):
        mapping = dict(zip(pred_names, perm))
        best = max(best, sum(mapping[p] == t for p, t in zip(pred, truth)))
    return best / len(pred)


def test_accuracy_oracle(report_criterion):
    rng = np.random.default_rng(6)
    mismatches = 0
    for _ in range(200):
        K = int(rng.integers(1, 6))
        n = int(rng.integers(1, 40))
        truth = rng.integers(0, K, n).tolist()
        pred = rng.integers(0, K, n).tolist()
        mismatches += unsup_accuracy(pred, truth) != brute_force_accuracy(pred, truth)
    passed = mismatches == 0
    report_criterion(6, "accuracy oracle", passed, f"200 cases with K <= 5, {mismatches} mismatches against exhaustive search")
    assert passed


# --- 7 --------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def default_run(default_instance):
    g, content = default_instance
    return g, content, embed(g, content, Hyperparams())


def test_convergence_shape(report_criterion, default_run):
    _, _, result = default_run
    totals = result.trace.outer_totals()
    strict = all(totals[i + 1] < totals[i] for i in range(3))
    drop = 1.0 - totals[-1] / totals[0]
    passed = strict and drop >= 0.30
    report_criterion(7, "convergence shape", passed,
                     f"D1+D2 {totals[0]:.0f} -> {totals[1]:.0f} -> {totals[2]:.0f} -> {totals[3]:.0f}, "
                     f"final {totals[-1]:.0f} after {len(totals) - 1} outer iterations, drop {drop:.1%} (>= 30%)")
    assert passed


# --- 8 --------------------------------------------------------------------------------


def fusion_accuracies(cfg):
    g, content = synth_dataset(cfg)
    fused = embed(g, content, Hyperparams())
    decoupled = embed(g, content, Hyperparams(alpha1=0.0, beta1=0.0))

    def acc(X):
        return cluster_embedding(X, g.labels).accuracy

    return {
        "fused": acc(fused.embedding(0.5)),
        "structure": acc(decoupled.embedding(1.0)),
        "content": acc(fused.embedding(0.0)),
        "content_decoupled": acc(decoupled.embedding(0.0)),
    }


def test_fusion_benefit(report_criterion):
    consistent = fusion_accuracies(SynthConfig())
    noisy = fusion_accuracies(SynthConfig(p_in=0.02, p_out=0.015, q=0.9, seed=7))
    single = max(consistent["structure"], consistent["content"], consistent["content_decoupled"])
    ok_consistent = consistent["fused"] >= single - 0.02
    ok_noisy = (
        noisy["fused"] >= max(noisy["content"], noisy["content_decoupled"]) - 0.02
        and noisy["fused"] >= noisy["structure"] + 0.10
    )
    passed = ok_consistent and ok_noisy
    fmt = lambda r: ", ".join(f"{k}={v:.4f}" for k, v in r.items())  # noqa: E731
    report_criterion(8, "fusion benefit", passed, f"consistent [{fmt(consistent)}]; structure-noisy [{fmt(noisy)}]")
    assert passed


# --- 9 --------------------------------------------------------------------------------


def test_order_effect(report_criterion):
    g, content = synth_dataset(SynthConfig(n=600, K=3, p_in=0.04, p_out=0.008, seed=11))
    curve = {}
    for m in range(1, 6):
        X = embed(g, content, Hyperparams(m_order=m)).embedding()
        curve[m] = cluster_embedding(X, g.labels).accuracy
    passed = curve[2] >= curve[1] - 0.01
    detail = ", ".join(f"m={m}: {a:.4f}" for m, a in curve.items())
    report_criterion(9, "order effect", passed, f"{detail} (need m=2 >= m=1 - 0.01)")
    assert passed


# --- 10 -------------------------------------------------------------------------------


def test_scalability(report_criterion):
    start = time.perf_counter()
    medians = {}
    for n in (1000, 2000, 4000):
        p = 10.0 / (n - 1)
        g, content = synth_dataset(SynthConfig(n=n, p_in=p, p_out=p, seed=3))
        stamps = []
        hp = Hyperparams(k=30, max_outer=5, rel_tol=0.0)
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message="NNDSVD")  # loose SVD start is fine for timing
            run_fscnmf(g.adjacency, content.matrix, hp,
                       callback=lambda outer, state, trace: stamps.append(time.perf_counter()))
        medians[n] = statistics.median(np.diff(stamps))
    elapsed = time.perf_counter() - start
    ratio = medians[4000] / medians[1000]
    passed = ratio <= 6 and elapsed < 120
    detail = ", ".join(f"t({n})={t * 1e3:.1f}ms" for n, t in medians.items())
    report_criterion(10, "scalability", passed, f"{detail}, t(4000)/t(1000) = {ratio:.2f} (<= 6), {elapsed:.1f}s total (< 120s)")
    assert passed


# --- 11 -------------------------------------------------------------------------------


def test_l1_sparsification(report_criterion, default_instance):
    g, content = default_instance
    zeros = {}
    for beta2 in (0.1, 5.0):
        U = embed(g, content, Hyperparams(variant="multiplicative-l1", beta2=beta2)).state.U
        zeros[beta2] = float(np.mean(U == 0))
    passed = zeros[5.0] >= zeros[0.1]
    report_criterion(11, "L1 sparsification", passed,
                     f"zero fraction of U: {zeros[0.1]:.4f} at beta2=0.1, {zeros[5.0]:.4f} at beta2=5")
    assert passed


# --- 12 -------------------------------------------------------------------------------


def test_lemma_probe(report_criterion):
    J = np.ones((2, 2))
    ones = lemma_probe(J, J)
    doubled = lemma_probe(2 * J, J)
    rate = lemma_hold_rate(n_instances=1000, seed=0)
    passed = ones == (2.0, 2.0, True) and doubled == (4.0, 8.0, False)
    report_criterion(12, "lemma probe", passed,
                     f"C=U=J -> {ones}; C=2J, U=J -> {doubled}; hold-rate over 1000 admissible instances {rate:.3f} (reported only)")
    assert passed


# --- 13 -------------------------------------------------------------------------------


def test_embed_determinism(report_criterion, tmp_path):
    assert main(["synth", "--out", str(tmp_path / "data")]) == 0
    data = tmp_path / "data"
    digests = []
    for run in ("a", "b"):
        args = ["embed", "--edges", str(data / "edges.tsv"), "--docs", str(data / "docs.txt"),
                "--labels", str(data / "labels.tsv"), "--seed", "0", "--out", str(tmp_path / run)]
        assert main(args) == 0
        digests.append((tmp_path / run / "embedding.tsv").read_bytes())
    passed = digests[0] == digests[1] and len(digests[0]) > 0
    report_criterion(13, "determinism", passed, f"two embed runs, embedding.tsv byte-identical: {passed} ({len(digests[0])} bytes)")
    assert passed
