"""Small dense/sparse linear-algebra kernels used throughout the package.

Dense matrices are plain ``numpy.ndarray`` objects and sparse matrices are
``scipy.sparse.csr_matrix``. Everything here is a pure function of its inputs.
"""

import numpy as np
import scipy.sparse as sp

from .exceptions import ConvergenceError, ParseError, ShapeError, SingularMatrixError, ValidationError

PIVOT_TOL = 1e-12
MAX_INVERSE_DIM = 512


def as_csr(x):
    """Return ``x`` as a float64 CSR matrix (copying only when needed)."""
    if sp.issparse(x):
        return sp.csr_matrix(x, dtype=np.float64)
    return sp.csr_matrix(np.asarray(x, dtype=np.float64))


def densify(x):
    if sp.issparse(x):
        return x.toarray()
    return np.asarray(x, dtype=np.float64)


def sparse_from_triplets(rows, cols, values, shape):
    """Build a CSR matrix from (row, col, value) triplets.

    Duplicate (row, col) pairs are summed, which makes construction independent
    of the triplet order.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    n_rows, n_cols = shape
    if not (rows.shape == cols.shape == values.shape):
        raise ShapeError("rows, cols and values must have equal length")
    if rows.size and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
        raise ShapeError(f"triplet index out of range for shape {shape}")
    if not np.all(np.isfinite(values)):
        raise ValidationError("sparse entries must be finite")
    out = sp.coo_matrix((values, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def spmm(s, d, transpose=False):
    """Sparse times dense: ``s @ d``, or ``s.T @ d`` when ``transpose`` is set."""
    s = as_csr(s)
    d = np.asarray(d, dtype=np.float64)
    inner = s.shape[0] if transpose else s.shape[1]
    if d.ndim != 2 or d.shape[0] != inner:
        op = "s.T" if transpose else "s"
        raise ShapeError(f"cannot multiply {op} of shape {s.shape} by {d.shape}")
    if transpose:
        s = s.T.tocsr()
    return np.asarray(s @ d)


def inverse_small(g, pivot_tol=PIVOT_TOL):
    """Invert a small square matrix by Gauss-Jordan elimination with partial pivoting.

    Raises SingularMatrixError when the best available pivot in a column has
    magnitude below ``pivot_tol``.
    """
    g = np.array(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ShapeError(f"inverse_small needs a square matrix, got {g.shape}")
    k = g.shape[0]
    if k > MAX_INVERSE_DIM:
        raise ShapeError(f"inverse_small supports k <= {MAX_INVERSE_DIM}, got {k}")
    if not np.all(np.isfinite(g)):
        raise ValidationError("matrix to invert has non-finite entries")
    aug = np.hstack([g, np.eye(k)])
    for col in range(k):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[piv, col]) < pivot_tol:
            raise SingularMatrixError(
                f"pivot {abs(aug[piv, col]):.3e} below {pivot_tol:g} in column {col}"
            )
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        factors = aug[:, col].copy()
        factors[col] = 0.0
        aug -= np.outer(factors, aug[col])
    return aug[:, k:]


def frobenius_sq(x):
    if sp.issparse(x):
        data = x.tocsr().data
        return float(np.dot(data, data))
    x = np.asarray(x, dtype=np.float64)
    return float(np.vdot(x, x).real)


def truncated_svd(m, k, seed=0, max_iter=200, tol=1e-8, oversample=None):
    """Leading ``k`` singular triplets by seeded block subspace iteration.

    The block carries ``k + oversample`` columns (default oversample ``k + 10``)
    and is re-orthonormalized on both sides every sweep; a Rayleigh-Ritz step on
    the small projected matrix extracts the triplets. Convergence is declared
    when ``max_i sqrt(|m v_i - s_i u_i|^2 + |m^T u_i - s_i v_i|^2) / s_1 < tol``.

    Returns ``(U, sigma, Vt)`` with ``U`` of shape (rows, k), ``sigma`` of length
    k in non-increasing order and ``Vt`` of shape (k, cols).
    """
    if sp.issparse(m):
        a = m.tocsr().astype(np.float64)
        at = a.T.tocsr()
    else:
        a = np.asarray(m, dtype=np.float64)
        at = a.T
    n_rows, n_cols = a.shape
    if not 1 <= k <= min(n_rows, n_cols):
        raise ShapeError(f"k={k} out of range for a {n_rows}x{n_cols} matrix")
    if oversample is None:
        oversample = k + 10
    p = min(k + oversample, n_rows, n_cols)

    rng = np.random.default_rng(seed)
    z = np.linalg.qr(rng.standard_normal((n_cols, p)))[0]
    residual = np.inf
    for _ in range(max_iter):
        q = np.linalg.qr(np.asarray(a @ z))[0]
        z = np.linalg.qr(np.asarray(at @ q))[0]
        az = np.asarray(a @ z)
        ub, s, vbt = np.linalg.svd(q.T @ az)
        u = q @ ub[:, :k]
        v = z @ vbt[:k].T
        sigma = s[:k]
        r_right = az @ vbt[:k].T - u * sigma
        r_left = np.asarray(at @ u) - v * sigma
        scale = sigma[0] if sigma[0] > 0 else 1.0
        residual = float(np.sqrt((r_right**2).sum(0) + (r_left**2).sum(0)).max() / scale)
        if residual < tol:
            return u, sigma.copy(), v.T.copy()
    raise ConvergenceError(
        f"truncated_svd did not converge in {max_iter} sweeps (residual {residual:.3e})",
        residual,
        result=(u, sigma.copy(), v.T.copy()),
    )


def read_sparse_text(path):
    """Read the ``rows<TAB>cols`` header + ``row<TAB>col<TAB>value`` triplet format."""
    rows, cols, vals = [], [], []
    shape = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if shape is None:
                if len(parts) != 2:
                    raise ParseError("header must be 'rows<TAB>cols'", lineno)
                try:
                    shape = (int(parts[0]), int(parts[1]))
                except ValueError:
                    raise ParseError("header dimensions must be integers", lineno) from None
                continue
            if len(parts) != 3:
                raise ParseError("expected 'row<TAB>col<TAB>value'", lineno)
            try:
                r, c, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError(f"cannot parse entry {line!r}", lineno) from None
            rows.append(r)
            cols.append(c)
            vals.append(v)
    if shape is None:
        raise ParseError("missing header line")
    return sparse_from_triplets(rows, cols, vals, shape)


def write_sparse_text(path, s):
    s = sp.coo_matrix(s)
    order = np.lexsort((s.col, s.row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{s.shape[0]}\t{s.shape[1]}\n")
        for i in order:
            fh.write(f"{s.row[i]}\t{s.col[i]}\t{s.data[i]:.17g}\n")
