"""Spectral embedding of adjacency matrices and related linear algebra.

The adjacency embedding takes the top-d eigenpairs of |A| (eigenvalues of
the symmetric A replaced by their magnitudes) and scales eigenvectors by
root-eigenvalue. Eigenvector signs are fixed so each column's
largest-magnitude entry is positive, which makes embeddings reproducible;
the underlying model only identifies positions up to an orthogonal map,
which `procrustes` resolves against a reference.

Matrices with n <= 2000 use a dense symmetric solver; larger ones use
ARPACK (implicitly restarted Lanczos) with a float32 product operator,
whose rounding is far below the sampling noise of any graph this size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh, svds

_DENSE_CUTOFF = 2000
_TAIL = 5            # extra eigenvalues kept for diagnostics
_GAP_TOL = 1e-8
_ARPACK_TOL = 1e-10


class SpectralError(ValueError):
    """Invalid embedding request."""


@dataclass(frozen=True)
class EmbeddingResult:
    """Top-d spectral embedding of a symmetric adjacency matrix."""

    positions: np.ndarray       # (n, d), rows are estimated latent positions
    eigenvalues: np.ndarray     # top-d magnitudes, descending
    d_used: int
    spectrum_tail: np.ndarray   # next few magnitudes, for diagnostics
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class DirectedEmbeddingResult:
    """Top-d singular embedding of a weighted / directed adjacency matrix."""

    left: np.ndarray            # (n, d) = U S^{1/2}
    right: np.ndarray           # (n, d) = V S^{1/2}
    singular_values: np.ndarray
    d_used: int
    spectrum_tail: np.ndarray
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class AlignmentResult:
    """Orthogonal map W minimizing ||Xhat W - X||_F and its residual."""

    rotation: np.ndarray
    residual: float


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _operator(A: np.ndarray) -> LinearOperator:
    A32 = np.asarray(A, dtype=np.float32)
    return LinearOperator(
        (A.shape[0],) * 2, matvec=lambda x: A32 @ x.astype(np.float32), dtype=np.float64
    )


def _top_symmetric_eigs(
    A: np.ndarray, k: int, op: LinearOperator | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs of symmetric A by magnitude, descending."""
    n = A.shape[0]
    if n <= _DENSE_CUTOFF or k >= n - 1:
        vals, vecs = np.linalg.eigh(np.asarray(A, dtype=float))
        order = np.argsort(-np.abs(vals), kind="stable")[:k]
        return vals[order], vecs[:, order]
    v0 = np.full(n, 1.0 / np.sqrt(n))
    vals, vecs = eigsh(op or _operator(A), k=k, which="LM", v0=v0, tol=_ARPACK_TOL)
    order = np.argsort(-np.abs(vals), kind="stable")
    return vals[order], vecs[:, order]


def _tail_magnitudes(A: np.ndarray, k: int, op: LinearOperator | None = None) -> np.ndarray:
    """Loose-tolerance top-k magnitudes for diagnostics only.

    The values just past the model rank sit in the clustered noise bulk,
    where demanding ARPACK accuracy costs many restarts; a 1e-2 relative
    tolerance is plenty for gap warnings and scree output.
    """
    n = A.shape[0]
    if n <= _DENSE_CUTOFF or k >= n - 1:
        vals = np.linalg.eigvalsh(np.asarray(A, dtype=float))
        return np.sort(np.abs(vals))[::-1][:k]
    v0 = np.full(n, 1.0 / np.sqrt(n))
    vals = eigsh(
        op or _operator(A), k=k, which="LM", v0=v0, tol=1e-2, return_eigenvectors=False
    )
    return np.sort(np.abs(vals))[::-1]


def ase(A: np.ndarray, d: int) -> EmbeddingResult:
    """Adjacency spectral embedding into d dimensions.

    Accepts any symmetric real matrix (e.g. a probability matrix in tests),
    not just sampled graphs. Warns (in the result) when the spectral gap at
    d is below 1e-8 or when a selected eigenvalue of A is negative, which
    signals model misfit.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SpectralError("adjacency matrix must be square")
    if not (1 <= d <= n):
        raise SpectralError(f"embedding dimension d={d} must satisfy 1 <= d <= n={n}")
    if A.dtype.kind == "f":
        if not np.allclose(A, A.T, atol=1e-8):
            raise SpectralError("adjacency matrix must be symmetric")
    elif not np.array_equal(A, A.T):
        raise SpectralError("adjacency matrix must be symmetric")

    if n <= _DENSE_CUTOFF:
        vals, vecs = _top_symmetric_eigs(A, min(n, d + _TAIL))
        magnitudes = np.abs(vals)
        top_vals, tail = vals[:d], magnitudes[d:]
        top_vecs = vecs[:, :d]
    else:
        op = _operator(A)
        top_vals, top_vecs = _top_symmetric_eigs(A, d, op=op)
        all_mags = _tail_magnitudes(A, min(n - 1, d + _TAIL), op=op)
        tail = all_mags[d:]
        magnitudes = np.concatenate([np.abs(top_vals), tail])

    notes: list[str] = []
    if d < len(magnitudes) and magnitudes[d - 1] - magnitudes[d] < _GAP_TOL:
        notes.append(
            f"eigenvalue gap between positions {d} and {d + 1} is below {_GAP_TOL}; "
            "the embedding subspace is ill-defined"
        )
    if np.any(top_vals < 0):
        notes.append("negative eigenvalue among the selected top-d (model misfit signal)")

    positions = _fix_signs(top_vecs) * np.sqrt(np.abs(top_vals))
    return EmbeddingResult(
        positions=positions,
        eigenvalues=np.abs(top_vals),
        d_used=d,
        spectrum_tail=tail,
        warnings=tuple(notes),
    )


def ase_directed(A: np.ndarray, d: int) -> DirectedEmbeddingResult:
    """Singular-value embedding for weighted, directed adjacency matrices."""
    A = np.asarray(A, dtype=float)
    n, m = A.shape
    if A.ndim != 2 or n != m:
        raise SpectralError("adjacency matrix must be square")
    if not (1 <= d <= n):
        raise SpectralError(f"embedding dimension d={d} must satisfy 1 <= d <= n={n}")
    if np.any(~np.isfinite(A)) or np.any(A < 0):
        raise SpectralError("directed adjacency entries must be finite and nonnegative")

    k = min(n, d + _TAIL)
    if n <= _DENSE_CUTOFF or k >= n - 1:
        u, s, vt = np.linalg.svd(A, full_matrices=False)
        u, s, vt = u[:, :k], s[:k], vt[:k]
    else:
        u, s, vt = svds(A, k=k, v0=np.full(n, 1.0 / np.sqrt(n)), tol=_ARPACK_TOL)
        order = np.argsort(-s, kind="stable")
        u, s, vt = u[:, order], s[order], vt[order]

    notes: list[str] = []
    if d < len(s) and s[d - 1] - s[d] < _GAP_TOL:
        notes.append(
            f"singular value gap between positions {d} and {d + 1} is below {_GAP_TOL}; "
            "the embedding subspace is ill-defined"
        )
    # use the left vectors' sign convention and mirror it on the right
    idx = np.argmax(np.abs(u[:, :d]), axis=0)
    signs = np.sign(u[idx, np.arange(d)])
    signs[signs == 0] = 1.0
    u_d = u[:, :d] * signs
    v_d = vt[:d].T * signs
    root = np.sqrt(s[:d])
    return DirectedEmbeddingResult(
        left=u_d * root,
        right=v_d * root,
        singular_values=s[:d],
        d_used=d,
        spectrum_tail=s[d:],
        warnings=tuple(notes),
    )


def _is_flat(x: np.ndarray) -> bool:
    return bool(np.ptp(x) < 1e-12 * max(1.0, float(np.abs(x[0]))))


def profile_likelihood_split(values: np.ndarray) -> int:
    """Elbow location by two-segment Gaussian profile likelihood.

    Values must be sorted descending. Both segments share one pooled
    maximum-likelihood variance; the returned split q (1-based) maximizes
    the total log-likelihood over q in 1..len-1. Flat inputs return 1.
    """
    x = np.asarray(values, dtype=float)
    m = x.size
    if m < 2:
        return 1
    if _is_flat(x):
        warnings.warn("flat spectrum: returning embedding dimension 1", RuntimeWarning)
        return 1
    best_q, best_ll = 1, -np.inf
    for q in range(1, m):
        head, tail = x[:q], x[q:]
        ss = np.sum((head - head.mean()) ** 2) + np.sum((tail - tail.mean()) ** 2)
        var = ss / m
        if var <= 0.0:
            var = 1e-300
        ll = -0.5 * m * (np.log(2.0 * np.pi * var) + 1.0)
        if ll > best_ll:
            best_q, best_ll = q, ll
    return best_q


def select_dimension(A: np.ndarray, d_max: int) -> int:
    """Estimate the embedding dimension from the top-d_max spectrum magnitudes.

    Iterates two-segment profile-likelihood elbows: after accepting a
    split, the tail is re-split, so a steeply decaying signal block is not
    absorbed into one elbow. A split is accepted while its gap dominates
    the tail's own spacing (twice the largest consecutive drop), which is
    where the noise bulk of an adjacency spectrum begins; flat remainders
    stop the recursion. Flat whole spectra return 1 with a warning.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if not (2 <= d_max <= n):
        raise SpectralError(f"d_max={d_max} must satisfy 2 <= d_max <= n={n}")
    mags = _tail_magnitudes(A, min(d_max, n - 1) if n > _DENSE_CUTOFF else d_max)

    if _is_flat(mags):
        warnings.warn("flat spectrum: returning embedding dimension 1", RuntimeWarning)
        return 1
    d = 0
    rest = mags
    while rest.size >= 2 and not _is_flat(rest):
        q = profile_likelihood_split(rest)
        gap = rest[q - 1] - rest[q] if q < rest.size else 0.0
        tail = rest[q:]
        tail_spacing = float(np.max(-np.diff(tail))) if tail.size >= 2 else 0.0
        if gap <= 0.0 or (tail_spacing > 0.0 and gap <= 2.0 * tail_spacing):
            break
        d += q
        rest = rest[q:]
    return max(d, 1)


def procrustes(Xhat: np.ndarray, X: np.ndarray) -> AlignmentResult:
    """Orthogonal alignment W = argmin ||Xhat W - X||_F (no centering).

    W = U V^T from the singular value decomposition of Xhat^T X.
    """
    Xhat = np.asarray(Xhat, dtype=float)
    X = np.asarray(X, dtype=float)
    if Xhat.shape != X.shape:
        raise SpectralError(f"shape mismatch: {Xhat.shape} vs {X.shape}")
    u, _, vt = np.linalg.svd(Xhat.T @ X)
    W = u @ vt
    residual = float(np.linalg.norm(Xhat @ W - X))
    return AlignmentResult(rotation=W, residual=residual)


def asymptotic_covariance(
    points: np.ndarray, x: np.ndarray, weights: np.ndarray | None = None
) -> np.ndarray:
    """Limiting covariance of a scaled embedded row at position x.

    For a latent position law given by `points` with the given weights
    (uniform by default, so a raw sample acts as its empirical measure):

        Sigma(x) = D^{-1} E[(x'X - (x'X)^2) X X'] D^{-1},  D = E[X X'].

    The expectation is exact for discrete input; passing a Monte Carlo
    sample of positions evaluates the same formula under the empirical
    measure. Rejects a second-moment matrix with condition number > 1e12.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if pts.shape[1] != x.size:
        raise SpectralError(f"x has dimension {x.size}, points have {pts.shape[1]}")
    m = pts.shape[0]
    w = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (m,) or np.any(w < 0) or not np.isclose(w.sum(), 1.0):
        raise SpectralError("weights must be a probability vector matching points")

    delta = (pts * w[:, None]).T @ pts
    if np.linalg.cond(delta) > 1e12:
        raise SpectralError("second-moment matrix is singular (condition number > 1e12)")
    dots = pts @ x
    bern_var = dots - dots**2
    middle = (pts * (w * bern_var)[:, None]).T @ pts
    delta_inv = np.linalg.inv(delta)
    return delta_inv @ middle @ delta_inv
