"""Random dot product graphs, blockmodels, and curve-supported samplers.

Edge probabilities are inner products of latent position rows, optionally
scaled by a global sparsity factor; conditionally on the positions, edges
are independent Bernoulli draws. Sampled graphs are symmetric, hollow,
binary uint8 matrices. The probability matrix diagonal is computed but
never used for sampling (graphs are loop-free).

All samplers are pure functions of (inputs, seed); large graphs are
generated block-row by block-row so an n=8000 graph never materializes an
n x n float64 probability matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .curves import ArclengthCurve
from .rng import RandomState, as_rng

_BLOCK_ROWS = 1024
_INNER_TOL = 1e-12


class GraphModelError(ValueError):
    """Invalid model specification or latent positions."""


@dataclass(frozen=True)
class InnerProductReport:
    """Diagnostic from `validate_inner_product`."""

    ok: bool
    worst_pair: tuple[int, int]
    worst_value: float


def validate_inner_product(X: np.ndarray, tol: float = _INNER_TOL) -> InnerProductReport:
    """Check that all pairwise inner products (including self) lie in [0,1].

    Works block-row by block-row; reports the most violating pair, or the
    inner product closest to the boundary when everything is in range.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    worst_violation = -np.inf
    worst_pair = (0, 0)
    worst_value = 0.0
    for i0 in range(0, n, _BLOCK_ROWS):
        block = X[i0 : i0 + _BLOCK_ROWS] @ X.T
        violation = np.maximum(block - 1.0, -block)
        flat = int(np.argmax(violation))
        i, j = divmod(flat, n)
        if violation[i, j] > worst_violation:
            worst_violation = float(violation[i, j])
            worst_pair = (i0 + i, j)
            worst_value = float(block[i, j])
    return InnerProductReport(
        ok=bool(worst_violation <= tol), worst_pair=worst_pair, worst_value=worst_value
    )


def probability_matrix(X: np.ndarray, sparsity: float = 1.0) -> np.ndarray:
    """P = sparsity * X X^T; rejects any entry outside [0,1].

    Materializes the full n x n matrix; samplers avoid calling this for
    large n and compute the same blocks on the fly.
    """
    X = np.asarray(X, dtype=float)
    _check_sparsity(sparsity)
    if not np.all(np.isfinite(X)):
        raise GraphModelError("latent positions must be finite")
    P = sparsity * (X @ X.T)
    if np.any(P < -_INNER_TOL) or np.any(P > 1.0 + _INNER_TOL):
        report = validate_inner_product(X)
        raise GraphModelError(
            f"edge probability out of [0,1]: pair {report.worst_pair} "
            f"has inner product {report.worst_value!r}"
        )
    return np.clip(P, 0.0, 1.0)


def sample_rdpg(X: np.ndarray, sparsity: float = 1.0, seed: RandomState = 0) -> np.ndarray:
    """Sample a symmetric hollow binary adjacency matrix with P = sparsity * XX^T.

    Deterministic given (X, sparsity, seed); uniforms are consumed in fixed
    block-row order so results do not depend on memory limits.
    """
    X = np.asarray(X, dtype=float)
    _check_sparsity(sparsity)
    if not np.all(np.isfinite(X)):
        raise GraphModelError("latent positions must be finite")
    rng = as_rng(seed)
    n = X.shape[0]
    A = np.zeros((n, n), dtype=np.uint8)
    for i0 in range(0, n, _BLOCK_ROWS):
        i1 = min(i0 + _BLOCK_ROWS, n)
        # columns i0..n only: everything left of the block is below the diagonal
        P = sparsity * (X[i0:i1] @ X[i0:].T)
        if np.any(P < -_INNER_TOL) or np.any(P > 1.0 + _INNER_TOL):
            report = validate_inner_product(X)
            raise GraphModelError(
                f"edge probability out of [0,1]: pair {report.worst_pair} "
                f"has inner product {report.worst_value!r}"
            )
        np.clip(P, 0.0, 1.0, out=P)
        U = rng.random(P.shape)
        above = np.arange(i0, n)[None, :] > np.arange(i0, i1)[:, None]
        A[i0:i1, i0:] = (U < P) & above
    A |= A.T
    return A


@dataclass(frozen=True)
class SbmSpec:
    """Positive semidefinite blockmodel given by latent block points.

    Block k has latent position `block_points[k]`; connection probabilities
    are the pairwise inner products. Memberships are i.i.d. Categorical
    (`mixing`) unless a fixed assignment is supplied.
    """

    block_points: np.ndarray        # (K, d)
    mixing: np.ndarray | None = None
    assignment: np.ndarray | None = None

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.block_points, dtype=float))
        object.__setattr__(self, "block_points", pts)
        K = pts.shape[0]
        if len({tuple(row) for row in pts}) != K:
            raise GraphModelError("block points must be distinct")
        gram = pts @ pts.T
        if np.any(gram < -_INNER_TOL) or np.any(gram > 1.0 + _INNER_TOL):
            raise GraphModelError("block point inner products must lie in [0,1]")
        if self.mixing is not None:
            mix = np.asarray(self.mixing, dtype=float).ravel()
            if mix.shape != (K,) or np.any(mix < 0) or not np.isclose(mix.sum(), 1.0):
                raise GraphModelError("mixing must be a length-K probability vector")
            object.__setattr__(self, "mixing", mix)
        if self.assignment is not None:
            tau = np.asarray(self.assignment, dtype=int).ravel()
            if tau.size and (tau.min() < 0 or tau.max() >= K):
                raise GraphModelError("assignment values must lie in [0, K)")
            object.__setattr__(self, "assignment", tau)
        if self.mixing is None and self.assignment is None:
            raise GraphModelError("need either mixing probabilities or a fixed assignment")

    @property
    def n_blocks(self) -> int:
        return self.block_points.shape[0]


class SbmSample(NamedTuple):
    adjacency: np.ndarray
    assignment: np.ndarray
    latent: np.ndarray


def sample_sbm(
    spec: SbmSpec,
    n: int,
    seed: RandomState = 0,
    require_all_blocks: bool = False,
) -> SbmSample:
    """Sample a blockmodel graph; returns (adjacency, assignment, latent).

    With a fixed assignment the spec's `assignment` must have length n.
    `require_all_blocks` insists every block is represented (impossible
    for n < K, which is then rejected).
    """
    rng = as_rng(seed)
    K = spec.n_blocks
    if spec.assignment is not None:
        tau = spec.assignment
        if tau.shape != (n,):
            raise GraphModelError(f"fixed assignment has length {tau.size}, expected {n}")
    else:
        tau = rng.choice(K, size=n, p=spec.mixing)
    if require_all_blocks:
        if n < K:
            raise GraphModelError(f"cannot cover {K} blocks with {n} vertices")
        missing = set(range(K)) - set(np.unique(tau).tolist())
        if missing:
            raise GraphModelError(f"blocks {sorted(missing)} not represented in assignment")
    X = spec.block_points[tau]
    A = sample_rdpg(X, sparsity=1.0, seed=rng)
    return SbmSample(A, tau, X)


@dataclass(frozen=True)
class LsmSpec:
    """Curve-supported latent structure graph specification.

    Latent positions are images under the arclength map of i.i.d. draws
    from `underlying` (any object with sample(n, rng) -> values in [0,1],
    e.g. BetaParams or DiscreteDistribution).
    """

    curve: ArclengthCurve
    underlying: object
    n: int
    sparsity: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphModelError("n must be positive")
        _check_sparsity(self.sparsity)
        if not hasattr(self.underlying, "sample"):
            raise GraphModelError("underlying distribution must provide sample(n, rng)")
        report = validate_inner_product(self.curve.point(np.linspace(0.0, 1.0, 257)))
        if not report.ok:
            raise GraphModelError(
                f"support is not an inner-product curve: worst value {report.worst_value!r}"
            )


class LsmSample(NamedTuple):
    adjacency: np.ndarray
    latent: np.ndarray
    t_values: np.ndarray


def sample_lsm(spec: LsmSpec, seed: RandomState = 0) -> LsmSample:
    """Sample a latent structure graph; returns (adjacency, latent, t_values).

    The returned t-values are the underlying draws, i.e. the exact
    arclength preimages of the latent positions; estimators can be checked
    against them.
    """
    rng = as_rng(seed)
    t = np.clip(spec.underlying.sample(spec.n, rng), 0.0, 1.0)
    X = spec.curve.point(t)
    A = sample_rdpg(X, sparsity=spec.sparsity, seed=rng)
    return LsmSample(A, X, t)


def _check_sparsity(sparsity: float) -> None:
    if not (0.0 < sparsity <= 1.0):
        raise GraphModelError(f"sparsity must lie in (0, 1], got {sparsity!r}")
