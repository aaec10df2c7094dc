"""Support curves: arclength parameterization, projection, Bezier fitting.

A support curve is the image of a smooth map gamma: [0,1] -> R^k. All
downstream estimation works through the unit-speed (arclength)
reparameterization p: [0,1] -> C, its inverse, and the nearest-point
projection onto C. The Hardy-Weinberg curve

    r(t) = (t^2, 2 t (1-t), (1-t)^2)

is the canonical example and is also exactly the quadratic Bezier curve
with control points (0,0,1), (0,1,0), (1,0,0).

Conventions: curve maps take a parameter array of shape (m,) and return an
(m, k) array; arclength position s always lives in [0,1] (true arclength
divided by total length L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
# 10-point Gauss-Legendre rule; exact to machine precision on the narrow
# sub-intervals of the arclength table for smooth speed functions.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)

_TABLE_SIZE = 1024
_PROJECTION_GRID = 1024
_PROJECTION_TOL = 1e-10


class CurveError(ValueError):
    """Invalid curve geometry (non-regular, degenerate, or out of domain)."""


@dataclass(frozen=True)
class ParametricCurve:
    """Smooth map gamma: [0,1] -> R^k with an analytic first derivative.

    `fun` and `deriv` must be vectorized: given shape (m,) parameters they
    return an (m, k) array. Both must be picklable (module-level functions
    or callable dataclasses) so curves can cross process boundaries.
    """

    fun: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    ambient_dim: int

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.fun(np.asarray(t, dtype=float))

    def speed(self, t: np.ndarray) -> np.ndarray:
        """|gamma'(t)| elementwise."""
        d = self.deriv(np.asarray(t, dtype=float))
        return np.sqrt(np.sum(d * d, axis=-1))

    def validate(self, grid_size: int = 256, tol: float = 1e-6) -> dict:
        """Numerical smoothness / injectivity report on a parameter grid.

        Checks that a central finite-difference second derivative stays
        bounded and that well-separated parameters map to well-separated
        points (no self-intersection at grid resolution).
        """
        t = np.linspace(0.0, 1.0, grid_size)
        h = 1.0 / (4 * grid_size)
        inner = t[(t >= h) & (t <= 1 - h)]
        second = (self.deriv(inner + h) - self.deriv(inner - h)) / (2 * h)
        second_bound = float(np.max(np.abs(second))) if inner.size else 0.0
        pts = self(t)
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        sep = np.abs(t[:, None] - t[None, :])
        far = sep > 0.05
        min_far_dist = float(dist[far].min()) if far.any() else np.inf
        return {
            "second_derivative_bound": second_bound,
            "min_distance_separated_params": min_far_dist,
            "ok": bool(np.isfinite(second_bound) and min_far_dist > tol),
        }


# --- Hardy-Weinberg curve -------------------------------------------------

def _hw_point(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.stack([t * t, 2.0 * t * (1.0 - t), (1.0 - t) * (1.0 - t)], axis=-1)


def _hw_deriv(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.stack([2.0 * t, 2.0 - 4.0 * t, -2.0 * (1.0 - t)], axis=-1)


def hardy_weinberg() -> ParametricCurve:
    """The curve r(t) = (t^2, 2t(1-t), (1-t)^2) in the simplex."""
    return ParametricCurve(_hw_point, _hw_deriv, 3)


# --- adaptive Simpson arclength -------------------------------------------

def _adaptive_segment_lengths(
    speed: Callable[[np.ndarray], np.ndarray],
    edges: np.ndarray,
    tol: float,
    max_depth: int = 24,
) -> np.ndarray:
    """Adaptive-Simpson integral of `speed` over each [edges[i], edges[i+1]].

    All active sub-intervals are processed as flat arrays; an interval is
    accepted when the standard two-half Simpson comparison is below its
    share of the tolerance, with the usual Richardson correction.
    """
    n_seg = len(edges) - 1
    out = np.zeros(n_seg)

    a = edges[:-1].copy()
    b = edges[1:].copy()
    owner = np.arange(n_seg)
    tol_local = np.full(n_seg, tol / max(n_seg, 1))
    fa = speed(a)
    fb = speed(b)
    fm = speed(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    for depth in range(max_depth + 1):
        if a.size == 0:
            break
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = speed(lm)
        frm = speed(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        done = (np.abs(err) <= 15.0 * tol_local) | (depth == max_depth)
        if done.any():
            np.add.at(out, owner[done], left[done] + right[done] + err[done] / 15.0)
        keep = ~done
        if not keep.any():
            break
        # split the surviving intervals into their two halves
        a = np.concatenate([a[keep], m[keep]])
        b = np.concatenate([m[keep], b[keep]])
        owner = np.concatenate([owner[keep], owner[keep]])
        tol_local = np.concatenate([tol_local[keep] / 2.0, tol_local[keep] / 2.0])
        fa = np.concatenate([fa[keep], fm[keep]])
        fb = np.concatenate([fm[keep], fb[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    return out


def _gauss_legendre_arcs(
    speed: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray
) -> np.ndarray:
    """Signed integral of `speed` over many short intervals at once."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[None, :] + half[None, :] * _GL_NODES[:, None]
    vals = speed(nodes.ravel()).reshape(nodes.shape)
    return half * np.tensordot(_GL_WEIGHTS, vals, axes=(0, 0))


@dataclass(frozen=True)
class ProjectionResult:
    """Nearest point on the curve for each query point."""

    point: np.ndarray    # (n, d) or (d,)
    s: np.ndarray        # normalized arclength of the projection
    distance: np.ndarray
    outside_tube: np.ndarray | None = None  # set when a tube radius was given


@dataclass
class ArclengthCurve:
    """Unit-speed reparameterization p(s), s in [0,1], of a parametric curve.

    Built by `arclength_reparameterize`. The (t, s) cumulative table is
    strictly increasing; point evaluation refines a monotone-interpolant
    lookup with Newton corrections on the exact cumulative length, so
    evaluation error is far below the table resolution.
    """

    base: ParametricCurve
    t_grid: np.ndarray
    s_grid: np.ndarray        # cumulative arclength, s_grid[0] = 0
    total_length: float
    tol: float

    @property
    def ambient_dim(self) -> int:
        return self.base.ambient_dim

    @cached_property
    def _t_of_arc(self) -> PchipInterpolator:
        # monotone interpolant of the inverse cumulative-length map
        return PchipInterpolator(self.s_grid, self.t_grid)

    @cached_property
    def _projection_grid(self) -> tuple[np.ndarray, np.ndarray]:
        s = np.linspace(0.0, 1.0, _PROJECTION_GRID)
        return s, self.point(s)

    def _param_of_arc(self, arc: np.ndarray) -> np.ndarray:
        """Invert the cumulative-length map: table lookup + Newton refinement."""
        arc = np.asarray(arc, dtype=float)
        t = np.clip(self._t_of_arc(arc), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self.t_grid, t, side="right") - 1, 0, len(self.t_grid) - 2)
        base_t = self.t_grid[idx]
        base_arc = self.s_grid[idx]
        for _ in range(3):
            current = base_arc + _gauss_legendre_arcs(self.base.speed, base_t, t)
            spd = self.base.speed(t)
            t = np.clip(t - (current - arc) / spd, 0.0, 1.0)
        return t

    def point(self, s: np.ndarray) -> np.ndarray:
        """Evaluate p(s) for s in [0,1] (normalized arclength)."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
            raise CurveError("arclength position s must lie in [0,1]")
        t = self._param_of_arc(s_arr * self.total_length)
        return self.base(t)

    def project(self, x: np.ndarray, tube: "TubeConfig | None" = None) -> ProjectionResult:
        """Nearest-point projection onto the curve.

        Coarse search over a cached grid of 1024 curve samples followed by
        golden-section refinement of the squared distance to 1e-10 in s;
        grid ties resolve to the smallest s. Accepts a single point (d,)
        or a batch (n, d).
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if pts.shape[1] != self.ambient_dim:
            raise CurveError(
                f"points have dimension {pts.shape[1]}, curve is in R^{self.ambient_dim}"
            )
        grid_s, grid_pts = self._projection_grid
        step = grid_s[1] - grid_s[0]

        n = pts.shape[0]
        best_idx = np.empty(n, dtype=int)
        chunk = max(1, int(2**22 // max(len(grid_s), 1)))
        for i0 in range(0, n, chunk):
            block = pts[i0 : i0 + chunk]
            d2 = (
                np.sum(block * block, axis=1)[:, None]
                - 2.0 * block @ grid_pts.T
                + np.sum(grid_pts * grid_pts, axis=1)[None, :]
            )
            best_idx[i0 : i0 + chunk] = np.argmin(d2, axis=1)

        lo = np.clip(grid_s[best_idx] - step, 0.0, 1.0)
        hi = np.clip(grid_s[best_idx] + step, 0.0, 1.0)

        def sqdist(s: np.ndarray) -> np.ndarray:
            diff = self.point(s) - pts
            return np.sum(diff * diff, axis=1)

        s_opt = _golden_section(sqdist, lo, hi, _PROJECTION_TOL)
        proj = self.point(s_opt)
        dist = np.sqrt(np.sum((proj - pts) ** 2, axis=1))
        outside = None
        if tube is not None:
            outside = dist > tube.r_outer
        if single:
            return ProjectionResult(
                proj[0], float(s_opt[0]), float(dist[0]),
                None if outside is None else bool(outside[0]),
            )
        return ProjectionResult(proj, s_opt, dist, outside)

    def pullback(self, x: np.ndarray, tol: float = 1e-6) -> np.ndarray:
        """p^{-1} for points on (or within `tol` of) the curve."""
        res = self.project(x)
        if np.any(np.asarray(res.distance) > tol):
            worst = float(np.max(res.distance))
            raise CurveError(
                f"point lies {worst:.3g} away from the curve (tolerance {tol:.3g})"
            )
        return res.s

    def reverse(self) -> "ArclengthCurve":
        """Orientation-reversed curve p'(s) = p(1-s); an involution."""
        flipped = ParametricCurve(
            _ReversedMap(self.base.fun, negate=False),
            _ReversedMap(self.base.deriv, negate=True),
            self.base.ambient_dim,
        )
        return arclength_reparameterize(flipped, tol=self.tol)


@dataclass(frozen=True)
class _ReversedMap:
    inner: Callable[[np.ndarray], np.ndarray]
    negate: bool

    def __call__(self, t: np.ndarray) -> np.ndarray:
        out = self.inner(1.0 - np.asarray(t, dtype=float))
        return -out if self.negate else out


def arclength_reparameterize(curve: ParametricCurve, tol: float = 1e-10) -> ArclengthCurve:
    """Build the unit-speed parameterization of `curve`.

    Cumulative length over a 1024-interval grid is computed with adaptive
    Simpson quadrature to total tolerance `tol`. Curves with vanishing
    speed anywhere on a probe grid are rejected (no regular arclength map
    exists there).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    probe = np.linspace(0.0, 1.0, 4 * _TABLE_SIZE + 1)
    speeds = curve.speed(probe)
    if not np.all(np.isfinite(speeds)):
        raise CurveError("curve derivative is not finite on [0,1]")
    if np.min(speeds) <= 1e-12 * np.max(speeds):
        t_bad = float(probe[int(np.argmin(speeds))])
        raise CurveError(f"curve speed vanishes near t={t_bad:.4f}; not a regular curve")

    edges = np.linspace(0.0, 1.0, _TABLE_SIZE + 1)
    seg = _adaptive_segment_lengths(curve.speed, edges, tol)
    s_grid = np.concatenate([[0.0], np.cumsum(seg)])
    if np.any(np.diff(s_grid) <= 0):
        raise CurveError("cumulative length table is not strictly increasing")
    return ArclengthCurve(
        base=curve,
        t_grid=edges,
        s_grid=s_grid,
        total_length=float(s_grid[-1]),
        tol=tol,
    )


def _golden_section(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    tol: float,
) -> np.ndarray:
    """Vectorized golden-section minimization of a unimodal batch objective."""
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    width = float(np.max(hi - lo)) if lo.size else 0.0
    if width <= tol:
        return 0.5 * (lo + hi)
    n_iter = max(1, int(math.ceil(math.log(tol / width) / math.log(_INVPHI))))
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = f(x1)
    f2 = f(x2)
    for _ in range(n_iter):
        take_left = f1 < f2
        hi = np.where(take_left, x2, hi)
        lo = np.where(take_left, lo, x1)
        x1_new = np.where(take_left, hi - _INVPHI * (hi - lo), x2)
        x2_new = np.where(take_left, x1, lo + _INVPHI * (hi - lo))
        f_fresh = f(np.where(take_left, x1_new, x2_new))
        f1, f2 = (
            np.where(take_left, f_fresh, f2),
            np.where(take_left, f1, f_fresh),
        )
        x1, x2 = x1_new, x2_new
    return 0.5 * (lo + hi)


# --- tube geometry ----------------------------------------------------------

@dataclass(frozen=True)
class TubeConfig:
    """Tube radii 0 < r_inner < r_outer < r_max around a support curve.

    The smooth cutoff used by the mollified log-likelihood is 1 inside the
    inner tube and 0 outside the outer tube; r_max is the radius below
    which nearest-point projection is single-valued.
    """

    r_inner: float
    r_outer: float
    r_max: float

    def __post_init__(self) -> None:
        if not (0.0 < self.r_inner < self.r_outer < self.r_max):
            raise ValueError("tube radii must satisfy 0 < r_inner < r_outer < r_max")


def default_tube(curve: ArclengthCurve, grid_size: int = 512) -> TubeConfig:
    """Curvature-based tube: r_max = half the minimal curvature radius.

    Second derivatives come from central differences of the analytic first
    derivative. For straight (curvature ~ 0) curves the radius is capped
    at half the curve length. Inner/outer radii default to 0.5 and 0.8 of
    r_max.
    """
    h = 1e-5
    t = np.linspace(h, 1.0 - h, grid_size)
    d1 = curve.base.deriv(t)
    d2 = (curve.base.deriv(t + h) - curve.base.deriv(t - h)) / (2.0 * h)
    sp2 = np.sum(d1 * d1, axis=1)
    cross2 = sp2 * np.sum(d2 * d2, axis=1) - np.sum(d1 * d2, axis=1) ** 2
    kappa = np.sqrt(np.maximum(cross2, 0.0)) / np.maximum(sp2, 1e-300) ** 1.5
    max_kappa = float(np.max(kappa))
    cap = 0.5 * curve.total_length
    r_max = min(0.5 / max_kappa, cap) if max_kappa > 1e-12 else cap
    return TubeConfig(0.5 * r_max, 0.8 * r_max, r_max)


# --- subspace dimension -----------------------------------------------------

def minimal_subspace_dimension(
    curve: ParametricCurve, grid_size: int = 512, tol: float = 1e-8
) -> int:
    """Dimension of the smallest linear subspace containing the curve.

    Numerical rank (singular values above tol * sigma_max) of the matrix
    of curve samples. Note the subspace must pass through the origin: a
    planar curve off the origin still has rank 3 in R^3.
    """
    if grid_size < 10:
        raise ValueError("grid_size must be at least 10")
    samples = curve(np.linspace(0.0, 1.0, grid_size))
    sigma = np.linalg.svd(samples, compute_uv=False)
    if sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > tol * sigma[0]))


# --- quadratic Bezier curves ------------------------------------------------

@dataclass(frozen=True)
class QuadraticBezier:
    """B(t) = (1-t)^2 P0 + 2 t (1-t) P1 + t^2 P2."""

    control_points: np.ndarray  # (3, d)

    def __post_init__(self) -> None:
        cp = np.asarray(self.control_points, dtype=float)
        if cp.shape[0] != 3 or cp.ndim != 2:
            raise ValueError("control_points must have shape (3, d)")
        object.__setattr__(self, "control_points", cp)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        p0, p1, p2 = self.control_points
        u = 1.0 - t
        return u * u * p0 + 2.0 * t * u * p1 + t * t * p2

    def deriv(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        p0, p1, p2 = self.control_points
        return 2.0 * (1.0 - t) * (p1 - p0) + 2.0 * t * (p2 - p1)

    def reversed(self) -> "QuadraticBezier":
        return QuadraticBezier(self.control_points[::-1].copy())

    def to_parametric(self) -> ParametricCurve:
        return ParametricCurve(_BezierPoint(self), _BezierDeriv(self), self.control_points.shape[1])


@dataclass(frozen=True)
class _BezierPoint:
    bezier: QuadraticBezier

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.bezier(t)


@dataclass(frozen=True)
class _BezierDeriv:
    bezier: QuadraticBezier

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.bezier.deriv(t)


@dataclass(frozen=True)
class BezierFit:
    curve: QuadraticBezier
    residual: float          # sum of squared distances at the fitted parameters
    iterations: int
    converged: bool


def _project_params_to_bezier(points: np.ndarray, bezier: QuadraticBezier) -> np.ndarray:
    """Per-point parameter minimizing distance to the Bezier (grid + golden).

    The parameters are min-max renormalized to span [0,1]: a quadratic
    composed with an affine map is still quadratic, so without this anchor
    the alternating fit drifts to reparameterized control polygons.
    """
    grid = np.linspace(0.0, 1.0, 256)
    curve_pts = bezier(grid)
    d2 = (
        np.sum(points * points, axis=1)[:, None]
        - 2.0 * points @ curve_pts.T
        + np.sum(curve_pts * curve_pts, axis=1)[None, :]
    )
    idx = np.argmin(d2, axis=1)
    step = grid[1] - grid[0]
    lo = np.clip(grid[idx] - step, 0.0, 1.0)
    hi = np.clip(grid[idx] + step, 0.0, 1.0)

    def sqdist(t: np.ndarray) -> np.ndarray:
        diff = bezier(t) - points
        return np.sum(diff * diff, axis=1)

    t = _golden_section(sqdist, lo, hi, 1e-12)
    span = t.max() - t.min()
    if span <= 0.0:
        raise CurveError("degenerate Bezier parameter assignment (all points coincide)")
    return (t - t.min()) / span


def _chord_length_parameters(points: np.ndarray) -> np.ndarray:
    """Initial parameters: chord length along the first-principal-axis order."""
    centered = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    scores = centered @ vt[0]
    order = np.argsort(scores, kind="stable")
    ordered = points[order]
    chord = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(ordered, axis=0), axis=1))])
    if chord[-1] <= 0.0:
        raise CurveError("degenerate point configuration: zero total chord length")
    t = np.empty(len(points))
    t[order] = chord / chord[-1]
    return t


def fit_quadratic_bezier(
    points: np.ndarray, max_iter: int = 50, tol: float = 1e-8
) -> BezierFit:
    """Least-squares quadratic Bezier through a point cloud.

    Alternates between (i) assigning each point the parameter of its
    nearest point on the current curve and (ii) solving the linear
    least-squares problem for the three control points, until the control
    points move less than `tol` or `max_iter` is reached. The fitted curve
    is returned with a canonical orientation (endpoints in lexicographic
    order) since a quadratic Bezier is orientation-symmetric.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 3:
        raise ValueError("need at least 3 points of dimension >= 2")
    if points.shape[1] < 2:
        raise ValueError("need at least 3 points of dimension >= 2")

    t = _chord_length_parameters(points)
    controls = None
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        u = 1.0 - t
        design = np.stack([u * u, 2.0 * t * u, t * t], axis=1)
        if np.linalg.matrix_rank(design) < 3:
            raise CurveError(
                "rank-deficient Bezier design (fewer than three distinct parameters)"
            )
        new_controls, *_ = np.linalg.lstsq(design, points, rcond=None)
        if controls is not None and np.max(np.abs(new_controls - controls)) < tol:
            controls = new_controls
            converged = True
            break
        controls = new_controls
        t = _project_params_to_bezier(points, QuadraticBezier(controls))

    bezier = QuadraticBezier(controls)
    t = _project_params_to_bezier(points, bezier)
    residual = float(np.sum((bezier(t) - points) ** 2))
    if tuple(bezier.control_points[0]) > tuple(bezier.control_points[2]):
        bezier = bezier.reversed()
    return BezierFit(curve=bezier, residual=residual, iterations=iterations, converged=converged)
