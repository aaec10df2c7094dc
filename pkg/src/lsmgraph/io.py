"""File formats: edge lists, CSV matrices, curve JSON, report artifacts.

Graphs travel as whitespace-separated edge lists (``i j [w]``, 0-based) or
dense CSV matrices; positions and unit-interval values as CSV. Curves are
exchanged as JSON records with a ``kind`` of ``hardy-weinberg``,
``bezier2`` (three control points), or ``table`` (rows of (t, coords)).
Every JSON artifact carries ``schema_version`` and, for experiment
outputs, an echo of the generating config, so results are self-describing.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .curves import (
    ArclengthCurve,
    ParametricCurve,
    QuadraticBezier,
    arclength_reparameterize,
    hardy_weinberg,
)
from .experiments import MseReport, PvalueSamples
from .inference import FitResult
from .spectral import DirectedEmbeddingResult, EmbeddingResult
from .twosample import TwoSampleReport

SCHEMA_VERSION = 1


class FormatError(ValueError):
    """Malformed input file."""


# --- graphs -----------------------------------------------------------------

def read_edge_list(path: str | Path, n: int | None = None, directed: bool = False) -> np.ndarray:
    """Read a 0-based ``i j [w]`` edge list.

    Undirected graphs come back as symmetric binary uint8 (weights, if
    present, must be 1); directed graphs as float with the given weights.
    The vertex count is inferred from the largest index unless `n` is
    given. Self-loops are rejected (graphs here are hollow).
    """
    edges: list[tuple[int, int, float]] = []
    max_idx = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens or tokens[0].startswith("#"):
                continue
            if len(tokens) not in (2, 3):
                raise FormatError(f"{path}:{lineno}: expected 'i j [w]', got {line.strip()!r}")
            try:
                i, j = int(tokens[0]), int(tokens[1])
                w = float(tokens[2]) if len(tokens) == 3 else 1.0
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            if i < 0 or j < 0:
                raise FormatError(f"{path}:{lineno}: vertex indices must be nonnegative")
            if i == j:
                raise FormatError(f"{path}:{lineno}: self-loop {i}->{j} not allowed")
            if not np.isfinite(w) or w < 0:
                raise FormatError(f"{path}:{lineno}: weight must be finite and nonnegative")
            if not directed and w != 1.0:
                raise FormatError(
                    f"{path}:{lineno}: undirected graphs are binary; weight {w} invalid"
                )
            edges.append((i, j, w))
            max_idx = max(max_idx, i, j)

    size = (max_idx + 1) if n is None else n
    if max_idx >= size:
        raise FormatError(f"{path}: vertex index {max_idx} exceeds declared n={n}")
    if directed:
        A = np.zeros((size, size), dtype=float)
        for i, j, w in edges:
            A[i, j] = w
        return A
    A = np.zeros((size, size), dtype=np.uint8)
    for i, j, _ in edges:
        A[i, j] = 1
        A[j, i] = 1
    return A


def write_edge_list(A: np.ndarray, path: str | Path, directed: bool = False) -> None:
    """Write edges as ``i j`` (undirected, upper triangle) or ``i j w``."""
    A = np.asarray(A)
    with open(path, "w", encoding="utf-8") as fh:
        if directed:
            rows, cols = np.nonzero(A)
            for i, j in zip(rows.tolist(), cols.tolist()):
                fh.write(f"{i} {j} {A[i, j]:.17g}\n")
        else:
            rows, cols = np.nonzero(np.triu(A, 1))
            for i, j in zip(rows.tolist(), cols.tolist()):
                fh.write(f"{i} {j}\n")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Dense CSV adjacency matrix."""
    M = np.loadtxt(path, delimiter=",", ndmin=2)
    if M.shape[0] != M.shape[1]:
        raise FormatError(f"{path}: adjacency matrix must be square, got {M.shape}")
    return M


def read_positions_csv(path: str | Path) -> np.ndarray:
    """CSV of n rows and d coordinate columns."""
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_positions_csv(X: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, np.atleast_2d(np.asarray(X, dtype=float)), delimiter=",", fmt="%.17g")


def write_values_csv(values: np.ndarray, path: str | Path) -> None:
    """Single-column CSV (unit-interval coordinates, p-values, ...)."""
    np.savetxt(path, np.asarray(values, dtype=float).ravel(), fmt="%.17g")


def read_graph(path: str | Path, directed: bool = False) -> np.ndarray:
    """Dispatch on extension: ``.csv`` is a dense matrix, anything else an edge list."""
    if str(path).endswith(".csv"):
        M = read_matrix_csv(path)
        if np.any(np.diag(M) != 0):
            raise FormatError(f"{path}: adjacency matrix must be hollow")
        if not directed:
            if not np.array_equal(M, M.T) or not np.all(np.isin(M, (0.0, 1.0))):
                raise FormatError(f"{path}: undirected matrix must be symmetric binary")
            return M.astype(np.uint8)
        return M
    return read_edge_list(path, directed=directed)


# --- curves ------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class _SplineMap:
    spline: CubicSpline

    def __call__(self, t: np.ndarray) -> np.ndarray:
        out = self.spline(np.asarray(t, dtype=float))
        return out if out.ndim == 2 else np.atleast_2d(out)


def curve_to_json(curve: object) -> dict:
    """JSON-ready record for the supported curve kinds."""
    if isinstance(curve, QuadraticBezier):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "bezier2",
            "control_points": curve.control_points.tolist(),
        }
    raise FormatError(f"cannot serialize curve of type {type(curve).__name__}")


def curve_from_json(record: dict) -> ParametricCurve:
    """Build a parametric curve from a JSON record."""
    kind = record.get("kind")
    if kind == "hardy-weinberg":
        return hardy_weinberg()
    if kind == "bezier2":
        controls = np.asarray(record["control_points"], dtype=float)
        return QuadraticBezier(controls).to_parametric()
    if kind == "table":
        rows = np.asarray(record["rows"], dtype=float)
        if rows.ndim != 2 or rows.shape[1] < 2 or rows.shape[0] < 4:
            raise FormatError("table curve needs >= 4 rows of (t, coordinates)")
        t, coords = rows[:, 0], rows[:, 1:]
        if np.any(np.diff(t) <= 0):
            raise FormatError("table curve parameters must be strictly increasing")
        spline = CubicSpline(t, coords)
        return ParametricCurve(
            _SplineMap(spline), _SplineMap(spline.derivative()), coords.shape[1]
        )
    raise FormatError(f"unknown curve kind {kind!r} (field 'kind')")


def load_curve(spec: str, tol: float = 1e-10) -> ArclengthCurve:
    """``hw`` or a path to a curve JSON file, arclength-reparameterized."""
    if spec == "hw":
        return arclength_reparameterize(hardy_weinberg(), tol=tol)
    with open(spec, "r", encoding="utf-8") as fh:
        record = json.load(fh)
    return arclength_reparameterize(curve_from_json(record), tol=tol)


def write_curve_json(curve: QuadraticBezier, path: str | Path) -> None:
    _dump_json(curve_to_json(curve), path)


def write_curve_polyline(curve: ArclengthCurve, path: str | Path, n: int = 512) -> None:
    """Evenly spaced (in arclength) polyline for plotting."""
    pts = curve.point(np.linspace(0.0, 1.0, n))
    write_positions_csv(pts, path)


# --- reports -----------------------------------------------------------------

def _dump_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_echo(config: object) -> dict:
    return {
        key: (list(value) if isinstance(value, tuple) else value)
        for key, value in dataclasses.asdict(config).items()
    }


def write_embedding(
    result: EmbeddingResult | DirectedEmbeddingResult,
    csv_path: str | Path,
    sidecar_path: str | Path | None = None,
) -> None:
    """Positions as CSV plus a JSON sidecar with the spectrum diagnostics."""
    if isinstance(result, DirectedEmbeddingResult):
        positions = np.hstack([result.left, result.right])
        spectrum = result.singular_values
    else:
        positions = result.positions
        spectrum = result.eigenvalues
    write_positions_csv(positions, csv_path)
    if sidecar_path is not None:
        _dump_json(
            {
                "schema_version": SCHEMA_VERSION,
                "eigenvalues": [float(v) for v in spectrum],
                "spectrum_tail": [float(v) for v in result.spectrum_tail],
                "d_used": int(result.d_used),
                "warnings": list(result.warnings),
            },
            sidecar_path,
        )


def mse_table_text(report: MseReport) -> str:
    """Deterministic CSV table (estimator rows); excludes runtime."""
    lines = ["estimator,mse_a,mse_b,re_a,re_b"]
    for row in report.table_rows():
        lines.append(
            "{estimator},{mse_a:.10g},{mse_b:.10g},{re_a:.10g},{re_b:.10g}".format(**row)
        )
    return "\n".join(lines) + "\n"


def write_mse_report(
    report: MseReport,
    csv_path: str | Path | None = None,
    json_path: str | Path | None = None,
) -> None:
    if csv_path is not None:
        Path(csv_path).write_text(mse_table_text(report), encoding="utf-8")
    if json_path is not None:
        _dump_json(
            {
                "schema_version": SCHEMA_VERSION,
                "config": _config_echo(report.config),
                "mse": {k: [float(a) for a in v] for k, v in report.mse.items()},
                "relative_efficiency": {
                    k: [float(a) for a in v] for k, v in report.relative_efficiency.items()
                },
                "replicates_completed": report.replicates_completed,
                "failures": list(report.failures),
                "runtime_seconds": report.runtime_seconds,
            },
            json_path,
        )


def write_fit_result(
    fit: FitResult, path: str | Path, extra: dict | None = None
) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "theta": {"a": fit.theta.a, "b": fit.theta.b},
        "loglik": fit.loglik,
        "iterations": fit.iterations,
        "score_norm": fit.score_norm,
        "hessian": np.asarray(fit.hessian).tolist(),
        "converged": fit.converged,
    }
    for field in ("outside_tube_fraction", "n_clamped", "support_misfit"):
        if hasattr(fit, field):
            value = getattr(fit, field)
            payload[field] = bool(value) if isinstance(value, (bool, np.bool_)) else value
    if extra:
        payload.update(extra)
    _dump_json(payload, path)


def write_two_sample_report(report: TwoSampleReport, path: str | Path, extra: dict | None = None) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "aligned": dataclasses.asdict(report.aligned),
        "flipped": dataclasses.asdict(report.flipped),
        "flipped_applied": report.flipped_applied,
        "d_used": list(report.d_used),
        "isomap_k": list(report.isomap_k),
        "clamp_counts": list(report.clamp_counts),
        "stress": list(report.stress),
    }
    if extra:
        payload.update(extra)
    _dump_json(payload, path)


def write_pvalue_samples(
    samples: PvalueSamples,
    null_path: str | Path,
    alt_path: str | Path,
    json_path: str | Path | None = None,
) -> None:
    write_values_csv(samples.p_null, null_path)
    write_values_csv(samples.p_alt, alt_path)
    if json_path is not None:
        _dump_json(
            {
                "schema_version": SCHEMA_VERSION,
                "config": _config_echo(samples.config),
                "p_null": [float(v) for v in samples.p_null],
                "p_alt": [float(v) for v in samples.p_alt],
                "p_null_flipped": [float(v) for v in samples.p_null_flipped],
                "p_alt_flipped": [float(v) for v in samples.p_alt_flipped],
                "failures": list(samples.failures),
                "runtime_seconds": samples.runtime_seconds,
            },
            json_path,
        )


def write_histogram(values: np.ndarray, path: str | Path, bins: int = 20) -> None:
    """Histogram bins over [0,1] as CSV (lo, hi, count); counts sum to len(values)."""
    values = np.asarray(values, dtype=float).ravel()
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            fh.write(f"{lo:.10g},{hi:.10g},{int(c)}\n")
