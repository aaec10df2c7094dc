"""Command-line driver for simulation, estimation, and testing pipelines.

Every simulation command requires a seed and is a pure function of its
flags: rerunning a command writes byte-identical artifacts. Flags can also
be collected in a JSON config file (``--config``); explicit flags override
file values.

Exit codes: 0 success, 1 validation error (bad flags, unreadable files,
schema violations), 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io, manifold
from .curves import fit_quadratic_bezier
from .distributions import BetaParams
from .experiments import MseConfig, PvalueSimConfig, mse_experiment, pvalue_distribution_experiment
from .graphs import LsmSpec, SbmSpec, sample_lsm, sample_sbm
from .inference import DEFAULT_EPSILON, lsm_m_estimate
from .spectral import ase, ase_directed, select_dimension
from .twosample import two_sample_lsm_test

_NUMERICAL_ERRORS = (np.linalg.LinAlgError, FloatingPointError, ArithmeticError, RuntimeError)


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits with code 1 on usage errors."""

    def error(self, message: str) -> None:  # noqa: D401
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_theta(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"{flag} expects 'a,b', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ValueError(f"{flag}: {exc}") from exc


def _parse_dim(text: str, flag: str) -> int | None:
    if text == "auto":
        return None
    try:
        value = int(text)
    except ValueError as exc:
        raise ValueError(f"{flag} expects an integer or 'auto', got {text!r}") from exc
    if value < 1:
        raise ValueError(f"{flag} must be positive")
    return value


def _default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lsmgraph", description=__doc__)
    parser.add_argument("--config", help="JSON file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="sample a graph from a latent structure model")
    p.add_argument("--model", choices=["hw-beta", "sbm"], default="hw-beta")
    p.add_argument("--theta", help="Beta parameters 'a,b' (hw-beta model)")
    p.add_argument("--curve", default="hw", help="'hw' or a curve JSON file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sparsity", type=float, default=1.0)
    p.add_argument("--block-points", help="CSV of K x d block latent points (sbm model)")
    p.add_argument("--mixing", help="comma-separated block probabilities (sbm model)")
    p.add_argument("--out", required=True, help="edge list output path")
    p.add_argument("--latent-out", help="optional CSV of true latent positions")
    p.add_argument("--tvals-out", help="optional CSV of underlying draws (hw-beta)")
    p.add_argument("--assignment-out", help="optional CSV of block labels (sbm)")

    p = sub.add_parser("embed", help="spectrally embed a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--d", default="auto", help="embedding dimension or 'auto'")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--out", required=True, help="positions CSV")
    p.add_argument("--sidecar", help="JSON diagnostics path")

    p = sub.add_parser("estimate", help="fit Beta parameters by projection pullback")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="positions CSV")
    src.add_argument("--graph", help="graph to embed first")
    p.add_argument("--d", default="3", help="embedding dimension or 'auto' (with --graph)")
    p.add_argument("--curve", default="hw", help="'hw' or a curve JSON file")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--out", required=True, help="fit JSON path")

    p = sub.add_parser("fit-curve", help="fit a quadratic Bezier support to points")
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True, help="curve JSON path")
    p.add_argument("--polyline", help="optional CSV polyline of the fitted curve")
    p.add_argument("--polyline-points", type=int, default=512)

    p = sub.add_parser("isomap", help="unit-interval isomap coordinate of points")
    p.add_argument("--points", required=True)
    p.add_argument("--k", type=int, help="neighbors (default max(10, log2 n))")
    p.add_argument("--out", required=True, help="single-column CSV of coordinates")
    p.add_argument("--diagnostics", help="JSON diagnostics path")

    p = sub.add_parser("test", help="two-sample pipeline on two graphs")
    p.add_argument("--graph1", required=True)
    p.add_argument("--graph2", required=True)
    p.add_argument("--d", default="auto", help="embedding dimension or 'auto'")
    p.add_argument("--k", type=int, help="isomap neighbors")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--out", help="report JSON path")

    p = sub.add_parser("mse-table", help="replicated estimator MSE table")
    p.add_argument("--theta", required=True, help="Beta parameters 'a,b'")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--curve", choices=["hw", "bezier"], default="hw")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--embed-dim", type=int, default=3)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True, help="CSV table path")
    p.add_argument("--json", help="JSON report path")

    p = sub.add_parser("pvalue-sim", help="null/alternative p-value distributions")
    p.add_argument("--theta-null", required=True, help="Beta parameters 'a,b'")
    p.add_argument("--theta-alt", required=True, help="Beta parameters 'a,b'")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--d", default="3", help="embedding dimension or 'auto'")
    p.add_argument("--k", type=int, help="isomap neighbors")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out-null", required=True)
    p.add_argument("--out-alt", required=True)
    p.add_argument("--json", help="JSON report path")
    p.add_argument("--hist", help="optional histogram CSV of null p-values")
    p.add_argument("--bins", type=int, default=20)

    return parser


def _apply_config_file(parser: _Parser, argv: list[str]) -> list[str]:
    """Load --config defaults; explicit flags still win."""
    probe = _Parser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        with open(known.config, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"--config: {exc}")
    if not isinstance(values, dict):
        parser.error("--config: expected a JSON object of flag values")
    # find the subcommand parser to validate keys against
    command = next((a for a in argv if not a.startswith("-")), None)
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    target = sub_actions[0].choices.get(command) if sub_actions and command else None
    if target is None:
        parser.error("--config requires a subcommand")
    valid = {opt.lstrip("-").replace("-", "_") for a in target._actions for opt in a.option_strings}
    defaults = {}
    for key, value in values.items():
        norm = key.replace("-", "_")
        if norm not in valid:
            parser.error(f"--config: unknown field {key!r} for command {command!r}")
        defaults[norm] = value
    target.set_defaults(**defaults)
    return argv


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.model == "hw-beta":
        if not args.theta:
            raise ValueError("--theta is required for the hw-beta model")
        theta = BetaParams(*_parse_theta(args.theta, "--theta"))
        curve = io.load_curve(args.curve)
        spec = LsmSpec(curve=curve, underlying=theta, n=args.n, sparsity=args.sparsity)
        sample = sample_lsm(spec, seed=args.seed)
        io.write_edge_list(sample.adjacency, args.out)
        if args.latent_out:
            io.write_positions_csv(sample.latent, args.latent_out)
        if args.tvals_out:
            io.write_values_csv(sample.t_values, args.tvals_out)
        print(f"wrote {args.out}: n={args.n}, edges={int(sample.adjacency.sum()) // 2}")
        return 0
    if not args.block_points or not args.mixing:
        raise ValueError("--block-points and --mixing are required for the sbm model")
    points = io.read_positions_csv(args.block_points)
    mixing = np.array([float(x) for x in args.mixing.split(",")])
    spec = SbmSpec(block_points=points, mixing=mixing)
    sample = sample_sbm(spec, n=args.n, seed=args.seed)
    io.write_edge_list(sample.adjacency, args.out)
    if args.latent_out:
        io.write_positions_csv(sample.latent, args.latent_out)
    if args.assignment_out:
        io.write_values_csv(sample.assignment, args.assignment_out)
    print(f"wrote {args.out}: n={args.n}, edges={int(sample.adjacency.sum()) // 2}")
    return 0


def _embed_graph(A: np.ndarray, d_spec: int | None, directed: bool):
    if d_spec is None:
        d_used = select_dimension(A, min(20, A.shape[0] - 1))
    else:
        d_used = d_spec
    return ase_directed(A, d_used) if directed else ase(A, d_used)


def _cmd_embed(args: argparse.Namespace) -> int:
    A = io.read_graph(args.graph, directed=args.directed)
    result = _embed_graph(A, _parse_dim(args.d, "--d"), args.directed)
    io.write_embedding(result, args.out, args.sidecar)
    for note in result.warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"wrote {args.out}: d={result.d_used}")
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    if args.points:
        X = io.read_positions_csv(args.points)
    else:
        A = io.read_graph(args.graph)
        X = _embed_graph(A, _parse_dim(args.d, "--d"), directed=False).positions
    curve = io.load_curve(args.curve)
    fit = lsm_m_estimate(X, curve, epsilon=args.epsilon)
    io.write_fit_result(
        fit, args.out, extra={"curve": args.curve, "epsilon": args.epsilon, "n": X.shape[0]}
    )
    print(
        f"wrote {args.out}: a={fit.theta.a:.6g} b={fit.theta.b:.6g} "
        f"outside_tube={fit.outside_tube_fraction:.3f}"
    )
    return 0


def _cmd_fit_curve(args: argparse.Namespace) -> int:
    X = io.read_positions_csv(args.points)
    fit = fit_quadratic_bezier(X)
    io.write_curve_json(fit.curve, args.out)
    if args.polyline:
        from .curves import arclength_reparameterize

        io.write_curve_polyline(
            arclength_reparameterize(fit.curve.to_parametric()),
            args.polyline,
            n=args.polyline_points,
        )
    print(f"wrote {args.out}: residual={fit.residual:.6g} converged={fit.converged}")
    return 0


def _cmd_isomap(args: argparse.Namespace) -> int:
    X = io.read_positions_csv(args.points)
    emb = manifold.isomap_unit_interval(X, args.k)
    io.write_values_csv(emb.values, args.out)
    if args.diagnostics:
        io._dump_json(
            {
                "schema_version": io.SCHEMA_VERSION,
                "k_final": emb.k_used,
                "stress": emb.stress,
                "orientation": emb.orientation,
            },
            args.diagnostics,
        )
    print(f"wrote {args.out}: n={len(emb.values)} k={emb.k_used} stress={emb.stress:.4f}")
    return 0


def _cmd_test(args: argparse.Namespace) -> int:
    A1 = io.read_graph(args.graph1, directed=args.directed)
    A2 = io.read_graph(args.graph2, directed=args.directed)
    report = two_sample_lsm_test(
        A1, A2, d=_parse_dim(args.d, "--d"), isomap_k=args.k, epsilon=args.epsilon
    )
    if args.out:
        io.write_two_sample_report(
            report, args.out, extra={"graph1": args.graph1, "graph2": args.graph2}
        )
    print(
        f"aligned: D={report.aligned.statistic:.6g} p={report.aligned.p_value:.6g} | "
        f"flipped: D={report.flipped.statistic:.6g} p={report.flipped.p_value:.6g}"
    )
    return 0


def _cmd_mse_table(args: argparse.Namespace) -> int:
    config = MseConfig(
        theta0=_parse_theta(args.theta, "--theta"),
        n=args.n,
        replicates=args.reps,
        seed=args.seed,
        curve_mode=args.curve,
        embed_dim=args.embed_dim,
        epsilon=args.epsilon,
    )
    report = mse_experiment(config, workers=args.threads)
    io.write_mse_report(report, csv_path=args.out, json_path=args.json)
    print(io.mse_table_text(report), end="")
    if report.failures:
        print(f"({len(report.failures)} replicate failures)", file=sys.stderr)
    return 0


def _cmd_pvalue_sim(args: argparse.Namespace) -> int:
    config = PvalueSimConfig(
        theta_null=_parse_theta(args.theta_null, "--theta-null"),
        theta_alt=_parse_theta(args.theta_alt, "--theta-alt"),
        n=args.n,
        replicates=args.reps,
        seed=args.seed,
        embed_dim=_parse_dim(args.d, "--d"),
        isomap_k=args.k,
    )
    samples = pvalue_distribution_experiment(config, workers=args.threads)
    io.write_pvalue_samples(samples, args.out_null, args.out_alt, json_path=args.json)
    if args.hist:
        io.write_histogram(samples.p_null, args.hist, bins=args.bins)
    print(
        f"wrote {args.out_null} / {args.out_alt}: "
        f"median p_null={float(np.median(samples.p_null)):.4f} "
        f"median p_alt={float(np.median(samples.p_alt)):.4f}"
    )
    if samples.failures:
        print(f"({len(samples.failures)} replicate failures)", file=sys.stderr)
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "embed": _cmd_embed,
    "estimate": _cmd_estimate,
    "fit-curve": _cmd_fit_curve,
    "isomap": _cmd_isomap,
    "test": _cmd_test,
    "mse-table": _cmd_mse_table,
    "pvalue-sim": _cmd_pvalue_sim,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    handler = _HANDLERS[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"lsmgraph {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"lsmgraph {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
