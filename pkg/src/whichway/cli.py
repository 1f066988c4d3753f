"""Command-line interface.

Exit codes: 0 ok, 2 usage error, 3 model-domain error, 4 statistical
starvation, 5 verification failure. The default seed can be overridden by
the ``WHICHWAY_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import check_basis
from .circuit import (
    conditional_estimates,
    guessing_estimates,
    run_guessing_game,
    run_phase_conditioned,
)
from .errors import DomainError, ShotStarvationError, ShotStarvationWarning, WhichWayError
from .feedforward import (
    OptimizerConfig,
    Protocol,
    delta_grid,
    ff_curve,
    protocol_curve,
    sweep_visibility,
)
from .knowledge import (
    canonical_basis,
    conditional_probs,
    knowledge_at,
    knowledge_avg,
    natural_basis,
    readout_probs,
)
from .model import DetectorCoupling
from .reporting import RunManifest, dumps, manifest_path, write_csv, write_json, write_svg
from .stats import z_scores
from .verification import report, run_checks

log = logging.getLogger("whichway")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_STARVED, EXIT_VERIFY = 0, 2, 3, 4, 5
SEED_ENV = "WHICHWAY_SEED"
DELTA_COLUMNS = ("delta_rad", "k_natural", "k_canonical", "k_simplified", "k_ff")
SWEEP_COLUMNS = (
    "visibility",
    "kbar_canonical",
    "kbar_simplified",
    "kbar_ff",
    "excess_simplified",
    "excess_ff",
)
_PROTOCOL_COLUMN = {
    Protocol.NATURAL: "k_natural",
    Protocol.CANONICAL: "k_canonical",
    Protocol.SIMPLIFIED: "k_simplified",
    Protocol.FEEDFORWARD: "k_ff",
}


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _protocol_list(text: str) -> list:
    try:
        return [Protocol(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_v_grid(text: str) -> list:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 10) for i in range(n)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whichway", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        p.add_argument("--seed", type=_nonneg_int, default=None,
                       help=f"master seed (default: ${SEED_ENV} or 0)")
        if budget:
            p.add_argument("--delta-points", type=_pos_int, default=50)
            p.add_argument("--samples", type=_nonneg_int, default=50_000,
                           help="random bases per phase")
            p.add_argument("--refine", action="store_true", help="local polish of the best basis")
            p.add_argument("--n-jobs", type=int, default=None)

    p = sub.add_parser("sweep-delta", help="phase-dependent knowledge at one visibility")
    p.add_argument("--visibility", type=float, required=True)
    p.add_argument("--protocols", type=_protocol_list,
                   default=[Protocol.NATURAL, Protocol.CANONICAL, Protocol.SIMPLIFIED,
                            Protocol.FEEDFORWARD])
    common(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", type=Path, default=None, help="optional SVG output")

    p = sub.add_parser("sweep-visibility", help="phase-averaged knowledge and excess vs visibility")
    p.add_argument("--v-grid", type=parse_v_grid, default=parse_v_grid("0:0.95:0.05"))
    common(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--plot", type=Path, default=None)

    p = sub.add_parser("montecarlo", help="circuit-level Monte Carlo validation")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--theta", type=float)
    g.add_argument("--visibility", type=float)
    p.add_argument("--basis", default="natural", help="natural, canonical, or a .json/.npy file")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--shots", type=int, default=100_000)
    common(p, budget=False)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("verify", help="run the invariant suite")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--quick", action="store_true", default=True)
    mode.add_argument("--full", action="store_true")
    common(p, budget=False)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--tolerance-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


def _config(args, seed) -> OptimizerConfig:
    return OptimizerConfig(
        samples_per_delta=args.samples,
        delta_points=args.delta_points,
        seed=seed,
        refine=args.refine,
    )


def cmd_sweep_delta(args, seed) -> list:
    V = args.visibility
    if not 0.0 <= V < 1.0:
        raise DomainError(
            f"visibility must lie in [0, 1); V={V} has a dark fringe at delta=pi "
            "where conditional knowledge is undefined"
        )
    deltas = delta_grid(args.delta_points)
    columns = {name: [None] * deltas.size for name in DELTA_COLUMNS[1:]}
    for proto in args.protocols:
        if proto is Protocol.FEEDFORWARD:
            curve = ff_curve(V, _config(args, seed), n_jobs=args.n_jobs)
        else:
            curve = protocol_curve(V, proto, deltas)
        columns[_PROTOCOL_COLUMN[proto]] = list(curve.values)
    rows = [[d] + [columns[c][j] for c in DELTA_COLUMNS[1:]] for j, d in enumerate(deltas)]
    if args.format == "csv":
        write_csv(args.out, DELTA_COLUMNS, rows)
    else:
        write_json(args.out, {
            "visibility": V,
            "columns": list(DELTA_COLUMNS),
            "rows": rows,
        })
    outputs = [args.out]
    if args.plot:
        series = {_PROTOCOL_COLUMN[p]: columns[_PROTOCOL_COLUMN[p]] for p in args.protocols}
        write_svg(args.plot, deltas, series, title=f"V = {V:g}", xlabel="delta (rad)",
                  ylabel="knowledge")
        outputs.append(args.plot)
    return outputs


def cmd_sweep_visibility(args, seed) -> list:
    for v in args.v_grid:
        if not 0.0 <= v < 1.0:
            raise DomainError(f"visibility grid values must lie in [0, 1), got {v}")
    sweep = sweep_visibility(args.v_grid, _config(args, seed), n_jobs=args.n_jobs)
    rows = [[getattr(r, c) for c in SWEEP_COLUMNS] for r in sweep.records]
    write_csv(args.out, SWEEP_COLUMNS, rows)
    summary_path = args.out.with_name(args.out.stem + ".summary.json")
    summary = {
        "argmax": {
            name: {"visibility": v, "excess": e} for name, (v, e) in sweep.argmax.items()
        }
    }
    write_json(summary_path, summary)
    sys.stdout.write(dumps(summary))
    outputs = [args.out, summary_path]
    if args.plot:
        write_svg(
            args.plot,
            args.v_grid,
            {
                "canonical": [r.excess_canonical for r in sweep.records],
                "simplified": [r.excess_simplified for r in sweep.records],
                "feed-forward": [r.excess_ff for r in sweep.records],
            },
            title="phase-averaged K^2 + V^2",
            xlabel="visibility",
            ylabel="excess",
        )
        outputs.append(args.plot)
    return outputs


def load_basis(spec: str, c: DetectorCoupling) -> np.ndarray:
    if spec == "natural":
        return natural_basis()
    if spec == "canonical":
        return canonical_basis(c)
    path = Path(spec)
    if not path.exists():
        raise DomainError(f"basis must be 'natural', 'canonical' or an existing file: {spec}")
    if path.suffix == ".npy":
        arr = np.load(path)
    else:
        # {"vectors": [[[re, im], ...], ...]}, one entry per basis vector
        data = json.loads(path.read_text(encoding="utf-8"))
        raw = np.asarray(data["vectors"], dtype=float)
        arr = (raw[..., 0] + 1j * raw[..., 1]).T
    try:
        return check_basis(arr, tol=1e-9)
    except ValueError as exc:
        raise DomainError(str(exc)) from None


def cmd_montecarlo(args, seed) -> list:
    if args.shots < 100:
        raise ShotStarvationError(f"need at least 100 shots, got {args.shots}")
    if args.theta is not None:
        c = DetectorCoupling.from_theta(args.theta)
    else:
        c = DetectorCoupling.from_visibility(args.visibility)
    basis = load_basis(args.basis, c)
    rng = np.random.default_rng(seed)
    est = guessing_estimates(run_guessing_game(c.theta, basis, args.shots, rng))
    outcomes = readout_probs(basis, c)
    p = np.array([o.probability for o in outcomes])
    q = np.array([o.guess_quality for o in outcomes])
    k = knowledge_avg(basis, c).knowledge
    result = {
        "visibility": c.visibility,
        "theta": c.theta,
        "basis": args.basis,
        "basis_vectors": [[[z.real, z.imag] for z in col] for col in basis.T],
        "shots": args.shots,
        "seed": seed,
        "unconditional": {
            "p_hat": est["p"], "p": p, "p_z": z_scores(est["p"], p, est["p_se"]),
            "q_hat": est["q"], "q": q, "q_z": z_scores(est["q"], q, est["q_se"]),
            "k_hat": est["k"], "k": k, "k_se": est["k_se"],
            "k_z": float(z_scores(est["k"], k, est["k_se"])),
        },
    }
    if args.delta is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("error", ShotStarvationWarning)
            try:
                tally = run_phase_conditioned(c.theta, basis, args.delta, args.shots, rng)
            except ShotStarvationWarning as w:
                raise ShotStarvationError(str(w)) from None
        ce = conditional_estimates(tally)
        pd = np.array([o.probability for o in conditional_probs(basis, args.delta, c)])
        kd = knowledge_at(basis, args.delta, c).knowledge
        k_hat_d = float(2 * np.sum(ce["p"] * q) - 1)
        result["conditional"] = {
            "delta": args.delta,
            "port_shots": ce["port_shots"],
            "p_hat": ce["p"], "p": pd, "p_z": z_scores(ce["p"], pd, ce["p_se"]),
            "k_hat": k_hat_d, "k": kd,
        }
    write_json(args.out, result)
    return [args.out]


def cmd_verify(args, seed) -> tuple[list, bool]:
    results = run_checks(seed=seed, full=args.full, tolerance_scale=args.tolerance_scale)
    rep = report(results, seed, args.full)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        log.info("%s %s error=%.3e tol=%.1e", status, r.name, r.error, r.tolerance)
    text = dumps(rep)
    sys.stdout.write(text)
    outputs = []
    if args.out:
        write_json(args.out, rep)
        outputs.append(args.out)
    return outputs, rep["passed"]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    seed = args.seed if args.seed is not None else default_seed()
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
              if k not in ("command", "verbose", "tolerance_scale")}
    params["protocols"] = [p.value for p in params["protocols"]] if "protocols" in params else None
    params = {k: v for k, v in params.items() if v is not None}
    manifest = RunManifest(args.command, params, seed)
    t0 = time.perf_counter()
    passed = True
    try:
        if args.command == "sweep-delta":
            outputs = cmd_sweep_delta(args, seed)
        elif args.command == "sweep-visibility":
            outputs = cmd_sweep_visibility(args, seed)
        elif args.command == "montecarlo":
            outputs = cmd_montecarlo(args, seed)
        else:
            outputs, passed = cmd_verify(args, seed)
    except ShotStarvationError as exc:
        print(f"whichway: shot starvation: {exc}", file=sys.stderr)
        return EXIT_STARVED
    except (DomainError, WhichWayError) as exc:
        print(f"whichway: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    manifest.duration_s = round(time.perf_counter() - t0, 3)
    manifest.record_outputs(outputs)
    if outputs:
        manifest.write(manifest_path(outputs[0]))
    if not passed:
        print("whichway: verification failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
