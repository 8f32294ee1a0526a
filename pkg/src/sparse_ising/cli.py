"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 IO or parse error, 3 enumeration size limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import chain_bounds, pipeline, star
from .embedding import build_star_instance, embed
from .errors import ParseError, SaturationError, SizeLimitError, SparseIsingError
from .gibbs_engine import SamplerConfig, resolve_seed
from .instances import frustrated_triangle_instance
from .io import load_embedding, load_hamiltonian, load_hardware
from .ising_core import (
    DEFAULT_ENUMERATION_LIMIT,
    DEFAULT_TIE_TOL,
    IsingHamiltonian,
    energy,
    enumerate_spectrum,
)
from .rescaling import HardwareRanges
from .verify import run_suite, summary

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_SIZE = 0, 1, 2, 3


def lambda_grid(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise SparseIsingError("--lambda-grid step must be positive")
    if stop < start:
        raise SparseIsingError("--lambda-grid stop must be >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _ranges(args) -> HardwareRanges:
    return HardwareRanges.from_intervals(args.h_range, args.j_range)


def _load_instance(args):
    if args.builtin == "triangle":
        return frustrated_triangle_instance()
    if args.builtin == "star":
        return build_star_instance(args.star_l, args.chain_length)
    missing = [flag for flag, v in (("--problem", args.problem), ("--hardware", args.hardware),
                                    ("--embedding", args.embedding)) if v is None]
    if missing:
        raise SparseIsingError(f"missing {', '.join(missing)} (or use --builtin)")
    return load_hamiltonian(args.problem), load_hardware(args.hardware), load_embedding(args.embedding)


def _sampler(args) -> SamplerConfig:
    return SamplerConfig(mode=args.mode, sweeps=args.sweeps, burn_in=args.burn_in,
                         num_chains=args.chains, seed=resolve_seed(args.seed))


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _report_json(r: pipeline.PipelineReport) -> dict:
    out = {
        "lambda": r.chain_strength, "scale": r.scale, "beta_eff": r.beta_eff, "p_cc": r.p_cc,
        "p_solve_eff": r.p_solve_eff, "p_sparse": r.p_sparse,
        "p_sparse_given_cc": r.p_sparse_given_cc,
        "per_chain_break": {str(k): v for k, v in r.per_chain_break.items()},
        "method": r.method,
    }
    if r.intervals:
        out["intervals"] = {k: {"estimate": e.estimate, "ci_low": e.ci_low, "ci_high": e.ci_high,
                                "n_samples": e.n_samples} for k, e in r.intervals.items()}
    return out


# -- commands ---------------------------------------------------------------


def cmd_energy(args) -> int:
    if args.builtin:
        H = _load_instance(args)[0]
    elif args.problem:
        H = load_hamiltonian(args.problem)
    else:
        raise SparseIsingError("energy needs --problem or --builtin")
    if args.spins is not None:
        spins = _parse_spins(args.spins, H)
        payload = {"energy": energy(H, spins)}
    else:
        spec = enumerate_spectrum(H, args.tie_tol, args.limit)
        payload = {"ground_energy": spec.ground_energy, "degeneracy": spec.degeneracy,
                   "gap": spec.gap, "ground_states": [dict(s) for s in spec.ground_states]}
    _emit(args, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _parse_spins(raw: str, H: IsingHamiltonian):
    path = Path(raw)
    text = path.read_text() if path.is_file() else raw
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(raw if path.is_file() else "--spins", exc.msg, exc.lineno) from None
    if isinstance(data, dict):
        return {str(k): v for k, v in data.items()}
    return data


def cmd_pipeline(args) -> int:
    H_p, hw, emb = _load_instance(args)
    report = pipeline.run_pipeline(H_p, hw, emb, _ranges(args), args.beta, args.chain_strength,
                                   _sampler(args), not args.no_clamp, args.tie_tol, args.limit)
    labels = list(H_p.nodes)
    if args.format == "csv":
        _emit(args, pipeline.reports_to_csv([report], labels))
    else:
        _emit(args, json.dumps(_report_json(report), indent=2) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    H_p, hw, emb = _load_instance(args)
    grid = lambda_grid(*args.lambda_grid)
    reports = pipeline.sweep(H_p, hw, emb, grid, args.beta, _ranges(args), _sampler(args),
                             not args.no_clamp, args.tie_tol, args.limit)
    if args.format == "json":
        _emit(args, json.dumps([_report_json(r) for r in reports], indent=2) + "\n")
    else:
        _emit(args, pipeline.reports_to_csv(reports, list(H_p.nodes)))
    return EXIT_OK


def cmd_star_scan(args) -> int:
    ranges = _ranges(args)
    j_mag = -ranges.j_min
    rows = []
    slopes = {}
    chain_lengths = args.chain_lengths or [2]
    degrees = [args.degree] if args.chain_lengths else args.degrees
    for threshold in args.thresholds:
        bound = star.min_chain_strength_bound(threshold, args.beta, j_mag, degrees)
        points = []
        for degree in degrees:
            l = degree // 2
            for length in chain_lengths:
                note = ""
                try:
                    if args.chain_lengths:
                        lam = star.required_chain_strength_for_chain_length(
                            l, length, args.beta, threshold, args.grid_step, ranges)
                    else:
                        lam = star.required_chain_strength(l, args.beta, threshold, args.grid_step, ranges)
                except SaturationError as exc:
                    lam, note = None, f"unreachable: limit {exc.limit:.6g}"
                if lam == 0.0:
                    note = "already satisfied at lambda=0"
                if lam is not None and lam > 0:
                    points.append((length if args.chain_lengths else degree, lam))
                b = bound.bound_at[degree]
                rows.append([threshold, degree, l, length, "" if lam is None else lam,
                             "" if math.isnan(b) else b, note])
        if len(points) >= 3:
            fit = star.scaling_exponent_fit(points)
            slopes[str(threshold)] = {"slope": fit.slope, "intercept": fit.intercept,
                                      "rms_residual": fit.residual, "points": len(points)}
        else:
            slopes[str(threshold)] = {"slope": None, "points": len(points)}

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "degree", "l", "chain_length", "lambda_star", "bound", "note"])
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    _emit(args, buf.getvalue())
    footer = {"axis": "chain_length" if args.chain_lengths else "degree",
              "beta": args.beta, "grid_step": args.grid_step, "slopes": slopes}
    text = json.dumps(footer, indent=2) + "\n"
    if args.summary:
        Path(args.summary).write_text(text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_bounds(args) -> int:
    H_p, hw, emb = _load_instance(args)
    H_e = embed(H_p, hw, emb, 1.0)
    rows = []
    for label, g in chain_bounds.chain_graphs(H_e).items():
        if len(g.vertices) < 2:
            rows.append({"chain": str(label), "volume": g.volume, "edges": 0, "phi": None,
                         "conductance_bound": 0.0, "lambda2": None, "spectral_bound": 0.0,
                         "floored": False})
            continue
        c = chain_bounds.conductance_exact(g)
        s = chain_bounds.spectral_bound(g)
        rows.append({"chain": str(label), "volume": g.volume, "edges": len(g.edges),
                     "phi": c.phi, "conductance_bound": c.bound, "lambda2": s.lambda2,
                     "spectral_bound": s.bound, "floored": s.floored})
    totals = {"conductance_bound": max(r["conductance_bound"] for r in rows),
              "spectral_bound": max(r["spectral_bound"] for r in rows)}
    if args.format == "json":
        _emit(args, json.dumps({"chains": rows, "max": totals}, indent=2) + "\n")
        return EXIT_OK
    fmt = lambda v: "-" if v is None else (f"{v:.6g}" if isinstance(v, float) else str(v))
    header = ["chain", "volume", "|E|", "phi", "1/(2phi)", "lambda2", "1/lambda2"]
    keys = ["chain", "volume", "edges", "phi", "conductance_bound", "lambda2", "spectral_bound"]
    lines = ["\t".join(header)]
    for r in rows:
        lines.append("\t".join(fmt(r[k]) for k in keys) + ("\tfloored" if r["floored"] else ""))
    lines.append(f"max\t\t\t\t{fmt(totals['conductance_bound'])}\t\t{fmt(totals['spectral_bound'])}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(resolve_seed(args.seed), args.instances)
    report = summary(results)
    _emit(args, json.dumps(report, indent=2, default=str) + "\n")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        sys.stderr.write(f"{status} {r.family}: {r.instances} instances, "
                         f"{len(r.failures)} failures, {len(r.findings)} findings\n")
    return EXIT_OK if report["passed"] else EXIT_INVALID


# -- parser -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the validation code so 2 stays reserved for IO and parsing."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=float, default=1.0)
    common.add_argument("--h-range", nargs=2, type=float, metavar=("LOW", "HIGH"))
    common.add_argument("--j-range", nargs=2, type=float, metavar=("LOW", "HIGH"))
    common.add_argument("--seed", type=int, default=None,
                        help="overrides $SPARSE_ISING_SEED; default 42")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--no-clamp", action="store_true",
                        help="allow scale factors below 1 (amplify small problems)")
    common.add_argument("--tie-tol", type=float, default=DEFAULT_TIE_TOL)
    common.add_argument("--limit", type=int, default=DEFAULT_ENUMERATION_LIMIT,
                        help="largest spin count enumerated exactly")

    instance = argparse.ArgumentParser(add_help=False)
    instance.add_argument("--problem", metavar="JSON")
    instance.add_argument("--hardware", metavar="JSON")
    instance.add_argument("--embedding", metavar="JSON")
    instance.add_argument("--builtin", choices=["triangle", "star"])
    instance.add_argument("--star-l", type=int, default=1)
    instance.add_argument("--chain-length", type=int, default=2)

    sampler = argparse.ArgumentParser(add_help=False)
    sampler.add_argument("--mode", choices=["exact", "mcmc"], default="exact")
    sampler.add_argument("--sweeps", type=int, default=2000)
    sampler.add_argument("--burn-in", type=int, default=200)
    sampler.add_argument("--chains", type=int, default=16)

    parser = _Parser(prog="sparse-ising", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", parents=[common, instance], help="energy of a configuration or the spectrum")
    p.add_argument("--spins", help="JSON object or list of +-1 spins, inline or a file path")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("pipeline", parents=[common, instance, sampler], help="metrics at one chain strength")
    p.add_argument("--lambda", dest="chain_strength", type=float, required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("sweep", parents=[common, instance, sampler], help="metrics over a chain-strength grid")
    p.add_argument("--lambda-grid", nargs=3, type=float, required=True, metavar=("START", "STOP", "STEP"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("star-scan", parents=[common], help="required chain strength for star problems")
    p.add_argument("--degrees", nargs="+", type=int, default=[8, 16, 32, 64, 128])
    p.add_argument("--thresholds", nargs="+", type=float, default=[0.02, 0.10, 0.50])
    p.add_argument("--grid-step", type=float, default=0.01)
    p.add_argument("--chain-lengths", nargs="+", type=int,
                   help="scan hub-chain path lengths at fixed --degree by enumeration")
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--summary", metavar="PATH", help="write the slope summary JSON here (default stderr)")
    p.set_defaults(func=cmd_star_scan)

    p = sub.add_parser("bounds", parents=[common, instance], help="per-chain conductance and spectral bounds")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", parents=[common], help="randomized invariant suite")
    p.add_argument("--instances", type=int, default=20)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SparseIsingError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
