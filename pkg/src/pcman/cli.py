"""Command-line entry point: ``pcman {rank,check,manipulate,detect,gen,experiment}``.

Alternatives are numbered from 1 on the command line and in every output.
Exit codes: 0 success, 1 the operation ran but the goal was not reached,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import io as pio
from .core import (
    RECIPROCITY_TOL,
    Method,
    consistency_index,
    derive,
    random_index,
    rank_of,
)
from .detect import AUTO, DEFAULT_TOL, detect_row_manipulation
from .exceptions import PCError, RandomIndexUnavailable
from .manip import SELECTIONS, Algorithm, ManipulationRequest, find_m
from .montecarlo import GenerationConfig, generate_disturbed, rng_for, run_experiment

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
CR_LIMIT = 0.1
SEED_ENV = "PCMAN_SEED"


class _Usage(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise _Usage(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(text: str, out=None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_rank(args) -> int:
    C = pio.read_matrix(args.input)
    w = derive(C, args.method)
    if args.format == "json":
        _emit(json.dumps(pio.priority_to_dict(w), indent=2) + "\n")
        return EXIT_OK
    ranks = rank_of(w).positions
    lines = [f"method: {w.method.value}"]
    if w.lambda_max is not None:
        lines.append(f"lambda_max: {w.lambda_max:.6f}")
    lines.append("alternative  weight    rank")
    for i, (x, r) in enumerate(zip(w.weights, ranks), start=1):
        lines.append(f"a{i:<11d}{x:.6f}  {r}")
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    C = pio.read_matrix(args.input)
    ci = consistency_index(C)
    err = C.reciprocity_error()
    lines = [f"n: {C.n}", f"CI: {ci:.6f}"]
    try:
        ri = random_index(C.n)
    except RandomIndexUnavailable:
        ri = None
        lines += ["RI: n/a", "CR: n/a"]
    else:
        cr = ci / ri
        lines += [f"RI: {ri:.2f}", f"CR: {cr:.6f}"]
    if err <= RECIPROCITY_TOL:
        lines.append(f"reciprocity: ok (max |c_ij*c_ji - 1| = {err:.3g})")
    else:
        lines.append(f"reciprocity: approximate (max |c_ij*c_ji - 1| = {err:.3g}, "
                     f"accepted at file tolerance {pio.TEXT_RECIPROCITY_TOL:g})")
    if ri is not None and ci / ri > CR_LIMIT:
        lines.append(f"warning: CR exceeds {CR_LIMIT:g}, the matrix is too inconsistent to rely on")
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_manipulate(args) -> int:
    C = pio.read_matrix(args.input)
    for name in ("p", "q"):
        v = getattr(args, name)
        if not 1 <= v <= C.n:
            raise _Usage(f"--{name} must lie in 1..{C.n}, got {v}")
    request = ManipulationRequest(
        args.p - 1, args.q - 1, algorithm=args.algo, method=args.method,
        alpha_start=args.alpha_start, alpha_step=args.alpha_step,
        ci_threshold=args.ci_threshold, clamp=args.clamp, strict_alpha=args.strict_alpha,
        selection=args.selection,
    )
    result = find_m(C, request, trace=True)
    _emit(pio.write_result(result, args.format, include_matrices=args.trace), args.output)
    if not result.swap_achieved:
        print("no alpha in the sweep achieved the swap", file=sys.stderr)
    elif not result.success:
        print(f"swap achieved but CI {result.final_ci:.4f} exceeds {result.ci_threshold:g}",
              file=sys.stderr)
    return EXIT_OK if result.success else EXIT_FAILED


def cmd_detect(args) -> int:
    C = pio.read_matrix(args.input)
    gate = None if args.no_gate else (AUTO if args.ci_gate is None else args.ci_gate)
    report = detect_row_manipulation(C, tol=args.tol, ci_gate=gate)
    if args.format == "json":
        _emit(json.dumps(pio.report_to_dict(report), indent=2) + "\n")
    else:
        _emit(pio.report_to_text(report))
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    acceptance = None if args.cr_max <= 0 else args.cr_max
    cfg = GenerationConfig(n=args.n, d=args.d, acceptance=acceptance, seed=seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(args.count)))
    for k in range(args.count):
        C = generate_disturbed(cfg, rng_for(seed, k))
        path = out / f"matrix_{k + 1:0{width}d}.{args.format}"
        pio.write_matrix(C, args.format, path)
        print(f"{path.name} CI={consistency_index(C):.6f}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    text = Path(args.config).read_text(encoding="utf-8")
    doc = json.loads(text)
    if isinstance(doc, dict) and "seed" not in doc:
        doc["seed"] = default_seed()
    exp, gen = pio.parse_experiment_config(doc)
    stats = run_experiment(exp, gen)
    _emit(pio.experiment_to_csv(stats), args.out)
    for s in stats:
        if s.note:
            print(f"note: n={s.n} bucket [{s.ci_low:g}, {s.ci_high:g}): {s.note}",
                  file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcman",
        description="Pairwise-comparison ranking, manipulation and detection tools.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    methods = [m.value for m in Method]

    p = sub.add_parser("rank", help="derive the priority vector and ranking")
    p.add_argument("--input", required=True, help="matrix file (.csv or .json)")
    p.add_argument("--method", choices=methods, default="evm")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("check", help="report CI, CR and reciprocity")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("manipulate", help="promote alternative p over q")
    p.add_argument("--input", required=True)
    p.add_argument("--algo", choices=[a.value for a in Algorithm], default="row")
    p.add_argument("--p", type=int, required=True, help="alternative to promote (1-based)")
    p.add_argument("--q", type=int, required=True, help="alternative to overtake (1-based)")
    p.add_argument("--method", choices=methods, default="evm")
    p.add_argument("--alpha-start", type=float, default=9.0)
    p.add_argument("--alpha-step", type=float, default=0.1)
    p.add_argument("--ci-threshold", type=float, default=0.1)
    p.add_argument("--trace", action="store_true", help="include every intermediate matrix")
    p.add_argument("--clamp", action="store_true", help="clamp new entries to [1/9, 9]")
    p.add_argument("--strict-alpha", action="store_true",
                   help="only try alpha values above the current c_pq")
    p.add_argument("--selection", choices=SELECTIONS, default="feasible")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--output", help="write the result here instead of stdout")
    p.set_defaults(func=cmd_manipulate)

    p = sub.add_parser("detect", help="look for row-heuristic fingerprints")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--ci-gate", type=float, default=None,
                   help="skip matrices with CI at or below this value (default: tol squared)")
    p.add_argument("--no-gate", action="store_true", help="scan even nearly consistent matrices")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gen", help="write random disturbed matrices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float, default=1.5)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--cr-max", type=float, default=0.1, help="acceptance CR bound; 0 disables")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run the Monte Carlo experiment")
    p.add_argument("--config", required=True, help="JSON config keyed by config field names")
    p.add_argument("--out", help="results CSV (stdout if omitted)")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PCError, ValueError, OSError, _Usage) as exc:
        print(f"pcman {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
