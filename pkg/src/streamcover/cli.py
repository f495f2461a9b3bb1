"""Batch command-line front end.

Subcommands:

  generate   emit an instance stream (+ truth sidecar for adversarial kinds)
  run        one pass over a stream, extract certificates, validate, report
  verify     check a certificate file against a stream
  sweep      extract a whole grid of coverage targets from one pass

Exit codes: 0 ok, 1 usage, 2 format, 3 validation failure, 4 bound-check
failure.  STREAMCOVER_SEED supplies a default generator seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import advgen, oracles, sssc
from .rational import format_ratio, parse_ratio
from .stream import (
    StreamFormatError,
    StreamHeader,
    parse_stream,
    read_edges,
    serialize_stream,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_VALIDATION = 3
EXIT_BOUNDS = 4

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the documented usage code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _epsilon_arg(text: str) -> Fraction:
    try:
        value = parse_ratio(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not (0 <= value < 1):
        raise argparse.ArgumentTypeError(f"epsilon must lie in [0, 1): {text}")
    return value


def _positive_weight_arg(text: str) -> Fraction:
    try:
        return parse_ratio(text, require_positive=True)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _ratio_json(value: Fraction) -> dict:
    return {"exact": format_ratio(value), "decimal": float(value)}


@dataclass
class RunConfig:
    input_path: str
    epsilons: tuple[Fraction, ...]
    pow2_round: bool = False
    allow_empty_edges: bool = False
    oracle: bool = True
    oracle_budget: int = 200_000
    report_path: str | None = None
    snapshot_path: str | None = None
    certificates_prefix: str | None = None
    timings: bool = True


@dataclass
class PipelineResult:
    report: dict
    exit_code: int
    certificates: list[tuple[Fraction, sssc.Certificate, sssc.ExtractionReport]] = field(
        default_factory=list
    )
    d: sssc.DataStructureD | None = None


def execute_run(config: RunConfig) -> PipelineResult:
    """The shared pipeline behind `run` and `sweep`.

    The stream is read exactly once for algorithm state; the validator and
    the oracle re-read it separately.
    """
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    with open(config.input_path, "r", encoding="utf-8") as fh:
        reader = parse_stream(fh, allow_empty_edges=config.allow_empty_edges)
        declared_n = reader.header.n
        edges_iter = sssc.round_weights_pow2(reader) if config.pow2_round else reader
        d = sssc.run_stream(edges_iter, declared_n=declared_n)
    timings["pass_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    _, original_edges = read_edges(config.input_path, allow_empty_edges=config.allow_empty_edges)
    log = sssc.MembershipLog()
    log.record_all(original_edges)
    instance = oracles.OfflineInstance(original_edges)
    timings["validator_read_s"] = time.perf_counter() - t0

    opt = None
    timings["oracle_s"] = 0.0
    if config.oracle and not instance.isolated_vertices() and instance.n > 0:
        t0 = time.perf_counter()
        opt = oracles.brute_force_opt(instance, node_budget=config.oracle_budget)
        timings["oracle_s"] = time.perf_counter() - t0

    bounds_ok = True
    level_mass_verdict = None
    if opt is not None and opt.proven_optimal and not config.pow2_round:
        checked = 0
        holds = True
        for frozen in (d.p1_frozen, d.p2_frozen):
            for r in frozen.levels:
                checked += 1
                if frozen.benefit_le(r) >= Fraction(2) ** (r + 1) * opt.cost:
                    holds = False
        level_mass_verdict = {"holds": holds, "checked_levels": checked}
        bounds_ok = bounds_ok and holds

    extraction_records = []
    certificates: list[tuple[Fraction, sssc.Certificate, sssc.ExtractionReport]] = []
    validations_ok = True
    timings["extract_s"] = 0.0
    for eps in config.epsilons:
        t0 = time.perf_counter()
        cert, report = sssc.extract(d, eps)
        timings["extract_s"] += time.perf_counter() - t0
        # rounding distorts each weight by < 2x, so coverage is revalidated
        # against the original weights at the relaxed level 1 - 4*eps
        eps_check = min(Fraction(4) * eps, Fraction(1)) if config.pow2_round else eps
        validation = sssc.validate_certificate(cert, log, instance.benefits, eps_check)
        validations_ok = validations_ok and validation.ok
        report = sssc.ExtractionReport(
            epsilon=report.epsilon,
            regime=report.regime,
            r_star=report.r_star,
            dom_benefit=report.dom_benefit,
            im_size=report.im_size,
            im_cost=validation.im_cost,
        )
        certificates.append((eps, cert, report))
        bound_record = None
        ratio = None
        if opt is not None and opt.proven_optimal and opt.cost > 0:
            ratio = validation.im_cost / opt.cost
            if not config.pow2_round:
                if report.regime == sssc.REGIME_ABOVE:
                    holds = eps * validation.im_cost < 8 * opt.cost
                    bound_record = {"kind": "image-cost-above", "holds": holds}
                else:
                    holds = validation.im_cost**2 <= 81 * d.n * opt.cost**2
                    bound_record = {"kind": "image-cost-below", "holds": holds}
                bounds_ok = bounds_ok and holds
        total = instance.total_benefit
        fraction = validation.dom_benefit / total if total > 0 else Fraction(1)
        extraction_records.append(
            {
                "epsilon": _ratio_json(eps),
                "regime": report.regime,
                "r_star": report.r_star,
                "dom_benefit": _ratio_json(validation.dom_benefit),
                "coverage_fraction": _ratio_json(fraction),
                "im_size": report.im_size,
                "im_cost": _ratio_json(validation.im_cost),
                "valid": validation.ok,
                "violation": validation.failure,
                "ratio_im_cost_over_opt": _ratio_json(ratio) if ratio is not None else None,
                "image_cost_bound": bound_record,
            }
        )

    report_dict = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "input": config.input_path,
            "epsilons": [format_ratio(e) for e in config.epsilons],
            "pow2_round": config.pow2_round,
            "allow_empty_edges": config.allow_empty_edges,
            "oracle_budget": config.oracle_budget if config.oracle else None,
        },
        "stream": {
            "n": d.n,
            "declared_n": d.declared_n,
            "m": d.stats.m_seen,
            "total_benefit": _ratio_json(d.stats.total_benefit),
            "edge_visits": d.edge_visits,
            "algorithm_passes": 1,
        },
        "opt": (
            {
                "cost": _ratio_json(opt.cost),
                "size": len(opt.edge_ids),
                "proven": opt.proven_optimal,
                "nodes": opt.nodes,
            }
            if opt is not None
            else None
        ),
        "level_mass_vs_opt": level_mass_verdict,
        "extractions": extraction_records,
        "timings": {k: round(v, 6) for k, v in timings.items()} if config.timings else None,
    }

    if not validations_ok:
        code = EXIT_VALIDATION
    elif not bounds_ok:
        code = EXIT_BOUNDS
    else:
        code = EXIT_OK
    return PipelineResult(report_dict, code, certificates, d)


def _eps_slug(eps: Fraction) -> str:
    return format_ratio(eps).replace("/", "_")


def _write_outputs(config: RunConfig, result: PipelineResult) -> None:
    text = json.dumps(result.report, indent=2, sort_keys=True) + "\n"
    if config.report_path:
        with open(config.report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if config.snapshot_path and result.d is not None:
        with open(config.snapshot_path, "w", encoding="utf-8") as fh:
            sssc.write_snapshot(result.d, fh)
    if config.certificates_prefix:
        for eps, cert, rep in result.certificates:
            path = f"{config.certificates_prefix}{_eps_slug(eps)}.cert"
            with open(path, "w", encoding="utf-8") as fh:
                sssc.write_certificate(cert, rep, fh)


def cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig(
        input_path=args.input,
        epsilons=tuple(args.epsilon),
        pow2_round=args.pow2_round,
        allow_empty_edges=args.allow_empty_edges,
        oracle=not args.no_oracle,
        oracle_budget=args.oracle_budget,
        report_path=args.report,
        snapshot_path=args.snapshot,
        certificates_prefix=args.certificates,
        timings=not args.no_timings,
    )
    result = execute_run(config)
    _write_outputs(config, result)
    return result.exit_code


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = tuple(args.grid) if args.grid else ()
    config = RunConfig(
        input_path=args.input,
        epsilons=grid,
        pow2_round=args.pow2_round,
        allow_empty_edges=args.allow_empty_edges,
        oracle=not args.no_oracle,
        oracle_budget=args.oracle_budget,
        report_path=args.report,
        timings=not args.no_timings,
    )
    result = execute_run(config)
    rows = ["epsilon,regime,r_star,dom_benefit,coverage_fraction,im_size,im_cost,ratio_vs_opt"]
    for rec in result.report["extractions"]:
        rows.append(
            ",".join(
                [
                    rec["epsilon"]["exact"],
                    rec["regime"],
                    "" if rec["r_star"] is None else str(rec["r_star"]),
                    rec["dom_benefit"]["exact"],
                    rec["coverage_fraction"]["exact"],
                    str(rec["im_size"]),
                    rec["im_cost"]["exact"],
                    rec["ratio_im_cost_over_opt"]["exact"]
                    if rec["ratio_im_cost_over_opt"]
                    else "",
                ]
            )
        )
    csv_text = "\n".join(rows) + "\n"
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if config.report_path:
        with open(config.report_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(result.report, indent=2, sort_keys=True) + "\n")
    return result.exit_code


def cmd_verify(args: argparse.Namespace) -> int:
    _, edges = read_edges(args.stream, allow_empty_edges=args.allow_empty_edges)
    log = sssc.MembershipLog()
    log.record_all(edges)
    benefits = {}
    for edge in edges:
        for v, b in edge.members:
            benefits.setdefault(v, b)
    with open(args.certificate, "r", encoding="utf-8") as fh:
        cert, _summary = sssc.parse_certificate(fh)
    result = sssc.validate_certificate(cert, log, benefits, args.epsilon)
    if result.ok:
        print(
            f"ok: coverage {format_ratio(result.dom_benefit)} >= "
            f"{format_ratio(result.required_benefit)}, image cost {format_ratio(result.im_cost)}"
        )
        return EXIT_OK
    if result.failure == "membership":
        print(f"violation: vertex {result.vertex} is not in its assigned edge", file=sys.stderr)
    else:
        print(
            f"violation: coverage deficit {format_ratio(result.deficit)} "
            f"(have {format_ratio(result.dom_benefit)}, need {format_ratio(result.required_benefit)})",
            file=sys.stderr,
        )
    return EXIT_VALIDATION


def _resolve_seed(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("STREAMCOVER_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            parser.error(f"STREAMCOVER_SEED is not an integer: {env!r}")
    parser.error("a seed is required (--seed or STREAMCOVER_SEED)")
    raise AssertionError("unreachable")


def cmd_generate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    seed = _resolve_seed(args, parser)
    truth = None
    if args.kind in ("certified", "uncertified"):
        if args.q is None:
            parser.error("--q is required for adversarial kinds")
        if args.epsilon is None and args.r is None:
            parser.error("--epsilon or --r is required for adversarial kinds")
        eps = args.epsilon if args.epsilon is not None else Fraction(args.r, 3 * args.q)
        if args.kind == "certified":
            inst = advgen.gen_certified(args.q, eps, seed, relax_range=args.relax_range)
        else:
            inst = advgen.gen_uncertified(
                args.q,
                args.alpha,
                eps,
                seed,
                materialize_dummies=args.materialize_dummies,
                relax_range=args.relax_range,
            )
        edges, header, truth = inst.edges, inst.header, inst.truth
    else:
        if args.n is None or args.m is None:
            parser.error("--n and --m are required for the random kind")
        edges, header = advgen.gen_random(
            args.n,
            args.m,
            seed,
            max_num=args.max_num,
            max_den=args.max_den,
            unit_weights=args.unit_weights,
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        serialize_stream(edges, fh, header=header)
    if truth is not None:
        truth_path = args.truth or args.out + ".truth"
        with open(truth_path, "w", encoding="utf-8") as fh:
            advgen.write_truth(truth, fh)
    print(f"wrote {len(edges)} edges to {args.out}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="streamcover", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="emit an instance stream")
    gen.add_argument("kind", choices=["certified", "uncertified", "random"])
    gen.add_argument("--q", type=int, help="field order (adversarial kinds)")
    gen.add_argument("--epsilon", type=_epsilon_arg, help="coverage slack target")
    gen.add_argument("--r", type=int, help="number of omitted lines (implies epsilon=r/(3q))")
    gen.add_argument("--alpha", type=_positive_weight_arg, default=Fraction(1, 2))
    gen.add_argument("--n", type=int, help="vertices (random kind)")
    gen.add_argument("--m", type=int, help="edges (random kind)")
    gen.add_argument("--max-num", type=int, default=16)
    gen.add_argument("--max-den", type=int, default=16)
    gen.add_argument("--unit-weights", action="store_true")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--relax-range", action="store_true", help="permit out-of-range epsilon")
    gen.add_argument("--materialize-dummies", action="store_true")
    gen.add_argument("--out", required=True)
    gen.add_argument("--truth", help="truth sidecar path (default: <out>.truth)")

    run = sub.add_parser("run", help="one pass + extraction + validation + report")
    run.add_argument("--input", required=True)
    run.add_argument(
        "--epsilon", type=_epsilon_arg, action="append", required=True, help="repeatable"
    )
    run.add_argument("--pow2-round", action="store_true")
    run.add_argument("--allow-empty-edges", action="store_true")
    run.add_argument("--no-oracle", action="store_true")
    run.add_argument("--oracle-budget", type=int, default=200_000)
    run.add_argument("--report", help="write the JSON report here instead of stdout")
    run.add_argument("--snapshot", help="dump the pass state to this path")
    run.add_argument("--certificates", help="prefix for per-epsilon certificate files")
    run.add_argument("--no-timings", action="store_true", help="deterministic report bytes")

    ver = sub.add_parser("verify", help="check a certificate against a stream")
    ver.add_argument("--stream", required=True)
    ver.add_argument("--certificate", required=True)
    ver.add_argument("--epsilon", type=_epsilon_arg, required=True)
    ver.add_argument("--allow-empty-edges", action="store_true")

    sweep = sub.add_parser("sweep", help="extract a grid of targets from one pass")
    sweep.add_argument("--input", required=True)
    sweep.add_argument(
        "--grid",
        type=lambda text: [_epsilon_arg(t) for t in text.split(",") if t.strip()],
        default=[],
        help="comma-separated epsilon values",
    )
    sweep.add_argument("--pow2-round", action="store_true")
    sweep.add_argument("--allow-empty-edges", action="store_true")
    sweep.add_argument("--no-oracle", action="store_true")
    sweep.add_argument("--oracle-budget", type=int, default=200_000)
    sweep.add_argument("--csv", help="write the table here instead of stdout")
    sweep.add_argument("--report", help="also write the full JSON report")
    sweep.add_argument("--no-timings", action="store_true")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "generate":
            return cmd_generate(args, parser)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "sweep":
            return cmd_sweep(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except StreamFormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
