"""Command-line entry point: ``leibniz3 <command> ...``."""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import aichinger as ai
from . import counterexample as cx
from .config import FORMATS, ConfigError, RunConfig, build_operator, load_config
from .corpus import DomainSet, constant, sample_points
from .errors import NotInFamily, PreconditionError
from .faa import expansion_table
from .report import dumps, run_document, to_csv
from .suites import default_corpus, run_suites

REPORT_ENV = "LEIBNIZ3_REPORT"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leibniz3",
                                description="Numerical checks for third-order Leibniz-type "
                                            "operator identities.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the configured verification suites")
    v.add_argument("--config", type=Path, help="INI file with [run] and [operator.NAME] sections")
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float, help="tolerance for the identity checks")
    v.add_argument("--report", type=Path, help=f"write the report here (env: {REPORT_ENV})")
    v.add_argument("--format", choices=FORMATS)
    v.add_argument("--quiet", action="store_true", help="suppress the per-case summary")

    f = sub.add_parser("faa", help="print the partition expansion of (ln f)^(l)")
    f.add_argument("--order", type=_positive_int, required=True)

    r = sub.add_parser("recover", help="recover (c0, c1, c2, d00) of an operator pointwise")
    r.add_argument("--operator", required=True,
                   help="NAME from the config, or an inline spec like "
                        "'family=characterized,c0=1,c1=x'")
    r.add_argument("--points", type=_positive_int, default=5)
    r.add_argument("--config", type=Path)
    r.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("counterexample", help="search for a trilinear violation of d o f")
    c.add_argument("--trials", type=_positive_int, default=1000)
    c.add_argument("--threshold", type=_positive_float, default=1e-6)
    c.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("aichinger", help="fit a quadratic to the exp-conjugated symbol")
    a.add_argument("--dim", type=int, choices=(1, 2, 3), default=3,
                   help="symbol dimension = operator order + 1")
    a.add_argument("--samples", type=_positive_int, default=50)
    a.add_argument("--operator", help="defaults to a characterized operator of matching order")
    a.add_argument("--config", type=Path)
    a.add_argument("--seed", type=int, default=0)
    return p


def _operator_table(config: Optional[Path]) -> dict[str, tuple]:
    cfg = load_config(config) if config else RunConfig()
    return dict(cfg.operators)


def _resolve_operator(text: str, config: Optional[Path]):
    if "=" in text:
        spec = dict(item.split("=", 1) for item in text.split(",") if item)
        return build_operator(spec.pop("name", "inline"), spec)
    table = _operator_table(config)
    if text not in table:
        raise ConfigError(f"unknown operator {text!r}; known: {', '.join(table)}")
    return build_operator(text, table[text])


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    env_report = os.environ.get(REPORT_ENV)
    if env_report:
        cfg.report_path = env_report
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        cfg.tolerance = args.tol
    if args.report is not None:
        cfg.report_path = str(args.report)
    if args.format is not None:
        cfg.format = args.format
    cfg.validate()

    reports = run_suites(cfg.suites, cfg.build_operators(), default_corpus(cfg.corpus), cfg.seed,
                         cfg.tolerance, cfg.points_per_check, cfg.triples)
    text = to_csv(reports) if cfg.format == "csv" else \
        dumps(run_document(reports, cfg.seed, cfg.tolerance))
    if cfg.report_path:
        try:
            Path(cfg.report_path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot write report {cfg.report_path}: {exc}") from exc
    else:
        sys.stdout.write(text)
    ok = all(r.passed for r in reports)
    if not args.quiet:
        out = sys.stderr if not cfg.report_path else sys.stdout
        for r in reports:
            for case in r.cases:
                if not case.passed:
                    print(f"FAIL {r.suite}/{case.case}: residual {case.max_residual:.3e} "
                          f"(tol {case.tolerance:g}, scale {case.scale:.3g}, "
                          f"expect {case.expect})", file=out)
            print(f"{r.suite}: {sum(c.passed for c in r.cases)}/{len(r.cases)} cases pass "
                  f"({r.wall_time:.2f} s)", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_faa(args) -> int:
    print(expansion_table(args.order))
    return EXIT_OK


def cmd_recover(args) -> int:
    op = _resolve_operator(args.operator, args.config)
    pts = sample_points(DomainSet.interval(-2.0, 2.0), args.points, args.seed)
    print(f"{'x':>12} {'c0':>14} {'c1':>14} {'c2':>14} {'d00':>14} {'verify':>10}")
    try:
        for x in pts:
            rec = ai.recover_coefficients(op, x, seed=args.seed)
            print(f"{x:12.6f} " + " ".join(f"{c:14.8g}" for c in rec.coefficients)
                  + f" {rec.verify_residual:10.2e}")
    except NotInFamily as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_counterexample(args) -> int:
    sol = cx.PsiSolution()
    d = cx.build_d(sol)
    try:
        v = cx.find_violation_triple(d, args.seed, args.trials, args.threshold)
    except PreconditionError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    print(f"violating triple (trial {v.trial}): x={v.x:.17g} y={v.y:.17g} z={v.z:.17g}")
    print(f"trilinear residual          = {v.residual:.17g}")
    phi = cx.cube_phi(sol, *(math.log(t) for t in (v.x, v.y, v.z))).value
    print(f"xyz * phi cube expression   = {v.x * v.y * v.z * phi:.17g}")
    diag = max((cx.residual_powers_composition(d, constant(f"const_{t:.6g}", t), 0.0)
                for t in (v.x, v.y, v.z)), key=lambda r: r.scaled)
    print(f"diagonal residual (scaled)  = {diag.scaled:.3e}")
    fit = cx.phi_quadratic_fit(sol, seed=args.seed)
    print(f"phi quadratic-fit residual  = {fit.residual:.6g}")
    return EXIT_OK


DIM_DEFAULTS = {1: "char_k0", 2: "char_k1", 3: "char_1234"}


def cmd_aichinger(args) -> int:
    op = _resolve_operator(args.operator or DIM_DEFAULTS[args.dim], args.config)
    G = ai.induced_symbol(op)
    if G.n != args.dim:
        raise ConfigError(f"operator {op.name} has symbol dimension {G.n}, not {args.dim}")
    model = ai.fit_symbol(G, 0.0, args.samples, args.seed)
    print(f"G(0, v) ~ {model.constant:.10g}")
    for i, c in enumerate(model.linear):
        print(f"  + {c:.10g} * v{i}")
    for i, row in enumerate(model.quadratic):
        for j, c in enumerate(row[:i + 1]):
            print(f"  + {c:.10g} * v{i}*v{j}")
    print(f"max misfit {model.residual:.3e}, condition {model.condition:.3g}")
    return EXIT_OK if model.residual <= 1e-8 else EXIT_FAIL


COMMANDS = {
    "verify": cmd_verify,
    "faa": cmd_faa,
    "recover": cmd_recover,
    "counterexample": cmd_counterexample,
    "aichinger": cmd_aichinger,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"leibniz3: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
