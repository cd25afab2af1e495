"""
Command-line entry point: ``koszul-fans fan|build|check``.

Every command writes one report (JSON by default, text with --format text).
Exit codes: 0 when every check item passed, 1 when some item failed, 2 on
unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from pydantic import ValidationError

from cache import MemoTable
from config import (
    CHECK_KINDS,
    DEFAULT_SIMPLE_VARIANT,
    ENGINE_VERSION,
    EXIT_CHECK_FAILED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    OBJECT_KINDS,
    SIMPLE_VARIANTS,
)
from dcat import InjComplex, gamma_costalk, gamma_stalk, is_isomorphic, perversity_check, twist
from equivariant import crosscheck_g, crosscheck_purity, g_oracle, h_polynomial
from exceptions import FanError, FanFileError, KoszulFanError
from fan import Completion, Cone, QuasiFan
from fan_io import chain_map_to_dict, complex_to_dict, dump_report, fan_to_dict, input_sha256, load_complex, load_fan
from koszul import DualityContext, guarded_check, koszulity_table, verify_duality
from models import CheckItem, Report
from perverse import costandard, costandard_multiset, injective_hull, simple, standard
from report_templates import render_report
from settings import Settings, settings

logger = logging.getLogger(__name__)


# ============================================================================
# ARGUMENTS
# ============================================================================


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="koszul-fans",
        description="Perverse objects and Koszul duality for combinatorial sheaves on rational fans.",
    )
    parser.add_argument("--format", choices=["json", "text"], default="json", help="report format")
    parser.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log INFO (-v) or DEBUG (-vv)")
    parser.add_argument("-o", "--output", type=Path, help="write the report here instead of stdout")
    commands = parser.add_subparsers(dest="command", required=True)

    fan_parser = commands.add_parser("fan", help="inspect a fan file")
    fan_parser.add_argument("action", choices=["info", "dualize"])
    fan_parser.add_argument("fan_path", type=Path)

    build_parser = commands.add_parser("build", help="build a perverse object")
    build_parser.add_argument("object", choices=OBJECT_KINDS)
    build_parser.add_argument("fan_path", type=Path)
    build_parser.add_argument("--face", required=True, help="cone label: o, ray indices joined by '-', or top")
    build_parser.add_argument("--twist", type=int, default=0, help="Tate twist applied to the result")
    build_parser.add_argument("--variant", choices=sorted(SIMPLE_VARIANTS), default=DEFAULT_SIMPLE_VARIANT)
    build_parser.add_argument("--expect", type=Path, help="complex file the result must be isomorphic to")

    check_parser = commands.add_parser("check", help="machine-check the theorems on a fan")
    check_parser.add_argument("kind", choices=[*CHECK_KINDS, "all"])
    check_parser.add_argument("fan_path", type=Path)
    check_parser.add_argument("--jobs", type=_positive, help="worker processes for per-face checks (default: JOBS)")
    check_parser.add_argument("--twist-range", type=_positive, help="factor of the Ext^1 twist search bound (default: TWIST_RANGE_FACTOR)")
    check_parser.add_argument("--variant", choices=sorted(SIMPLE_VARIANTS), default=DEFAULT_SIMPLE_VARIANT)
    return parser.parse_args(argv)


def _configure_logging(verbose: int) -> None:
    level = settings.log_level
    if verbose == 1:
        level = "INFO"
    elif verbose >= 2:
        level = "DEBUG"
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


# ============================================================================
# COMMANDS
# ============================================================================


def _completion_summary(fan: QuasiFan, completion: Completion) -> dict:
    return {fan.label(c): [[str(x) for x in row] for row in completion[c].basis] for c in fan}


def cmd_fan(args: argparse.Namespace, fan: QuasiFan, completion: Completion, report: Report) -> None:
    """Face counts, h- and g-vectors, and for ``dualize`` the dual cone with its perp table."""
    report.tables["f_vector"] = fan.f_vector()
    report.tables["completion"] = _completion_summary(fan, completion)
    maximal = [c for c in fan if not fan.covers(c)]
    report.tables["h_vector"] = {fan.label(c): h_polynomial(fan, c) for c in maximal}
    report.tables["g_vector"] = {fan.label(c): g_oracle(fan, c) for c in maximal}
    report.items.append(CheckItem(check="completion", subject=fan.name, passed=True, detail="validated"))
    if args.action == "dualize":
        ctx = DualityContext.build(fan, completion)
        report.tables["dual_f_vector"] = ctx.dual.f_vector()
        report.tables["perp"] = {ctx.primal.label(tau): ctx.dual.label(ctx.perp(tau)) for tau in ctx.primal}
        report.witnesses["dual_fan"] = fan_to_dict(ctx.dual, ctx.dual_completion)
        report.items.append(
            CheckItem(
                check="dual_completion",
                subject=ctx.dual.name or "dual",
                passed=True,
                data={"omega_unit": str(ctx.omega_unit)},
            )
        )


def _gamma_tables(S: InjComplex) -> dict:
    return {
        "stalk": {S.fan.label(sigma): gamma_stalk(S, sigma).to_rows() for sigma in S.fan},
        "costalk": {S.fan.label(sigma): gamma_costalk(S, sigma).to_rows() for sigma in S.fan},
    }


def _vanishing_item(S: InjComplex, kind: str, tau, getter: Callable) -> CheckItem:
    nonzero = [S.fan.label(sigma) for sigma in S.fan if sigma != tau and not getter(S, sigma).is_zero]
    return CheckItem(
        check=f"{kind}_vanishing",
        subject=f"off {S.fan.label(tau)}",
        passed=not nonzero,
        detail=f"nonzero at {', '.join(nonzero)}" if nonzero else "",
    )


def cmd_build(args: argparse.Namespace, fan: QuasiFan, completion: Completion, report: Report) -> None:
    """Build one object, twist it, and report its Γ tables and perversity."""
    tau = fan.cone(args.face)
    label = fan.label(tau)
    trace = None
    if args.object == "costandard":
        S = costandard(fan, completion, tau)
    elif args.object == "standard":
        S = standard(fan, completion, tau)
    elif args.object == "simple":
        S, trace = simple(fan, completion, tau, args.variant)
    else:
        S, trace = injective_hull(fan, completion, tau)
    S = twist(S, args.twist)

    report.tables.update(_gamma_tables(S))
    report.witnesses["complex"] = complex_to_dict(S)
    verdict = perversity_check(S)
    report.items.append(
        CheckItem(
            check="perversity",
            subject=f"{args.object} on {label}",
            passed=verdict.perverse,
            detail="; ".join(verdict.failures),
        )
    )
    if args.object == "costandard":
        report.items.append(_vanishing_item(S, "costalk", tau, gamma_costalk))
    elif args.object == "standard":
        report.items.append(_vanishing_item(S, "stalk", tau, gamma_stalk))
    if trace is not None:
        report.tables["cone_order"] = trace.cone_order
        report.tables["sizes"] = trace.sizes
        if trace.kind == "injective":
            layers = costandard_multiset(trace)
            report.tables["costandard_layers"] = [[cone, k, dim] for (cone, k), dim in sorted(layers.items())]
    if args.expect is not None:
        expected = load_complex(args.expect, fan, completion)
        result = is_isomorphic(S, expected)
        report.items.append(
            CheckItem(check="expected", subject=str(args.expect.name), passed=result.isomorphic, detail=result.reason)
        )
        if result.witness is not None:
            report.witnesses["isomorphism"] = chain_map_to_dict(result.witness)


def _purity_face(fan: QuasiFan, completion: Completion, tau: Cone, variant: str) -> list[CheckItem]:
    """Purity, perversity and variant agreement of L_τ; each item fails on its own."""
    label = fan.label(tau)
    built: dict[str, InjComplex] = {}

    def simple_object() -> InjComplex:
        if "L" not in built:
            built["L"] = simple(fan, completion, tau, variant)[0]
        return built["L"]

    def purity():
        L = simple_object()
        impure = [
            fan.label(sigma)
            for sigma in fan
            if not (gamma_stalk(L, sigma).is_diagonal and gamma_costalk(L, sigma).is_diagonal)
        ]
        return not impure, f"off-diagonal at {', '.join(impure)}" if impure else "", _gamma_tables(L)

    def perversity():
        verdict = perversity_check(simple_object())
        return verdict.perverse, "; ".join(verdict.failures), {}

    items = [
        guarded_check("purity", f"L_{label}", purity),
        guarded_check("perversity", f"L_{label}", perversity),
    ]
    for other in sorted(SIMPLE_VARIANTS):
        if other == variant:
            continue

        def agree(other=other):
            result = is_isomorphic(simple_object(), simple(fan, completion, tau, other)[0])
            return result.isomorphic, result.reason, {}

        items.append(guarded_check("variants", f"L_{label}: {variant} ~ {other}", agree))
    return items


def _bbfk_face(fan: QuasiFan, completion: Completion, tau: Cone, variant: str) -> list[CheckItem]:
    try:
        return crosscheck_purity(fan, completion, tau, variant)
    except KoszulFanError as exc:
        logger.warning("minimal extension cross-check on %s raised %s", fan.label(tau), exc)
        return [CheckItem(check="bbfk", subject=f"L_{fan.label(tau)}", passed=False, detail=f"{type(exc).__name__}: {exc}")]


def _g_vector_items(fan: QuasiFan) -> list[CheckItem]:
    try:
        return crosscheck_g(fan)
    except KoszulFanError as exc:
        logger.warning("g-vector cross-check on %r raised %s", fan.name, exc)
        return [CheckItem(check="g_vector", subject=fan.name, passed=False, detail=f"{type(exc).__name__}: {exc}")]


def _per_face(task: Callable, fan: QuasiFan, completion: Completion, variant: str, jobs: int) -> list[CheckItem]:
    """Run a per-cone task over every cone, in worker processes when jobs > 1."""
    faces = list(fan)
    count = len(faces)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(task, [fan] * count, [completion] * count, faces, [variant] * count))
    else:
        results = [task(fan, completion, tau, variant) for tau in faces]
    return [item for items in results for item in items]


def _koszulity_items(fan: QuasiFan, completion: Completion, variant: str, report: Report) -> None:
    try:
        table = koszulity_table(fan, completion, variant)
    except KoszulFanError as exc:
        logger.warning("Koszulity table on %r raised %s", fan.name, exc)
        report.items.append(CheckItem(check="koszulity", subject=fan.name, passed=False, detail=f"{type(exc).__name__}: {exc}"))
        return
    report.tables["koszulity"] = {"->".join(key): dims.to_rows() for key, dims in table.items()}
    for (tau, rho), dims in table.items():
        report.items.append(CheckItem(check="koszulity", subject=f"Hom(L_{tau}, L_{rho})", passed=dims.is_diagonal))


def _check_options(args: argparse.Namespace) -> Settings:
    """Settings for one check run: the global settings with --jobs and --twist-range applied."""
    overrides = {"jobs": args.jobs, "twist_range_factor": args.twist_range}
    return settings.model_copy(update={key: value for key, value in overrides.items() if value is not None})


def cmd_check(args: argparse.Namespace, fan: QuasiFan, completion: Completion, report: Report) -> None:
    """Aggregate purity, Koszulity, duality and equivariant cross-checks."""
    options = _check_options(args)
    jobs = options.jobs if options.parallel_enabled else 1
    kinds = CHECK_KINDS if args.kind == "all" else [args.kind]
    run_duality = "duality" in kinds and (args.kind == "duality" or fan.top is not None and fan.top.dim == fan.ambient_dim)

    if "purity" in kinds:
        report.items.extend(_per_face(_purity_face, fan, completion, args.variant, jobs))
    if run_duality:
        duality = verify_duality(fan, completion, args.variant, jobs=jobs, twist_range_factor=options.twist_range_factor)
        report.items.extend(duality.items)
        report.tables["koszulity"] = {key: dims.to_rows() for key, dims in duality.koszulity.items()}
    elif "koszulity" in kinds:
        _koszulity_items(fan, completion, args.variant, report)
    if "bbfk" in kinds:
        report.items.extend(_per_face(_bbfk_face, fan, completion, args.variant, jobs))
        report.items.extend(_g_vector_items(fan))


COMMANDS: dict[str, Callable[[argparse.Namespace, QuasiFan, Completion, Report], None]] = {
    "fan": cmd_fan,
    "build": cmd_build,
    "check": cmd_check,
}


# ============================================================================
# ENTRY POINT
# ============================================================================


def _emit(report: Report, fmt: str, output: Path | None) -> None:
    text = dump_report(report) if fmt == "json" else render_report(report)
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _parse_args(argv)
    _configure_logging(args.verbose)
    started = time.perf_counter()
    try:
        fan, completion = load_fan(args.fan_path)
        report = Report(command=argv, input_sha256=input_sha256(args.fan_path), engine_version=ENGINE_VERSION, fan=fan.name)
        COMMANDS[args.command](args, fan, completion, report)
    except (FanFileError, FanError, ValidationError) as exc:
        sys.stderr.write(f"koszul-fans: input error: {exc}\n")
        return EXIT_INPUT_ERROR
    except KoszulFanError as exc:
        sys.stderr.write(f"koszul-fans: {type(exc).__name__}: {exc}\n")
        return EXIT_CHECK_FAILED
    if args.timing:
        report.timing_seconds = round(time.perf_counter() - started, 6)
    _emit(report, args.format, args.output)
    logger.info("%s finished: %d/%d items passed", args.command, sum(i.passed for i in report.items), len(report.items))
    for table in MemoTable.tables:
        logger.debug("memo table %s", table.stats)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
