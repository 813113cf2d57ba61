"""Command line entry point.

Exit codes: 0 success, 2 validation error, 3 infeasible (blocking, no
disjoint pair, unreachable target), 4 invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from ncpp.coding import failure_sweep
from ncpp.errors import InvariantViolation, NcppError, ValidationError
from ncpp.optimizer import OBJECTIVES
from ncpp.provisioning import usage_csv
from ncpp.report import FORMATS, check_groups, emit, emit_markdown, group, paper_tables, plan_for, route, run
from ncpp.scenario import SHIPPED, load_scenario
from ncpp.slices import as_rate, format_rate

OUTPUT_DIR_ENV = "NCPP_OUTPUT_DIR"

logger = logging.getLogger("ncpp")


def parse_targets(spec: str) -> list[Decimal]:
    """``"0.9:0.1:0.1"`` -> 0.9, 0.8, ..., 0.1 (inclusive); a comma list also works."""
    try:
        if ":" not in spec:
            return [Decimal(t) for t in spec.split(",")]
        start, stop, step = (Decimal(p) for p in spec.split(":"))
    except (InvalidOperation, ValueError):
        raise ValidationError(f"bad target range {spec!r}; expected start:stop:step", "--targets") from None
    if step <= 0:
        raise ValidationError("target step must be positive", "--targets")
    sign = 1 if stop >= start else -1
    out = []
    t = start
    while (t - stop) * sign <= 0:
        out.append(t)
        t += sign * step
    return out


def parse_config(spec: str, n: int) -> list[Decimal]:
    try:
        values = [as_rate(v.strip()) for v in spec.split("+")]
    except InvalidOperation:
        raise ValidationError(f"bad configuration {spec!r}; expected e.g. 100+125", "--config") from None
    if len(values) != n:
        raise ValidationError(f"configuration has {len(values)} entries for {n} demands", "--config")
    return values


def _write(text: str, stem: str, ext: str):
    sys.stdout.write(text)
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        path = Path(out_dir) / f"{stem}.{ext}"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("wrote %s", path)


def cmd_run(args) -> int:
    s = load_scenario(args.scenario)
    report = run(s, objective=args.objective)
    _write(emit(report, args.format), f"{s.name}-run", args.format)
    return 0


def cmd_sweep(args) -> int:
    s = load_scenario(args.scenario)
    targets = parse_targets(args.targets) if args.targets else None
    report = run(s, targets=targets, objective=args.objective)
    text = emit_markdown(report, sections=("rows",)) if args.format == "md" else emit(report, args.format)
    _write(text, f"{s.name}-sweep", args.format)
    return 0


def cmd_verify(args) -> int:
    s = load_scenario(args.scenario)
    routed = route(s)
    members = group(s, routed)
    check_groups(s, routed, members)
    config = parse_config(args.config, len(routed))
    for d, p in zip(routed, config):
        if not 0 <= p <= d.rate:
            raise ValidationError(f"protected rate {p} of {d.id} outside [0, {d.rate}]", "--config")
    plan = plan_for(s, routed, members, config)
    bad = failure_sweep(plan)
    lines = [usage_csv(plan.state)]
    groups = ", ".join(f"[{g.id}] at {g.encode_node}" for g in plan.groups if len(g.members) > 1)
    lines.append(f"coding groups: {groups or 'none'}\n")
    for v in bad:
        lines.append(
            f"VIOLATION cut {v.failed_link}: {v.demand} delivered {format_rate(v.delivered)} "
            f"< protected {format_rate(v.protected)}\n"
        )
    if not bad:
        lines.append(f"OK: {len(s.topology.links)} single-link failures, every demand keeps its protected rate\n")
    _write("".join(lines), f"{s.name}-verify", "txt")
    if bad:
        raise InvariantViolation(f"{len(bad)} protection violations")
    return 0


def cmd_tables(args) -> int:
    if not args.paper and not args.scenario:
        raise ValidationError("give --paper or --scenario")
    s = load_scenario(args.scenario or "fig5")
    report = run(s)
    _write(paper_tables(report), f"{s.name}-tables", "md")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncpp",
        description="Protection spectrum planning with XOR network coding and partial protection.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    scenario_help = f"scenario TOML file or shipped name ({', '.join(SHIPPED)})"

    p = sub.add_parser("run", help="route, group, optimize, provision and verify a scenario")
    p.add_argument("scenario", help=scenario_help)
    p.add_argument("--objective", choices=OBJECTIVES)
    p.add_argument("--format", choices=sorted(FORMATS), default="md")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="optimal configuration per protection target")
    p.add_argument("scenario", help=scenario_help)
    p.add_argument("--targets", help="start:stop:step, e.g. 0.9:0.1:0.1")
    p.add_argument("--objective", choices=OBJECTIVES)
    p.add_argument("--format", choices=sorted(FORMATS), default="md")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="provision one configuration and cut every link")
    p.add_argument("scenario", help=scenario_help)
    p.add_argument("--config", required=True, help="protected rates in demand order, e.g. 100+125")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tables", help="reproduce the two case-study tables")
    p.add_argument("--paper", action="store_true", help="use the shipped fig5 scenario")
    p.add_argument("--scenario", help=scenario_help)
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NcppError as exc:
        print(f"ncpp: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
