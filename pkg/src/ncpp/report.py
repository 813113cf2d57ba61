"""Pipeline orchestration and report rendering.

``run`` routes every demand, forms coding groups, sweeps the protection
targets, then provisions and failure-checks every optimal configuration.
``emit`` renders the result as markdown, CSV or JSON lines; all three are
byte-stable for a fixed scenario.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Sequence

from ncpp.coding import (
    ProtectionPlan,
    RoutedDemand,
    build_plan,
    coding_feasible,
    failure_sweep,
    greedy_groups,
    make_groups,
)
from ncpp.errors import InfeasibleGroupError, InvariantViolation, NcppError
from ncpp.optimizer import GroupShape, ProtectionConfig, SweepRow, sweep_targets
from ncpp.provisioning import link_usage
from ncpp.routing import disjoint_pair
from ncpp.scenario import Scenario
from ncpp.slices import format_rate
from ncpp.topology import links_on_path


@dataclass(frozen=True)
class UsageRow:
    target: Decimal
    config: str
    link: str
    nc: int
    no_nc: int
    total: int


@dataclass(frozen=True)
class Verdict:
    target: Decimal
    config: str
    links_checked: int
    violations: tuple[str, ...] = ()


@dataclass
class RunReport:
    scenario: str
    modulation: str
    slice_width: Decimal
    step: Decimal
    objective: str
    coded_links: tuple[str, ...] = ()
    rows: list[SweepRow] = field(default_factory=list)
    usage: list[UsageRow] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)

    def row(self, target) -> SweepRow:
        want = Decimal(str(target))
        for r in self.rows:
            if r.target == want:
                return r
        raise KeyError(target)

    def usage_at(self, target, link: str) -> UsageRow:
        want = Decimal(str(target))
        for u in self.usage:
            if u.target == want and u.link == link:
                return u
        raise KeyError((target, link))


class StageError(NcppError):
    """Wraps a pipeline failure with the stage it happened in."""

    def __init__(self, stage: str, exc: NcppError):
        self.stage = stage
        self.cause = exc
        self.exit_code = exc.exit_code
        super().__init__(f"[{stage}] {exc}")


def route(s: Scenario) -> list[RoutedDemand]:
    out = []
    for d in s.demands:
        if d.working is not None:
            working, protection = d.working, d.protection
        else:
            pair = disjoint_pair(s.topology, d.src, d.dst)
            working, protection = pair.working, pair.protection
        out.append(RoutedDemand(d.id, d.rate, working, protection))
    return out


def group(s: Scenario, routed: Sequence[RoutedDemand]) -> list[tuple[str, ...]]:
    if s.coding_groups is not None:
        return [tuple(g) for g in s.coding_groups]
    return greedy_groups(s.topology, routed, s.pairwise_only)


def shapes(routed: Sequence[RoutedDemand], members: Sequence[Sequence[str]]) -> list[GroupShape]:
    index = {d.id: i for i, d in enumerate(routed)}
    full = {d.id: d.rate for d in routed}
    out = []
    for g in make_groups(routed, full, members):
        out.append(
            GroupShape(
                tuple(index[d] for d in g.demand_ids),
                len(g.tail_path) - 1,
                tuple(len(f) - 1 for f in g.feeder_paths),
            )
        )
    return out


def check_groups(s: Scenario, routed: Sequence[RoutedDemand], members: Sequence[Sequence[str]]):
    working = {d.id: d.working for d in routed}
    for g in make_groups(routed, {d.id: d.rate for d in routed}, members):
        verdict = coding_feasible(g, working, s.topology)
        if not verdict:
            raise InfeasibleGroupError(f"group {g.id}: {verdict.reason}")


def plan_for(s: Scenario, routed, members, config: ProtectionConfig | Sequence, coding: bool = True) -> ProtectionPlan:
    protected = {d.id: Decimal(p) for d, p in zip(routed, config)}
    return build_plan(s.topology, routed, protected, members, s.modulation, s.grid, coding)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except NcppError as exc:
        raise StageError(name, exc) from exc


def run(s: Scenario, targets: Sequence | None = None, objective: str | None = None) -> RunReport:
    """Full pipeline; raises :class:`StageError` tagged with the failing stage.

    Every optimal configuration is provisioned with coding and then cut
    link by link. Any demand left below its protected rate aborts the run
    with :class:`~ncpp.errors.InvariantViolation`.
    """
    objective = objective or s.objective
    routed = _stage("route", route, s)
    members = _stage("group", group, s, routed)
    group_shapes = _stage("group", shapes, routed, members)
    _stage("group", check_groups, s, routed, members)

    sweep = _stage(
        "optimize",
        sweep_targets,
        [d.rate for d in routed],
        list(targets if targets is not None else s.targets),
        s.step,
        group_shapes,
        objective,
        s.modulation,
        s.grid,
        [d.min_protected for d in s.demands],
        s.round_nearest,
    )
    coded = []
    for g in make_groups(routed, {d.id: d.rate for d in routed}, members):
        if len(g.members) > 1:
            coded.extend(links_on_path(s.topology, g.tail_path))
    report = RunReport(
        s.name, s.modulation.name, s.grid.slice_width, s.step, objective, tuple(coded), sweep.rows
    )

    for row in sweep.rows:
        for i, config in enumerate(row.configs):
            plan = _stage("provision", plan_for, s, routed, members, config)
            bad = failure_sweep(plan)
            if bad:
                detail = "; ".join(
                    f"cut {v.failed_link}: {v.demand} got {format_rate(v.delivered)} < {format_rate(v.protected)}"
                    for v in bad
                )
                raise StageError("verify", InvariantViolation(f"configuration {config} at {row.target}: {detail}"))
            report.verdicts.append(Verdict(row.target, str(config), len(s.topology.links)))
            if i == 0:
                plain = _stage("provision", plan_for, s, routed, members, config, coding=False)
                for link in s.topology.links:
                    report.usage.append(
                        UsageRow(
                            row.target,
                            str(config),
                            link.id,
                            link_usage(plan.state, link.id),
                            link_usage(plain.state, link.id),
                            link.slice_count,
                        )
                    )
    return report


def fmt_target(t: Decimal) -> str:
    s = format_rate(t)
    return s if "." in s else s + ".0"


def fmt_percent(t: Decimal) -> str:
    return format_rate(t * 100) + "%"


def fmt_configs(configs: Sequence[ProtectionConfig]) -> str:
    """First optimum, then the tied ones in brackets: ``100 + 75 (75 + 100)``."""
    if not configs:
        return ""
    spaced = [" + ".join(format_rate(p) for p in c) for c in configs]
    head, rest = spaced[0], spaced[1:]
    return head + (" (" + "; ".join(rest) + ")" if rest else "")


def _md_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out += ["| " + " | ".join(r) + " |" for r in rows]
    return out


def emit_markdown(report: RunReport, sections: Sequence[str] = ("rows", "usage", "verdict")) -> str:
    lines = [
        f"# {report.scenario}",
        "",
        f"modulation {report.modulation}, slice width {format_rate(report.slice_width)} GHz, "
        f"step {format_rate(report.step)} Gb/s, objective {report.objective}",
        "",
    ]
    if "rows" in sections:
        body = []
        for r in report.rows:
            if r.error:
                body.append([fmt_percent(r.target), f"error: {r.error}", "", "", ""])
            else:
                body.append([fmt_percent(r.target), fmt_configs(r.configs), str(r.nc_cost), str(r.no_nc_cost), f"{r.savings}%"])
        lines += _md_table(["Protection", "Configuration", "Slices with NC", "Slices w/o NC", "Savings"], body)
        lines.append("")
    if "usage" in sections and report.usage:
        lines += ["## Link usage", ""]
        body = [
            [fmt_percent(u.target), u.config, u.link, str(u.nc), str(u.no_nc), str(u.total)]
            for u in report.usage
        ]
        lines += _md_table(["Protection", "Configuration", "Link", "With NC", "W/o NC", "Total"], body)
        lines.append("")
    if "verdict" in sections:
        lines += ["## Single-link failure sweep", ""]
        n = len(report.verdicts)
        bad = [v for v in report.verdicts if v.violations]
        if bad:
            lines += [f"- {fmt_percent(v.target)} {v.config}: {'; '.join(v.violations)}" for v in bad]
        else:
            links = report.verdicts[0].links_checked if report.verdicts else 0
            lines.append(f"{n} optimal configurations checked against {links} single-link failures each: no violations.")
        lines.append("")
    return "\n".join(lines)


def emit_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["target", "configs", "nc_slices", "no_nc_slices"])
    for r in report.rows:
        if r.error:
            writer.writerow([fmt_target(r.target), f"error: {r.error}", "", ""])
        else:
            writer.writerow([fmt_target(r.target), ";".join(str(c) for c in r.configs), r.nc_cost, r.no_nc_cost])
    return buf.getvalue()


def emit_jsonl(report: RunReport) -> str:
    def dump(obj):
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    lines = [
        dump(
            {
                "type": "meta",
                "scenario": report.scenario,
                "modulation": report.modulation,
                "slice_width": str(report.slice_width),
                "step": str(report.step),
                "objective": report.objective,
                "coded_links": list(report.coded_links),
            }
        )
    ]
    for r in report.rows:
        lines.append(
            dump(
                {
                    "type": "row",
                    "target": str(r.target),
                    "configs": [[str(p) for p in c] for c in r.configs],
                    "nc": r.nc_cost,
                    "no_nc": r.no_nc_cost,
                    "savings": None if r.savings is None else str(r.savings),
                    "error": r.error,
                }
            )
        )
    for u in report.usage:
        lines.append(
            dump({"type": "usage", "target": str(u.target), "config": u.config, "link": u.link,
                  "nc": u.nc, "no_nc": u.no_nc, "total": u.total})
        )
    for v in report.verdicts:
        lines.append(
            dump({"type": "verdict", "target": str(v.target), "config": v.config,
                  "links_checked": v.links_checked, "violations": list(v.violations)})
        )
    return "\n".join(lines) + "\n"


def parse_jsonl(text: str) -> RunReport:
    """Inverse of :func:`emit_jsonl`."""
    report = None
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.pop("type")
        if kind == "meta":
            report = RunReport(
                rec["scenario"], rec["modulation"], Decimal(rec["slice_width"]), Decimal(rec["step"]),
                rec["objective"], tuple(rec["coded_links"]),
            )
        elif report is None:
            raise ValueError("JSON lines report must start with a meta record")
        elif kind == "row":
            configs = tuple(ProtectionConfig(tuple(Decimal(p) for p in c), report.step) for c in rec["configs"])
            report.rows.append(SweepRow(Decimal(rec["target"]), configs, rec["nc"], rec["no_nc"], rec["error"]))
        elif kind == "usage":
            report.usage.append(
                UsageRow(Decimal(rec["target"]), rec["config"], rec["link"], rec["nc"], rec["no_nc"], rec["total"])
            )
        elif kind == "verdict":
            report.verdicts.append(
                Verdict(Decimal(rec["target"]), rec["config"], rec["links_checked"], tuple(rec["violations"]))
            )
        else:
            raise ValueError(f"unknown record type {kind!r}")
    if report is None:
        raise ValueError("empty JSON lines report")
    return report


FORMATS = {"md": emit_markdown, "csv": emit_csv, "jsonl": emit_jsonl}


def emit(report: RunReport, fmt: str = "md") -> str:
    try:
        return FORMATS[fmt](report)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}; expected one of {sorted(FORMATS)}") from None


def paper_tables(report: RunReport) -> str:
    """The two case-study tables: coding and partial protection apart, then combined."""
    link = ", ".join(report.coded_links) or "coded link"
    full = report.row(Decimal("1.0"))
    partial = [r for r in report.rows if r.target < 1 and not r.error]

    t1 = [["Full protection w/o NC", str(full.no_nc_cost)], ["Full protection with NC", str(full.nc_cost)]]
    t1 += [[f"Partial protection ({fmt_percent(r.target)}) w/o NC", str(r.no_nc_cost)] for r in partial]
    t2 = [[fmt_percent(r.target), fmt_configs(r.configs), str(r.nc_cost)] for r in partial]

    lines = [f"Table 1: slices on link {link}, coding and partial protection applied separately", ""]
    lines += _md_table(["Scenario", f"Slices on link {link}"], t1)
    lines += ["", f"Table 2: slices on link {link} with coding optimally combined with partial protection", ""]
    lines += _md_table(["Scenario", "Configuration", "Slices"], t2)
    return "\n".join(lines) + "\n"
