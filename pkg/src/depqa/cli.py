"""Command line interface: ``depqa <subcommand> ...``.

Exit codes: 0 success, 1 findings/violations/differences present, 2 usage,
input or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import agreement, experiment, lint, metrics, stats
from .treebank import (DEFAULT_INVENTORY, AfunInventory, Document, ParallelismError, ParseError,
                       diff_annotations, read_document)

CONFIG_ENV = "DEPQA_CONFIG_DIR"
FORMATS = ("table", "tsv", "json", "plotdata")
EXIT_OK, EXIT_FOUND, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers

def _config_file(explicit: str | None, name: str) -> Path | None:
    if explicit:
        return Path(explicit)
    base = os.environ.get(CONFIG_ENV)
    if base and (Path(base) / name).is_file():
        return Path(base) / name
    return None


def load_inventory(args) -> AfunInventory:
    path = _config_file(args.inventory, "inventory.txt")
    if path is None:
        return DEFAULT_INVENTORY
    try:
        return AfunInventory.from_file(path)
    except OSError as exc:
        raise CliError(f"cannot read inventory: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from exc


def load_rules(args, inventory) -> lint.RuleSet:
    path = _config_file(args.rules, "rules.conf")
    try:
        if path is None:
            return lint.default_ruleset(inventory)
        return lint.load_ruleset_file(path, inventory)
    except OSError as exc:
        raise CliError(f"cannot read rules: {exc}") from exc
    except lint.RuleLoadError as exc:
        raise CliError(f"{path or 'default rules'}: {exc}") from exc


def read_doc(path: str | Path, inventory) -> Document:
    try:
        return read_document(path, inventory)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except ParseError as exc:
        raise CliError(f"{path}: {exc}") from exc


def seed_of(args) -> int:
    if args.seed is None:
        if os.environ.get("CI"):
            raise CliError("--seed is required for randomized subcommands when CI is set")
        return 0
    return args.seed


def match_gold(ann: Document, golds: Sequence[Document]) -> Document:
    for g in golds:
        if ann.doc_id and g.doc_id == ann.doc_id:
            return g
    ids = tuple(s.sent_id for s in ann.sentences)
    for g in golds:
        if tuple(s.sent_id for s in g.sentences) == ids:
            return g
    raise CliError(f"no gold document matches {ann.doc_id or 'annotation'}")


def _pct(x: float) -> str:
    return f"{x:.1f}"


def _table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(c).rjust(w) if i else str(c).ljust(w)
                               for i, (c, w) in enumerate(zip(r, widths))).rstrip()
                     for r in rows) + "\n"


# --------------------------------------------------------------------------
# subcommands

def cmd_check(args, out) -> int:
    inventory = load_inventory(args)
    rules = load_rules(args, inventory)
    if args.disable:
        try:
            rules = rules.without(*args.disable.split(","))
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from exc
    findings = []
    for path in args.files:
        findings.extend(lint.run_checks(read_doc(path, inventory), rules))
    if args.format == "json":
        out.write(lint.findings_to_jsonl(findings))
    elif args.format == "tsv":
        if findings:
            out.write(lint.findings_to_tsv(findings))
    else:
        for f in findings:
            if args.explain:
                out.write(lint.explain_finding(f, rules) + "\n")
            else:
                out.write(f"{f.sent_id}:{f.token_id}\t{f.severity}\t{f.rule_id}\t{f.message}\n")
    return EXIT_FOUND if lint.has_errors(findings) else EXIT_OK


def cmd_score(args, out) -> int:
    inventory = load_inventory(args)
    gold = read_doc(args.gold, inventory)
    rows = [("annotation", "UAS", "LAS", "FULL")]
    reports = []
    for path in args.ann:
        report = metrics.attachment_scores(read_doc(path, inventory), gold)
        reports.append(report)
        rows.append((Path(path).stem, _pct(report.uas), _pct(report.las), _pct(report.full)))
    if len(reports) > 1:
        rows.append(("mean", *map(_pct, metrics.average_scores(reports))))
    if args.format == "json":
        payload = [json.loads(r.to_json()) for r in reports]
        out.write(json.dumps(payload[0] if len(payload) == 1 else payload, ensure_ascii=False) + "\n")
    elif args.format == "tsv":
        out.write("".join(r.to_tsv() for r in reports))
    else:
        out.write(_table(rows))
    return EXIT_OK


def cmd_kappa(args, out) -> int:
    inventory = load_inventory(args)
    a, b = read_doc(args.a, inventory), read_doc(args.b, inventory)
    results = []
    for kind in agreement.KINDS:
        try:
            results.append(agreement.compute_kappa(a, b, kind, inventory, args.include_root))
        except agreement.UndefinedKappa as exc:
            raise CliError(f"{kind} kappa: {exc}") from exc
    if args.format == "json":
        out.write(json.dumps([r.to_dict() for r in results]) + "\n")
    elif args.format == "tsv":
        out.write("kind\tkappa\tp0\tpe\taP\taL\taF\tn\n")
        for r in results:
            out.write(f"{r.kind}\t{r.kappa!r}\t{r.p0!r}\t{r.pe!r}\t{r.aP}\t{r.aL}\t{r.aF}\t{r.n}\n")
    else:
        rows = [("kappa", "value", "p0", "pe")]
        rows += [(r.kind, f"{r.kappa:.2f}", f"{r.p0:.4f}", f"{r.pe:.4f}") for r in results]
        out.write(_table(rows))
    return EXIT_OK


def _pooled_stats(paths, golds, inventory, metric, unit):
    units = []
    for path in paths:
        ann = read_doc(path, inventory)
        report = metrics.attachment_scores(ann, match_gold(ann, golds))
        units.extend(report.sentence_stats(metric, unit))
    return units


def cmd_stats(args, out) -> int:
    inventory = load_inventory(args)
    seed = seed_of(args)
    golds = [read_doc(g, inventory) for g in args.gold]
    chosen = metrics.METRICS if args.metric == "all" else (args.metric,)
    results = []
    for metric in chosen:
        group_a = _pooled_stats(args.a, golds, inventory, metric, args.unit)
        row = {"metric": metric, "a": stats.bootstrap_stddev(group_a, args.samples, seed, args.workers)}
        if args.b:
            group_b = _pooled_stats(args.b, golds, inventory, metric, args.unit)
            row["b"] = stats.bootstrap_stddev(group_b, args.samples, seed, args.workers)
            row["test"] = stats.permutation_test(group_a, group_b, args.samples, seed, args.workers)
        results.append(row)

    if args.format in ("json", "tsv"):
        payload = [{k: (v if isinstance(v, str) else v.__dict__) for k, v in r.items()} for r in results]
        if args.format == "json":
            out.write(json.dumps({"samples": args.samples, "seed": seed, "unit": args.unit,
                                  "results": payload}) + "\n")
        else:
            out.write("metric\tgroup\tscore\tstddev\tp_value\tsamples\tseed\n")
            for r in results:
                p = repr(r["test"].p_value) if "test" in r else ""
                for g in ("a", "b"):
                    if g in r:
                        out.write(f"{r['metric']}\t{g}\t{r[g].statistic!r}\t{r[g].stddev!r}\t"
                                  f"{p if g == 'a' else ''}\t{args.samples}\t{seed}\n")
        return EXIT_OK
    rows = [("metric", "A", "B", "p (A>B)")]
    for r in results:
        a = f"{100 * r['a'].statistic:.1f} ±{100 * r['a'].stddev:.2f}"
        b = f"{100 * r['b'].statistic:.1f} ±{100 * r['b'].stddev:.2f}" if "b" in r else "-"
        p = f"{100 * r['test'].p_value:.1f}%" if "test" in r else "-"
        rows.append((r["metric"].upper(), a, b, p))
    out.write(_table(rows))
    out.write(f"# samples={args.samples} seed={seed} unit={args.unit}\n")
    return EXIT_OK


def cmd_design(args, out) -> int:
    tasks = int(args.tasks) if args.tasks.isdigit() else args.tasks.split(",")
    try:
        design = experiment.generate_design(args.annotators.split(","), tasks, args.datasets)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "json":
        out.write(json.dumps([r.__dict__ for r in design.rows]) + "\n")
    else:
        out.write(design.to_tsv())
    return EXIT_OK


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_design(path) -> experiment.DesignTable:
    try:
        return experiment.DesignTable.from_tsv(_read_text(path))
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from exc


def read_ledger(path) -> experiment.TimingLedger:
    try:
        return experiment.TimingLedger.from_tsv(_read_text(path))
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from exc


def cmd_verify_design(args, out) -> int:
    violations = experiment.verify_design(read_design(args.design))
    if args.format == "json":
        out.write(json.dumps([v.__dict__ for v in violations]) + "\n")
    else:
        for v in violations:
            out.write(f"{v.kind}\t{v.message}\n")
    return EXIT_FOUND if violations else EXIT_OK


def _time_rows(summary: experiment.TimeSummary):
    rows = [("task", "pre-parsed", "from-scratch", "ratio")]
    for task, ratio in summary.ratios.items():
        pre = summary.setup_means.get((task, "pre-parsed"))
        scratch = summary.setup_means.get((task, "from-scratch"))
        rows.append((task, "-" if pre is None else f"{pre:.2f}",
                     "-" if scratch is None else f"{scratch:.2f}",
                     "-" if ratio is None else f"{ratio:.2f}"))
    pre, scratch = summary.mode_means.get("pre-parsed"), summary.mode_means.get("from-scratch")
    rows.append(("overall", "-" if pre is None else f"{pre:.2f}",
                 "-" if scratch is None else f"{scratch:.2f}",
                 "-" if summary.overall_ratio is None else f"{summary.overall_ratio:.2f}"))
    return rows


def cmd_time(args, out) -> int:
    try:
        summary = experiment.time_summary(read_ledger(args.ledger))
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "json":
        out.write(json.dumps(summary.to_dict()) + "\n")
    elif args.format == "tsv":
        out.write("\n".join("\t".join(r) for r in _time_rows(summary)) + "\n")
    else:
        out.write(_table(_time_rows(summary)))
    return EXIT_OK


def cmd_extrapolate(args, out) -> int:
    try:
        if args.minutes is not None:
            hours = experiment.extrapolate_hours(args.minutes, args.tokens_per_dataset, args.target_tokens)
            reports = [experiment.ExtrapolationReport("-", "-", args.minutes, args.tokens_per_dataset,
                                                      args.target_tokens, hours)]
        elif args.ledger:
            summary = experiment.time_summary(read_ledger(args.ledger))
            reports = experiment.extrapolate_setups(summary, args.tokens_per_dataset, args.target_tokens)
        else:
            raise CliError("give a timing ledger or --minutes")
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "json":
        payload = [dict(r.to_dict(), **({"cost": r.cost(args.rate)} if args.rate else {})) for r in reports]
        out.write(json.dumps(payload) + "\n")
    elif args.format == "tsv":
        out.write("task\tmode\tmean_minutes\ttokens_per_dataset\ttarget_tokens\thours\n")
        for r in reports:
            out.write(f"{r.task}\t{r.mode}\t{r.mean_minutes!r}\t{r.tokens_per_dataset}\t"
                      f"{r.target_tokens}\t{r.hours!r}\n")
    else:
        for r in reports:
            line = r.summary()
            if args.rate:
                line += f" (cost {r.cost(args.rate):,.0f} at {args.rate:g}/h)"
            out.write(line + "\n")
    return EXIT_OK


def cmd_diff(args, out) -> int:
    inventory = load_inventory(args)
    docs = {Path(p).stem: read_doc(p, inventory) for p in args.files}
    if len(docs) != len(args.files):
        raise CliError("annotation file names must have distinct stems")
    try:
        if len(docs) == 2:
            a, b = docs.values()
            report = diff_annotations(a, b)
            if args.format == "json":
                out.write(json.dumps({"summary": report.summary,
                                      "entries": [e.__dict__ for e in report.entries]},
                                     ensure_ascii=False) + "\n")
            else:
                out.write(report.to_tsv())
            return EXIT_FOUND if len(report) else EXIT_OK
        bundle = experiment.adjudication_bundle(docs)
    except ParallelismError as exc:
        raise CliError(f"inputs are not parallel: {exc}") from exc
    out.write(bundle.to_json() + "\n" if args.format == "json" else bundle.to_text())
    return EXIT_FOUND if len(bundle) else EXIT_OK


def cmd_report(args, out) -> int:
    from .report import BundleError, build_report, load_bundle, render

    inventory = load_inventory(args)
    try:
        bundle = load_bundle(args.manifest, inventory)
    except BundleError as exc:
        raise CliError(str(exc)) from exc
    except ParseError as exc:
        raise CliError(str(exc)) from exc
    report = build_report(bundle, samples=args.samples, seed=seed_of(args), unit=args.unit,
                          workers=args.workers, inventory=inventory)
    out.write(render(report, args.format))
    if args.chart:
        from .report import save_chart
        save_chart(report, args.chart)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table")
    common.add_argument("--inventory", help="afun inventory file (one label per line)")
    common.add_argument("--rules", help="rule configuration file")
    common.add_argument("--seed", type=int, default=None, help="master seed (required when CI is set)")
    common.add_argument("--samples", type=int, default=stats.DEFAULT_SAMPLES,
                        help="bootstrap / permutation replicates")
    common.add_argument("--unit", choices=("sentence", "token"), default="sentence",
                        help="resampling unit")
    common.add_argument("--workers", type=int, default=1, help="threads for resampling")

    parser = argparse.ArgumentParser(prog="depqa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="run consistency rules")
    p.add_argument("files", nargs="+")
    p.add_argument("--disable", help="comma-separated rule groups to skip")
    p.add_argument("--explain", action="store_true", help="long messages")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("score", parents=[common], help="UAS/LAS/FULL against gold")
    p.add_argument("ann", nargs="+")
    p.add_argument("gold")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("kappa", parents=[common], help="unlabeled/labeled/full kappa of two annotations")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--include-root", action="store_true", help="count the technical root in sentence size")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("stats", parents=[common], help="bootstrap std-dev and permutation test")
    p.add_argument("--gold", nargs="+", required=True)
    p.add_argument("--a", nargs="+", required=True, help="annotations of the tested set-up")
    p.add_argument("--b", nargs="+", help="annotations of the baseline set-up")
    p.add_argument("--metric", choices=(*metrics.METRICS, "all"), default="all")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("design", parents=[common], help="generate a balanced design table")
    p.add_argument("--annotators", default="a1,a2,a3,a4")
    p.add_argument("--tasks", default="4", help="task count or comma-separated names")
    p.add_argument("--datasets", type=int, default=None)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("verify-design", parents=[common], help="check a design table")
    p.add_argument("design")
    p.set_defaults(func=cmd_verify_design)

    p = sub.add_parser("time", parents=[common], help="summarize a timing ledger")
    p.add_argument("ledger")
    p.set_defaults(func=cmd_time)

    p = sub.add_parser("extrapolate", parents=[common], help="extrapolate annotation hours")
    p.add_argument("ledger", nargs="?")
    p.add_argument("--minutes", type=float, help="mean minutes per dataset (instead of a ledger)")
    p.add_argument("--tokens-per-dataset", type=int, default=1250)
    p.add_argument("--target-tokens", type=int, default=2_000_000)
    p.add_argument("--rate", type=float, help="hourly rate for a cost column")
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("diff", parents=[common], help="diff two annotations, or bundle several")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("report", parents=[common], help="consolidated experiment report")
    p.add_argument("manifest", help="JSON bundle manifest")
    p.add_argument("--chart", help="also write a PNG chart (needs matplotlib)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "diff" and len(args.files) < 2:
        err.write("depqa diff: need at least two files\n")
        return EXIT_USAGE
    if args.samples < 1 or args.workers < 1:
        err.write("depqa: --samples and --workers must be positive\n")
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except CliError as exc:
        err.write(f"depqa {args.command}: {exc}\n")
        return EXIT_USAGE
    except ParallelismError as exc:
        err.write(f"depqa {args.command}: inputs are not parallel: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
