"""Consolidated experiment report over a bundle of annotations.

A bundle is described by a JSON manifest; relative paths are resolved
against the manifest's directory::

    {
      "design": "design.tsv",
      "ledger": "time.tsv",
      "gold": {"D1": "gold/D1.tsv", ...},
      "annotations": {"a1": {"D1": "ann/a1_D1.tsv", ...}, ...},
      "tokens_per_dataset": 1250,     # optional, default: mean gold size
      "target_tokens": 2000000,       # optional
      "baseline_task": "no_supp"      # optional, default: first task
    }
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean

from . import agreement, experiment, metrics, stats
from .treebank import DEFAULT_INVENTORY, AfunInventory, Document, read_document

COMPONENTS = {"design": "design table", "ledger": "timing ledger",
              "gold": "gold annotations", "annotations": "annotations"}


class BundleError(ValueError):
    pass


@dataclass
class Bundle:
    design: experiment.DesignTable
    ledger: experiment.TimingLedger
    gold: dict[str, Document]
    annotations: dict[tuple[str, str], Document]
    tokens_per_dataset: int
    target_tokens: int = 2_000_000
    baseline_task: str | None = None

    def __post_init__(self):
        missing = [f"{r.annotator} on {r.dataset}" for r in self.design.rows
                   if (r.annotator, r.dataset) not in self.annotations]
        missing += [f"gold for {d}" for d in sorted({r.dataset for r in self.design.rows})
                    if d not in self.gold]
        if missing:
            raise BundleError("incomplete bundle: missing " + ", ".join(missing))
        if self.baseline_task is None:
            self.baseline_task = self.design.tasks[0]


def load_bundle(manifest_path: str | Path, inventory: AfunInventory = DEFAULT_INVENTORY) -> Bundle:
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise BundleError(f"cannot read manifest {manifest_path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise BundleError(f"{manifest_path}: invalid JSON: {exc}") from exc
    missing = [label for key, label in COMPONENTS.items() if not manifest.get(key)]
    if missing:
        raise BundleError("incomplete bundle: missing " + ", ".join(missing))
    base = manifest_path.parent

    def text(rel):
        try:
            return (base / rel).read_text(encoding="utf-8")
        except OSError as exc:
            raise BundleError(f"cannot read {base / rel}: {exc.strerror or exc}") from exc

    def doc(rel):
        if not (base / rel).is_file():
            raise BundleError(f"cannot read {base / rel}")
        return read_document(base / rel, inventory)

    try:
        design = experiment.DesignTable.from_tsv(text(manifest["design"]))
        ledger = experiment.TimingLedger.from_tsv(text(manifest["ledger"]))
    except BundleError:
        raise
    except ValueError as exc:
        raise BundleError(str(exc)) from exc
    gold = {d: doc(p) for d, p in manifest["gold"].items()}
    annotations = {(a, d): doc(p) for a, per in manifest["annotations"].items() for d, p in per.items()}
    tokens = manifest.get("tokens_per_dataset") or round(fmean(g.token_count for g in gold.values()))
    return Bundle(design, ledger, gold, annotations, int(tokens),
                  int(manifest.get("target_tokens", 2_000_000)), manifest.get("baseline_task"))


@dataclass
class ExperimentReport:
    accuracy: list[dict] = field(default_factory=list)
    agreement: list[dict] = field(default_factory=list)
    time: experiment.TimeSummary | None = None
    time_points: list[dict] = field(default_factory=list)
    extrapolation: list[experiment.ExtrapolationReport] = field(default_factory=list)
    samples: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "samples": self.samples, "seed": self.seed,
            "accuracy": self.accuracy,
            "agreement": self.agreement,
            "time": self.time.to_dict() if self.time else None,
            "extrapolation": [r.to_dict() for r in self.extrapolation],
        }


def _setups(design: experiment.DesignTable):
    return [(t, m) for t in design.tasks for m in experiment.MODES
            if any(r.task == t and r.mode == m for r in design.rows)]


def build_report(bundle: Bundle, samples: int = stats.DEFAULT_SAMPLES, seed: int = 0,
                 unit: str = "sentence", workers: int = 1,
                 inventory: AfunInventory = DEFAULT_INVENTORY) -> ExperimentReport:
    design = bundle.design
    report = ExperimentReport(samples=samples, seed=seed)

    scored: dict[tuple[str, str], list[metrics.ScoreReport]] = defaultdict(list)
    for r in design.rows:
        ann = bundle.annotations[(r.annotator, r.dataset)]
        scored[(r.task, r.mode)].append(metrics.attachment_scores(ann, bundle.gold[r.dataset]))

    def pooled(setup, metric):
        return [u for rep in scored[setup] for u in rep.sentence_stats(metric, unit)]

    for task, mode in _setups(design):
        means = dict(zip(metrics.METRICS, metrics.average_scores(scored[(task, mode)])))
        for metric in metrics.METRICS:
            units = pooled((task, mode), metric)
            boot = stats.bootstrap_stddev(units, samples, seed, workers)
            row = {"task": task, "mode": mode, "metric": metric, "mean": means[metric],
                   "stddev": 100 * boot.stddev, "p_value": None}
            if task != bundle.baseline_task and (bundle.baseline_task, mode) in scored:
                test = stats.permutation_test(units, pooled((bundle.baseline_task, mode), metric),
                                              samples, seed, workers)
                row["p_value"] = test.p_value
            report.accuracy.append(row)

    for task, mode in _setups(design):
        cell_pairs = []
        for pair, members in design.pairs.items():
            rows = [r for r in design.rows if r.pair == pair and (r.task, r.mode) == (task, mode)]
            if len(rows) == 2 and rows[0].dataset == rows[1].dataset:
                cell_pairs.append(rows)
        for kind in agreement.KINDS:
            values = []
            for x, y in cell_pairs:
                res = agreement.compute_kappa(bundle.annotations[(x.annotator, x.dataset)],
                                              bundle.annotations[(y.annotator, y.dataset)], kind, inventory)
                values.append({"a": x.annotator, "b": y.annotator, "kappa": res.kappa})
            if values:
                report.agreement.append({"task": task, "mode": mode, "kind": kind,
                                         "kappa": fmean(v["kappa"] for v in values), "pairs": values})

    report.time = experiment.time_summary(bundle.ledger)
    report.time_points = [e.__dict__ for e in bundle.ledger.entries]
    report.extrapolation = experiment.extrapolate_setups(report.time, bundle.tokens_per_dataset,
                                                         bundle.target_tokens)
    return report


# --------------------------------------------------------------------------
# rendering

def plot_series(report: ExperimentReport) -> dict:
    """x/y series per figure."""
    figures: dict[str, list[dict]] = {"accuracy": [], "agreement": [], "time": [], "extrapolation": []}
    for metric in metrics.METRICS:
        for mode in experiment.MODES:
            rows = [r for r in report.accuracy if r["metric"] == metric and r["mode"] == mode]
            if rows:
                figures["accuracy"].append({"name": f"{metric}/{mode}", "x": [r["task"] for r in rows],
                                            "y": [r["mean"] for r in rows],
                                            "err": [r["stddev"] for r in rows]})
    for kind in agreement.KINDS:
        for mode in experiment.MODES:
            rows = [r for r in report.agreement if r["kind"] == kind and r["mode"] == mode]
            if rows:
                figures["agreement"].append({"name": f"{kind}/{mode}", "x": [r["task"] for r in rows],
                                             "y": [r["kappa"] for r in rows]})
    if report.time:
        for task, mode in report.time.setup_means:
            pts = [p for p in report.time_points if p["task"] == task and p["mode"] == mode]
            figures["time"].append({"name": f"{task}/{mode}", "x": [p["annotator"] for p in pts],
                                    "y": [p["minutes"] for p in pts]})
    figures["extrapolation"].append({"name": "hours", "x": [f"{r.task}/{r.mode}" for r in report.extrapolation],
                                     "y": [r.hours for r in report.extrapolation]})
    return figures


def _accuracy_table(report: ExperimentReport) -> list[str]:
    lines = []
    for metric in metrics.METRICS:
        lines.append(f"  {metric.upper()}")
        tasks = list(dict.fromkeys(r["task"] for r in report.accuracy))
        for task in tasks:
            cells = []
            for mode in experiment.MODES:
                row = next((r for r in report.accuracy
                            if (r["task"], r["mode"], r["metric"]) == (task, mode, metric)), None)
                if row is None:
                    cells.append("-".ljust(24))
                    continue
                cell = f"{row['mean']:.1f} ±{row['stddev']:.2f}"
                if row["p_value"] is not None:
                    p = 100 * row["p_value"]
                    cell += " p<0.1%" if p < 0.1 else f" p={p:.1f}%"
                cells.append(cell.ljust(24))
            lines.append(f"  {task:<12}" + "".join(cells).rstrip())
    return lines


def render(report: ExperimentReport, fmt: str = "table") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), ensure_ascii=False) + "\n"
    if fmt == "plotdata":
        return json.dumps(plot_series(report), ensure_ascii=False) + "\n"
    if fmt == "tsv":
        out = ["# accuracy", "task\tmode\tmetric\tmean\tstddev\tp_value"]
        out += [f"{r['task']}\t{r['mode']}\t{r['metric']}\t{r['mean']!r}\t{r['stddev']!r}\t"
                f"{'' if r['p_value'] is None else repr(r['p_value'])}" for r in report.accuracy]
        out += ["", "# agreement", "task\tmode\tkind\tkappa"]
        out += [f"{r['task']}\t{r['mode']}\t{r['kind']}\t{r['kappa']!r}" for r in report.agreement]
        out += ["", "# time", "task\tmode\tmean_minutes"]
        out += [f"{t}\t{m}\t{v!r}" for (t, m), v in report.time.setup_means.items()]
        out += ["", "# extrapolation", "task\tmode\thours"]
        out += [f"{r.task}\t{r.mode}\t{r.hours!r}" for r in report.extrapolation]
        return "\n".join(out) + "\n"

    header = f"  {'':<12}{'Pre-parsed':<24}{'From-scratch'}"
    out = ["Accuracy", header, *_accuracy_table(report), ""]
    out += ["Agreement (kappa)", header]
    for kind in agreement.KINDS:
        out.append(f"  {kind}")
        for task in dict.fromkeys(r["task"] for r in report.agreement):
            cells = []
            for mode in experiment.MODES:
                row = next((r for r in report.agreement
                            if (r["task"], r["mode"], r["kind"]) == (task, mode, kind)), None)
                cells.append(("-" if row is None else f"{row['kappa']:.2f}").ljust(24))
            out.append(f"  {task:<12}" + "".join(cells).rstrip())
    out += ["", "Time (mean minutes)", f"  {'':<12}{'Pre-parsed':<14}{'From-scratch':<14}ratio"]
    for task, ratio in report.time.ratios.items():
        pre = report.time.setup_means.get((task, "pre-parsed"))
        scratch = report.time.setup_means.get((task, "from-scratch"))
        out.append(f"  {task:<12}{'-' if pre is None else f'{pre:.2f}':<14}"
                   f"{'-' if scratch is None else f'{scratch:.2f}':<14}"
                   f"{'-' if ratio is None else f'{ratio:.2f}'}")
    out += ["", "Extrapolation"]
    out += [f"  {r.summary()}" for r in report.extrapolation]
    out.append(f"# samples={report.samples} seed={report.seed}")
    return "\n".join(out) + "\n"


def save_chart(report: ExperimentReport, path: str | Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = plot_series(report)
    fig, axes = plt.subplots(1, 3, figsize=(15, 4))
    for s in series["accuracy"]:
        axes[0].errorbar(s["x"], s["y"], yerr=s["err"], label=s["name"], capsize=3)
    axes[0].set_title("Accuracy (%)")
    for s in series["time"]:
        axes[1].plot(s["x"], s["y"], marker="o", label=s["name"])
    axes[1].set_title("Time (min)")
    ext = series["extrapolation"][0]
    axes[2].bar(range(len(ext["x"])), ext["y"])
    axes[2].set_xticks(range(len(ext["x"])), ext["x"], rotation=60, ha="right", fontsize=7)
    axes[2].set_title("Extrapolated hours")
    for ax in axes[:2]:
        ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
