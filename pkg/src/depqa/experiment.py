"""Experiment workflow: balanced annotator/dataset design, timing ledger,
time ratios, cost extrapolation and adjudication bundles."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass
from itertools import combinations
from statistics import fmean
from typing import Mapping, Sequence

import numpy as np

from .treebank import Document, DisagreementReport, check_parallel, diff_annotations

MODES = ("pre-parsed", "from-scratch")
DEFAULT_TASKS = ("no_supp", "rules", "annot", "rul_annot")


# --------------------------------------------------------------------------
# design

@dataclass(frozen=True, order=True)
class Assignment:
    annotator: str
    pair: str
    task: str
    mode: str
    dataset: str


@dataclass(frozen=True)
class DesignTable:
    rows: tuple[Assignment, ...]

    HEADER = ("annotator", "pair", "task", "mode", "dataset")

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def tasks(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(r.task for r in self.rows))

    @property
    def pairs(self) -> dict[str, tuple[str, ...]]:
        members: dict[str, dict[str, None]] = defaultdict(dict)
        for r in self.rows:
            members[r.pair][r.annotator] = None
        return {p: tuple(m) for p, m in members.items()}

    def cell(self, task: str, mode: str, dataset: str) -> tuple[str, ...]:
        return tuple(r.annotator for r in self.rows
                     if (r.task, r.mode, r.dataset) == (task, mode, dataset))

    def to_tsv(self) -> str:
        lines = ["\t".join(self.HEADER)]
        lines += ["\t".join((r.annotator, r.pair, r.task, r.mode, r.dataset)) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "DesignTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or tuple(lines[0].split("\t")) != cls.HEADER:
            raise ValueError(f"design TSV must start with header {'/'.join(cls.HEADER)}")
        rows = []
        for n, line in enumerate(lines[1:], 2):
            cols = line.split("\t")
            if len(cols) != len(cls.HEADER):
                raise ValueError(f"line {n}: expected {len(cls.HEADER)} columns")
            rows.append(Assignment(*cols))
        return cls(tuple(rows))


def generate_design(annotators: Sequence[str], tasks: int | Sequence[str] = 4,
                    n_datasets: int | None = None) -> DesignTable:
    """Assign annotators, in fixed consecutive pairs, to every task in both modes.

    Task ``i`` owns datasets ``D(2i+1)`` and ``D(2i+2)``. Even-numbered pairs
    annotate the first of them pre-parsed and the second from scratch; odd
    pairs the other way round. No annotator sees a dataset twice.
    """
    if isinstance(tasks, int):
        if tasks < 1:
            raise ValueError("need at least one task")
        task_names = DEFAULT_TASKS if tasks == len(DEFAULT_TASKS) else tuple(
            f"task{i + 1}" for i in range(tasks))
    else:
        task_names = tuple(tasks)
        if not task_names or len(set(task_names)) != len(task_names):
            raise ValueError("task names must be non-empty and unique")
    annotators = list(annotators)
    if len(annotators) < 2 or len(annotators) % 2:
        raise ValueError(f"pairing infeasible: {len(annotators)} annotators (need an even number >= 2)")
    if len(set(annotators)) != len(annotators):
        raise ValueError("duplicate annotator names")
    needed = 2 * len(task_names)
    if n_datasets is None:
        n_datasets = needed
    if n_datasets != needed:
        raise ValueError(f"{len(task_names)} tasks need exactly {needed} datasets, got {n_datasets}")

    pairs = [annotators[i:i + 2] for i in range(0, len(annotators), 2)]
    rows = []
    for t, task in enumerate(task_names):
        first, second = f"D{2 * t + 1}", f"D{2 * t + 2}"
        for dataset in (first, second):
            for mode in MODES:
                for p, members in enumerate(pairs):
                    pre_parsed_on = first if p % 2 == 0 else second
                    if (mode == "pre-parsed") == (dataset == pre_parsed_on):
                        rows.extend(Assignment(a, f"p{p + 1}", task, mode, dataset) for a in members)
    return DesignTable(tuple(rows))


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str


def verify_design(d: DesignTable) -> list[Violation]:
    """Check the design constraints; an empty list means the table is sound."""
    out: list[Violation] = []
    rows = d.rows

    seen = Counter((r.annotator, r.dataset) for r in rows)
    for (annotator, dataset), k in sorted(seen.items()):
        if k > 1:
            out.append(Violation("annotator repeats dataset",
                                 f"{annotator} annotates {dataset} {k} times"))

    pair_of: dict[str, set[str]] = defaultdict(set)
    for r in rows:
        pair_of[r.annotator].add(r.pair)
    for annotator, ps in sorted(pair_of.items()):
        if len(ps) > 1:
            out.append(Violation("unstable pair", f"{annotator} appears in pairs {sorted(ps)}"))
    members = {p: set(m) for p, m in d.pairs.items()}
    for p, m in sorted(members.items()):
        if len(m) != 2:
            out.append(Violation("pair size", f"pair {p} has {len(m)} members"))

    task_of: dict[str, set[str]] = defaultdict(set)
    for r in rows:
        task_of[r.dataset].add(r.task)
    for dataset, ts in sorted(task_of.items()):
        if len(ts) > 1:
            out.append(Violation("dataset task", f"{dataset} is used for tasks {sorted(ts)}"))

    covered = defaultdict(set)
    for r in rows:
        covered[(r.pair, r.task, r.mode)].add(r.annotator)
    for p, m in sorted(members.items()):
        for task in d.tasks:
            for mode in MODES:
                got = covered.get((p, task, mode), set())
                if got != m:
                    missing = sorted(m - got) or sorted(m)
                    out.append(Violation("set-up coverage",
                                         f"pair {p} ({','.join(missing)}) lacks {task}/{mode}"))
                    continue
                datasets = {r.dataset for r in rows if (r.pair, r.task, r.mode) == (p, task, mode)}
                if len(datasets) != 1:
                    out.append(Violation("pair split",
                                         f"pair {p} works on {sorted(datasets)} in {task}/{mode}"))

    n_pairs = len(members)
    per_mode = Counter((r.dataset, r.mode) for r in rows)
    for dataset in sorted(task_of):
        pre = per_mode[(dataset, "pre-parsed")]
        scratch = per_mode[(dataset, "from-scratch")]
        if pre + scratch != 2 * n_pairs or abs(pre - scratch) > 2 * (n_pairs % 2):
            out.append(Violation("dataset balance",
                                 f"{dataset} annotated {pre} times pre-parsed and "
                                 f"{scratch} times from scratch"))
    return out


# --------------------------------------------------------------------------
# timing

@dataclass(frozen=True)
class TimingEntry:
    annotator: str
    task: str
    mode: str
    dataset: str
    minutes: float

    def __post_init__(self):
        if not self.minutes > 0:
            raise ValueError(f"minutes must be positive, got {self.minutes} for {self.annotator}")


@dataclass(frozen=True)
class TimingLedger:
    entries: tuple[TimingEntry, ...]

    HEADER = ("annotator", "task", "mode", "dataset", "minutes")

    def to_tsv(self) -> str:
        lines = ["\t".join(self.HEADER)]
        lines += [f"{e.annotator}\t{e.task}\t{e.mode}\t{e.dataset}\t{e.minutes:g}" for e in self.entries]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "TimingLedger":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or tuple(lines[0].split("\t")) != cls.HEADER:
            raise ValueError(f"timing TSV must start with header {'/'.join(cls.HEADER)}")
        entries = []
        for n, line in enumerate(lines[1:], 2):
            cols = line.split("\t")
            if len(cols) != len(cls.HEADER):
                raise ValueError(f"line {n}: expected {len(cls.HEADER)} columns")
            entries.append(TimingEntry(*cols[:4], float(cols[4])))
        return cls(tuple(entries))


@dataclass(frozen=True)
class TimeSummary:
    setup_means: dict[tuple[str, str], float]
    mode_means: dict[str, float]
    ratios: dict[str, float | None]
    overall_ratio: float | None

    def to_dict(self) -> dict:
        return {
            "setup_means": [{"task": t, "mode": m, "mean_minutes": v}
                            for (t, m), v in self.setup_means.items()],
            "mode_means": self.mode_means,
            "ratios": self.ratios,
            "overall_ratio": self.overall_ratio,
        }


def time_summary(ledger: TimingLedger) -> TimeSummary:
    """Mean minutes per (task, mode) and the from-scratch / pre-parsed ratio."""
    if not ledger.entries:
        raise ValueError("empty timing ledger")
    by_setup: dict[tuple[str, str], list[float]] = defaultdict(list)
    by_mode: dict[str, list[float]] = defaultdict(list)
    for e in ledger.entries:
        by_setup[(e.task, e.mode)].append(e.minutes)
        by_mode[e.mode].append(e.minutes)
    tasks = list(dict.fromkeys(e.task for e in ledger.entries))
    order = sorted(by_setup, key=lambda k: (tasks.index(k[0]), MODES.index(k[1]) if k[1] in MODES else 9, k[1]))
    setup_means = {k: fmean(by_setup[k]) for k in order}
    mode_means = {m: fmean(v) for m, v in by_mode.items()}

    def ratio(scratch, pre):
        return None if scratch is None or pre is None else scratch / pre

    ratios = {t: ratio(setup_means.get((t, "from-scratch")), setup_means.get((t, "pre-parsed")))
              for t in tasks}
    overall = ratio(mode_means.get("from-scratch"), mode_means.get("pre-parsed"))
    return TimeSummary(setup_means, mode_means, ratios, overall)


# --------------------------------------------------------------------------
# extrapolation

def extrapolate_hours(mean_minutes_per_dataset: float, tokens_per_dataset: int,
                      target_tokens: int) -> float:
    """Hours to annotate ``target_tokens`` at the measured per-token speed."""
    for name, value in (("mean minutes", mean_minutes_per_dataset),
                        ("tokens per dataset", tokens_per_dataset),
                        ("target tokens", target_tokens)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    return mean_minutes_per_dataset * target_tokens / (tokens_per_dataset * 60)


@dataclass(frozen=True)
class ExtrapolationReport:
    task: str
    mode: str
    mean_minutes: float
    tokens_per_dataset: int
    target_tokens: int
    hours: float

    def cost(self, hourly_rate: float) -> float:
        return self.hours * hourly_rate

    def summary(self) -> str:
        return (f"{self.task}/{self.mode}: {self.mean_minutes:g} min per {self.tokens_per_dataset:,} "
                f"tokens -> {self.hours:,.0f} h for {self.target_tokens:,} tokens")

    def to_dict(self) -> dict:
        return asdict(self)


def extrapolate_setups(summary: TimeSummary, tokens_per_dataset: int,
                       target_tokens: int) -> list[ExtrapolationReport]:
    return [ExtrapolationReport(t, m, mean, tokens_per_dataset, target_tokens,
                                extrapolate_hours(mean, tokens_per_dataset, target_tokens))
            for (t, m), mean in summary.setup_means.items()]


# --------------------------------------------------------------------------
# datasets and adjudication

@dataclass(frozen=True)
class DatasetProfile:
    doc_id: str
    sentences: int
    tokens: int
    mean_sentence_length: float
    mean_tree_depth: float


def dataset_profile(doc: Document) -> DatasetProfile:
    """Size and shape figures used to check that datasets are comparable."""
    if not doc.sentences:
        return DatasetProfile(doc.doc_id, 0, 0, 0.0, 0.0)
    depths = [max(s.depth(t.id) for t in s.tokens) for s in doc.sentences if len(s)]
    return DatasetProfile(doc.doc_id, len(doc.sentences), doc.token_count,
                          doc.token_count / len(doc.sentences), fmean(depths) if depths else 0.0)


@dataclass(frozen=True)
class AdjudicationEntry:
    sent_id: str
    token_id: int
    form: str
    votes: tuple[tuple[str, tuple[str, ...]], ...]  # ("head:label", annotators), largest group first


@dataclass(frozen=True)
class AdjudicationBundle:
    names: tuple[str, ...]
    entries: tuple[AdjudicationEntry, ...]
    matrix: np.ndarray  # tokens with identical head and label, per pair; diagonal = n
    diffs: dict[tuple[str, str], DisagreementReport]

    def __len__(self) -> int:
        return len(self.entries)

    def to_text(self) -> str:
        lines = []
        for e in self.entries:
            split = "  ".join(f"{v} [{','.join(who)}]" for v, who in e.votes)
            lines.append(f"{e.sent_id}\t{e.token_id}\t{e.form}\t{split}")
        width = max((len(n) for n in self.names), default=1)
        lines.append("")
        lines.append(" " * width + "  " + "  ".join(f"{n:>{width}}" for n in self.names))
        for name, row in zip(self.names, self.matrix):
            lines.append(f"{name:>{width}}  " + "  ".join(f"{int(v):>{width}}" for v in row))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "entries": [{"sent_id": e.sent_id, "token_id": e.token_id, "form": e.form,
                         "votes": [{"value": v, "annotators": list(w)} for v, w in e.votes]}
                        for e in self.entries],
            "matrix": self.matrix.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def adjudication_bundle(annotations: Mapping[str, Document] | Sequence[Document]) -> AdjudicationBundle:
    """Merge pairwise diffs of parallel annotations into one list for an adjudicator."""
    if not isinstance(annotations, Mapping):
        annotations = {(d.doc_id or f"ann{i + 1}"): d for i, d in enumerate(annotations)}
    names = tuple(annotations)
    if len(names) < 2:
        raise ValueError("adjudication needs at least two annotations")
    docs = [annotations[n] for n in names]
    for other in docs[1:]:
        check_parallel(docs[0], other)

    k = len(docs)
    matrix = np.zeros((k, k), dtype=np.int64)
    diffs = {}
    flagged: set[tuple[int, int]] = set()
    for i, j in combinations(range(k), 2):
        report = diff_annotations(docs[i], docs[j])
        diffs[(names[i], names[j])] = report
        agree = docs[0].token_count - len(report)
        matrix[i, j] = matrix[j, i] = agree
        positions = {(e.sent_id, e.token_id) for e in report.entries}
        for s_idx, sentence in enumerate(docs[0].sentences):
            for tok in sentence.tokens:
                if (sentence.sent_id, tok.id) in positions:
                    flagged.add((s_idx, tok.id))
    np.fill_diagonal(matrix, docs[0].token_count)

    entries = []
    for s_idx, tok_id in sorted(flagged):
        groups: dict[str, list[str]] = defaultdict(list)
        for name, doc in zip(names, docs):
            tok = doc.sentences[s_idx].tokens[tok_id - 1]
            groups[f"{tok.head}:{tok.label}"].append(name)
        votes = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        sentence = docs[0].sentences[s_idx]
        entries.append(AdjudicationEntry(sentence.sent_id, tok_id, sentence.tokens[tok_id - 1].form,
                                         tuple((v, tuple(w)) for v, w in votes)))
    return AdjudicationBundle(names, tuple(entries), matrix, diffs)
