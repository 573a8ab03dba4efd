"""Attachment scores of an annotation against a gold reference.

UAS counts tokens with the gold head, LAS additionally requires the gold base
afun, FULL the gold label including affixes. Every token is an edge,
punctuation included.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from statistics import fmean
from typing import Sequence

from .treebank import Document, check_parallel

METRICS = ("uas", "las", "full")


@dataclass(frozen=True)
class SentenceScore:
    sent_id: str
    n_tokens: int
    uas_hits: int
    las_hits: int
    full_hits: int

    def hits(self, metric: str) -> int:
        return getattr(self, f"{metric}_hits")


@dataclass(frozen=True)
class ScoreReport:
    sentences: tuple[SentenceScore, ...]

    @property
    def n_tokens(self) -> int:
        return sum(s.n_tokens for s in self.sentences)

    def total_hits(self, metric: str) -> int:
        return sum(s.hits(metric) for s in self.sentences)

    def score(self, metric: str) -> float:
        """Percentage of edges agreeing under ``metric``."""
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        n = self.n_tokens
        return 100.0 * self.total_hits(metric) / n if n else float("nan")

    @property
    def uas(self) -> float:
        return self.score("uas")

    @property
    def las(self) -> float:
        return self.score("las")

    @property
    def full(self) -> float:
        return self.score("full")

    def sentence_stats(self, metric: str, unit: str = "sentence"):
        """Resampling units for :mod:`depqa.stats`."""
        from .stats import SentenceStat

        if unit == "sentence":
            return [SentenceStat(s.sent_id, s.hits(metric), s.n_tokens) for s in self.sentences]
        if unit == "token":
            out = []
            for s in self.sentences:
                hits = s.hits(metric)
                out.extend(SentenceStat(f"{s.sent_id}#{i}", int(i < hits), 1) for i in range(s.n_tokens))
            return out
        raise ValueError(f"unknown resampling unit {unit!r}")

    def to_tsv(self) -> str:
        lines = ["sent_id\tn_tokens\tuas_hits\tlas_hits\tfull_hits"]
        for s in self.sentences:
            lines.append(f"{s.sent_id}\t{s.n_tokens}\t{s.uas_hits}\t{s.las_hits}\t{s.full_hits}")
        lines.append(f"TOTAL\t{self.n_tokens}\t{self.total_hits('uas')}\t"
                     f"{self.total_hits('las')}\t{self.total_hits('full')}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "uas": self.uas, "las": self.las, "full": self.full,
            "n_tokens": self.n_tokens,
            "sentences": [asdict(s) for s in self.sentences],
        }, ensure_ascii=False)

    @classmethod
    def from_tsv(cls, text: str) -> "ScoreReport":
        rows = []
        for line in text.splitlines()[1:]:
            cols = line.split("\t")
            if not line or cols[0] == "TOTAL":
                continue
            rows.append(SentenceScore(cols[0], *map(int, cols[1:])))
        return cls(tuple(rows))


def attachment_scores(ann: Document, gold: Document) -> ScoreReport:
    check_parallel(ann, gold)
    records = []
    for sa, sg in zip(ann.sentences, gold.sentences):
        uas = las = full = 0
        for ta, tg in zip(sa.tokens, sg.tokens):
            if ta.head != tg.head:
                continue
            uas += 1
            if ta.label.afun == tg.label.afun:
                las += 1
                if ta.label == tg.label:
                    full += 1
        records.append(SentenceScore(sa.sent_id, len(sa), uas, las, full))
    return ScoreReport(tuple(records))


def average_scores(reports: Sequence[ScoreReport]) -> tuple[float, float, float]:
    """Unweighted mean of per-report percentages (each annotator counts once)."""
    if not reports:
        raise ValueError("no reports to average")
    return (fmean(r.uas for r in reports),
            fmean(r.las for r in reports),
            fmean(r.full for r in reports))
