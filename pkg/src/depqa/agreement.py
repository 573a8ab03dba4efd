"""Cohen's kappa for dependency annotation, in three flavours.

All three use ``kappa = 1 - (1 - p0) / (1 - pe)`` with a chance term fixed by
the size of the decision space rather than estimated from label marginals:

* unlabeled: ``p0 = aP / n``, ``pe = 1 / s_bar`` (s_bar = mean sentence length)
* labeled:   ``p0 = aL / aP``, ``pe = 1 / |inventory|``
* full:      ``p0 = aF / aP``, ``pe = 1 / (8 * |inventory|)``

where aP counts tokens with the same head in both annotations, aL those that
also share the base afun and aF those with the identical full label.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from statistics import fmean
from typing import Mapping, Sequence

from .treebank import DEFAULT_INVENTORY, AfunInventory, Document, check_parallel

KINDS = ("unlabeled", "labeled", "full")


class UndefinedKappa(ValueError):
    """Kappa cannot be computed (no common edges, or chance agreement of 1)."""


@dataclass(frozen=True)
class AgreementCounts:
    aP: int
    aL: int
    aF: int
    n: int
    sentences: int


@dataclass(frozen=True)
class AgreementResult:
    kind: str
    kappa: float
    p0: float
    pe: float
    aP: int
    aL: int
    aF: int
    n: int
    s_bar: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def kappa(p0: float, pe: float) -> float:
    if pe >= 1:
        raise UndefinedKappa(f"chance agreement pe={pe} leaves kappa undefined")
    return 1 - (1 - p0) / (1 - pe)


def agreement_counts(a: Document, b: Document) -> AgreementCounts:
    check_parallel(a, b)
    aP = aL = aF = 0
    for sa, sb in zip(a.sentences, b.sentences):
        for ta, tb in zip(sa.tokens, sb.tokens):
            if ta.head != tb.head:
                continue
            aP += 1
            if ta.label.afun == tb.label.afun:
                aL += 1
            if ta.label == tb.label:
                aF += 1
    return AgreementCounts(aP, aL, aF, a.token_count, len(a.sentences))


def unlabeled_kappa(a: Document, b: Document, include_root: bool = False) -> AgreementResult:
    """Unlabeled kappa with corpus-level counts.

    ``include_root`` adds the technical root to every sentence when computing
    the mean sentence size; by default only tokens are counted.
    """
    c = agreement_counts(a, b)
    if c.n == 0:
        raise UndefinedKappa("no tokens")
    s_bar = c.n / c.sentences + (1 if include_root else 0)
    p0 = c.aP / c.n
    pe = 1 / s_bar
    return AgreementResult("unlabeled", kappa(p0, pe), p0, pe, c.aP, c.aL, c.aF, c.n, s_bar)


def _labeled(a, b, inventory, kind):
    c = agreement_counts(a, b)
    if c.aP == 0:
        raise UndefinedKappa("no common edges; labeled agreement undefined")
    if kind == "labeled":
        p0 = c.aL / c.aP
        pe = 1 / inventory.size
    else:
        p0 = c.aF / c.aP
        pe = 1 / inventory.full_label_space
    return AgreementResult(kind, kappa(p0, pe), p0, pe, c.aP, c.aL, c.aF, c.n)


def labeled_kappa(a: Document, b: Document,
                  inventory: AfunInventory = DEFAULT_INVENTORY) -> AgreementResult:
    return _labeled(a, b, inventory, "labeled")


def full_kappa(a: Document, b: Document,
               inventory: AfunInventory = DEFAULT_INVENTORY) -> AgreementResult:
    return _labeled(a, b, inventory, "full")


def compute_kappa(a: Document, b: Document, kind: str,
                  inventory: AfunInventory = DEFAULT_INVENTORY,
                  include_root: bool = False) -> AgreementResult:
    if kind == "unlabeled":
        return unlabeled_kappa(a, b, include_root=include_root)
    if kind == "labeled":
        return labeled_kappa(a, b, inventory)
    if kind == "full":
        return full_kappa(a, b, inventory)
    raise ValueError(f"unknown kappa kind {kind!r}; expected one of {KINDS}")


@dataclass(frozen=True)
class PairwiseAgreement:
    kind: str
    pairs: tuple[tuple[str, str], ...]
    results: tuple[AgreementResult, ...]

    @property
    def kappa(self) -> float:
        return fmean(r.kappa for r in self.results)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "kappa": self.kappa,
            "pairs": [{"a": p[0], "b": p[1], **r.to_dict()} for p, r in zip(self.pairs, self.results)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def pairwise_agreement(annotations: Mapping[str, Document], pairs: Sequence[tuple[str, str]],
                       kind: str, inventory: AfunInventory = DEFAULT_INVENTORY,
                       include_root: bool = False) -> PairwiseAgreement:
    """Kappa for each explicitly listed pair plus their unweighted mean."""
    if not pairs:
        raise ValueError("no annotator pairs given")
    results = []
    for x, y in pairs:
        for name in (x, y):
            if name not in annotations:
                raise KeyError(f"pair ({x}, {y}) references missing annotation {name!r}")
        results.append(compute_kappa(annotations[x], annotations[y], kind, inventory, include_root))
    return PairwiseAgreement(kind, tuple(tuple(p) for p in pairs), tuple(results))
