"""Random but well-formed annotations for tests, demos and desk-scale
simulations of an annotation experiment."""

from __future__ import annotations

import numpy as np

from .stats import SentenceStat
from .treebank import (DEFAULT_INVENTORY, MEMBER_FORMS, AffixSet, AfunInventory,
                       AnnotatedSentence, Document, Label, Token)

TAGS = ("N", "V", "A", "R", "D", "J", "Z")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_heads(rng: np.random.Generator, n: int) -> list[int]:
    """Head vector of a uniformly built random tree over tokens 1..n."""
    order = rng.permutation(n) + 1
    heads = [0] * (n + 1)
    for k, node in enumerate(order):
        if k == 0 or rng.random() < 0.1:
            heads[node] = 0
        else:
            heads[node] = int(order[rng.integers(0, k)])
    return heads[1:]


def random_label(rng: np.random.Generator, inventory: AfunInventory = DEFAULT_INVENTORY,
                 affix_rate: float = 0.15) -> Label:
    afun = inventory.labels[rng.integers(0, inventory.size)]
    member = MEMBER_FORMS[rng.integers(0, 2)] if rng.random() < affix_rate else None
    return Label(afun, AffixSet(member, bool(rng.random() < affix_rate / 3),
                                bool(rng.random() < affix_rate / 3)))


def random_sentence(rng, sent_id: str, n_tokens: int,
                    inventory: AfunInventory = DEFAULT_INVENTORY) -> AnnotatedSentence:
    rng = _rng(rng)
    heads = random_heads(rng, n_tokens)
    tokens = []
    for i, head in enumerate(heads, 1):
        tag = TAGS[rng.integers(0, len(TAGS))]
        tokens.append(Token(i, f"w{i}", f"l{i}", tag, head, random_label(rng, inventory)))
    return AnnotatedSentence(sent_id, tuple(tokens))


def random_document(seed=None, n_sentences: int = 10, max_len: int = 15, doc_id: str = "doc",
                    inventory: AfunInventory = DEFAULT_INVENTORY) -> Document:
    rng = _rng(seed)
    sentences = [random_sentence(rng, f"{doc_id}-s{i + 1}", int(rng.integers(1, max_len + 1)), inventory)
                 for i in range(n_sentences)]
    return Document(doc_id, tuple(sentences))


def _descendants(heads: list[int], node: int) -> set[int]:
    out = {node}
    changed = True
    while changed:
        changed = False
        for i, h in enumerate(heads, 1):
            if h in out and i not in out:
                out.add(i)
                changed = True
    return out


def perturb(doc: Document, seed=None, head_rate: float = 0.05, label_rate: float = 0.05,
            affix_rate: float = 0.03, inventory: AfunInventory = DEFAULT_INVENTORY,
            doc_id: str | None = None) -> Document:
    """A parallel copy of ``doc`` with random head, afun and affix changes.

    Head changes keep the tree valid (the new head is never in the token's
    own subtree).
    """
    rng = _rng(seed)
    sentences = []
    for s in doc.sentences:
        heads = list(s.heads)
        labels = [t.label for t in s.tokens]
        n = len(heads)
        for i in range(1, n + 1):
            if n > 1 and rng.random() < head_rate:
                blocked = _descendants(heads, i)
                options = [h for h in range(n + 1) if h not in blocked and h != heads[i - 1]]
                if options:
                    heads[i - 1] = options[rng.integers(0, len(options))]
            if rng.random() < label_rate:
                others = [a for a in inventory.labels if a != labels[i - 1].afun]
                labels[i - 1] = Label(others[rng.integers(0, len(others))], labels[i - 1].affixes)
            if rng.random() < affix_rate:
                aff = labels[i - 1].affixes
                member = {None: "Co", "Co": "Ap", "Ap": None}[aff.member]
                labels[i - 1] = Label(labels[i - 1].afun, AffixSet(member, aff.parenthesis, aff.ellipsis))
        tokens = tuple(Token(t.id, t.form, t.lemma, t.tag, h, lab)
                       for t, h, lab in zip(s.tokens, heads, labels))
        sentences.append(AnnotatedSentence(s.sent_id, tokens))
    return Document(doc.doc_id if doc_id is None else doc_id, tuple(sentences))


def setup_stats(seed=None, n_sentences: int = 240, mean_len: float = 21.0, score: float = 0.965,
                clustering: float = 0.1, prefix: str = "s") -> list[SentenceStat]:
    """Per-sentence (hits, tokens) records whose micro average is ``score``.

    Sentence lengths are Poisson around ``mean_len``; errors are beta-binomial
    with intra-sentence correlation ``clustering`` (hard sentences collect
    several errors), then adjusted one token at a time until the total hit
    count equals ``round(score * tokens)``.
    """
    rng = _rng(seed)
    lengths = np.maximum(2, rng.poisson(mean_len, n_sentences))
    err = 1 - score
    if clustering > 0:
        concentration = 1 / clustering - 1
        p_err = rng.beta(err * concentration, (1 - err) * concentration, n_sentences)
    else:
        p_err = np.full(n_sentences, err)
    errors = rng.binomial(lengths, p_err)
    target_errors = int(round(err * lengths.sum()))
    while errors.sum() != target_errors:
        i = rng.integers(0, n_sentences)
        if errors.sum() < target_errors and errors[i] < lengths[i]:
            errors[i] += 1
        elif errors.sum() > target_errors and errors[i] > 0:
            errors[i] -= 1
    return [SentenceStat(f"{prefix}{i + 1}", int(n - e), int(n)) for i, (n, e) in enumerate(zip(lengths, errors))]


def write_bundle(directory, seed=0, annotators=("a1", "a2", "a3", "a4"), tasks=4,
                 n_sentences: int = 12, max_len: int = 14, minutes=None) -> "Path":
    """Write a complete synthetic experiment bundle and return its manifest path.

    Gold datasets are random trees; each annotation is a perturbed copy, with
    pre-parsed annotations a little closer to gold than from-scratch ones.
    ``minutes`` maps (annotator, task, mode) to time; random when omitted.
    """
    import json
    from pathlib import Path

    from .experiment import TimingEntry, TimingLedger, generate_design
    from .treebank import write_document

    base = Path(directory)
    (base / "gold").mkdir(parents=True, exist_ok=True)
    (base / "ann").mkdir(exist_ok=True)
    rng = _rng(seed)
    design = generate_design(list(annotators), tasks)
    manifest = {"design": "design.tsv", "ledger": "time.tsv", "gold": {}, "annotations": {}}
    golds = {}
    for d in sorted({r.dataset for r in design.rows}, key=lambda s: int(s[1:])):
        golds[d] = random_document(rng, n_sentences, max_len, d)
        write_document(golds[d], base / "gold" / f"{d}.tsv")
        manifest["gold"][d] = f"gold/{d}.tsv"
    entries = []
    for r in design.rows:
        rate = 0.03 if r.mode == "pre-parsed" else 0.06
        doc = perturb(golds[r.dataset], rng, rate, rate, rate / 2, doc_id=r.dataset)
        rel = f"ann/{r.annotator}_{r.dataset}.tsv"
        write_document(doc, base / rel)
        manifest["annotations"].setdefault(r.annotator, {})[r.dataset] = rel
        if minutes is not None:
            m = float(minutes[(r.annotator, r.task, r.mode)])
        else:
            m = float(round(rng.uniform(60, 140) * (1.6 if r.mode == "from-scratch" else 1.0)))
        entries.append(TimingEntry(r.annotator, r.task, r.mode, r.dataset, m))
    (base / "design.tsv").write_text(design.to_tsv(), encoding="utf-8")
    (base / "time.tsv").write_text(TimingLedger(tuple(entries)).to_tsv(), encoding="utf-8")
    path = base / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path
