"""Data model, TSV reader/writer, structural validation and diffing for
PDT-style dependency annotation.

A file holds one document. Sentences are blocks of token lines separated by
blank lines; each token line has six TAB-separated columns::

    ID  FORM  LEMMA  TAG  HEAD  AFUN

``# doc_id = ...`` (before the first sentence) and ``# sent_id = ...``
comment lines carry identifiers; other comment lines are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

COLUMNS = ("ID", "FORM", "LEMMA", "TAG", "HEAD", "AFUN")

DEFAULT_AFUNS = (
    "Pred", "Sb", "Obj", "Adv", "Atr", "Pnom",
    "AuxV", "AuxP", "AuxC", "Coord", "Apos", "AuxZ",
    "AuxG", "AuxX", "AuxK", "Denom", "Partl",
    "ExD", "Atv", "AtvV", "AuxT", "AuxR", "AuxO", "AuxY", "AuxS",
)

MEMBER_FORMS = ("Co", "Ap")
# three independent affix slots: member (Co|Ap), parenthesis, ellipsis
AFFIX_COMBINATIONS = 2 ** 3


class ParseError(ValueError):
    """Raised by :func:`parse_document`; ``issues`` lists (line, category, message)."""

    def __init__(self, issues: Sequence[tuple[int, str, str]]):
        self.issues = list(issues)
        text = "; ".join(f"line {ln}: [{cat}] {msg}" for ln, cat, msg in self.issues)
        super().__init__(text)

    @property
    def line(self) -> int:
        return self.issues[0][0]

    @property
    def category(self) -> str:
        return self.issues[0][1]


class ParallelismError(ValueError):
    """Two documents do not cover the same sentences and tokens."""


class LabelError(ValueError):
    pass


@dataclass(frozen=True)
class AfunInventory:
    labels: tuple[str, ...] = DEFAULT_AFUNS

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate afun in inventory")
        for label in labels:
            if not label or "_" in label or any(c.isspace() for c in label):
                raise ValueError(f"invalid afun name {label!r}")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full_label_space(self) -> int:
        return AFFIX_COMBINATIONS * self.size

    def __contains__(self, afun: object) -> bool:
        return afun in self.labels

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def from_text(cls, text: str) -> "AfunInventory":
        """One afun per line; ``#`` starts a comment; blank lines are skipped."""
        labels = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                labels.append(line)
        return cls(tuple(labels))

    @classmethod
    def from_file(cls, path: str | Path) -> "AfunInventory":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


DEFAULT_INVENTORY = AfunInventory()


@dataclass(frozen=True)
class AffixSet:
    member: str | None = None  # "Co", "Ap" or None
    parenthesis: bool = False
    ellipsis: bool = False

    def __post_init__(self):
        if self.member is not None and self.member not in MEMBER_FORMS:
            raise LabelError(f"member affix must be Co or Ap, got {self.member!r}")

    @property
    def empty(self) -> bool:
        return self.member is None and not self.parenthesis and not self.ellipsis

    def suffix(self) -> str:
        parts = []
        if self.member:
            parts.append("_" + self.member)
        if self.parenthesis:
            parts.append("_P")
        if self.ellipsis:
            parts.append("_E")
        return "".join(parts)


@dataclass(frozen=True)
class Label:
    afun: str
    affixes: AffixSet = field(default_factory=AffixSet)

    def __str__(self) -> str:
        return self.afun + self.affixes.suffix()

    @classmethod
    def parse(cls, text: str, inventory: AfunInventory | None = None) -> "Label":
        afun, *suffixes = text.split("_")
        if inventory is not None and afun not in inventory:
            raise LabelError(f"unknown afun {afun!r}")
        if not afun:
            raise LabelError(f"empty afun in label {text!r}")
        member = None
        parenthesis = ellipsis = False
        for suffix in suffixes:
            if suffix in MEMBER_FORMS:
                if member is not None:
                    raise LabelError(f"more than one member affix in {text!r}")
                member = suffix
            elif suffix == "P" and not parenthesis:
                parenthesis = True
            elif suffix == "E" and not ellipsis:
                ellipsis = True
            else:
                raise LabelError(f"bad affix _{suffix} in {text!r}")
        return cls(afun, AffixSet(member, parenthesis, ellipsis))


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str
    tag: str
    head: int
    label: Label

    @property
    def afun(self) -> str:
        return self.label.afun

    @property
    def pos(self) -> str:
        """Coarse part of speech: first character of the tag."""
        return self.tag[:1]


@dataclass(frozen=True)
class AnnotatedSentence:
    sent_id: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    @property
    def heads(self) -> tuple[int, ...]:
        return tuple(t.head for t in self.tokens)

    @property
    def forms(self) -> tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {i: [] for i in range(len(self.tokens) + 1)}
        for t in self.tokens:
            if 0 <= t.head <= len(self.tokens):
                kids[t.head].append(t.id)
        return kids

    def depth(self, token_id: int) -> int:
        """Distance from the technical root (a root child has depth 1).

        Only meaningful on a valid tree.
        """
        d = 0
        node = token_id
        while node != 0:
            node = self.tokens[node - 1].head
            d += 1
            if d > len(self.tokens):
                raise ValueError("head structure is not a tree")
        return d


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[AnnotatedSentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[AnnotatedSentence]:
        return iter(self.sentences)


@dataclass(frozen=True)
class StructuralError:
    kind: str  # "id", "head-range", "self-loop", "cycle", "unreachable"
    tokens: tuple[int, ...]
    message: str


def validate_tree(sentence: AnnotatedSentence) -> list[StructuralError]:
    """Return every violation of the single-rooted-tree property (empty if valid)."""
    errors = []
    n = len(sentence.tokens)
    for pos, tok in enumerate(sentence.tokens, 1):
        if tok.id != pos:
            errors.append(StructuralError("id", (tok.id,), f"token id {tok.id} at position {pos}"))
    if errors:
        return errors

    heads = [None] + [t.head for t in sentence.tokens]
    broken = set()
    for i in range(1, n + 1):
        h = heads[i]
        if h < 0 or h > n:
            broken.add(i)
            errors.append(StructuralError("head-range", (i,), f"head {h} out of range at token {i}"))

    # 1 = reaches root, 2 = does not; 3 = on the current walk
    state = [0] * (n + 1)
    state[0] = 1
    in_cycle = set()
    for start in range(1, n + 1):
        path = []
        node = start
        while True:
            if node in broken:
                outcome = 2
                state[node] = 2
                break
            if state[node] in (1, 2):
                outcome = state[node]
                break
            if state[node] == 3:
                cycle = path[path.index(node):]
                in_cycle.update(cycle)
                if len(cycle) == 1:
                    errors.append(StructuralError("self-loop", (node,), f"self-loop at token {node}"))
                else:
                    members = tuple(sorted(cycle))
                    errors.append(StructuralError(
                        "cycle", members, "cycle through tokens " + ",".join(map(str, members))))
                outcome = 2
                break
            state[node] = 3
            path.append(node)
            node = heads[node]
        for p in path:
            state[p] = outcome

    for i in range(1, n + 1):
        if state[i] == 2 and i not in broken and i not in in_cycle:
            errors.append(StructuralError("unreachable", (i,), f"token {i} is not reachable from the root"))
    return errors


def _parse_token(cols: list[str], inventory: AfunInventory) -> Token:
    tid, form, lemma, tag, head, afun = cols
    return Token(int(tid), form, lemma, tag, int(head), Label.parse(afun, inventory))


def parse_document(text: str, inventory: AfunInventory = DEFAULT_INVENTORY,
                   doc_id: str = "") -> Document:
    """Parse TSV text into a validated :class:`Document`.

    Raises :class:`ParseError` listing every problem found, each with its line
    number and a category (columns, id, head, afun, affix, head-range,
    self-loop, cycle, unreachable, duplicate-sent-id).
    """
    issues: list[tuple[int, str, str]] = []
    sentences: list[AnnotatedSentence] = []
    seen_ids: dict[str, int] = {}

    sent_id: str | None = None
    tokens: list[Token] = []
    token_lines: list[int] = []
    start_line = 0

    def flush():
        nonlocal sent_id, tokens, token_lines
        if not tokens:
            sent_id = None
            return
        sid = sent_id if sent_id is not None else str(len(sentences) + 1)
        if sid in seen_ids:
            issues.append((start_line, "duplicate-sent-id",
                           f"sent_id {sid!r} already used at line {seen_ids[sid]}"))
        else:
            seen_ids[sid] = start_line
        sentence = AnnotatedSentence(sid, tuple(tokens))
        for err in validate_tree(sentence):
            where = token_lines[err.tokens[0] - 1] if 0 < err.tokens[0] <= len(token_lines) else start_line
            issues.append((where, err.kind, err.message))
        sentences.append(sentence)
        sent_id, tokens, token_lines = None, [], []

    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            key = key.strip()
            if sep and key == "sent_id":
                if tokens:
                    flush()
                sent_id = value.strip()
                start_line = lineno
            elif sep and key == "doc_id" and not sentences and not tokens:
                doc_id = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != len(COLUMNS):
            issues.append((lineno, "columns", f"expected {len(COLUMNS)} columns, got {len(cols)}"))
            continue
        if not tokens and sent_id is None:
            start_line = lineno
        try:
            tok = _parse_token(cols, inventory)
        except LabelError as exc:
            category = "afun" if "unknown afun" in str(exc) else "affix"
            issues.append((lineno, category, str(exc)))
            continue
        except ValueError:
            issues.append((lineno, "id", f"ID and HEAD must be integers: {cols[0]!r}, {cols[4]!r}"))
            continue
        if tok.id != len(tokens) + 1:
            issues.append((lineno, "id", f"expected token id {len(tokens) + 1}, got {tok.id}"))
            continue
        tokens.append(tok)
        token_lines.append(lineno)
    flush()

    if issues:
        raise ParseError(issues)
    return Document(doc_id, tuple(sentences))


def serialize_document(doc: Document) -> str:
    """Inverse of :func:`parse_document`. Each sentence ends with a blank line."""
    out = []
    if doc.doc_id:
        out.append(f"# doc_id = {doc.doc_id}\n")
    for sentence in doc.sentences:
        out.append(f"# sent_id = {sentence.sent_id}\n")
        for t in sentence.tokens:
            out.append(f"{t.id}\t{t.form}\t{t.lemma}\t{t.tag}\t{t.head}\t{t.label}\n")
        out.append("\n")
    return "".join(out)


def read_document(path: str | Path, inventory: AfunInventory = DEFAULT_INVENTORY) -> Document:
    path = Path(path)
    return parse_document(path.read_text(encoding="utf-8"), inventory, doc_id=path.stem)


def write_document(doc: Document, path: str | Path) -> None:
    Path(path).write_text(serialize_document(doc), encoding="utf-8", newline="\n")


def check_parallel(a: Document, b: Document) -> None:
    """Raise :class:`ParallelismError` unless a and b have the same sentences and forms."""
    if len(a.sentences) != len(b.sentences):
        raise ParallelismError(f"{len(a.sentences)} vs {len(b.sentences)} sentences")
    for sa, sb in zip(a.sentences, b.sentences):
        if sa.sent_id != sb.sent_id:
            raise ParallelismError(f"sentence {sa.sent_id!r} vs {sb.sent_id!r}")
        if sa.forms != sb.forms:
            raise ParallelismError(f"tokenization differs in sentence {sa.sent_id!r}")


@dataclass(frozen=True)
class DiffEntry:
    sent_id: str
    token_id: int
    form: str
    kind: str  # "head", "label" or "both"
    a: tuple[int, str]  # (head, label)
    b: tuple[int, str]


@dataclass(frozen=True)
class DisagreementReport:
    entries: tuple[DiffEntry, ...]

    @property
    def summary(self) -> dict[str, int]:
        counts = {"head": 0, "label": 0, "both": 0}
        for e in self.entries:
            counts[e.kind] += 1
        return counts

    def __len__(self) -> int:
        return len(self.entries)

    def to_tsv(self) -> str:
        lines = ["sent_id\ttoken\tform\tkind\thead_a\tlabel_a\thead_b\tlabel_b"]
        for e in self.entries:
            lines.append(f"{e.sent_id}\t{e.token_id}\t{e.form}\t{e.kind}\t"
                         f"{e.a[0]}\t{e.a[1]}\t{e.b[0]}\t{e.b[1]}")
        return "\n".join(lines) + "\n"


def diff_annotations(a: Document, b: Document) -> DisagreementReport:
    check_parallel(a, b)
    entries = []
    for sa, sb in zip(a.sentences, b.sentences):
        for ta, tb in zip(sa.tokens, sb.tokens):
            head_differs = ta.head != tb.head
            label_differs = str(ta.label) != str(tb.label)
            if not (head_differs or label_differs):
                continue
            kind = "both" if head_differs and label_differs else ("head" if head_differs else "label")
            entries.append(DiffEntry(sa.sent_id, ta.id, ta.form, kind,
                                     (ta.head, str(ta.label)), (tb.head, str(tb.label))))
    return DisagreementReport(tuple(entries))


def make_sentence(sent_id: str, rows: Iterable[tuple], inventory: AfunInventory | None = None
                  ) -> AnnotatedSentence:
    """Build a sentence from ``(form, tag, head, label[, lemma])`` rows; ids are assigned 1..n."""
    tokens = []
    for i, row in enumerate(rows, 1):
        form, tag, head, label, *rest = row
        lemma = rest[0] if rest else form.lower()
        tokens.append(Token(i, form, lemma, tag, head, Label.parse(label, inventory)))
    return AnnotatedSentence(sent_id, tuple(tokens))
