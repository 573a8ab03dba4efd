"""Consistency checking rules over annotated trees.

Rules are data. A rule file is line oriented::

    # comment
    group G1: Atr placement
    rule atr-verb-parent
        severity: warning
        description: Atr does not depend on a verb
        expect: {form} depends on verb '{eparent_form}'; Atr is not expected here
        when: afun == "Atr" and eparent.pos == "V"

``group`` opens a rule group; ``rule`` opens a rule in the current group;
indented ``key: value`` lines set its fields. ``when`` is required and is a
condition that holds on *violating* nodes. ``severity`` is ``error`` or
``warning`` (default). ``expect`` is the message template; it may use
``{form}``, ``{afun}``, ``{label}``, ``{id}``, ``{head}`` and the
``parent_``/``eparent_`` variants of form, afun and label.

Conditions use a restricted Python expression syntax evaluated per node:

* node attributes: ``id head form lemma tag pos afun label member is_member
  parenthesis ellipsis has_affix depth n_children is_root``
* node references: ``parent`` and ``eparent`` (effective parent: for
  coordination/apposition members the parent of the Coord/Apos head), which
  can be chained (``parent.parent.afun``). The technical root has
  ``is_root == True`` and empty string attributes.
* ``any_child(cond)`` / ``any_ancestor(cond)`` evaluate ``cond`` on each
  child / proper ancestor (the root included).
* comparisons ``== != < <= > >= in not in``, ``and or not``, string methods
  ``startswith`` and ``endswith``, string/number/bool literals and
  ``{...}`` sets of literals.

String literals compared with ``afun`` must be names from the afun inventory
and literals compared with ``label`` must be valid labels.
"""

from __future__ import annotations

import ast
import json
import operator
from dataclasses import asdict, dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from .treebank import (DEFAULT_INVENTORY, AfunInventory, AnnotatedSentence, Document,
                       LabelError, Label)

SEVERITIES = ("error", "warning")
RULE_FIELDS = ("severity", "description", "expect", "when")
NODE_ATTRS = ("id", "head", "form", "lemma", "tag", "pos", "afun", "label", "member", "is_member",
              "parenthesis", "ellipsis", "has_affix", "depth", "n_children", "is_root")
NODE_REFS = ("parent", "eparent")
QUANTIFIERS = ("any_child", "any_ancestor")
STRING_METHODS = ("startswith", "endswith")
COORD_HEADS = ("Coord", "Apos")


class RuleLoadError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


# --------------------------------------------------------------------------
# node views

class _Tree:
    """Per-sentence lookup tables shared by all node views."""

    def __init__(self, sentence: AnnotatedSentence):
        self.sentence = sentence
        self.children = sentence.children()
        self.depths = [0] + [sentence.depth(t.id) for t in sentence.tokens]


class NodeView:
    __slots__ = ("tree", "id")

    def __init__(self, tree: _Tree, node_id: int):
        self.tree = tree
        self.id = node_id

    @property
    def token(self):
        return self.tree.sentence.tokens[self.id - 1] if self.id else None

    @property
    def is_root(self) -> bool:
        return self.id == 0

    def _tok(self, name, default=""):
        tok = self.token
        return default if tok is None else getattr(tok, name)

    @property
    def form(self):
        return self._tok("form")

    @property
    def lemma(self):
        return self._tok("lemma")

    @property
    def tag(self):
        return self._tok("tag")

    @property
    def pos(self):
        return self._tok("pos")

    @property
    def afun(self):
        return self._tok("afun")

    @property
    def label(self):
        tok = self.token
        return "" if tok is None else str(tok.label)

    @property
    def head(self) -> int:
        return self._tok("head", 0)

    @property
    def member(self) -> str:
        tok = self.token
        return (tok.label.affixes.member or "") if tok else ""

    @property
    def is_member(self) -> bool:
        return bool(self.member)

    @property
    def parenthesis(self) -> bool:
        tok = self.token
        return bool(tok and tok.label.affixes.parenthesis)

    @property
    def ellipsis(self) -> bool:
        tok = self.token
        return bool(tok and tok.label.affixes.ellipsis)

    @property
    def has_affix(self) -> bool:
        tok = self.token
        return bool(tok and not tok.label.affixes.empty)

    @property
    def depth(self) -> int:
        return self.tree.depths[self.id]

    @property
    def n_children(self) -> int:
        return len(self.tree.children[self.id])

    @property
    def parent(self) -> "NodeView":
        return NodeView(self.tree, self.head)

    @property
    def eparent(self) -> "NodeView":
        node = self
        while node.is_member and node.parent.afun in COORD_HEADS:
            node = node.parent
        return node.parent

    def child_views(self) -> list["NodeView"]:
        return [NodeView(self.tree, c) for c in self.tree.children[self.id]]

    def ancestor_views(self) -> list["NodeView"]:
        out = []
        node = self
        while not node.is_root:
            node = node.parent
            out.append(node)
        return out

    def template_fields(self) -> dict[str, Any]:
        fields = {"form": self.form, "afun": self.afun, "label": self.label,
                  "id": self.id, "head": self.head}
        for prefix, ref in (("parent", self.parent), ("eparent", self.eparent)):
            fields[f"{prefix}_form"] = ref.form if not ref.is_root else "<root>"
            fields[f"{prefix}_afun"] = ref.afun
            fields[f"{prefix}_label"] = ref.label
        return fields


# --------------------------------------------------------------------------
# condition compiler

_CMP = {
    ast.Eq: operator.eq, ast.NotEq: operator.ne,
    ast.Lt: operator.lt, ast.LtE: operator.le, ast.Gt: operator.gt, ast.GtE: operator.ge,
    ast.In: lambda a, b: a in b, ast.NotIn: lambda a, b: a not in b,
}

Compiled = Callable[[NodeView], Any]


class _Compiler:
    def __init__(self, inventory: AfunInventory, line: int):
        self.inventory = inventory
        self.line = line

    def fail(self, message: str):
        raise RuleLoadError(self.line, message)

    def compile(self, source: str) -> Compiled:
        try:
            tree = ast.parse(source.strip(), mode="eval")
        except SyntaxError as exc:
            self.fail(f"syntax error in condition: {exc.msg}")
        return self.expr(tree.body)

    def expr(self, node: ast.AST) -> Compiled:
        if isinstance(node, ast.BoolOp):
            parts = [self.expr(v) for v in node.values]
            if isinstance(node.op, ast.And):
                return lambda n: all(p(n) for p in parts)
            return lambda n: any(p(n) for p in parts)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            inner = self.expr(node.operand)
            return lambda n: not inner(n)
        if isinstance(node, ast.Compare):
            return self.compare(node)
        if isinstance(node, ast.Call):
            return self.call(node)
        if isinstance(node, (ast.Name, ast.Attribute)):
            return self.attribute(node)
        if isinstance(node, ast.Constant) and isinstance(node.value, (str, int, bool)):
            value = node.value
            return lambda n: value
        if isinstance(node, (ast.Set, ast.Tuple, ast.List)):
            values = frozenset(self.literal(e) for e in node.elts)
            return lambda n: values
        self.fail(f"unsupported expression {ast.unparse(node)!r}")

    def literal(self, node: ast.AST):
        if isinstance(node, ast.Constant) and isinstance(node.value, (str, int, bool)):
            return node.value
        self.fail(f"set members must be literals, got {ast.unparse(node)!r}")

    def attribute_path(self, node: ast.AST) -> list[str]:
        if isinstance(node, ast.Name):
            return [node.id]
        if isinstance(node, ast.Attribute):
            return self.attribute_path(node.value) + [node.attr]
        self.fail(f"expected a node attribute, got {ast.unparse(node)!r}")

    def attribute(self, node: ast.AST) -> Compiled:
        path = self.attribute_path(node)
        *refs, last = path
        for ref in refs:
            if ref not in NODE_REFS:
                self.fail(f"unknown node reference {ref!r}")
        if last not in NODE_ATTRS:
            self.fail(f"unknown node attribute {last!r}")

        def get(n: NodeView):
            for ref in refs:
                n = getattr(n, ref)
            return getattr(n, last)
        return get

    def check_label_literals(self, left: ast.AST, right: ast.AST):
        try:
            attr = self.attribute_path(left)[-1] if isinstance(left, (ast.Name, ast.Attribute)) else None
        except RuleLoadError:
            return
        if attr not in ("afun", "label"):
            return
        if isinstance(right, ast.Constant):
            values = [right.value]
        elif isinstance(right, (ast.Set, ast.Tuple, ast.List)):
            values = [self.literal(e) for e in right.elts]
        else:
            return
        for value in values:
            if not isinstance(value, str):
                self.fail(f"{attr} compared with non-string {value!r}")
            if value == "":
                continue
            if attr == "afun" and value not in self.inventory:
                self.fail(f"afun {value!r} is not in the inventory")
            if attr == "label":
                try:
                    Label.parse(value, self.inventory)
                except LabelError as exc:
                    self.fail(str(exc))

    def compare(self, node: ast.Compare) -> Compiled:
        left = node.left
        steps = []
        for op, right in zip(node.ops, node.comparators):
            if type(op) not in _CMP:
                self.fail(f"unsupported comparison {type(op).__name__}")
            self.check_label_literals(left, right)
            self.check_label_literals(right, left)
            steps.append((_CMP[type(op)], self.expr(left), self.expr(right)))
            left = right

        def cmp(n):
            return all(fn(a(n), b(n)) for fn, a, b in steps)
        return cmp

    def call(self, node: ast.Call) -> Compiled:
        if node.keywords:
            self.fail("keyword arguments are not supported")
        func = node.func
        if isinstance(func, ast.Name) and func.id in QUANTIFIERS:
            if len(node.args) != 1:
                self.fail(f"{func.id} takes one condition")
            cond = self.expr(node.args[0])
            if func.id == "any_child":
                return lambda n: any(cond(c) for c in n.child_views())
            return lambda n: any(cond(a) for a in n.ancestor_views())
        if isinstance(func, ast.Attribute) and func.attr in STRING_METHODS:
            target = self.attribute(func.value)
            if len(node.args) != 1 or not isinstance(node.args[0], ast.Constant) \
                    or not isinstance(node.args[0].value, str):
                self.fail(f"{func.attr} takes one string literal")
            arg, method = node.args[0].value, func.attr
            return lambda n: getattr(str(target(n)), method)(arg)
        self.fail(f"unsupported call {ast.unparse(func)!r}")


# --------------------------------------------------------------------------
# rule sets

@dataclass(frozen=True)
class Rule:
    id: str
    group: str
    severity: str
    description: str
    expect: str
    when: str
    predicate: Compiled

    def matches(self, node: NodeView) -> bool:
        return bool(self.predicate(node))

    def message(self, node: NodeView) -> str:
        try:
            return self.expect.format_map(node.template_fields())
        except (KeyError, IndexError, ValueError):
            return self.expect


@dataclass(frozen=True)
class RuleGroup:
    id: str
    title: str
    rules: tuple[Rule, ...]


@dataclass(frozen=True)
class RuleSet:
    name: str
    groups: tuple[RuleGroup, ...] = ()

    @cached_property
    def rules(self) -> tuple[Rule, ...]:
        return tuple(r for g in self.groups for r in g.rules)

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(f"unknown rule id {rule_id!r}")

    def without(self, *group_ids: str) -> "RuleSet":
        unknown = set(group_ids) - {g.id for g in self.groups}
        if unknown:
            raise KeyError(f"unknown rule group(s): {', '.join(sorted(unknown))}")
        return RuleSet(self.name, tuple(g for g in self.groups if g.id not in group_ids))

    def only(self, *group_ids: str) -> "RuleSet":
        return self.without(*(g.id for g in self.groups if g.id not in group_ids))


def load_ruleset(config_text: str, inventory: AfunInventory = DEFAULT_INVENTORY,
                 name: str = "rules") -> RuleSet:
    groups: list[tuple[str, str, list[Rule]]] = []
    seen: set[str] = set()
    current: dict[str, Any] | None = None

    def finish():
        nonlocal current
        if current is None:
            return
        fields = current["fields"]
        line = current["line"]
        if "when" not in fields:
            raise RuleLoadError(line, f"rule {current['id']!r} has no 'when' condition")
        severity = fields.get("severity", ("warning", line))
        if severity[0] not in SEVERITIES:
            raise RuleLoadError(severity[1], f"severity must be one of {SEVERITIES}")
        when, when_line = fields["when"]
        predicate = _Compiler(inventory, when_line).compile(when)
        description = fields.get("description", (current["id"], line))[0]
        expect = fields.get("expect", (description, line))[0]
        groups[-1][2].append(Rule(current["id"], groups[-1][0], severity[0], description,
                                  expect, when, predicate))
        current = None

    for lineno, raw in enumerate(config_text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indented = raw[:1].isspace()
        if not indented:
            keyword, _, rest = stripped.partition(" ")
            if keyword == "group":
                finish()
                gid, sep, title = rest.partition(":")
                gid = gid.strip()
                if not sep or not gid:
                    raise RuleLoadError(lineno, "expected 'group ID: title'")
                if any(g[0] == gid for g in groups):
                    raise RuleLoadError(lineno, f"duplicate group {gid!r}")
                groups.append((gid, title.strip(), []))
            elif keyword == "rule":
                finish()
                rid = rest.strip()
                if not rid or any(c.isspace() for c in rid):
                    raise RuleLoadError(lineno, "expected 'rule ID'")
                if not groups:
                    raise RuleLoadError(lineno, "rule outside of a group")
                if rid in seen:
                    raise RuleLoadError(lineno, f"duplicate rule id {rid!r}")
                seen.add(rid)
                current = {"id": rid, "line": lineno, "fields": {}}
            else:
                raise RuleLoadError(lineno, f"expected 'group' or 'rule', got {keyword!r}")
            continue
        if current is None:
            raise RuleLoadError(lineno, "field outside of a rule")
        key, sep, value = stripped.partition(":")
        key = key.strip()
        if not sep or key not in RULE_FIELDS:
            raise RuleLoadError(lineno, f"expected one of {', '.join(RULE_FIELDS)} followed by ':'")
        if key in current["fields"]:
            raise RuleLoadError(lineno, f"field {key!r} given twice")
        current["fields"][key] = (value.strip(), lineno)
    finish()
    return RuleSet(name, tuple(RuleGroup(g, t, tuple(rs)) for g, t, rs in groups))


def default_rules_text() -> str:
    return resources.files("depqa").joinpath("data/rules.conf").read_text(encoding="utf-8")


def default_ruleset(inventory: AfunInventory = DEFAULT_INVENTORY) -> RuleSet:
    return load_ruleset(default_rules_text(), inventory, name="default")


def load_ruleset_file(path: str | Path, inventory: AfunInventory = DEFAULT_INVENTORY) -> RuleSet:
    path = Path(path)
    return load_ruleset(path.read_text(encoding="utf-8"), inventory, name=path.stem)


# --------------------------------------------------------------------------
# checking

@dataclass(frozen=True)
class Finding:
    rule_id: str
    group: str
    severity: str
    sent_id: str
    token_id: int
    form: str
    label: str
    head: int
    message: str

    def to_dict(self) -> dict:
        return asdict(self)


FINDING_FIELDS = tuple(Finding.__dataclass_fields__)


def check_sentence(sentence: AnnotatedSentence, rules: RuleSet) -> list[Finding]:
    tree = _Tree(sentence)
    found = []
    for tok in sentence.tokens:
        node = NodeView(tree, tok.id)
        for rule in sorted(rules.rules, key=lambda r: r.id):
            if rule.matches(node):
                found.append(Finding(rule.id, rule.group, rule.severity, sentence.sent_id, tok.id,
                                     tok.form, str(tok.label), tok.head, rule.message(node)))
    return found


def run_checks(doc: Document, rules: RuleSet) -> list[Finding]:
    """All findings, ordered by sentence, token and rule id."""
    findings = []
    for sentence in doc.sentences:
        findings.extend(check_sentence(sentence, rules))
    return findings


def explain_finding(f: Finding, rules: RuleSet) -> str:
    rule = rules.rule(f.rule_id)
    return (f"[{f.severity}] {rule.group}/{rule.id}: {rule.description}\n"
            f"  sentence {f.sent_id}, token {f.token_id} '{f.form}' ({f.label}, head {f.head})\n"
            f"  expected: {f.message}")


def findings_to_tsv(findings: Iterable[Finding]) -> str:
    lines = ["\t".join(FINDING_FIELDS)]
    for f in findings:
        lines.append("\t".join(str(getattr(f, k)) for k in FINDING_FIELDS))
    return "\n".join(lines) + "\n"


def findings_to_jsonl(findings: Iterable[Finding]) -> str:
    return "".join(json.dumps(f.to_dict(), ensure_ascii=False) + "\n" for f in findings)


def findings_from_tsv(text: str) -> list[Finding]:
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != FINDING_FIELDS:
        raise ValueError("not a findings TSV")
    out = []
    for line in lines[1:]:
        if not line:
            continue
        values = dict(zip(FINDING_FIELDS, line.split("\t")))
        values["token_id"] = int(values["token_id"])
        values["head"] = int(values["head"])
        out.append(Finding(**values))
    return out


def findings_from_jsonl(text: str) -> list[Finding]:
    return [Finding(**json.loads(line)) for line in text.splitlines() if line.strip()]


def has_errors(findings: Sequence[Finding]) -> bool:
    return any(f.severity == "error" for f in findings)
