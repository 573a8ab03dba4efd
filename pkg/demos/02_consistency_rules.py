"""
Consistency rules
=================

The default rule set flags the attribute labeled as an adverbial in the
example sentence. Rules are plain text, so a project can add its own.
"""

from pathlib import Path

from depqa import default_ruleset, explain_finding, load_ruleset, read_document, run_checks

HERE = Path(__file__).parent
doc = read_document(HERE / "data" / "fig1.tsv")

rules = default_ruleset()
print(f"{len(rules.groups)} groups, {len(rules.rules)} rules")
for group in rules.groups:
    print(f"  {group.id}: {group.title}")

findings = run_checks(doc, rules)
for f in findings:
    print(explain_finding(f, rules))

# a project-specific rule: list prepositional phrases hanging on the predicate
custom = load_ruleset("""
group L1: local
rule pp-on-predicate
    severity: warning
    description: a prepositional phrase depends on the predicate
    expect: '{form}' attaches to '{parent_form}'; check the attachment
    when: afun == "AuxP" and parent.afun == "Pred"
""", name="local")
print(len(run_checks(doc, custom)), "findings from the local rule")

# switching a group off
print(len(run_checks(doc, rules.without("G2"))), "findings with G2 disabled")
