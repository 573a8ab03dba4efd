"""
Reading, validating and diffing annotations
===========================================

Annotations are six-column TSV files. Parsing validates every tree and
reports problems with their line numbers.
"""

from pathlib import Path

from depqa import Label, ParseError, diff_annotations, parse_document, read_document, serialize_document

HERE = Path(__file__).parent

doc = read_document(HERE / "data" / "fig1.tsv")
sentence = doc.sentences[0]
print(doc.doc_id, len(doc.sentences), "sentence,", doc.token_count, "tokens")
for tok in sentence:
    print(f"  {tok.id:>2} {tok.form:<10} <- {tok.head}  {tok.label}")

# labels split into the base afun and its affixes
label = Label.parse("Obj_Co_P")
print(label.afun, label.affixes.member, label.affixes.parenthesis, str(label))

# a cycle is rejected, with the offending tokens in the message
broken = "# sent_id = s1\n1\ta\ta\tN\t2\tSb\n2\tb\tb\tV\t1\tPred\n"
try:
    parse_document(broken)
except ParseError as exc:
    print("rejected:", exc)

# correcting token 7 and diffing against the original
fixed = parse_document(serialize_document(doc).replace("AAFS6\t8\tAdv", "AAFS6\t8\tAtr"), doc_id="fixed")
report = diff_annotations(doc, fixed)
print(report.summary)
print(report.to_tsv(), end="")
