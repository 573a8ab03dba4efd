"""
Accuracy and agreement
======================

Attachment scores compare an annotation with a gold standard; kappa
compares two annotators, correcting for chance agreement.
"""

from depqa import attachment_scores, full_kappa, labeled_kappa, pairwise_agreement, perturb, random_document, unlabeled_kappa

gold = random_document(seed=1, n_sentences=60, max_len=25, doc_id="D1")
a1 = perturb(gold, seed=2, head_rate=0.03, label_rate=0.03, affix_rate=0.01)
a2 = perturb(gold, seed=3, head_rate=0.05, label_rate=0.04, affix_rate=0.02)

for name, ann in (("a1", a1), ("a2", a2)):
    r = attachment_scores(ann, gold)
    print(f"{name}: UAS {r.uas:.1f}  LAS {r.las:.1f}  FULL {r.full:.1f}")

for fn in (unlabeled_kappa, labeled_kappa, full_kappa):
    r = fn(a1, a2)
    print(f"{r.kind:<10} kappa={r.kappa:.3f}  p0={r.p0:.3f}  pe={r.pe:.4f}")

pw = pairwise_agreement({"a1": a1, "a2": a2, "a3": gold, "a4": a2}, [("a1", "a2"), ("a3", "a4")], "labeled")
print("mean labeled kappa over pairs:", round(pw.kappa, 3))
