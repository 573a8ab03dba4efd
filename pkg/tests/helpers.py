"""Brute-force oracles and hand-built fixtures shared by several test modules."""

from depqa.treebank import Document, make_sentence


def brute_force_counts(ann: Document, gold: Document):
    """Count (head), (head, afun) and (head, full label) tuple matches token by token."""
    n = uas = las = full = 0
    for sa, sg in zip(ann.sentences, gold.sentences):
        for ta, tg in zip(sa.tokens, sg.tokens):
            n += 1
            label_a, label_g = str(ta.label), str(tg.label)
            uas += (ta.head,) == (tg.head,)
            las += (ta.head, label_a.split("_")[0]) == (tg.head, label_g.split("_")[0])
            full += (ta.head, label_a) == (tg.head, label_g)
    return n, uas, las, full


def kappa_fixture():
    """Two annotations of sentences with 4 and 6 tokens.

    Heads differ on one token per sentence (aP = 8 of n = 10). Among the
    eight shared edges two base afuns differ and one more label differs only
    in its member affix (aL = 6, aF = 5).
    """
    a = Document("a", (
        make_sentence("s1", [("w1", "V", 0, "Pred"), ("w2", "N", 1, "Atr"),
                             ("w3", "N", 2, "Obj"), ("w4", "N", 3, "Atr")]),
        make_sentence("s2", [("w1", "V", 0, "Pred"), ("w2", "N", 1, "Sb"), ("w3", "N", 2, "Obj_Co"),
                             ("w4", "N", 3, "Atr"), ("w5", "N", 4, "Atr"), ("w6", "N", 5, "Atr")]),
    ))
    b = Document("b", (
        make_sentence("s1", [("w1", "V", 0, "Pred"), ("w2", "N", 1, "Adv"),
                             ("w3", "N", 1, "Obj"), ("w4", "N", 3, "Atr")]),
        make_sentence("s2", [("w1", "V", 0, "Pred"), ("w2", "N", 1, "Obj"), ("w3", "N", 2, "Obj_Ap"),
                             ("w4", "N", 3, "Atr"), ("w5", "N", 3, "Atr"), ("w6", "N", 5, "Atr")]),
    ))
    return a, b
