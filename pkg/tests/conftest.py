import pytest

from depqa.experiment import TimingEntry, TimingLedger
from depqa.treebank import Document, make_sentence

# Published time in minutes per annotator, task and mode.
TABLE4 = {
    "no_supp":   {"pre-parsed": (66, 125, 80, 200), "from-scratch": (150, 231, 140, 280)},
    "rules":     {"pre-parsed": (90, 216, 60, 150), "from-scratch": (156, 252, 150, 180)},
    "annot":     {"pre-parsed": (111, 212, 70, 210), "from-scratch": (130, 205, 180, 230)},
    "rul_annot": {"pre-parsed": (80, 200, 50, 180), "from-scratch": (150, 245, 160, 155)},
}
ANNOTATORS = ("a1", "a2", "a3", "a4")


def table4_ledger() -> TimingLedger:
    entries = []
    for t, (task, modes) in enumerate(TABLE4.items()):
        first, second = f"D{2 * t + 1}", f"D{2 * t + 2}"
        for mode, minutes in modes.items():
            for k, (annotator, m) in enumerate(zip(ANNOTATORS, minutes)):
                pair_one = k < 2
                dataset = first if (mode == "pre-parsed") == pair_one else second
                entries.append(TimingEntry(annotator, task, mode, dataset, float(m)))
    return TimingLedger(tuple(entries))


# 'Dort bude v prosinci vydražen při benefiční akci .' in PDT analytical style
FIG1_ROWS = [
    ("Dort", "NNIS1", 5, "Sb", "dort"),
    ("bude", "VB-S-", 5, "AuxV", "být"),
    ("v", "RR--6", 5, "AuxP", "v"),
    ("prosinci", "NNIS6", 3, "Adv", "prosinec"),
    ("vydražen", "VsYS-", 0, "Pred", "vydražit"),
    ("při", "RR--6", 5, "AuxP", "při"),
    ("benefiční", "AAFS6", 8, "Atr", "benefiční"),
    ("akci", "NNFS6", 6, "Adv", "akce"),
    (".", "Z:---", 0, "AuxK", "."),
]


def fig1_rows(**changes):
    """FIG1_ROWS with {token_index: label} replacements (1-based)."""
    rows = [list(r) for r in FIG1_ROWS]
    for key, label in changes.items():
        rows[int(key.lstrip("t")) - 1][3] = label
    return [tuple(r) for r in rows]


@pytest.fixture
def fig1_doc():
    return Document("fig1", (make_sentence("s1", FIG1_ROWS),))


@pytest.fixture
def ledger():
    return table4_ledger()


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
