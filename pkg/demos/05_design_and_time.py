"""
Experiment design, timing and cost
==================================

Four annotators in two stable pairs cover four tasks in two modes without
seeing any dataset twice. The timing ledger gives mean times, the
from-scratch / pre-parsed ratio and extrapolated hours for a large corpus.
"""

from pathlib import Path

from depqa import TimingLedger, extrapolate_setups, generate_design, time_summary, verify_design

HERE = Path(__file__).parent

design = generate_design(["a1", "a2", "a3", "a4"], tasks=4, n_datasets=8)
print("violations:", verify_design(design))
for task in design.tasks:
    cells = []
    for dataset in sorted({r.dataset for r in design if r.task == task}):
        pre = ",".join(design.cell(task, "pre-parsed", dataset))
        scratch = ",".join(design.cell(task, "from-scratch", dataset))
        cells.append(f"{dataset}: pre {pre} / scratch {scratch}")
    print(f"{task:<10}", " | ".join(cells))

ledger = TimingLedger.from_tsv((HERE / "data" / "time_ledger.tsv").read_text(encoding="utf-8"))
summary = time_summary(ledger)
for task, ratio in summary.ratios.items():
    pre = summary.setup_means[(task, "pre-parsed")]
    scratch = summary.setup_means[(task, "from-scratch")]
    print(f"{task:<10} {pre:7.2f} {scratch:7.2f}  x{ratio:.2f}")
print(f"overall ratio x{summary.overall_ratio:.2f}")

for r in extrapolate_setups(summary, tokens_per_dataset=1250, target_tokens=2_000_000):
    print(" ", r.summary())
