"""
A full experiment report
========================

A synthetic bundle (design, gold, one annotation per assignment, timing
ledger) goes through the same report the command line produces with
``depqa report manifest.json``.
"""

import tempfile

from depqa.report import build_report, load_bundle, plot_series, render
from depqa.synthetic import write_bundle

with tempfile.TemporaryDirectory() as tmp:
    manifest = write_bundle(tmp, seed=4, n_sentences=20)
    report = build_report(load_bundle(manifest), samples=5_000, seed=1, workers=4)

print(render(report))
series = plot_series(report)
print({name: len(s) for name, s in series.items()}, "plot series")
