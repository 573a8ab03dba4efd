import io
import json

import pytest

from depqa.cli import main
from depqa.report import BundleError, build_report, load_bundle, plot_series, render
from depqa.synthetic import write_bundle

from conftest import TABLE4


def table4_minutes():
    return {(a, task, mode): m for task, modes in TABLE4.items() for mode, ms in modes.items()
            for a, m in zip(("a1", "a2", "a3", "a4"), ms)}


@pytest.fixture(scope="module")
def bundle_path(tmp_path_factory):
    return write_bundle(tmp_path_factory.mktemp("bundle"), seed=3, n_sentences=8, minutes=table4_minutes())


@pytest.fixture(scope="module")
def report(bundle_path):
    return build_report(load_bundle(bundle_path), samples=300, seed=1)


def test_sections_present(report):
    text = render(report)
    for section in ("Accuracy", "Agreement (kappa)", "Time (mean minutes)", "Extrapolation"):
        assert section in text
    assert len(report.accuracy) == 4 * 2 * 3
    baseline = [r for r in report.accuracy if r["task"] == "no_supp"]
    assert all(r["p_value"] is None for r in baseline)
    assert all(0 < r["p_value"] <= 1 for r in report.accuracy if r["task"] != "no_supp")
    assert {r["kind"] for r in report.agreement} == {"unlabeled", "labeled", "full"}


def test_time_from_table4(report):
    assert report.time.ratios["no_supp"] == pytest.approx(200.25 / 117.75)
    hours = {(r.task, r.mode): r.hours for r in report.extrapolation}
    tokens = report.extrapolation[0].tokens_per_dataset
    assert hours[("rul_annot", "pre-parsed")] == pytest.approx(127.5 * 2_000_000 / (tokens * 60))


def test_plotdata_time_shape(report):
    series = plot_series(report)
    assert len(series["time"]) == 8
    assert all(len(s["x"]) == len(s["y"]) == 4 for s in series["time"])
    assert set(series) == {"accuracy", "agreement", "time", "extrapolation"}


def test_machine_readable_outputs(report):
    assert json.loads(render(report, "json"))["time"]["overall_ratio"] > 1
    assert json.loads(render(report, "plotdata"))["time"][0]["name"] == "no_supp/pre-parsed"
    tsv = render(report, "tsv")
    rows = [ln.split("\t") for ln in tsv.splitlines() if ln and not ln.startswith("#")]
    assert ["task", "mode", "metric", "mean", "stddev", "p_value"] in rows


def test_missing_ledger(bundle_path, tmp_path):
    manifest = json.loads(bundle_path.read_text())
    del manifest["ledger"]
    broken = bundle_path.parent / "broken.json"
    broken.write_text(json.dumps(manifest))
    with pytest.raises(BundleError, match="timing ledger"):
        load_bundle(broken)
    err = io.StringIO()
    assert main(["report", str(broken), "--seed", "1"], io.StringIO(), err) == 2
    assert "timing ledger" in err.getvalue()


def test_missing_annotation(bundle_path):
    manifest = json.loads(bundle_path.read_text())
    del manifest["annotations"]["a3"]["D5"]
    broken = bundle_path.parent / "broken2.json"
    broken.write_text(json.dumps(manifest))
    with pytest.raises(BundleError, match="a3 on D5"):
        load_bundle(broken)


def test_cli_report_deterministic(bundle_path):
    argv = ["report", str(bundle_path), "--samples", "200", "--seed", "5", "--format", "plotdata"]
    outs = []
    for workers in ("1", "3"):
        out = io.StringIO()
        assert main(argv + ["--workers", workers], out, io.StringIO()) == 0
        outs.append(out.getvalue())
    assert outs[0] == outs[1]


def test_chart(report, tmp_path):
    pytest.importorskip("matplotlib")
    from depqa.report import save_chart
    save_chart(report, tmp_path / "c.png")
    assert (tmp_path / "c.png").stat().st_size > 1000
