import io
import json

import pytest

from depqa.cli import main
from depqa.experiment import DesignTable, TimingLedger, generate_design
from depqa.lint import findings_from_jsonl, findings_from_tsv
from depqa.metrics import ScoreReport
from depqa.synthetic import perturb, random_document
from depqa.treebank import Document, make_sentence, write_document

from conftest import FIG1_ROWS, fig1_rows
from test_metrics import ten_token_pair


def run(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    paths = {}
    ann, gold = ten_token_pair()
    for name, doc in {"ann": ann, "gold": gold,
                      "fig1": Document("fig1", (make_sentence("s1", FIG1_ROWS),)),
                      "fig1_adv": Document("fig1", (make_sentence("s1", fig1_rows(t7="Adv")),))}.items():
        paths[name] = tmp_path / f"{name}.tsv"
        write_document(doc, paths[name])
    g = random_document(4, 20, 15, "D1")
    paths["g"] = tmp_path / "D1.tsv"
    write_document(g, paths["g"])
    for k, seed in (("x", 1), ("y", 2)):
        paths[k] = tmp_path / f"{k}.tsv"
        write_document(perturb(g, seed, 0.1, 0.1, 0.05, doc_id="D1"), paths[k])
    paths["ledger"] = tmp_path / "time.tsv"
    from conftest import table4_ledger
    paths["ledger"].write_text(table4_ledger().to_tsv())
    return paths


def test_usage_errors(files, tmp_path):
    assert run()[0] == 2
    assert run("nonsense")[0] == 2
    code, _, err = run("check", tmp_path / "missing.tsv")
    assert code == 2 and "missing.tsv" in err
    assert run("stats", "--gold", files["g"], "--a", files["x"], "--samples", "0")[0] == 2
    bad = tmp_path / "bad.tsv"
    bad.write_text("# sent_id = s\n1\tw\tw\tN\t5\tAtr\n")
    code, _, err = run("score", bad, files["gold"])
    assert code == 2 and "bad.tsv" in err and "line 2" in err


def test_check(files):
    code, out, _ = run("check", files["fig1"])
    assert (code, out) == (0, "")
    code, out, _ = run("check", files["fig1_adv"])
    lines = out.splitlines()
    assert code == 0 and len(lines) == 1          # warning severity
    assert "s1:7" in lines[0] and "expected Atr" in lines[0]
    code, out, _ = run("check", files["fig1_adv"], "--format", "json")
    assert findings_from_jsonl(out)[0].rule_id == "noun-dependent-atr"
    code, out, _ = run("check", files["fig1_adv"], "--format", "tsv")
    assert findings_from_tsv(out)[0].token_id == 7
    assert run("check", files["fig1_adv"], "--disable", "G2")[1] == ""
    assert run("check", files["fig1_adv"], "--disable", "G99")[0] == 2
    assert "Atr" in run("check", files["fig1_adv"], "--explain")[1]


def test_check_error_exit(tmp_path):
    doc = Document("d", (make_sentence("s1", [("a", "V", 0, "Pred"), ("b", "Z", 1, "AuxX_Co")]),))
    write_document(doc, tmp_path / "d.tsv")
    assert run("check", tmp_path / "d.tsv")[0] == 1


def test_custom_config_dir(files, tmp_path, monkeypatch):
    conf = tmp_path / "conf"
    conf.mkdir()
    (conf / "rules.conf").write_text(
        "group X1: local\nrule no-adv\n  severity: error\n  description: no Adv at all\n  when: afun == \"Adv\"\n")
    monkeypatch.setenv("DEPQA_CONFIG_DIR", str(conf))
    code, out, _ = run("check", files["fig1"])
    assert code == 1 and out.count("no-adv") == 2


def test_score(files):
    code, out, _ = run("score", files["gold"], files["gold"])
    assert code == 0 and "100.0  100.0  100.0" in out
    code, out, _ = run("score", files["ann"], files["gold"])
    assert "90.0  80.0  70.0" in out
    _, out, _ = run("score", files["ann"], files["gold"], "--format", "tsv")
    assert ScoreReport.from_tsv(out).las == pytest.approx(80.0)
    _, out, _ = run("score", files["ann"], files["gold"], files["gold"], "--format", "json")
    assert [r["uas"] for r in json.loads(out)] == pytest.approx([90.0, 100.0])
    _, out, _ = run("score", files["ann"], files["gold"], files["gold"])
    assert "mean" in out and "95.0" in out


def test_kappa(files):
    code, out, _ = run("kappa", files["x"], files["y"], "--format", "json")
    rows = json.loads(out)
    assert code == 0 and [r["kind"] for r in rows] == ["unlabeled", "labeled", "full"]
    code, out, _ = run("kappa", files["x"], files["x"])
    assert [ln.split()[1] for ln in out.splitlines()[1:]] == ["1.00"] * 3
    assert run("kappa", files["x"], files["fig1"])[0] == 2


def test_stats_determinism(files, monkeypatch):
    argv = ["stats", "--gold", files["g"], "--a", files["x"], "--b", files["y"],
            "--samples", "1000", "--seed", "7"]
    first = run(*argv)
    assert first[0] == 0 and "p (A>B)" in first[1]
    assert run(*argv) == first
    assert run(*argv, "--workers", "4") == first
    for fmt in ("json", "tsv"):
        assert run(*argv, "--format", fmt) == run(*argv, "--format", fmt, "--workers", "3")
    payload = json.loads(run(*argv, "--format", "json")[1])
    assert payload["seed"] == 7 and len(payload["results"]) == 3
    assert 0 < payload["results"][0]["test"]["p_value"] <= 1
    monkeypatch.setenv("CI", "1")
    code, _, err = run("stats", "--gold", files["g"], "--a", files["x"], "--samples", "10")
    assert code == 2 and "--seed" in err


def test_design_roundtrip(tmp_path):
    code, out, _ = run("design", "--annotators", "a1,a2,a3,a4", "--tasks", "4", "--datasets", "8")
    assert code == 0 and DesignTable.from_tsv(out) == generate_design(["a1", "a2", "a3", "a4"])
    (tmp_path / "d.tsv").write_text(out)
    assert run("verify-design", tmp_path / "d.tsv") == (0, "", "")
    broken = out.replace("a1\tp1\tno_supp\tfrom-scratch\tD2", "a1\tp1\tno_supp\tfrom-scratch\tD1")
    (tmp_path / "b.tsv").write_text(broken)
    code, out, _ = run("verify-design", tmp_path / "b.tsv")
    assert code == 1 and "annotator repeats dataset" in out
    assert run("design", "--annotators", "a,b,c")[0] == 2


def test_time_and_extrapolate(files):
    code, out, _ = run("time", files["ledger"])
    row = next(ln for ln in out.splitlines() if ln.startswith("no_supp"))
    assert code == 0 and row.split()[1:] == ["117.75", "200.25", "1.70"]
    _, out, _ = run("time", files["ledger"], "--format", "json")
    assert json.loads(out)["ratios"]["no_supp"] == pytest.approx(200.25 / 117.75)
    _, out, _ = run("extrapolate", files["ledger"])
    assert any("no_supp/from-scratch" in ln and "5,340 h" in ln for ln in out.splitlines())
    assert any("rul_annot/pre-parsed" in ln and "3,400 h" in ln for ln in out.splitlines())
    _, out, _ = run("extrapolate", "--minutes", "60", "--tokens-per-dataset", "1000",
                    "--target-tokens", "1000", "--format", "json")
    assert json.loads(out)[0]["hours"] == pytest.approx(1.0)
    assert run("extrapolate", "--minutes", "-1")[0] == 2
    assert run("extrapolate")[0] == 2


def test_diff(files, tmp_path):
    code, out, _ = run("diff", files["fig1"], files["fig1_adv"])
    assert code == 1 and "benefiční" in out
    same = tmp_path / "same.tsv"
    same.write_text(files["fig1"].read_text())
    assert run("diff", files["fig1"], same)[0] == 0
    assert run("diff", files["fig1"], files["fig1"])[0] == 2     # stems must differ
    for k in ("p", "q"):
        write_document(Document("fig1", (make_sentence("s1", FIG1_ROWS),)), tmp_path / f"{k}.tsv")
    code, out, _ = run("diff", files["fig1"], tmp_path / "p.tsv", tmp_path / "q.tsv", files["fig1_adv"],
                       "--format", "json")
    bundle = json.loads(out)
    assert code == 1 and len(bundle["entries"]) == 1
    assert [v["annotators"] for v in bundle["entries"][0]["votes"]] == [["fig1", "p", "q"], ["fig1_adv"]]
    assert run("diff", files["fig1"])[0] == 2


def test_ledger_tsv_roundtrip(files):
    assert TimingLedger.from_tsv(files["ledger"].read_text()).entries[0].minutes == 66.0
