import json

import numpy as np
import pytest

from phsmc.cli import main
from phsmc.diagnostics import RunReport, read_histogram_csv, read_trace_csv
from phsmc.harness import PRESETS, load_config, validate_config
from phsmc.survival import read_km_table, tree_from_dict, write_survival_csv

from conftest import small_tree_data, write_liver_like_csv


def _cfg(tmp_path, text, name="c.json"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_missing_seed_named(tmp_path):
    issues = validate_config(_cfg(tmp_path, '{"preset": "mixture-phs"}'))
    assert [i.field for i in issues] == ["seed"]


def test_phs_with_two_chains_rejected(tmp_path):
    text = '{\n  "preset": "mixture-phs",\n  "seed": 1,\n  "sampler": {\n    "n_chains": 2\n  }\n}\n'
    issues = validate_config(_cfg(tmp_path, text))
    assert len(issues) == 1
    assert issues[0].field == "sampler.n_chains" and "M >= 3" in issues[0].message and issues[0].line == 5


def test_cart_preset_is_valid(tmp_path):
    cfg = load_config(_cfg(tmp_path, '{"preset": "cart-phs", "seed": 3}'))
    assert cfg.sampler["n_chains"] == 20 and cfg.n_iter == 50_000 and cfg.target["init"] == "root"


def test_every_preset_validates(tmp_path):
    for name in PRESETS:
        assert validate_config(_cfg(tmp_path, json.dumps({"preset": name, "seed": 1}), f"{name}.json")) == []


def test_preset_values():
    assert PRESETS["mixture-phs"]["n_iter"] == 100_000 and PRESETS["mixture-phs"]["sampler"]["n_chains"] == 10
    assert PRESETS["mixture-mh"]["n_iter"] == 1_000_000
    pt = PRESETS["linreg-pt"]
    assert pt["sampler"]["n_chains"] == 9 and pt["sampler"]["ladder"] == {"linear": 5.0} and pt["n_iter"] == 50_000
    assert {PRESETS[k]["sampler"]["swap_rate"] for k in ("linreg-pt", "linreg-pt-s0.5", "linreg-pt-s0.8")} == {0.2, 0.5, 0.8}


@pytest.mark.parametrize(
    "text, field",
    [
        ('{"preset": "nope", "seed": 1}', "preset"),
        ('{"seed": 1, "n_iter": 10, "target": {"kind": "mixture"}, "sampler": {"kind": "gibbs"}}', "sampler.kind"),
        ('{"preset": "linreg-mh", "seed": 1, "target": {"data": "missing.csv"}}', "target.data"),
        ('{"preset": "linreg-pt", "seed": 1, "sampler": {"ladder": [1, 2]}}', "sampler.ladder"),
        ('{"preset": "mixture-mh", "seed": 1, "n_iter": 0}', "n_iter"),
        ('{"preset": "mixture-mh", "seed": 1, "sampler": {"cross_moves": true}}', "sampler.cross_moves"),
        ('{"preset": "mixture-mh", "seed": 1, "colour": 1}', "colour"),
    ],
)
def test_validation_errors(tmp_path, text, field):
    issues = validate_config(_cfg(tmp_path, text))
    assert field in [i.field for i in issues]


def test_json_syntax_error_has_line(tmp_path, capsys):
    p = _cfg(tmp_path, '{\n "seed": 1,\n "preset": \n}')
    assert main(["validate", str(p)]) == 2
    assert "line 4" in capsys.readouterr().err


def _run(tmp_path, text, *extra):
    p = _cfg(tmp_path, text)
    return main(["-q", "run", str(p), *extra])


def test_run_outputs_round_trip_and_reproduce(tmp_path):
    text = '{"preset": "mixture-phs", "seed": 4, "n_iter": 3000}'
    assert _run(tmp_path, text, "--out-dir", str(tmp_path / "a")) == 0
    assert _run(tmp_path, text, "--out-dir", str(tmp_path / "b")) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    for f in ("trace.csv", "histogram.csv", "report.json", "manifest.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    trace = read_trace_csv(a / "trace.csv")
    assert len(trace["x"]) == 3000 and list(trace) == ["iteration", "x", "log_density"]
    report = RunReport.from_json(a / "report.json")
    assert report.histogram.total == 3000
    assert read_histogram_csv(a / "histogram.csv").to_dict() == report.histogram.to_dict()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["seed"] == 4 and len(manifest["config_sha256"]) == 64
    assert manifest["config"]["sampler"]["n_chains"] == 10


def test_overrides_and_env_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PHSMC_OUT_DIR", str(tmp_path / "env"))
    assert _run(tmp_path, '{"preset": "linreg-mh", "seed": 2}', "--iters", "150", "--seed", "9") == 0
    out = tmp_path / "env" / "linreg-mh"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_iter"] == 150 and manifest["seed"] == 9
    trace = read_trace_csv(out / "trace.csv")
    assert len(trace["gamma15"]) == 150
    report = json.loads((out / "report.json").read_text())
    assert len(report["inclusion_probabilities"]) == 15


def test_pt_run(tmp_path):
    text = '{"preset": "linreg-pt", "seed": 2, "target": {"data": {"generate": {"p": 6}}}}'
    assert _run(tmp_path, text, "--iters", "200", "--out-dir", str(tmp_path / "o")) == 0
    report = RunReport.from_json(tmp_path / "o" / "report.json")
    assert len(report.acceptance_rates) == 9 and 0 < report.swap_rate <= 1


def test_invalid_config_exit_code(tmp_path, capsys):
    assert _run(tmp_path, '{"preset": "mixture-phs"}') == 2
    assert "seed" in capsys.readouterr().err


def test_enumerate_linreg(tmp_path):
    p = _cfg(tmp_path, '{"preset": "linreg-mh", "seed": 1, "target": {"data": {"generate": {"p": 6}}}}')
    assert main(["-q", "enumerate", str(p), "--out-dir", str(tmp_path / "e")]) == 0
    exact = json.loads((tmp_path / "e" / "exact.json").read_text())
    assert exact["n_models"] == 64 and len(exact["inclusion_probabilities"]) == 6
    assert sum(m["probability"] for m in exact["top_models"]) <= 1 + 1e-12


def test_enumerate_cart_and_run_on_csv(tmp_path):
    schema = write_survival_csv(tmp_path / "small.csv", small_tree_data())
    (tmp_path / "schema.json").write_text(json.dumps(schema))
    text = json.dumps(
        {"preset": "cart-phs", "seed": 1, "target": {"data": "small.csv", "schema": "schema.json", "b_max": 3}, "sampler": {"n_chains": 4}}
    )
    p = _cfg(tmp_path, text)
    assert main(["-q", "enumerate", str(p), "--out-dir", str(tmp_path / "e")]) == 0
    exact = json.loads((tmp_path / "e" / "exact.json").read_text())
    assert exact["n_trees"] == 79 and exact["n_valid"] == 37
    assert main(["-q", "run", str(p), "--iters", "300", "--out-dir", str(tmp_path / "r")]) == 0
    tree = json.loads((tmp_path / "r" / "modal_tree.json").read_text())
    assert tree_from_dict(tree["tree"]).n_leaves == tree["n_leaves"] <= 3
    rows = read_km_table(tmp_path / "r" / "km_table.csv")
    assert sum(r["size"] for r in rows) == 12


def test_km_verb(tmp_path, capsys):
    (tmp_path / "k.csv").write_text("time,event\n1,1\n2,1\n2,0\n3,1\n4,0\n5,1\n")
    assert main(["km", str(tmp_path / "k.csv"), "--at", "2.5", "--out-dir", str(tmp_path / "o")]) == 0
    assert "S(2.5) = 0.6667" in capsys.readouterr().out
    assert (tmp_path / "o" / "km.csv").read_text().splitlines()[1].startswith("2.5,0.666")
    (tmp_path / "bad.csv").write_text("time,event\n1,1\n-2,1\n")
    assert main(["km", str(tmp_path / "bad.csv")]) == 2
    assert "bad.csv:3" in capsys.readouterr().err


def test_liver_layout_ingests_with_builtin_schema(tmp_path):
    write_liver_like_csv(tmp_path / "liver.csv", n=80)
    p = _cfg(tmp_path, '{"preset": "cart-phs", "seed": 1, "target": {"data": "liver.csv", "schema": "liver"}, "sampler": {"n_chains": 3}}')
    assert main(["-q", "run", str(p), "--iters", "20", "--out-dir", str(tmp_path / "o")]) == 0
    incl = json.loads((tmp_path / "o" / "covariate_inclusion.json").read_text())
    assert list(incl) == ["DLM", "AGE", "TD", "SEX", "LI", "NLM", "LRD", "TNM", "LOC"]
