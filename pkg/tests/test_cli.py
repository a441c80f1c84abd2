import csv
import json

import pytest

from weakharnack.cli import (ConfigError, DEFAULTS, build, dumps, main, make_config,
                             run_conditions, run_harnack, run_report)

SMALL_HARNACK = {"samples": 6, "variant_trials": 100,
                 "lg": {"trials": 100}, "lg0": {"trials": 100},
                 "crossover": {"samples": 5}, "holder": {"samples": 5}}


def _torus(n=16, **over):
    cfg = {"space": {"generator": {"kind": "torus", "n": n}}, "harnack": SMALL_HARNACK}
    cfg.update(over)
    return make_config(cfg)


def test_config_rejects_unknown_keys_and_values():
    with pytest.raises(ConfigError):
        make_config({"bogus": 1})
    with pytest.raises(ConfigError):
        make_config({"harnack": {"lg": {"bogus": 1}}})
    with pytest.raises(ConfigError):
        make_config({"conditions": ["XYZ"]})
    with pytest.raises(ConfigError):
        make_config({"conditions": ["Nash"]})
    with pytest.raises(ConfigError):
        make_config({"seed": -1})
    with pytest.raises(ConfigError):
        make_config({"schema_version": 99})
    with pytest.raises(ConfigError):
        make_config({"space": {}})
    with pytest.raises(ConfigError):
        build(make_config({"space": {"generator": {"kind": "torus", "size": 3}}}))


def test_defaults_are_not_mutated():
    before = json.dumps(DEFAULTS, sort_keys=True)
    cfg = make_config({"harnack": {"lg": {"trials": 5}}})
    cfg["harnack"]["lg"]["trials"] = 7
    assert json.dumps(DEFAULTS, sort_keys=True) == before


def test_empty_toggle_set():
    rep = run_conditions(_torus(conditions=[]))
    assert rep["checks"] == {} and rep["ok"]


def test_torus_conditions_pass():
    rep = run_conditions(_torus(32))
    assert rep["ok"], {k: v["verdict"] for k, v in rep["checks"].items()}
    assert set(rep["checks"]) == {"VD", "RVD", "PI", "FK", "TJ", "Cap", "Gcap", "Nash"}


def test_expect_fail_statuses():
    cfg = _torus(conditions=["VD"], thresholds={"VD": 1.5})
    rep = run_conditions(cfg)
    assert rep["checks"]["VD"]["verdict"] == "fail" and not rep["ok"]
    cfg["expect_fail"] = ["VD"]
    rep = run_conditions(cfg)
    assert rep["checks"]["VD"]["verdict"] == "expected-fail" and rep["ok"]
    cfg["thresholds"]["VD"] = 64.0
    rep = run_conditions(cfg)
    assert rep["checks"]["VD"]["verdict"] == "unexpected-pass" and not rep["ok"]


def test_harnack_report_is_deterministic_across_workers():
    a = run_harnack(_torus(32, workers=1))
    b = run_harnack(_torus(32, workers=8))
    assert dumps(a) == dumps(b)
    assert a["ok"], {k: v["verdict"] for k, v in a["checks"].items()}


def test_doubling_samples_does_not_lower_worst_ratio():
    cfg = _torus(conditions=[])
    cfg["harnack"].update(variants=[], suites=[], delta=0.5)
    a = run_harnack(cfg)["checks"]["wEH"]["certificate"]["worst_ratio"]
    cfg["harnack"]["samples"] *= 2
    b = run_harnack(cfg)["checks"]["wEH"]["certificate"]["worst_ratio"]
    assert b >= a


def test_report_merge_and_mismatch():
    cfg = _torus(conditions=["VD", "PI"])
    rep = json.loads(dumps(run_conditions(cfg)))
    merged, tables = run_report([rep])
    assert merged["reports"] == [rep]
    assert {r["check"] for r in tables["constants"]} == {"VD", "PI"}
    other = json.loads(dumps(rep))
    other["config"]["sigma"] = 0.25
    with pytest.raises(ConfigError):
        run_report([rep, other])
    bad = dict(rep, schema_version=0)
    with pytest.raises(ConfigError):
        run_report([bad])


def test_report_size_sweep_is_sorted_by_n():
    reps = []
    for n in (48, 16, 32):
        cfg = _torus(n)
        cfg["harnack"].update(variants=[], suites=[])
        reps.append(json.loads(dumps(run_harnack(cfg))))
    _, tables = run_report(reps)
    ns = [row["n"] for row in tables["worst_ratio"]]
    assert ns == sorted(ns) == [16, 32, 48]


def test_main_end_to_end(tmp_path, capsys):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"space": {"generator": {"kind": "path", "n": 12}},
                                   "conditions": ["VD", "PI"],
                                   "harnack": SMALL_HARNACK}))
    out = tmp_path / "out"
    assert main(["generate", "--config", str(cfgfile), "--out", str(out)]) == 0
    gen = json.loads((out / "path12.json").read_text())
    filecfg = tmp_path / "file.json"
    filecfg.write_text(json.dumps({"space": {"file": str(out / "path12.json")},
                                   "conditions": ["VD", "PI"]}))
    assert main(["inspect", "--config", str(filecfg)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["n"] == 12 and info["local_edges"] == 11 and gen["form"]["jump"] == []
    assert main(["conditions", "--config", str(filecfg), "--out", str(out)]) == 0
    assert main(["holder", "--config", str(cfgfile), "--out", str(out)]) == 0
    with open(out / "oscillation.csv") as fh:
        assert next(csv.reader(fh)) == ["osc", "rho", "sample", "scale"]
    assert main(["exit-time", "--config", str(cfgfile), "--out", str(out)]) == 0
    rep = out / "conditions_report.json"
    assert main(["report", str(rep), str(out / "holder_report.json"),
                 "--out", str(out / "merged")]) == 0
    assert (out / "merged" / "constants.csv").exists()


def test_main_exit_codes(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"space": {"generator": {"kind": "torus", "n": 16}},
                                   "conditions": ["VD"], "thresholds": {"VD": 1.5}}))
    out = tmp_path / "o"
    assert main(["conditions", "--config", str(cfgfile), "--out", str(out),
                 "--witness-dump"]) == 1
    bundle = json.loads((out / "witnesses" / "VD.json").read_text())
    assert bundle["witness"]["center"] >= 0 and "space" in bundle
    assert main(["conditions", "--config", str(cfgfile), "--out", str(out),
                 "--expect-fail", "VD"]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nope": 1}))
    assert main(["conditions", "--config", str(bad)]) == 2
    assert main(["conditions", "--config", str(tmp_path / "missing.json")]) == 2
    bad.write_text(json.dumps({"space": {"generator": {"kind": "klein_bottle"}}}))
    assert main(["inspect", "--config", str(bad)]) == 2


def test_seed_override_changes_samples(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"space": {"generator": {"kind": "torus", "n": 16}},
                                   "harnack": dict(SMALL_HARNACK, variants=[], suites=[],
                                                   delta=0.5)}))
    for s in (1, 2):
        assert main(["harnack", "--config", str(cfgfile), "--seed", str(s),
                     "--out", str(tmp_path / str(s))]) == 0
    a = json.loads((tmp_path / "1" / "harnack_report.json").read_text())
    b = json.loads((tmp_path / "2" / "harnack_report.json").read_text())
    assert a["config"]["seed"] == 1 and b["config"]["seed"] == 2
