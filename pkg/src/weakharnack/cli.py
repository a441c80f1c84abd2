"""Command line driver: generate spaces, measure conditions, certify the weak
Harnack inequality and merge reports.

Every run is driven by a JSON config (defaults in :data:`DEFAULTS`) and a
seed; reports are JSON with sorted keys and no timestamps, so identical
inputs give byte-identical files whatever the worker count.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .dirichlet import (cap_le_constant, form_from_dict, form_to_dict, gcap_sweep,
                        tj_constant)
from .harnack import (LGParams, certify_weh, check_weh_variant, constants_translate,
                      crossover_check, crossover_radii, draw_harmonic_samples,
                      draw_samples, holder_decay_check, john_nirenberg_check,
                      bmo_norm, lemma_of_growth_check, lg0_check, default_delta)
from .mmspace import (Ball, DegenerateGridError, ball_mask, rvd_constants,
                      scaling_envelope, space_from_dict, space_to_dict,
                      sweep_radii, vd_constant)
from .solvers import exit_time_sweep
from .spaces import GeneratorSpec, generate
from .spectra import fk_constants, nash_check, poincare_sweep

SCHEMA_VERSION = 1

CONDITIONS = ("VD", "RVD", "PI", "FK", "TJ", "Cap", "Gcap", "Nash")
SUITES = ("LG", "LG0", "crossover", "JN", "holder", "exit_time")

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "space": {"generator": {"kind": "torus", "n": 64}},
    "seed": 0,
    "sigma": 1 / 3,
    "horizon": None,
    "kappa": 1.0,
    "max_centers": 64,
    "workers": 1,
    "conditions": list(CONDITIONS),
    "thresholds": {"VD": 64.0, "PI": 10.0, "TJ": 64.0, "Cap": 64.0,
                   "Gcap": 64.0, "Nash": 64.0},
    "function_samples": 6,
    "expect_fail": [],
    "harnack": {
        "p": 0.5,
        "delta": None,
        "samples": 20,
        "variant_delta": 0.5,
        "variants": ["wEH1", "wEH2", "wEH3", "wEH4"],
        "variant_trials": 1000,
        "suites": list(SUITES),
        "lg": {"epsilon0": 0.25, "eps": 0.5, "delta": 0.5, "trials": 1000,
               "C0": 0.0},
        "lg0": {"eps0": 0.2, "trials": 500},
        "crossover": {"samples": 50, "C": None},
        "holder": {"samples": 50, "C": 4.0, "min_beta": 0.05},
        "exit_time": {"delta": 0.5, "lower_min": 1 / 16, "upper_max": 16.0},
    },
}


class ConfigError(ValueError):
    """Raised for malformed configs and mismatched report inputs."""


# ---------------------------------------------------------------- config

def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict) and isinstance(v, dict) and k != "space":
            out[k] = _merge(base[k], v, path + k + ".")
        else:
            out[k] = copy.deepcopy(v)
    return out


def make_config(over: Optional[dict] = None) -> dict:
    """Defaults overlaid with ``over``; validates names and dependencies."""
    cfg = _merge(DEFAULTS, over or {})
    if cfg["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"schema version {cfg['schema_version']} is not {SCHEMA_VERSION}")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    bad = [c for c in cfg["conditions"] if c not in CONDITIONS]
    if bad:
        raise ConfigError(f"unknown conditions {bad}")
    bad = [s for s in cfg["harnack"]["suites"] if s not in SUITES]
    if bad:
        raise ConfigError(f"unknown suites {bad}")
    if "Nash" in cfg["conditions"] and "FK" not in cfg["conditions"]:
        raise ConfigError("Nash needs FK (its exponent comes from the FK fit)")
    src = cfg["space"]
    if not isinstance(src, dict) or not ({"generator", "file"} & set(src)):
        raise ConfigError("space must give 'generator' or 'file'")
    return cfg


def load_config(path) -> dict:
    with open(path) as fh:
        return make_config(json.load(fh))


def build(cfg: dict):
    """``(space, form)`` from the config's space source."""
    src = cfg["space"]
    if "generator" in src:
        g = dict(src["generator"])
        try:
            return generate(GeneratorSpec(**g))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad generator spec: {exc}") from exc
    with open(src["file"]) as fh:
        obj = json.load(fh)
    space = space_from_dict(obj["space"])
    return space, form_from_dict(space, obj["form"])


# ---------------------------------------------------------------- helpers

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _echo(cfg: dict) -> dict:
    """Config as echoed in reports; the worker count is left out since it
    cannot change any result."""
    return {k: v for k, v in cfg.items() if k != "workers"}


def _environment() -> dict:
    return {"weakharnack": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "python": platform.python_version()}


def _centers(space, k):
    if k is None or k >= space.n:
        return list(range(space.n))
    return sorted(set(np.linspace(0, space.n - 1, int(k)).round().astype(int).tolist()))


def _horizon(cfg, space):
    return space.diam if cfg["horizon"] is None else float(cfg["horizon"])


def _positive_samples(space, count, seed):
    rng = np.random.default_rng([seed, 7])
    return [rng.uniform(0.1, 1.0, space.n) for _ in range(count)]


def _grid_balls(space, centers, top):
    radii = sweep_radii(space, top)
    return [Ball(x, R) for x in centers for R in radii]


def _status(name, ok, expect_fail):
    if name in expect_fail:
        return "expected-fail" if not ok else "unexpected-pass"
    return "pass" if ok else "fail"


def _ok(status):
    return status in ("pass", "expected-fail")


# ---------------------------------------------------------------- conditions

def _check_condition(name, space, form, cfg, fk_nu=None):
    hz = _horizon(cfg, space)
    sig = cfg["sigma"]
    th = cfg["thresholds"]
    centers = _centers(space, cfg["max_centers"])
    seed = cfg["seed"]
    if name == "VD":
        r = vd_constant(space)
        return {"constant": r["C_mu"], "d2": r["d2"], "witness": r["witness"],
                "ok": r["C_mu"] <= th["VD"]}
    if name == "RVD":
        try:
            r = rvd_constants(space, hz)
        except DegenerateGridError as exc:
            return {"constant": None, "ok": False, "notes": [str(exc)]}
        return {"constant": r["C_d"], "d1": r["d1"], "witness": r["witness"],
                "ok": bool(r["pass"] and r["d1"] > 0)}
    if name == "PI":
        r = poincare_sweep(form, cfg["kappa"], sig * hz, centers)
        return {"constant": r["C"], "kappa": r["kappa"], "witness": r["witness"],
                "ok": bool(np.isfinite(r["C"]) and r["C"] <= th["PI"])}
    if name == "FK":
        rng = np.random.default_rng([seed, 3])
        pairs = []
        for B in _grid_balls(space, centers, sig * hz):
            bm = ball_mask(space, B)
            if bm.all():
                continue
            pairs.append((B, bm))
            sub = bm & (rng.random(space.n) < 0.5)
            if sub.any():
                pairs.append((B, sub))
        if not pairs:
            return {"constant": None, "ok": False, "notes": ["no admissible balls"]}
        r = fk_constants(form, pairs)
        return {"constant": r["C_F"], "inv_C_F": r["inv_C_F"], "nu": r["nu"],
                "notes": r["notes"], "witness": r["witness"],
                "ok": bool(r["pass"] and r["inv_C_F"] > 0)}
    if name == "TJ":
        r = tj_constant(form)
        return {"constant": r["C"], "witness": r["witness"], "ok": r["C"] <= th["TJ"]}
    if name == "Cap":
        r = cap_le_constant(form, sig, hz, centers)
        return {"constant": r["C"], "witness": r["witness"], "ok": r["C"] <= th["Cap"]}
    if name == "Gcap":
        U = _positive_samples(space, cfg["function_samples"], seed)
        r = gcap_sweep(form, U, sig, hz, centers)
        return {"constant": r["C"], "witness": r["witness"], "method": r["method"],
                "ok": r["C"] <= th["Gcap"]}
    if name == "Nash":
        nu = 0.5 if fk_nu is None else fk_nu
        rng = np.random.default_rng([seed, 5])
        best, wit = 0.0, None
        for B in _grid_balls(space, centers, sig * hz):
            bm = ball_mask(space, B)
            U = [np.where(bm, rng.uniform(0.0, 1.0, space.n), 0.0)
                 for _ in range(cfg["function_samples"])]
            U = [u for u in U if u.any()]
            r = nash_check(form, B, U, nu)
            if wit is None or r["C"] > best:
                best, wit = r["C"], dict(r["witness"], center=B.center, R=B.radius)
        return {"constant": best, "nu": nu, "witness": wit, "ok": best <= th["Nash"]}
    raise ConfigError(f"unknown condition {name}")


def run_conditions(cfg: dict, space=None, form=None) -> dict:
    """Measure the enabled conditions and return a report dict.

    Independent checks run on ``cfg["workers"]`` threads; results are
    collected in a fixed order, so the report does not depend on it.
    """
    if space is None:
        space, form = build(cfg)
    enabled = [c for c in CONDITIONS if c in cfg["conditions"]]
    first = [c for c in enabled if c != "Nash"]
    with ThreadPoolExecutor(max(1, int(cfg["workers"]))) as pool:
        results = list(pool.map(lambda c: _check_condition(c, space, form, cfg), first))
    checks = dict(zip(first, results))
    if "Nash" in enabled:
        checks["Nash"] = _check_condition("Nash", space, form, cfg,
                                          checks["FK"].get("nu"))
    ef = cfg["expect_fail"]
    for name, res in checks.items():
        res["verdict"] = _status(name, res.pop("ok"), ef)
    return {"schema_version": SCHEMA_VERSION, "kind": "conditions",
            "space": space.name, "n": space.n, "config": _echo(cfg),
            "environment": _environment(), "checks": checks,
            "ok": all(_ok(r["verdict"]) for r in checks.values())}


# ---------------------------------------------------------------- harnack

def _trial_ball(space, smp, R_lim):
    x0 = smp.center
    d = space.dist[x0]
    out = ~smp.omega
    Rc = float(d[out].min()) if out.any() else math.inf
    return x0, min(Rc, R_lim)


def _crossover_suite(form, cfg, hz):
    sp_ = form.space
    H = cfg["harnack"]
    kappa = cfg["kappa"]
    samples = draw_samples(form, H["crossover"]["samples"], cfg["seed"] + 1,
                           cfg["sigma"], hz)
    worst, wit = 1.0, None
    jn_worst, jn_wit, jn_ok, jn_balls = 1.0, None, True, 0
    for si, smp in enumerate(samples):
        x0, R = _trial_ball(sp_, smp, cfg["sigma"] * hz)
        B_R = Ball(x0, R)
        rs = crossover_radii(sp_, x0, R / (16 * (4 * kappa + 1)))
        res = crossover_check(form, B_R, rs, [smp], H["p"], kappa,
                              H["crossover"]["C"])
        if res["product"] > worst:
            worst, wit = res["product"], dict(res["witness"], sample=si)
        lam = (res["witness"] or {}).get("lambda")
        if lam is None:
            lam = max(_lambda_threshold(form, smp, x0, R), 1e-12 * max(1.0, smp.u.max()))
        v = np.log(np.where(ball_mask(sp_, B_R), smp.u + lam, 1.0))
        for B0 in (Ball(x0, 3 * R / (4 * (4 * kappa + 1))), B_R):
            b = bmo_norm(sp_, v, B0)
            jn = john_nirenberg_check(sp_, v, B0, b if b > 0 else 1.0)
            jn_balls += jn["balls_tested"]
            jn_ok &= jn["pass"]
            if jn_wit is None or jn["product"] > jn_worst:
                jn_worst = jn["product"]
                jn_wit = {"sample": si, "B0_radius": B0.radius, "center": x0,
                          "c1": jn["c1"], "bound": jn["bound"]}
    C = H["crossover"]["C"]
    cross_ok = bool(np.isfinite(worst) and (C is None or worst <= C))
    return ({"product": worst, "witness": wit, "C": C, "ok": cross_ok},
            {"product": jn_worst, "balls_tested": jn_balls, "witness": jn_wit,
             "ok": bool(jn_ok)})


def _lambda_threshold(form, smp, x0, R):
    sp_ = form.space
    d = sp_.dist[x0]
    T = float(smp.tail_density[d < 0.75 * R].max())
    F = float(np.abs(smp.f[d < R]).max())
    return float(sp_.w(x0, R)) * (T + F)


def run_harnack(cfg: dict, space=None, form=None) -> dict:
    """Certificate, chained constants, variant checks and toggled suites."""
    if space is None:
        space, form = build(cfg)
    H = cfg["harnack"]
    hz = _horizon(cfg, space)
    seed = cfg["seed"]
    sig = cfg["sigma"]
    ef = cfg["expect_fail"]
    checks = {}
    samples = draw_samples(form, H["samples"], seed, sig, hz)
    delta = default_delta(cfg["kappa"]) if H["delta"] is None else H["delta"]
    cert = certify_weh(form, H["p"], delta, sig, samples=samples, horizon=hz)
    checks["wEH"] = {"certificate": cert.to_dict(),
                     "verdict": _status("wEH", cert.verdict == "pass", ef)}
    env = scaling_envelope(space)
    vd = vd_constant(space)
    aux = {"C2": env["C2"], "beta2": env["beta2"], "C_mu": vd["C_mu"]}
    if H["variants"]:
        vdelta = delta if H["variant_delta"] is None else H["variant_delta"]
        vcert = cert if vdelta == delta else certify_weh(
            form, H["p"], vdelta, sig, samples=samples, horizon=hz)
        checks["wEH_variant_certificate"] = {
            "certificate": vcert.to_dict(),
            "verdict": _status("wEH_variant_certificate", vcert.verdict == "pass", ef)}
        jobs = []
        for v in H["variants"]:
            if v == "wEH1":
                jobs += [("wEH1_via_wEH", v, dict(aux, via="wEH")),
                         ("wEH1_via_wEH3", v, dict(aux, via="wEH3"))]
            else:
                jobs.append((v, v, aux))

        def run(job):
            name, v, a = job
            k = constants_translate(vcert.params, v, a)
            r = check_weh_variant(vcert, v, k, H["variant_trials"], seed)
            r["constants"] = k
            return name, r

        with ThreadPoolExecutor(max(1, int(cfg["workers"]))) as pool:
            for name, r in pool.map(run, jobs):
                r["verdict"] = _status(name, r["verdict"] == "pass", ef)
                checks[name] = r
    suites = H["suites"]
    if "LG" in suites:
        L = H["lg"]
        fk = _check_condition("FK", space, form, cfg)
        nu = fk["nu"] if fk.get("nu") else 0.5
        lg = LGParams(L["epsilon0"], 1.0 / nu, L["C0"] + env["beta2"] + vd["d2"], sig)
        r = lemma_of_growth_check(form, lg, L["eps"], L["delta"], samples,
                                  L["trials"], seed, hz)
        r["params"] = lg.to_dict()
        r["verdict"] = _status("LG", r["verdict"] == "pass", ef)
        checks["LG"] = r
    if "LG0" in suites:
        r = lg0_check(form, cert, H["lg0"]["eps0"], H["lg0"]["trials"], seed)
        r["verdict"] = _status("LG0", r["verdict"] == "pass", ef)
        checks["LG0"] = r
    if "crossover" in suites or "JN" in suites:
        cr, jn = _crossover_suite(form, cfg, hz)
        if "crossover" in suites:
            cr["verdict"] = _status("crossover", cr.pop("ok"), ef)
            checks["crossover"] = cr
        if "JN" in suites:
            jn["verdict"] = _status("JN", jn.pop("ok"), ef)
            checks["JN"] = jn
    if "holder" in suites:
        checks["holder"] = _holder(form, cfg, hz)
    if "exit_time" in suites:
        checks["exit_time"] = _exit_time(form, cfg, hz)
    return {"schema_version": SCHEMA_VERSION, "kind": "harnack",
            "space": space.name, "n": space.n, "config": _echo(cfg),
            "environment": _environment(), "checks": checks,
            "ok": all(_ok(r["verdict"]) for r in checks.values())}


def _holder(form, cfg, hz):
    Hc = cfg["harnack"]["holder"]
    hs = draw_harmonic_samples(form, Hc["samples"], cfg["seed"] + 2, cfg["sigma"], hz)
    r = holder_decay_check(form, hs, Hc["C"])
    ok = r["pass"] and r["beta"] >= Hc["min_beta"]
    r["verdict"] = _status("holder", ok, cfg["expect_fail"])
    return r


def _exit_time(form, cfg, hz):
    E = cfg["harnack"]["exit_time"]
    centers = _centers(form.space, cfg["max_centers"])
    r = exit_time_sweep(form, cfg["sigma"], E["delta"], hz, centers)
    ok = (r["C_lower"] is not None and r["C_lower"] >= E["lower_min"]
          and r["C_upper"] <= E["upper_max"])
    r["verdict"] = _status("exit_time", ok, cfg["expect_fail"])
    return r


# ---------------------------------------------------------------- report

def run_report(reports: list) -> tuple:
    """Merge report dicts and build CSV tables.

    Reports of the same kind on the same space must echo the same config.
    Returns ``(merged, tables)`` with ``tables`` a dict of name to rows.
    """
    if not reports:
        raise ConfigError("need at least one report")
    seen = {}
    for r in reports:
        if r.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"schema version {r.get('schema_version')} is not {SCHEMA_VERSION}")
        key = (r["kind"], r["space"])
        if key in seen and seen[key]["config"] != r["config"]:
            raise ConfigError(f"conflicting configs for {key}")
        seen[key] = r
    merged = {"schema_version": SCHEMA_VERSION, "kind": "merged",
              "reports": [seen[k] for k in sorted(seen)],
              "ok": all(r["ok"] for r in seen.values())}
    tables = {"worst_ratio": [], "constants": [], "oscillation": []}
    for (kind, name), r in sorted(seen.items()):
        for cname, c in r["checks"].items():
            if "constant" in c:
                tables["constants"].append({"space": name, "n": r["n"], "check": cname,
                                            "constant": c["constant"],
                                            "verdict": c["verdict"]})
            if "certificate" in c:
                cert = c["certificate"]
                tables["worst_ratio"].append({"space": name, "n": r["n"], "check": cname,
                                              "delta": cert["params"]["delta"],
                                              "worst_ratio": cert["worst_ratio"]})
            if cname == "holder":
                for row in c["table"]:
                    tables["oscillation"].append(dict(row, space=name))
    tables["worst_ratio"].sort(key=lambda row: (row["check"], row["n"], row["space"]))
    return merged, tables


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        keys = sorted(rows[0])
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _jsonable(row[k]) for k in keys})


def _dump_witnesses(out, report, space, form):
    wdir = os.path.join(out, "witnesses")
    os.makedirs(wdir, exist_ok=True)
    for name, c in report["checks"].items():
        if _ok(c["verdict"]):
            continue
        wit = c.get("witness") or c.get("certificate", {}).get("witness")
        bundle = {"check": name, "space": space_to_dict(space),
                  "form": form_to_dict(form), "witness": wit,
                  "config": report["config"]}
        with open(os.path.join(wdir, f"{name}.json"), "w") as fh:
            fh.write(dumps(bundle))


# ---------------------------------------------------------------- main

def _parser():
    ap = argparse.ArgumentParser(prog="weakharnack", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name in ("generate", "inspect", "conditions", "harnack", "exit-time", "holder"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--witness-dump", action="store_true",
                       help="write failing witnesses as replay bundles")
        p.add_argument("--expect-fail", action="append", default=[],
                       metavar="CHECK", help="mark a check as an expected failure")
        p.add_argument("--workers", type=int, help="threads for independent checks")
    p = sub.add_parser("report")
    p.add_argument("inputs", nargs="+", help="report JSON files")
    p.add_argument("--out", default=".", help="output directory")
    return ap


def _cfg_from_args(args) -> dict:
    over = {}
    if args.config:
        with open(args.config) as fh:
            over = json.load(fh)
    cfg = make_config(over)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.workers is not None:
        cfg["workers"] = args.workers
    cfg["expect_fail"] = sorted(set(cfg["expect_fail"]) | set(args.expect_fail))
    return cfg


def _write(out, name, text):
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, name), "w") as fh:
        fh.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "report":
            reports = []
            for path in args.inputs:
                with open(path) as fh:
                    reports.append(json.load(fh))
            merged, tables = run_report(reports)
            _write(args.out, "merged_report.json", dumps(merged))
            for name, rows in tables.items():
                _write_csv(os.path.join(args.out, f"{name}.csv"), rows)
            return 0 if merged["ok"] else 1
        cfg = _cfg_from_args(args)
        space, form = build(cfg)
        if args.cmd == "generate":
            src = cfg["space"]
            obj = {"schema_version": SCHEMA_VERSION, "source": src,
                   "space": space_to_dict(space), "form": form_to_dict(form)}
            _write(args.out, f"{space.name}.json", dumps(obj))
            return 0
        if args.cmd == "inspect":
            vd = vd_constant(space)
            info = {"schema_version": SCHEMA_VERSION, "kind": "inspect",
                    "space": space.name, "n": space.n, "diam": space.diam,
                    "total_mass": space.total_mass, "w_beta": space.w_beta,
                    "local_edges": int(form.conductance.nnz // 2),
                    "jump_pairs": int(form.jump_mass.nnz // 2),
                    "C_mu": vd["C_mu"]}
            sys.stdout.write(dumps(info))
            return 0
        if args.cmd == "conditions":
            report = run_conditions(cfg, space, form)
        elif args.cmd == "harnack":
            report = run_harnack(cfg, space, form)
        else:
            hz = _horizon(cfg, space)
            check = _exit_time(form, cfg, hz) if args.cmd == "exit-time" else \
                _holder(form, cfg, hz)
            name = args.cmd.replace("-", "_")
            report = {"schema_version": SCHEMA_VERSION, "kind": name,
                      "space": space.name, "n": space.n, "config": _echo(cfg),
                      "environment": _environment(), "checks": {name: check},
                      "ok": _ok(check["verdict"])}
            if args.cmd == "holder":
                os.makedirs(args.out, exist_ok=True)
                _write_csv(os.path.join(args.out, "oscillation.csv"), check["table"])
        _write(args.out, f"{report['kind']}_report.json", dumps(report))
        if args.witness_dump:
            _dump_witnesses(args.out, report, space, form)
        for name, c in report["checks"].items():
            sys.stdout.write(f"{name}: {c['verdict']}\n")
        return 0 if report["ok"] else 1
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
