import math

import numpy as np
import pytest

from weakharnack.dirichlet import DirichletForm
from weakharnack.harnack import (CertificationError, HarnackParams, LGParams,
                                 SuperharmonicSample, bmo_norm, certify_weh,
                                 check_weh_variant, constants_translate, crossover_check,
                                 crossover_radii, default_delta, degiorgi_iteration,
                                 draw_harmonic_samples, draw_samples, holder_decay_check,
                                 john_nirenberg_check, krylov_safonov_enlarge,
                                 lemma_of_growth_check, lg0_check, log_energy_check,
                                 log_energy_rhs_lhs, threshold_map, weh_ratio)
from weakharnack.mmspace import Ball, MetricMeasureSpace, ball_mask
from weakharnack.spaces import make_path, make_stable_torus, make_torus


# ---------------------------------------------------------------- params

def test_params_validation():
    with pytest.raises(ValueError):
        HarnackParams(p=1.0)
    with pytest.raises(ValueError):
        HarnackParams(C_H=0.5)
    with pytest.raises(ValueError):
        LGParams(epsilon0=0.5, theta=1, C_L=1)
    assert default_delta(1.0) == 1 / 160


# ---------------------------------------------------------------- constants

def test_translate_exponential_form():
    c = constants_translate({"p": 0.5, "delta": 0.1, "C_H": math.e}, "wEH2")
    assert c["C"] == pytest.approx(3.0) and c["delta2"] == 0.1


def test_translate_threshold_map():
    c = constants_translate({"p": 0.5, "delta": 0.1, "C_H": math.e}, "wEH3", {"eta": 1.0})
    assert c["F"] == pytest.approx(0.5 * math.exp(-3))
    assert threshold_map(c, 1.0) == c["F"]


def test_translate_measure_to_point():
    c = constants_translate({"p": 1.0, "delta": 0.2, "C_H": 1.0}, "wEH1",
                            {"C2": 1, "beta2": 1, "C_mu": 1, "eta": 1.0})
    assert c["eps1"] == pytest.approx(0.25) and c["delta1"] == pytest.approx(0.05)
    c3 = constants_translate({"p": 1.0, "delta": 0.2, "C_H": 1.0}, "wEH1",
                             {"C2": 1, "beta2": 1, "C_mu": 1, "eta": 1.0, "via": "wEH3"})
    assert c3["delta1"] == pytest.approx(0.025)
    assert c3["eps1"] == pytest.approx(0.5 * math.exp(-1) / 8)


def test_translate_half_density():
    c = constants_translate(HarnackParams(0.5, 0.1, 1 / 3, math.e), "wEH4")
    assert c["eps4"] == pytest.approx(0.5 * math.exp(-6)) and c["delta4"] == 0.1


def test_translate_is_pure_and_validates():
    aux = {"C2": 2.0, "beta2": 1.0, "C_mu": 3.0, "eta": 0.3}
    a = constants_translate({"p": 0.5, "delta": 0.1, "C_H": 1.7}, "wEH1", aux)
    b = constants_translate({"p": 0.5, "delta": 0.1, "C_H": 1.7}, "wEH1", dict(aux))
    assert a == b
    with pytest.raises(ValueError):
        constants_translate({"p": 0.5, "delta": 0.1, "C_H": 1.0}, "wEH1", {"C2": 1})
    with pytest.raises(ValueError):
        constants_translate({"p": 0.5, "delta": 0.1, "C_H": 1.0}, "wEH5")


def test_threshold_map_is_increasing():
    c = constants_translate({"p": 0.5, "delta": 0.1, "C_H": 2.0}, "wEH1",
                            {"C2": 2.0, "beta2": 1.0, "C_mu": 3.0})
    vals = [threshold_map(c, e) for e in (0.1, 0.4, 0.9)]
    assert vals[0] < vals[1] < vals[2]


# ---------------------------------------------------------------- ratio

def test_ratio_of_constant_is_one(torus64):
    _, form = torus64
    ratio = weh_ratio(form, np.full(64, 3.0), None, Ball(0, 10.0), Ball(0, 2.0), 0.5)
    assert ratio == pytest.approx(1.0, rel=1e-15)


def test_ratio_homogeneity(stable64):
    _, form = stable64
    smp = draw_samples(form, 6, seed=2)
    for s in smp:
        x0 = s.center
        R = 0.9 * s.radius
        B_R, B_r = Ball(x0, R), Ball(x0, R / 4)
        base = weh_ratio(form, s.u, s.f, B_R, B_r, 0.5)
        assert weh_ratio(form, 3.7 * s.u, 3.7 * s.f, B_R, B_r, 0.5) == pytest.approx(base, rel=1e-12)


def test_ratio_rejects_non_superharmonic(path5):
    _, form = path5
    with pytest.raises(CertificationError):
        weh_ratio(form, np.array([0, 1, 0, 1, 0.0]), None, Ball(2, 2.5), Ball(2, 0.5), 0.5)
    with pytest.raises(CertificationError):
        weh_ratio(form, -np.ones(5), None, Ball(2, 2.5), Ball(2, 0.5), 0.5)


def test_ratio_matches_exact_certificate_sup(stable64):
    # the certificate sup dominates the ratio at any admissible pair
    sp, form = stable64
    smp = draw_samples(form, 5, seed=7)
    cert = certify_weh(form, delta=0.5, samples=smp)
    rng = np.random.default_rng(0)
    for s in smp:
        for _ in range(20):
            pts = np.flatnonzero(s.omega)
            x0 = int(pts[rng.integers(pts.size)])
            d = sp.dist[x0]
            Rc = d[~s.omega].min()
            R = float(min(Rc, cert.params.sigma * cert.horizon) * rng.uniform(0.05, 0.999))
            r = float(0.5 * R * rng.uniform(0.01, 1.0))
            v = weh_ratio(form, s.u, s.f, Ball(x0, R), Ball(x0, r), 0.5)
            assert v <= cert.worst_ratio * (1 + 1e-12)


# ---------------------------------------------------------------- certificate

def test_certificate_single_pair_unit_function():
    # two points at distance 1 with u = 1: the only class has B_r = {x0}
    d = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    sp = MetricMeasureSpace(d, np.ones(3))
    form = DirichletForm.from_edges(sp, [(0, 1, 1.0), (1, 2, 1.0)])
    u = np.ones(3)
    om = np.array([True, True, False])
    smp = SuperharmonicSample(u, np.zeros(3), om, [0, 0], 0, 2.0)
    cert = certify_weh(form, delta=0.5, sigma=0.9, samples=[smp])
    assert cert.verdict == "pass" and cert.params.C_H == 1.0 and cert.worst_ratio == 1.0


def test_certificate_empty_sweep(path5):
    _, form = path5
    cert = certify_weh(form, samples=[])
    assert cert.verdict == "empty" and cert.to_dict()["verdict"] == "empty"


def test_certificate_monotone_in_sample_count(stable64):
    _, form = stable64
    vals = [certify_weh(form, delta=0.5, sample_count=k, seed=3).worst_ratio for k in (3, 6, 12)]
    assert vals[0] <= vals[1] <= vals[2]


def test_certificate_fails_with_small_supplied_constant(torus64):
    _, form = torus64
    cert = certify_weh(form, delta=0.5, sample_count=6, seed=0, C_H=1.0)
    assert cert.worst_ratio > 1 and cert.verdict == "fail"


def test_samples_are_certified_and_deterministic(ultra44):
    _, form = ultra44
    a = draw_samples(form, 5, seed=9)
    b = draw_samples(form, 5, seed=9)
    for s, t in zip(a, b):
        assert np.array_equal(s.u, t.u)
        assert np.all(s.u[s.omega] >= 0)
        assert np.all(s.tail_density[s.omega] >= 0)


# ---------------------------------------------------------------- variants

def test_variant_wEH2_vacuous_when_level_exceeds_max():
    # omega({u >= a}) = 0 makes the exponential form vacuous; the check only
    # draws levels inside the value range, so vacuity comes from constants
    _, form = make_torus(16)
    smp = [SuperharmonicSample(np.full(16, 2.0), np.zeros(16),
                               np.arange(16) < 8, [0, 0], 3, 4.0)]
    cert = certify_weh(form, delta=0.5, samples=smp)
    c = constants_translate(cert.params, "wEH2")
    res = check_weh_variant(cert, "wEH2", c, trials=50)
    assert res["failures"] == 0 and res["verdict"] == "inconclusive"


def test_variant_wEH3_on_constant_function():
    _, form = make_torus(16)
    smp = [SuperharmonicSample(np.full(16, 2.0), np.zeros(16),
                               np.arange(16) < 10, [0, 0], 5, 6.0)]
    cert = certify_weh(form, delta=0.5, samples=smp)
    c = constants_translate(cert.params, "wEH3")
    res = check_weh_variant(cert, "wEH3", c, trials=200)
    assert res["failures"] == 0 and res["non_vacuous"] > 0


def test_variant_checks_pass_on_torus(torus64):
    _, form = torus64
    cert = certify_weh(form, delta=0.5, sample_count=10, seed=1)
    aux = {"C2": 1.0, "beta2": 2.0, "C_mu": 3.0}
    for v in ("wEH1", "wEH2", "wEH3", "wEH4"):
        c = constants_translate(cert.params, v, aux)
        res = check_weh_variant(cert, v, c, trials=200, seed=4)
        assert res["failures"] == 0, (v, res)


def test_variant_unknown(torus64):
    _, form = torus64
    cert = certify_weh(form, delta=0.5, sample_count=2)
    with pytest.raises(ValueError):
        check_weh_variant(cert, "wEH9", {}, trials=1)


# ---------------------------------------------------------------- growth

def test_growth_lemma_constant_function_holds():
    _, form = make_torus(32)
    u = np.full(32, 1.5)
    smp = [SuperharmonicSample(u, np.zeros(32), np.arange(32) < 20, [0, 0], 10, 11.0)]
    lg = LGParams(0.25, 2.0, 3.0)
    res = lemma_of_growth_check(form, lg, 0.5, 0.5, smp, trials=100)
    assert res["failures"] == 0 and res["non_vacuous"] > 0


def test_growth_lemma_on_stable_torus(stable64):
    _, form = stable64
    smp = draw_samples(form, 10, seed=5)
    res = lemma_of_growth_check(form, LGParams(0.25, 2.0, 3.0), 0.5, 0.5, smp, trials=300)
    assert res["failures"] == 0


def test_lg0_eps0_zero_and_constant():
    _, form = make_torus(32)
    u = np.full(32, 2.0)
    smp = [SuperharmonicSample(u, np.zeros(32), np.arange(32) < 20, [0, 0], 10, 11.0)]
    cert = certify_weh(form, delta=0.5, samples=smp)
    for eps0 in (0.0, 0.2):
        res = lg0_check(form, cert, eps0, trials=100)
        assert res["failures"] == 0 and res["non_vacuous"] > 0


def test_lg0_on_torus_certificate(torus64):
    _, form = torus64
    cert = certify_weh(form, sample_count=20, seed=0)
    res = lg0_check(form, cert, 0.2, trials=500)
    assert res["failures"] == 0


# ---------------------------------------------------------------- De Giorgi

def test_degiorgi_zero_start():
    res = degiorgi_iteration(0.0, 1.0, 1.0, 0.0, 2.0, kmax=10)
    assert all(m == 0 for m in res["m"]) and res["dominated"]


def test_degiorgi_closed_form_example():
    res = degiorgi_iteration(0.25, 1.0, 1.0, 0.0, 2.0, kmax=8)
    for k in range(9):
        assert res["m"][k] == pytest.approx(0.25 ** (2 ** k), rel=1e-12, abs=0)
    assert res["small"] and res["limit_zero"] and res["dominated"]


def test_degiorgi_validation():
    with pytest.raises(ValueError):
        degiorgi_iteration(0.1, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        degiorgi_iteration(0.1, 0.5, 1.5, 0.0, 2.0)


# ---------------------------------------------------------------- crossover / BMO

def test_crossover_trivial_products(torus64):
    sp, form = torus64
    B_R = Ball(0, 30.0)
    om = np.ones(64, dtype=bool)
    om[32] = False
    rs = crossover_radii(sp, 0, 30.0 / 80)
    for u in (np.zeros(64), np.full(64, 4.0)):
        smp = [SuperharmonicSample(u, np.zeros(64), om, [0, 0], 0, 32.0)]
        assert crossover_check(form, B_R, rs, smp)["product"] == 1.0


def test_crossover_rejects_large_radius(torus64):
    _, form = torus64
    with pytest.raises(ValueError):
        crossover_check(form, Ball(0, 16.0), [1.0], [])


def test_bmo_examples():
    sp = MetricMeasureSpace(np.array([[0, 1], [1, 0]], dtype=float), np.ones(2))
    assert bmo_norm(sp, np.array([0.0, 1.0]), np.ones(2, dtype=bool)) == pytest.approx(0.5)
    sp, _ = make_torus(16)
    assert bmo_norm(sp, np.full(16, 3.0), Ball(0, 5.0)) == 0.0


def test_bmo_is_rotation_invariant():
    sp, _ = make_torus(16)
    u = np.random.default_rng(0).random(16)
    full = np.ones(16, dtype=bool)
    assert bmo_norm(sp, np.roll(u, 5), full) == pytest.approx(bmo_norm(sp, u, full))


def test_john_nirenberg_examples():
    sp, _ = make_torus(32)
    B0 = Ball(0, 15.0)
    res = john_nirenberg_check(sp, np.full(32, 2.0), B0, b=1.0)
    assert res["product"] == 1.0 and res["pass"]
    u = np.log1p(np.random.default_rng(1).random(32) * 5)
    b = bmo_norm(sp, u, ball_mask(sp, B0))
    a = john_nirenberg_check(sp, u, B0, b)
    c = john_nirenberg_check(sp, u + 7.0, B0, b)
    assert a["pass"] and a["product"] == pytest.approx(c["product"], rel=1e-9)
    with pytest.raises(ValueError):
        john_nirenberg_check(sp, u, B0, b / 2)


# ---------------------------------------------------------------- covering

def test_krylov_safonov_trivial_sets(torus64):
    sp, _ = torus64
    B = Ball(0, 6.0)
    Bm = ball_mask(sp, B)
    res = krylov_safonov_enlarge(sp, Bm, B, 0.5)
    assert res["full"] and res["holds"]
    res = krylov_safonov_enlarge(sp, np.zeros(64, dtype=bool), B, 0.5)
    assert not res["enlarged"].any() and res["holds"] and res["mass_E"] == 0


def test_krylov_safonov_validation(torus64):
    sp, _ = torus64
    with pytest.raises(ValueError):
        krylov_safonov_enlarge(sp, [], Ball(0, 7.0), 0.5)
    with pytest.raises(ValueError):
        krylov_safonov_enlarge(sp, [20], Ball(0, 5.0), 0.5)


# ---------------------------------------------------------------- Hoelder

def test_holder_constant_function():
    sp, form = make_torus(32)
    s = [{"u": np.full(32, 2.0), "center": 0, "r": 8.0, "seed": [0, 0]}]
    res = holder_decay_check(form, s)
    assert res["beta"] == 0.95 and res["sup_by_beta"][0.95] == 0.0


def test_holder_linear_path():
    sp, form = make_path(41)
    u = np.arange(41, dtype=float) - 20
    s = [{"u": u, "center": 20, "r": 20.5, "seed": [0, 0]}]
    res = holder_decay_check(form, s)
    assert res["beta"] >= 0.9 and res["pass"]


def test_harmonic_samples_are_harmonic(stable64):
    from weakharnack.solvers import is_f_superharmonic
    _, form = stable64
    for s in draw_harmonic_samples(form, 5, seed=2):
        B = form.space.dist[s["center"]] < s["r"]
        assert is_f_superharmonic(form, s["u"], B)["ok"]
        assert is_f_superharmonic(form, -s["u"], B)["ok"]


# ---------------------------------------------------------------- log energy

def test_log_energy_zero_cutoff(stable64):
    sp, form = stable64
    B = ball_mask(sp, Ball(0, 8.0))
    lhs, rhs = log_energy_rhs_lhs(form, np.random.default_rng(0).random(64), np.zeros(64), B, 0.5)
    assert lhs == 0.0 and rhs == 0.0


def test_log_energy_constant_u(stable64):
    sp, form = stable64
    B = ball_mask(sp, Ball(0, 8.0))
    phi = np.random.default_rng(1).uniform(-1, 1, 64) * B
    u = np.full(64, 2.0)
    lhs, rhs = log_energy_rhs_lhs(form, u, phi, B, 0.5)
    J = form.jump_mass.toarray()
    out = ~B
    expected = 3 * np.sum(J * (phi[:, None] - phi[None, :]) ** 2) \
        - 2 * np.sum(J[np.ix_(B, out)] * (phi[B] ** 2)[:, None])
    assert lhs == 0.0 and rhs == pytest.approx(expected, rel=1e-12)


def test_log_energy_random_trials(ultra44):
    sp, form = ultra44
    res = log_energy_check(form, ball_mask(sp, Ball(0, 8.0)), trials=50)
    assert res["pass"]
