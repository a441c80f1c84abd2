import math

import numpy as np
import pytest

from weakharnack.dirichlet import DirichletForm, tj_constant
from weakharnack.harnack import certify_weh
from weakharnack.mmspace import vd_constant
from weakharnack.spaces import (GeneratorSpec, generate, make_dumbbell, make_gasket,
                                make_path, make_stable_torus, make_torus,
                                make_ultrametric_product)
from weakharnack.spectra import poincare_sweep


def test_ultrametric_depth_one_factor_kernel():
    sp, form = make_ultrametric_product(3, (1, 1), beta=1.0)
    J = form.J_dense
    # points (0, 0) and (1, 0) differ in the first coordinate only
    a, b = 0, 3
    assert sp.dist[a, b] == 3.0
    assert J[a, b] == pytest.approx(1 / 9)


def test_ultrametric_no_mass_across_both_coordinates():
    sp, form = make_ultrametric_product(2, (2, 3))
    J = form.J_dense
    idx = np.array(np.unravel_index(np.arange(sp.n), (4, 8))).T
    both = (idx[:, None, 0] != idx[None, :, 0]) & (idx[:, None, 1] != idx[None, :, 1])
    one = ((idx[:, None, 0] != idx[None, :, 0]) ^ (idx[:, None, 1] != idx[None, :, 1]))
    assert np.all(J[both] == 0)
    assert np.all(J[one] > 0)


def test_ultrametric_scaling_prefactor_range():
    sp, _ = make_ultrametric_product(2, (3, 3), a_bound=3.0, seed=5)
    assert sp.w_a.min() >= 1 / 3 and sp.w_a.max() <= 3
    assert np.array_equal(make_ultrametric_product(2, (3, 3), a_bound=3.0, seed=5)[0].w_a, sp.w_a)


def test_ultrametric_parameter_errors():
    with pytest.raises(ValueError):
        make_ultrametric_product(1, (2, 2))
    with pytest.raises(ValueError):
        make_ultrametric_product(2, (0, 2))
    with pytest.raises(ValueError):
        make_ultrametric_product(2, (2, 2), a_bound=0.5)


def test_ultrametric_tj_bounded_per_depth():
    for L in (3, 4):
        assert np.isfinite(tj_constant(make_ultrametric_product(2, (L, L))[1])["C"])


def test_stable_torus_antipode_mass():
    _, form = make_stable_torus(8, beta=1.0)
    assert form.jump_mass[0, 4] == pytest.approx(4.0 ** -2)
    with pytest.raises(ValueError):
        make_stable_torus(3)


def test_stable_torus_local_part():
    _, form = make_stable_torus(8, local=True)
    assert form.conductance.nnz == 16


def test_gasket_level_one():
    sp, form = make_gasket(1)
    assert sp.n == 6
    assert form.conductance.nnz // 2 == 9
    assert sp.w_beta == pytest.approx(math.log(5) / math.log(2))
    with pytest.raises(ValueError):
        make_gasket(8)


def test_gasket_doubling_bounded_across_levels():
    vals = [vd_constant(make_gasket(L)[0])["C_mu"] for L in (3, 4, 5)]
    assert max(vals) <= 8


def test_gasket_certificate_finite():
    _, form = make_gasket(4)
    cert = certify_weh(form, sample_count=4, seed=0, centers=range(0, 123, 20))
    assert cert.verdict == "pass" and np.isfinite(cert.worst_ratio)


def test_dumbbell_swap_invariance():
    sp, form = make_dumbbell(5, 3, 0.1)
    n = sp.n
    perm = np.arange(n)[::-1]
    sp2 = type(sp)(sp.dist[np.ix_(perm, perm)], sp.mu[perm])
    Cm = form.conductance.toarray()[np.ix_(perm, perm)]
    assert np.array_equal(sp2.dist, sp.dist)
    assert np.array_equal(Cm, form.conductance.toarray())
    assert vd_constant(sp2)["C_mu"] == vd_constant(sp)["C_mu"]
    form2 = DirichletForm(sp2, Cm, np.zeros((n, n)))
    assert poincare_sweep(form2)["C"] == pytest.approx(poincare_sweep(form)["C"], rel=1e-9)


def test_dumbbell_barbell_moderate():
    assert poincare_sweep(make_dumbbell(eps=1.0)[1])["C"] < 5


def test_small_generators():
    sp, form = make_path(2)
    assert sp.n == 2 and form.conductance.nnz == 2
    sp, form = make_torus(2)
    assert sp.n == 2
    with pytest.raises(ValueError):
        make_path(1)


def test_generate_dispatch():
    sp, _ = generate(GeneratorSpec("torus", n=16))
    assert sp.n == 16 and sp.name == "torus16"
    sp, _ = generate(GeneratorSpec("ultrametric_product", q=2, depth=(2, 2)))
    assert sp.n == 16 and sp.ultrametric
    with pytest.raises(ValueError):
        generate(GeneratorSpec("sphere"))
    assert GeneratorSpec("gasket", level=2).to_dict()["level"] == 2
