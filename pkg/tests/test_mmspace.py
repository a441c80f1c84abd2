import itertools
import json

import numpy as np
import pytest

from weakharnack.mmspace import (Ball, DegenerateGridError, EmptyBallError,
                                 MetricMeasureSpace, SpaceValidationError,
                                 ball_mask, ball_points, occupation_measure,
                                 rvd_constants, scaling_envelope, space_from_dict,
                                 space_to_dict, sweep_radii, vd_constant, volume,
                                 volume_table)
from weakharnack.spaces import (make_dumbbell, make_gasket, make_path, make_stable_torus,
                                make_torus, make_ultrametric_product)


def test_ball_is_open_and_identified_by_center_and_radius(path5):
    sp, _ = path5
    assert ball_points(sp, Ball(2, 1.5)).tolist() == [1, 2, 3]
    assert ball_points(sp, Ball(2, 1.0)).tolist() == [2]
    assert ball_points(sp, Ball(0, 10.0)).tolist() == [0, 1, 2, 3, 4]
    assert Ball(2, 1.5) != Ball(2, 1.6)
    assert Ball(1, 2.0).scaled(2) == Ball(1, 4.0)
    with pytest.raises(ValueError):
        Ball(0, 0.0)


def test_torus_ball_membership(torus8):
    sp, _ = torus8
    assert sorted(ball_points(sp, Ball(0, 2.5)).tolist()) == [0, 1, 2, 6, 7]
    assert volume(sp, 0, 4.5) == 8


def test_volume_and_occupation(path5):
    sp, _ = path5
    assert volume(sp, 2, 1.5) == 3
    vols = [volume(sp, 0, r) for r in np.linspace(0.1, 6, 40)]
    assert np.all(np.diff(vols) >= 0)
    B = Ball(2, 1.5)
    assert occupation_measure(sp, [0, 1], B) == pytest.approx(1 / 3)
    assert occupation_measure(sp, [1, 2, 3], B) == 1.0
    assert occupation_measure(sp, [0, 4], B) == 0.0


def test_occupation_is_monotone_and_additive(torus64):
    sp, _ = torus64
    rng = np.random.default_rng(0)
    for _ in range(20):
        B = Ball(int(rng.integers(64)), float(rng.uniform(1, 20)))
        A1 = rng.random(64) < 0.3
        A2 = rng.random(64) < 0.3
        assert occupation_measure(sp, A1 | A2, B) >= occupation_measure(sp, A1, B)
        D = A2 & ~A1
        assert occupation_measure(sp, A1 | D, B) == pytest.approx(
            occupation_measure(sp, A1, B) + occupation_measure(sp, D, B))


def test_validation_errors():
    good = np.array([[0, 1], [1, 0]], dtype=float)
    with pytest.raises(SpaceValidationError):
        MetricMeasureSpace(np.array([[0, 1], [2, 0]], dtype=float), np.ones(2))
    with pytest.raises(SpaceValidationError):
        MetricMeasureSpace(good, np.array([1.0, 0.0]))
    bad_tri = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    with pytest.raises(SpaceValidationError):
        MetricMeasureSpace(bad_tri, np.ones(3))
    # an ordinary metric that is not an ultrametric
    path3 = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    with pytest.raises(SpaceValidationError):
        MetricMeasureSpace(path3, np.ones(3), ultrametric=True)


def _brute_vd(sp):
    # sup over r of V(x,2r)/V(x,r); both sides are constant between the
    # breakpoints d and d/2, so test every breakpoint and a point above it
    best = 1.0
    cands = np.unique(np.concatenate([sp.radius_grid, sp.radius_grid / 2]))
    for x in range(sp.n):
        for r in cands:
            for s in (r, r * (1 + 1e-9)):
                best = max(best, volume(sp, x, 2 * s) / volume(sp, x, s))
    return best


def test_vd_constant_on_8_torus_is_exact_sup(torus8):
    # r in (1/2, 1]: B(x, r) = {x} and B(x, 2r) has 3 points
    sp, _ = torus8
    assert vd_constant(sp)["C_mu"] == 3.0
    assert _brute_vd(sp) == 3.0


def test_vd_constant_single_point_and_dumbbell(torus64):
    one = MetricMeasureSpace(np.zeros((1, 1)), np.ones(1))
    assert vd_constant(one)["C_mu"] == 1.0
    db, _ = make_dumbbell()
    assert vd_constant(db)["C_mu"] > 3 * vd_constant(torus64[0])["C_mu"]


@pytest.mark.parametrize("n", [8, 16, 33, 64])
def test_stable_torus_doubling_bounded_by_three(n):
    sp, _ = make_stable_torus(n)
    assert vd_constant(sp)["C_mu"] <= 3.0


def test_vd_constant_matches_brute_force_on_small_spaces():
    for sp, _ in [make_path(7), make_gasket(2), make_ultrametric_product(2, (2, 2))]:
        assert vd_constant(sp)["C_mu"] == pytest.approx(_brute_vd(sp))


def test_volume_comparison_with_distance(torus8):
    # V(x,R)/V(y,r) <= C_mu ((d(x,y)+R)/r)**d2 for r <= R
    for sp, _ in [torus8, make_path(6), make_ultrametric_product(2, (2, 2))]:
        vd = vd_constant(sp)
        radii = sweep_radii(sp)
        for x, y in itertools.product(range(sp.n), repeat=2):
            for r in radii:
                for R in radii[radii >= r]:
                    lhs = volume(sp, x, R) / volume(sp, y, r)
                    rhs = vd["C_mu"] * ((sp.dist[x, y] + R) / r) ** vd["d2"]
                    assert lhs <= rhs * (1 + 1e-12)


def test_volume_table_matches_direct_counts(ultra44):
    sp, _ = ultra44
    radii = sweep_radii(sp)
    V = volume_table(sp, radii)
    for x in (0, 17, 200):
        assert V[x].tolist() == [volume(sp, x, r) for r in radii]


def test_rvd_on_torus_and_ultrametric():
    sp, _ = make_torus(64)
    r = rvd_constants(sp)
    assert abs(r["d1"] - 1) < 0.2 and r["pass"] and 0 < r["C_d"] <= 1
    # 3-adic depth-4 squared has 6561 points and exact Ahlfors dimension 2
    sp, _ = make_ultrametric_product(3, (4, 4))
    assert abs(rvd_constants(sp)["d1"] - 2) < 0.3


def test_rvd_degenerate_grid():
    two = MetricMeasureSpace(np.array([[0, 1], [1, 0]], dtype=float), np.ones(2))
    with pytest.raises(DegenerateGridError):
        rvd_constants(two)


def test_scaling_envelope():
    sp, _ = make_torus(8)
    assert scaling_envelope(sp) == {"C1": 1.0, "C2": 1.0, "beta1": 2.0, "beta2": 2.0}
    d = np.array([[0, 1], [1, 0]], dtype=float)
    sp = MetricMeasureSpace(d, np.ones(2), w_a=[1.0, 2.0], w_beta=1.0)
    env = scaling_envelope(sp)
    assert env["C2"] == 2.0 and env["C1"] == 0.5
    ups, _ = make_ultrametric_product(2, (3, 3), a_bound=2.0)
    r = np.array([0.5, 1, 7])
    for x in range(ups.n):
        w = ups.w(x, r)
        assert np.all(w <= 2 * r ** ups.w_beta) and np.all(w >= r ** ups.w_beta / 2)


def test_nested_balls_and_ultrametric_centers(ultra44):
    sp, _ = ultra44
    rng = np.random.default_rng(1)
    for _ in range(30):
        x = int(rng.integers(sp.n))
        r = float(rng.uniform(0.5, 20))
        m = ball_mask(sp, Ball(x, r))
        assert np.all(ball_mask(sp, Ball(x, 2 * r)) >= m)
        for y in np.flatnonzero(m):
            assert np.array_equal(ball_mask(sp, Ball(int(y), r)), m)


def test_ultrametric_max_triangle(ultra44):
    d = ultra44[0].dist
    for z in range(d.shape[0]):
        assert np.all(d <= np.maximum(d[:, [z]], d[[z], :]))


def test_ultrametric_ahlfors_bounds(ultra44):
    sp, _ = ultra44
    radii = sweep_radii(sp)
    V = volume_table(sp, radii)
    ratio = V / radii[None, :] ** 2
    C = max(ratio.max(), 1 / ratio.min())
    assert C <= 16


def test_sweep_radii_holds_distances_and_midpoints(path5):
    sp, _ = path5
    assert sweep_radii(sp).tolist() == [1, 1.5, 2, 2.5, 3, 3.5, 4]
    assert sweep_radii(sp, 2.0).tolist() == [1, 1.5]


@pytest.mark.parametrize("maker", [lambda: make_path(6), lambda: make_torus(9),
                                   lambda: make_stable_torus(10),
                                   lambda: make_ultrametric_product(2, (2, 3)),
                                   lambda: make_dumbbell(4, 3, 0.5),
                                   lambda: make_gasket(2)])
def test_serialization_round_trip(maker):
    sp, _ = maker()
    obj = json.loads(json.dumps(space_to_dict(sp)))
    back = space_from_dict(obj)
    assert np.array_equal(back.dist, sp.dist)
    assert np.array_equal(back.mu, sp.mu)
    assert np.array_equal(back.w_a, sp.w_a) and back.w_beta == sp.w_beta


def test_empty_ball_error_on_unvalidated_zero_mass():
    d = np.array([[0, 1], [1, 0]], dtype=float)
    sp = MetricMeasureSpace(d, np.array([0.0, 1.0]), validate=False)
    with pytest.raises(EmptyBallError):
        occupation_measure(sp, [0], Ball(0, 0.5))
