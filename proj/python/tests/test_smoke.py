import numpy as np
import pytest

import previewctl as pc


@pytest.fixture(scope="module")
def plant():
    return pc.Plant(
        A=np.array([[3.0, 1.0], [-1.0, -2.0]]),
        B_d=np.array([[1.0], [1.0]]),
        B_u=np.array([[3.0], [-1.0]]),
        Q=3.0 * np.eye(2),
        R=np.eye(1),
    )


def test_scalar_dare_closed_form():
    # With a = 0.5 and b = q = r = 1 the DARE reduces to x^2 - a^2 x - 1 = 0.
    sol = pc.solve_dare(np.array([[0.5]]), np.array([[1.0]]), np.eye(1), np.eye(1))
    a2 = 0.25
    root = (a2 + np.sqrt(a2 * a2 + 4.0)) / 2.0
    assert sol.X[0, 0] == pytest.approx(root, abs=1e-9)
    assert root == pytest.approx(1.132782218537, abs=1e-12)


def test_invalid_plant_raises():
    with pytest.raises(pc.InvalidInput):
        pc.Plant(A=np.eye(2), B_d=np.ones((2, 1)), B_u=np.ones((3, 1)), Q=np.eye(2), R=np.eye(1))


def test_sandwich_and_preview(plant):
    g_nc = pc.gamma_nc(plant).value
    hinf = pc.hinf_preview_bisect(plant, 2)
    h2 = pc.h2_preview(plant, 2)
    g2 = pc.hinf_norm(pc.closed_loop(plant, h2))
    assert g_nc <= hinf.gamma + 1e-9
    assert hinf.gamma <= g2 + 1e-9
    assert hinf.controller.preview == 2


def test_noncausal_is_a_lower_bound(plant):
    rng = np.random.default_rng(0)
    d = pc.Signal(rng.standard_normal((1, 15)))
    nc = pc.build_noncausal(plant)
    j_nc = pc.noncausal_cost(plant, nc, d)
    j_h2 = pc.simulate(plant, pc.h2_preview(plant, 4), d).cost
    assert j_nc <= j_h2 + 1e-8


def test_gap_bound_ratio(plant):
    g = pc.h2_gap_bound(plant)
    p = g.t_cut
    assert g.bound(p + 1) / g.bound(p) == pytest.approx(g.alpha, rel=1e-12)
