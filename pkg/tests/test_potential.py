from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centralconf import (
    CollisionError,
    DegenerateConfigurationError,
    Masses,
    OneCochain,
    PotentialParams,
    cc_residual,
    coboundary0,
    coboundary1,
    f_tilde,
    grad_u,
    lambda_of,
    potential_u,
    project_to_x,
    psi_gamma,
)
from centralconf.cochain import mass_norm_c0, mass_norm_c1
from centralconf.potential import body_residual, check_collisions

EQUILATERAL = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])


def _rotation(rng, d):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return Q


def _random_problem(rng, n=None, d=None):
    n = n or int(rng.integers(2, 7))
    d = d or int(rng.integers(1, 4))
    return Masses(rng.uniform(0.2, 3.0, n)), rng.standard_normal((n, d))


def test_params_derived():
    p = PotentialParams(1.0)
    assert p.gamma == 3.0
    assert p.gamma_hat == 1.5
    for a in (0.1, 0.5, 2.0, 7.0):
        p = PotentialParams(a)
        assert p.gamma > 2.0
        assert 1.0 < p.gamma_hat < 2.0


@pytest.mark.parametrize("alpha", [0.0, -1.0, np.nan])
def test_params_reject_bad_alpha(alpha):
    with pytest.raises(ValueError):
        PotentialParams(alpha)


def test_psi_hand_values():
    assert np.allclose(psi_gamma(np.array([2.0, 0.0]), 3.0), [0.25, 0.0])
    assert np.allclose(psi_gamma(np.array([0.25, 0.0]), 1.5), [2.0, 0.0])
    u = np.array([0.6, 0.8])
    assert np.allclose(psi_gamma(u, 4.2), u)


def test_psi_zero_is_collision():
    with pytest.raises(CollisionError):
        psi_gamma(np.zeros(2), 3.0)


@given(
    st.floats(0.1, 5.0),
    st.floats(-3.0, 3.0),
    st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
)
def test_psi_inverse(alpha, log_r, direction):
    p = PotentialParams(alpha)
    x = np.asarray(direction) / np.linalg.norm(direction) * 10.0**log_r
    back = psi_gamma(psi_gamma(x, p.gamma), p.gamma_hat)
    assert np.linalg.norm(back - x) <= 1e-12 * np.linalg.norm(x)


def test_potential_two_bodies():
    m = Masses([1.0, 3.0])
    q = np.array([[0.0], [2.0]])
    assert potential_u(q, m, PotentialParams(1.0)) == pytest.approx(0.25 * 0.75 / 2.0)
    assert potential_u(q, m, PotentialParams(2.0)) == pytest.approx(0.25 * 0.75 / 4.0)


def test_collision_carries_pair():
    q = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(CollisionError) as exc:
        potential_u(q, Masses.equal(3), PotentialParams())
    assert exc.value.pair == (1, 2)


def test_collision_tolerance_relative_to_diameter():
    q = np.array([[0.0], [1e3], [1e3 + 1e-7]])
    check_collisions(q, tol=1e-12)
    with pytest.raises(CollisionError):
        check_collisions(q, tol=1e-9)


def test_f_tilde_zero_entry():
    z = OneCochain(np.array([[1.0], [0.0], [2.0]]), 3)
    with pytest.raises(CollisionError):
        f_tilde(z, Masses.equal(3), PotentialParams())


def test_f_tilde_on_coboundaries():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m, q = _random_problem(rng)
        p = PotentialParams(float(rng.uniform(0.3, 3.0)))
        x = project_to_x(q, m)
        expected = potential_u(x, m, p) + mass_norm_c0(x, m) ** 2
        assert f_tilde(coboundary0(x), m, p) == pytest.approx(expected, rel=1e-12)


def test_grad_matches_finite_differences():
    rng = np.random.default_rng(1)
    for _ in range(20):
        m, q = _random_problem(rng, n=int(rng.integers(2, 6)))
        p = PotentialParams(float(rng.choice([0.5, 1.0, 2.0])))
        scale = np.max(np.abs(q))
        h = 1e-6 * scale
        g = grad_u(q, m, p)
        fd = np.zeros_like(q)
        for idx in np.ndindex(q.shape):
            e = np.zeros_like(q)
            e[idx] = h
            fd[idx] = (potential_u(q + e, m, p) - potential_u(q - e, m, p)) / (2.0 * h)
        assert np.max(np.abs(g - fd)) <= 1e-6 * np.max(np.abs(g))


def test_grad_sums_to_zero():
    rng = np.random.default_rng(2)
    m, q = _random_problem(rng, n=5, d=3)
    g = grad_u(q, m, PotentialParams(1.3))
    assert np.allclose(g.sum(axis=0), 0.0, atol=1e-13 * np.max(np.abs(g)))


def test_lambda_negative_and_invariant():
    rng = np.random.default_rng(3)
    for _ in range(30):
        m, q = _random_problem(rng, n=int(rng.integers(2, 6)), d=int(rng.integers(2, 4)))
        p = PotentialParams(float(rng.uniform(0.3, 3.0)))
        lam = lambda_of(q, m, p)
        assert lam < 0
        shifted = q + rng.standard_normal(q.shape[1])
        rotated = q @ _rotation(rng, q.shape[1]).T
        assert lambda_of(shifted, m, p) == pytest.approx(lam, rel=1e-12)
        assert lambda_of(rotated, m, p) == pytest.approx(lam, rel=1e-12)


def test_lambda_homogeneity():
    m = Masses([1.0, 2.0, 3.0])
    p = PotentialParams(1.5)
    lam = lambda_of(EQUILATERAL, m, p)
    assert lambda_of(2.0 * EQUILATERAL, m, p) == pytest.approx(lam * 2.0 ** (-p.alpha - 2.0), rel=1e-13)


def test_lambda_degenerate():
    with pytest.raises((DegenerateConfigurationError, CollisionError)):
        lambda_of(np.zeros((3, 2)), Masses.equal(3), PotentialParams())


def test_lambda_equilateral_values():
    # side 1, equal masses: U = 3 (1/9) = 1/3, |q|^2 = 1/3
    assert lambda_of(EQUILATERAL, Masses.equal(3), PotentialParams()) == pytest.approx(-1.0, rel=1e-14)
    x = project_to_x(EQUILATERAL, Masses.equal(3))
    x = x / mass_norm_c0(x, Masses.equal(3))
    assert lambda_of(x, Masses.equal(3), PotentialParams()) == pytest.approx(-(3.0 ** -1.5), rel=1e-13)


@settings(max_examples=30)
@given(st.lists(st.floats(0.05, 20.0), min_size=3, max_size=3), st.floats(0.3, 3.0))
def test_equilateral_is_central_for_any_masses(masses, alpha):
    assert cc_residual(EQUILATERAL, Masses(masses), PotentialParams(alpha)).norm <= 1e-12


def test_two_bodies_always_central():
    rng = np.random.default_rng(4)
    for _ in range(20):
        m, q = _random_problem(rng, n=2)
        assert cc_residual(q, m, PotentialParams(float(rng.uniform(0.3, 3.0)))).norm <= 1e-13


def test_random_four_body_not_central():
    rng = np.random.default_rng(5)
    for _ in range(10):
        m, q = _random_problem(rng, n=4, d=2)
        assert cc_residual(q, m, PotentialParams()).norm > 1e-3


def test_residual_is_cocycle_and_scale_free():
    rng = np.random.default_rng(6)
    for _ in range(20):
        m, q = _random_problem(rng, n=int(rng.integers(3, 7)))
        p = PotentialParams(float(rng.uniform(0.3, 3.0)))
        res = cc_residual(q, m, p)
        assert coboundary1(res.cochain).max_norm() <= 1e-12 * max(np.max(res.cochain.norms()), 1e-300) + 1e-14
        assert cc_residual(3.7 * q, m, p).norm == pytest.approx(res.norm, rel=1e-10)


def test_body_residual_bounded_by_cochain_residual():
    rng = np.random.default_rng(7)
    for _ in range(30):
        m, q = _random_problem(rng, n=int(rng.integers(3, 6)))
        p = PotentialParams(float(rng.uniform(0.3, 3.0)))
        res = cc_residual(q, m, p)
        absolute = mass_norm_c1(res.cochain, m)
        e = body_residual(q, m, p)
        weighted = np.sqrt(np.sum(np.sum(e**2, axis=1) / m.values))
        assert weighted == pytest.approx(p.alpha * absolute, rel=1e-9)
        assert np.linalg.norm(e) <= p.alpha * np.sqrt(np.max(m.values)) * absolute * (1 + 1e-12)


def test_body_residual_oracle():
    rng = np.random.default_rng(8)
    m, q = _random_problem(rng, n=4, d=2)
    p = PotentialParams(1.0)
    x = project_to_x(q, m)
    U = sum(m[i] * m[j] / np.linalg.norm(x[i] - x[j]) for i, j in combinations(range(4), 2))
    lam = -U / np.sum(m.values[:, None] * x**2)
    grad = np.zeros_like(x)
    for i in range(4):
        for j in range(4):
            if i != j:
                grad[i] -= m[i] * m[j] * (x[i] - x[j]) / np.linalg.norm(x[i] - x[j]) ** 3
    assert np.allclose(body_residual(q, m, p), lam * m.values[:, None] * x - grad, atol=1e-13)
