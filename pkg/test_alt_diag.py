#!/usr/bin/env python3
"""
Alternative diagonalization tests

Phase system algebra, the doublet eta rotation, SU(2) irrep membership of
the solved basis change and agreement with the principal-axes procedure.
"""

import numpy as np
import pytest

import src.alt_diag
from src.alt_diag import (
    alt_diagonalize,
    cross_validate,
    irrep_membership,
    phase_system_determinant,
    phase_system_matrix,
    solve_doublet_eta,
    solve_phase_system,
)
from src.errors import ModelViolationError, NumericalError, PreconditionError
from src.gtensor_core import ZeemanTriple, build_zeeman, transform_zeeman
from src.modelgen import FixtureSpec, random_g
from src.rng import make_rng, spawn_seeds
from src.spin_algebra import AxisAngle, SpinQuantum, random_axis_angle, so3_rotation, spin_matrices, su_rotation

Z = np.array([0.0, 0.0, 1.0])


def _wrap_pi(x: float) -> float:
    """Distance of x from the nearest multiple of pi."""
    r = np.mod(x, np.pi)
    return min(r, np.pi - r)


def test_phase_system_matrix_doublet():
    assert np.array_equal(phase_system_matrix(2), [[1, -1], [1, 1]])


@pytest.mark.parametrize("m", range(2, 17))
def test_phase_system_is_nonsingular(m):
    assert phase_system_determinant(m) == m
    assert np.linalg.det(phase_system_matrix(m)) == pytest.approx(m, rel=1e-12)


def test_phase_system_doublet_solution():
    beta, gamma = 0.8, -0.3
    alphas = solve_phase_system([beta], gamma)
    assert np.allclose(alphas, [(beta - gamma) / 2, (-beta - gamma) / 2], atol=1e-15)


def test_phase_system_random():
    rng = make_rng(8)
    for i in range(50):
        m = 2 + i % 15
        betas = rng.uniform(-np.pi, np.pi, m - 1)
        gamma = rng.uniform(-np.pi, np.pi)
        alphas = solve_phase_system(betas, gamma)
        assert np.max(np.abs(alphas[:-1] - alphas[1:] - betas)) <= 1e-10
        assert abs(np.sum(alphas) + gamma) <= 1e-10


def test_solve_doublet_eta_recovers_rotation():
    g = np.diag([2.1, 1.9, 2.0])
    for eta0 in (0.3, -1.1, 2.5):
        rz = so3_rotation(AxisAngle(abs(eta0), np.sign(eta0) * Z))
        eta, residual = solve_doublet_eta(g @ rz)
        assert _wrap_pi(eta + eta0) <= 1e-12
        assert residual <= 1e-12


@pytest.mark.parametrize("two_s", [1, 2, 3, 4])
def test_alt_diag_on_diagonal_g(two_s, c):
    sm = spin_matrices(SpinQuantum(two_s))
    g = np.diag([2.0023, 2.1, 1.9])
    res = alt_diagonalize(build_zeeman(g, sm, c), sm, c)
    assert res.residual <= 1e-12
    assert np.allclose(res.g_values, [2.0023, 2.1, 1.9], atol=1e-10)
    assert np.max(np.abs(res.u - np.diag(np.diag(res.u)))) <= 1e-10
    assert np.allclose(np.abs(np.diag(res.u)), 1.0, atol=1e-10)
    assert abs(np.linalg.det(res.u) - 1.0) <= 1e-10
    assert not res.fallback
    assert res.g33_residual <= 1e-10
    assert res.frame_residual <= 1e-10


def test_alt_diag_undoes_sz_scramble(c):
    sm = spin_matrices(SpinQuantum(1))
    g = np.diag([2.1, 1.9, 2.0])
    eta0 = 0.6
    zt = transform_zeeman(build_zeeman(g, sm, c), su_rotation(sm, AxisAngle(eta0, Z)))
    res = alt_diagonalize(zt, sm, c)
    assert res.eta is not None
    assert res.eta_residual <= 1e-9
    assert np.allclose(res.g_values, [2.1, 1.9, 2.0], atol=1e-10)
    assert res.residual <= 1e-10
    undo = su_rotation(sm, AxisAngle(eta0, -Z))
    assert min(np.max(np.abs(res.u - undo)), np.max(np.abs(res.u + undo))) <= 1e-8


def test_alt_diag_result_invariants(c):
    for two_s in (1, 2, 3, 4):
        sm = spin_matrices(SpinQuantum(two_s))
        for seed in spawn_seeds(two_s, 10):
            report = cross_validate(random_g(FixtureSpec(seed, sm.s)), sm, c)
            res = report.alternative
            assert np.max(np.abs(res.u.conj().T @ res.u - np.eye(sm.s.m))) <= 1e-11
            assert abs(np.linalg.det(res.u) - 1.0) <= 1e-10
            assert res.residual <= 1e-9
            assert res.irrep_residual <= 1e-8
            if two_s == 1:
                assert res.eta_residual <= 1e-9


@pytest.mark.parametrize("two_s", [1, 2, 3])
def test_cross_validate_principal_fixture(two_s, c):
    sm = spin_matrices(SpinQuantum(two_s))
    report = cross_validate(np.diag([2.0023, 2.1, 1.9]), sm, c)
    assert np.allclose(np.abs(report.principal.g_values), [2.1, 2.0023, 1.9], atol=1e-10)
    assert np.allclose(np.abs(report.alternative.g_values), [2.1, 2.0023, 1.9], atol=1e-10)
    assert report.max_deviation <= 1e-10
    assert report.det_sign_agrees


@pytest.mark.parametrize("two_s", [1, 2, 3])
def test_cross_validate_random_population(two_s, c):
    sm = spin_matrices(SpinQuantum(two_s))
    for seed in spawn_seeds(1000 + two_s, 100):
        report = cross_validate(random_g(FixtureSpec(seed, sm.s)), sm, c)
        assert report.max_deviation <= 1e-9
        assert report.det_sign_agrees


def test_cross_validate_negative_determinant(c):
    sm = spin_matrices(SpinQuantum(1))
    for seed in range(5):
        report = cross_validate(random_g(FixtureSpec(seed, sm.s, det_sign=-1)), sm, c)
        assert report.principal.det_sign == -1
        assert report.alternative.det_sign == -1


def test_cross_validate_singular(c):
    sm = spin_matrices(SpinQuantum(2))
    report = cross_validate(random_g(FixtureSpec(4, sm.s, singular_rows=1)), sm, c)
    assert report.principal.singular
    assert report.alternative.fallback
    assert report.alternative.singular


def test_zero_row_fallback(c):
    sm = spin_matrices(SpinQuantum(1))
    res = alt_diagonalize(build_zeeman(np.diag([2.0, 1.9, 0.0]), sm, c), sm, c)
    assert res.fallback
    assert res.singular
    assert res.det_sign == 1
    assert res.residual <= 1e-9
    assert np.allclose(res.g_values, [2.0, 1.9, 0.0], atol=1e-10)


def test_precondition_g_not_diagonal(c):
    sm = spin_matrices(SpinQuantum(1))
    g = random_g(FixtureSpec(3, sm.s))
    with pytest.raises(PreconditionError):
        alt_diagonalize(build_zeeman(g, sm, c), sm, c)


def test_model_violation_nonlinear_term(c):
    sm = spin_matrices(SpinQuantum(3))
    zt = build_zeeman(np.diag([2.1, 1.9, 2.0]), sm, c)
    cubic = ZeemanTriple(sm.s, zt.hx, zt.hy, zt.hz + 1e-3 * np.linalg.matrix_power(sm.sz, 3))
    with pytest.raises(ModelViolationError):
        alt_diagonalize(cubic, sm, c)


def test_irrep_membership_snaps_global_phase(sm):
    rng = make_rng(61)
    m = sm.s.m
    aa = random_axis_angle(rng, theta_max=3.0)
    v = su_rotation(sm, aa)
    check = irrep_membership(v * np.exp(2j * np.pi / m), sm)
    assert check.phase_index == 1
    assert check.residual <= 1e-10
    assert np.max(np.abs(check.u - v)) <= 1e-10


def test_irrep_membership_rejects_non_member():
    sm = spin_matrices(SpinQuantum(2))
    u = np.diag([1.0, 1j, -1j])
    assert irrep_membership(u, sm).residual > 1e-3


def test_doublet_eta_residual_is_enforced(c, monkeypatch):
    sm = spin_matrices(SpinQuantum(1))
    zt = build_zeeman(np.diag([2.1, 1.9, 2.0]), sm, c)
    monkeypatch.setattr(src.alt_diag, "solve_doublet_eta", lambda g: (0.0, 1e-3))
    with pytest.raises(NumericalError):
        alt_diagonalize(zt, sm, c)


def test_solve_doublet_eta_picks_positive_branch():
    g = np.diag([-2.0, -1.5, 2.0])
    eta, residual = solve_doublet_eta(g)
    assert eta == pytest.approx(np.pi)
    rotated = g @ so3_rotation(AxisAngle(eta, Z))
    assert rotated[0, 0] > 0
    assert residual <= 1e-12
