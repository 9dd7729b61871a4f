import math

import numpy as np
import pytest

import landis_lab as ll


def test_laplacian_quasi_balls_are_disks():
    s = ll.GridSpec.centered(2.0, 64)
    F = ll.fundamental_solution(ll.CoefficientField.identity(s), 1.8)
    assert F.closed_form
    atlas = ll.QuasiBallAtlas(F, [0.5, 1.0])
    assert atlas.sigma_hat(1.0) == pytest.approx(1.0, abs=1e-9)
    assert atlas.rho_hat(1.0) == pytest.approx(1.0, abs=1e-9)
    ring = atlas.circle(0.5)
    assert ring.shape[1] == 2
    assert np.allclose(np.hypot(ring[:, 0], ring[:, 1]), 0.5)


def test_beltrami_bound_and_hat_matrix():
    eta, nu = ll.eta_nu(ll.Mat2(2.0, 0.0, 0.5))
    assert abs(eta) + abs(nu) <= (1 - 0.5) / 1.5 + 1e-12
    m = ll.hat_matrix(0.1, 0.2)
    assert m.det() == pytest.approx(1.0)


def test_solve_and_multiplier():
    s = ll.GridSpec.centered(1.0, 32)
    A = ll.CoefficientField.sample(ll.CoefficientFamily.trig(0.5, 1.0, 2), s)
    P = ll.PotentialField.sample(ll.PotentialFamily.random(4.0, 3), s)
    bd = ll.field_from_function(s, lambda x, y: 1.0 + x * y)
    u = ll.solve_dirichlet(A, P, ll.Variant.electric, bd)
    r = ll.apply_operator(A, P, ll.Variant.electric, u).numpy()
    assert np.abs(r[1:-1, 1:-1]).max() < 1e-8
    m = ll.positive_multiplier(A, P, ll.Variant.electric)
    assert m.min_phi > 0


def test_three_circle_equality_for_powers():
    s = ll.GridSpec.centered(2.0, 128)
    atlas = ll.QuasiBallAtlas(ll.fundamental_solution(ll.CoefficientField.identity(s), 1.8), [1.0, 1.2, 1.4])
    z = s.x[None, :] + 1j * s.y[:, None]
    t = ll.three_quasi_circle(ll.ComplexField(s, z**3), atlas, 1.0, 1.2, 1.4)
    assert abs(t.rel_defect) < 1e-6


def test_cauchy_transform_of_one_is_conj_z():
    s = ll.GridSpec.centered(1.1, 64)
    T1 = ll.cauchy_T(ll.ComplexField(s, np.ones((65, 65), dtype=complex))).numpy()
    z = s.x[None, :] + 1j * s.y[:, None]
    inside = np.abs(z) <= 0.9
    assert np.abs(T1 - np.conj(z))[inside].max() < 5e-3


def test_hypothesis_errors_surface():
    s = ll.GridSpec.centered(1.0, 8)
    with pytest.raises(ll.GridMismatch):
        ll.ScalarField(s, np.zeros((3, 3)))
    assert ll.loglog_slope([1, 4], [1, 2]) == pytest.approx(0.5)


def test_landis_scan_constant():
    s = ll.GridSpec.centered(8.0, 64)
    scan = ll.landis_scan(ll.ScalarField(s, np.ones((65, 65))), [2.0, 4.0])
    assert [r.inf_sup for r in scan.rows] == [1.0, 1.0]
    assert math.isclose(scan.C_envelope, 0.0, abs_tol=1e-15)
