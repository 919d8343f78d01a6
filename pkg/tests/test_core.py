import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cedgrp.core import (NORMALIZED, SI, InvalidMaterialError, MaterialTensors, axis_speed,
                         build_characteristic_matrices, eigendecompose_axis, fields_from_state,
                         flux, matvec)

from conftest import random_diagonal_material

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
state6 = arrays(np.float64, 6, elements=finite)


def flux_by_hand(u, mat, axis):
    """Component-wise flux vectors of the curl system."""
    e = mat.eps_inv @ u[:3]
    h = mat.mu_inv @ u[3:]
    ex, ey, ez = e
    hx, hy, hz = h
    if axis == 0:
        return np.array([0.0, hz, -hy, 0.0, -ez, ey])
    if axis == 1:
        return np.array([-hz, 0.0, hx, ez, 0.0, -ex])
    return np.array([hy, -hx, 0.0, -ey, ex, 0.0])


def test_constants_light_speed():
    for k in (SI, NORMALIZED):
        assert k.c**2 * k.eps0 * k.mu0 == pytest.approx(1.0, rel=1e-15)
    assert SI.c == pytest.approx(2.99792458e8, rel=1e-12)


def test_vacuum_matrix_examples():
    cm = build_characteristic_matrices(MaterialTensors.vacuum(NORMALIZED))
    e = np.eye(6)
    np.testing.assert_array_equal(cm.A @ e[5], [0, 1, 0, 0, 0, 0])
    np.testing.assert_array_equal(cm.A @ e[4], [0, 0, -1, 0, 0, 0])
    np.testing.assert_array_equal(cm.Sigma, np.zeros((6, 6)))


def test_own_normal_rows_vanish(rng):
    cm = build_characteristic_matrices(random_diagonal_material(rng))
    for a, m in enumerate((cm.A, cm.B, cm.C)):
        assert not np.any(m[a]) and not np.any(m[3 + a])


@given(state6, st.integers(0, 2**31 - 1))
def test_flux_matches_component_form(u, seed):
    rng = np.random.default_rng(seed)
    mat = random_diagonal_material(rng)
    cm = build_characteristic_matrices(mat)
    for a in range(3):
        want = flux_by_hand(u, mat, a)
        got = cm.along(a) @ u
        np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-13 * (1 + np.abs(u).max()))
        np.testing.assert_allclose(flux(u, mat, a), want, rtol=1e-13, atol=1e-12)


def test_sigma_acts_on_b_with_mu():
    mat = MaterialTensors.diagonal((2, 2, 2), (4, 4, 4), sigma=3.0, sigma_star=5.0,
                                   constants=NORMALIZED)
    s = build_characteristic_matrices(mat).Sigma
    np.testing.assert_allclose(np.diag(s), [1.5] * 3 + [1.25] * 3)


@given(state6, st.integers(0, 2**31 - 1))
def test_sigma_positive_semidefinite(u, seed):
    mat = random_diagonal_material(np.random.default_rng(seed), lossy=True)
    s = build_characteristic_matrices(mat).Sigma
    assert u @ s @ u >= -1e-12 * (u @ u)


def test_invalid_materials():
    with pytest.raises(InvalidMaterialError):
        MaterialTensors(np.diag([1.0, -1.0, 1.0]), np.eye(3))
    with pytest.raises(InvalidMaterialError):
        MaterialTensors(np.eye(3), np.eye(3), sigma=-1.0)
    with pytest.raises(InvalidMaterialError):
        MaterialTensors(np.array([[1.0, 0.5, 0], [0, 1, 0], [0, 0, 1]]), np.eye(3))


def test_eigen_vacuum_x():
    eig = eigendecompose_axis(build_characteristic_matrices(MaterialTensors.vacuum(NORMALIZED)), "x")
    np.testing.assert_allclose(eig.lam, [-1, -1, 0, 0, 1, 1], atol=1e-14)
    assert eig.m_split == 1 or eig.m_split == 2
    assert np.count_nonzero(eig.zero_mask()) == 2


def test_eigen_dielectric_speeds():
    mat = MaterialTensors.isotropic(eps_r=2.25, constants=SI)
    eig = eigendecompose_axis(build_characteristic_matrices(mat), "x")
    assert eig.lam[-1] == pytest.approx(SI.c / 1.5, rel=1e-12)
    assert eig.lam[0] == pytest.approx(-SI.c / 1.5, rel=1e-12)


@pytest.mark.parametrize("axis", ["x", "y", "z"])
def test_eigen_invariants_random(rng, axis):
    for _ in range(20):
        mat = random_diagonal_material(rng)
        cm = build_characteristic_matrices(mat)
        m = cm.along(axis)
        eig = eigendecompose_axis(cm, axis)
        np.testing.assert_allclose(eig.left @ eig.right.T, np.eye(6), atol=1e-12)
        for i in range(6):
            np.testing.assert_allclose(m @ eig.right[i], eig.lam[i] * eig.right[i],
                                       atol=1e-12 * np.abs(m).max())
        recon = sum(eig.lam[i] * np.outer(eig.right[i], eig.left[i]) for i in range(6))
        np.testing.assert_allclose(recon, m, atol=1e-11 * np.abs(m).max())
        a = "xyz".index(axis)
        s = np.sqrt(np.array([mat.mu_inv[(a + 2) % 3, (a + 2) % 3] * mat.eps_inv[(a + 1) % 3, (a + 1) % 3],
                              mat.mu_inv[(a + 1) % 3, (a + 1) % 3] * mat.eps_inv[(a + 2) % 3, (a + 2) % 3]]))
        np.testing.assert_allclose(sorted(np.abs(eig.lam[[0, 1]])), sorted(s), rtol=1e-12)
        assert axis_speed(mat, axis) == pytest.approx(s.max(), rel=1e-13)


def test_eigen_general_symmetric(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    eps_inv = q @ np.diag([1.0, 0.5, 0.25]) @ q.T
    mat = MaterialTensors(eps_inv, np.eye(3))
    cm = build_characteristic_matrices(mat)
    eig = eigendecompose_axis(cm, "y")
    np.testing.assert_allclose(eig.left @ eig.right.T, np.eye(6), atol=1e-11)
    assert np.count_nonzero(eig.zero_mask()) == 2
    assert axis_speed(mat, "y") == pytest.approx(np.abs(eig.lam).max(), rel=1e-10)


def test_batched_eigensystem(rng):
    mats = [random_diagonal_material(rng) for _ in range(4)]
    batch = MaterialTensors(np.stack([m.eps_inv for m in mats], -1),
                            np.stack([m.mu_inv for m in mats], -1))
    eig = eigendecompose_axis(build_characteristic_matrices(batch), "x")
    for k, m in enumerate(mats):
        single = eigendecompose_axis(build_characteristic_matrices(m), "x")
        np.testing.assert_allclose(eig.lam[..., k], single.lam, rtol=1e-12, atol=1e-14)


def test_fields_from_state_examples():
    e, h, j, m = fields_from_state(np.array([1.0, 0, 0, 0, 0, 0]), MaterialTensors.vacuum(NORMALIZED))
    np.testing.assert_allclose(e, [1, 0, 0])
    mat = MaterialTensors.isotropic(eps_r=2.25, constants=SI)
    e, *_ = fields_from_state(np.array([2.25 * SI.eps0, 0, 0, 0, 0, 0]), mat)
    np.testing.assert_allclose(e, [1, 0, 0], rtol=1e-14)
    cu = MaterialTensors.isotropic(sigma=5.9e7, constants=SI)
    _, _, j, _ = fields_from_state(np.array([SI.eps0, 0, 0, 0, 0, 0]), cu)
    np.testing.assert_allclose(j, [5.9e7, 0, 0], rtol=1e-14)


def test_matvec_batched(rng):
    m = rng.normal(size=(6, 6, 5))
    u = rng.normal(size=(6, 5))
    got = matvec(m, u)
    for k in range(5):
        np.testing.assert_allclose(got[:, k], m[..., k] @ u[:, k], rtol=1e-13)
