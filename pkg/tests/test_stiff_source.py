import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cedgrp.stiff_source import (DEFAULT_KIND, InvalidSourceError, SourceOperatorKind,
                                 amplification, amplification_table, apply_time_centering,
                                 g_factor, g_matrix, write_amplification_csv)

KINDS = list(SourceOperatorKind)
EXACT, BE, AVG = SourceOperatorKind.EXACT, SourceOperatorKind.BACKWARD_EULER, \
    SourceOperatorKind.L_STABLE_AVERAGE


def test_default_is_l_stable_average():
    assert DEFAULT_KIND is AVG


def test_parse_kinds():
    assert SourceOperatorKind.parse("Backward_Euler") is BE
    with pytest.raises(InvalidSourceError):
        SourceOperatorKind.parse("crank_nicolson")


@pytest.mark.parametrize("kind", KINDS)
def test_zero_chi(kind):
    assert g_factor(0.0, kind) == 1.0
    assert amplification(0.0, kind) == 1.0


def test_scalar_examples():
    assert g_factor(2.0, AVG) == pytest.approx(0.5 * (math.exp(-1) + 0.5), rel=1e-15)
    assert g_factor(2.0, AVG) == pytest.approx(0.4339397, abs=1e-7)
    assert amplification(2.0, AVG) == pytest.approx(0.1321205, abs=1e-7)
    assert g_factor(2.0, EXACT) == pytest.approx(math.exp(-1), rel=1e-15)
    assert g_factor(2.0, BE) == 0.5


def test_limits_at_chi_40():
    assert amplification(40.0, EXACT) == pytest.approx(1 - 40 * math.exp(-20), rel=1e-15)
    assert amplification(40.0, BE) == pytest.approx(1 - 40 / 21, rel=1e-14)
    assert amplification(40.0, BE) == pytest.approx(-0.9048, abs=1e-4)
    # 1 - 20/21 - 20 e^-20
    assert amplification(40.0, AVG) == pytest.approx(1 / 21 - 20 * math.exp(-20), rel=1e-13)


def test_l_stability():
    for chi in (1e6, 1e8, 1e12):
        assert abs(chi * g_factor(chi, AVG) - 1) < 1e-5
        assert abs(amplification(chi, AVG)) < 1e-5
    assert amplification(1e12, BE) == pytest.approx(-1.0, abs=1e-10)


def test_average_bounded_on_scan():
    chi = np.linspace(0.0, 100.0, 20001)
    assert np.all(np.abs(amplification(chi, AVG)) <= 1.0)


def test_cancellation_free_form_matches_direct():
    chi = np.linspace(0.0, 50.0, 501)
    direct = 1.0 - chi * g_factor(chi, AVG)
    np.testing.assert_allclose(amplification(chi, AVG), direct, rtol=0, atol=1e-14)


@pytest.mark.parametrize("kind, c2", [(EXACT, 1 / 8), (BE, 1 / 4), (AVG, 3 / 16)])
def test_series_coefficients(kind, c2):
    """g = 1 - chi/2 + c2 chi^2 + ...: the first two terms give second order."""
    chi = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
    rem = (g_factor(chi, kind) - 1 + chi / 2) / chi**2
    # Richardson: remove the O(chi) term of the remainder
    est = 2 * rem[1:] - rem[:-1]
    np.testing.assert_allclose(est, c2, rtol=1e-2)
    # local error of G against exp(-chi) is third order
    err = np.abs(amplification(chi, kind) - np.exp(-chi))
    orders = np.log2(err[:-1] / err[1:])
    assert np.all(orders > 2.9)


def test_negative_chi_rejected():
    with pytest.raises(InvalidSourceError):
        g_factor(-1.0)
    with pytest.raises(InvalidSourceError):
        g_factor(np.diag([1.0, -2.0]))


def test_matrix_rules():
    with pytest.raises(InvalidSourceError):
        g_matrix(np.array([[1.0, 0.5], [0.0, 1.0]]))
    d = np.diag([0.0, 1.0, 4.0])
    np.testing.assert_allclose(g_factor(d, BE), np.diag([1.0, 1 / 1.5, 1 / 3.0]), rtol=1e-15)


@given(st.integers(0, 2**31 - 1), st.sampled_from(KINDS))
def test_matrix_function_of_symmetric_blocks(seed, kind):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    lam = rng.uniform(0.0, 50.0, 3)
    blk = q @ np.diag(lam) @ q.T
    chi = np.zeros((6, 6))
    chi[:3, :3] = blk
    chi[3:, 3:] = np.diag(rng.uniform(0, 5, 3))
    got = g_factor(0.5 * (chi + chi.T), kind)
    want = q @ np.diag(g_factor(lam, kind)) @ q.T
    np.testing.assert_allclose(got[:3, :3], want, rtol=0, atol=1e-12)
    np.testing.assert_allclose(got[3:, 3:], np.diag(g_factor(np.diag(chi)[3:], kind)), atol=1e-14)
    assert not np.any(np.abs(got[:3, 3:]) > 1e-14)


def test_apply_time_centering_examples(rng):
    u = rng.normal(size=6)
    np.testing.assert_array_equal(apply_time_centering(u, 0.1, np.zeros((6, 6))), u)
    s = 3.0
    sig = np.zeros((6, 6))
    sig[0, 0] = s
    got = apply_time_centering(u, 0.2, sig)
    chi = 0.2 * s
    assert got[0] == pytest.approx(0.5 * (math.exp(-chi / 2) + 1 / (1 + chi / 2)) * u[0], rel=1e-14)
    np.testing.assert_array_equal(got[1:], u[1:])
    sig[0, 0] = 1e9
    deep = apply_time_centering(u, 1.0, sig)
    assert abs(deep[0]) <= 2.1e-9 * abs(u[0])


def test_apply_time_centering_batched(rng):
    u = rng.normal(size=(6, 4, 3))
    sig = np.diag(rng.uniform(0, 2, 6))
    got = apply_time_centering(u, 0.5, sig)
    np.testing.assert_allclose(got[:, 2, 1], g_factor(0.5 * sig) @ u[:, 2, 1], rtol=1e-14)


def test_amplification_table_and_csv(tmp_path):
    t = amplification_table(40.0, 401)
    assert t.shape == (401, 4)
    assert t[0, 1:].tolist() == [1.0, 1.0, 1.0]
    assert t[-1, 0] == 40.0
    with pytest.raises(InvalidSourceError):
        amplification_table(0.0, 10)
    p = write_amplification_csv(tmp_path / "g.csv", t)
    lines = p.read_text().splitlines()
    assert lines[0] == "# schema: amplification/1"
    assert lines[1] == "chi,G_exact,G_backward_euler,G_l_stable_average"
    back = np.loadtxt(p, delimiter=",", skiprows=2)
    np.testing.assert_allclose(back, t, rtol=1e-11)
    # at least nine significant digits
    assert len(lines[-1].split(",")[1].split("e")[0].replace(".", "").lstrip("-")) >= 9
