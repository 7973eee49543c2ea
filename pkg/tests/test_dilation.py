import numpy as np
import pytest
from numpy.testing import assert_allclose

from rovf.dilation import halmos_dilate, verify_dilation
from rovf.exceptions import NotPositiveContractionError
from rovf.linalg import random_positive_contraction


@pytest.mark.parametrize("d", [1, 3, 6])
def test_zero_contraction(d):
    D = halmos_dilate(np.zeros((d, d)))
    expected = np.zeros((2 * d, 2 * d))
    expected[d:, d:] = np.eye(d)
    assert_allclose(D.projection, expected, atol=1e-15)
    rep = verify_dilation(np.zeros((d, d)), D)
    assert rep.passed
    assert max(rep.isometry_residual, rep.idempotence_residual, rep.compression_residual) == 0.0


@pytest.mark.parametrize("d", [1, 3, 6])
def test_identity_contraction(d):
    D = halmos_dilate(np.eye(d))
    expected = np.zeros((2 * d, 2 * d))
    expected[:d, :d] = np.eye(d)
    assert_allclose(D.projection, expected, atol=1e-15)
    assert verify_dilation(np.eye(d), D).passed


def test_diagonal_block_formula():
    T = np.diag([0.5, 0.25])
    D = halmos_dilate(T)
    S = D.projection[:2, 2:]
    # sqrt(1/2 * 1/2) = 1/2, sqrt(1/4 * 3/4) = sqrt(3)/4
    assert_allclose(S, np.diag([0.5, np.sqrt(3) / 4]), atol=1e-15)
    P = D.projection
    assert np.linalg.norm(P @ P - P) <= 1e-10
    assert np.linalg.norm(D.compress() - T) <= 1e-10


def test_random_sweep(rng):
    for _ in range(1000):
        d = int(rng.integers(1, 7))
        T = random_positive_contraction(d, rng)
        D = halmos_dilate(T)
        rep = verify_dilation(T, D, 1e-10)
        assert rep.passed, rep
        assert rep.isometry_residual <= 1e-12
        x = rng.standard_normal(d)
        a, b, xx = D.certificate(x)
        assert abs(a + b - xx) <= 1e-10 * xx
        # the inequality chain of the dilation argument
        Tx = T @ x
        assert Tx @ Tx <= a + 1e-12 * xx
        assert (x - Tx) @ (x - Tx) <= b + 1e-12 * xx


def test_clamping_is_recorded():
    T = np.diag([-5e-10, 1 + 5e-10])
    D = halmos_dilate(T)
    assert D.clamp == pytest.approx(5e-10, rel=1e-3)
    assert verify_dilation(T, D, 1e-9).passed


def test_rejects_non_contraction():
    with pytest.raises(NotPositiveContractionError):
        halmos_dilate(1.5 * np.eye(2))


def test_report_json():
    T = np.eye(2) / 3
    out = verify_dilation(T, halmos_dilate(T)).to_json()
    assert out["pass"] is True
    assert set(out) == {"isometry_residual", "idempotence_residual", "compression_residual", "tol", "pass"}
