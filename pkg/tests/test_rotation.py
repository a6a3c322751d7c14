import math

import numpy as np
import pytest

from crosscavity import d_coeff, d_matrix, d_matrix_table, dbar


def monomial_map_matrix(total, theta):
    """Independent oracle: matrix of the induced map on symmetric monomials.

    Expands (cos t x - sin t y)^m (sin t x + cos t y)^(total-m) and reads the
    coefficient of x^n y^(total-n), rescaled by the Fock normalization.
    """
    c, s = math.cos(theta), math.sin(theta)
    out = np.zeros((total + 1, total + 1))
    for m in range(total + 1):
        poly = np.array([1.0])
        for _ in range(m):
            poly = np.convolve(poly, [c, -s])  # coefficients in descending x power
        for _ in range(total - m):
            poly = np.convolve(poly, [s, c])
        # poly[k] multiplies x^(total-k) y^k; we want x^n y^(total-n)
        for n in range(total + 1):
            coeff = poly[total - n]
            scale = math.sqrt(
                math.factorial(n)
                * math.factorial(total - n)
                / (math.factorial(m) * math.factorial(total - m))
            )
            out[m, n] = coeff * scale
    return out


def test_dbar_hand_values():
    assert dbar(1, 1, 1, 1) == pytest.approx(1.0)
    assert dbar(1, 1, 0, 0) == pytest.approx(-1.0)
    assert dbar(2, 0, 1, 0) == pytest.approx(math.sqrt(2.0))


def test_dbar_range_checks():
    with pytest.raises(ValueError):
        dbar(2, 1, 1, 2)  # q > min(m, n)
    with pytest.raises(ValueError):
        dbar(2, 2, 2, 1)  # q < m + n - total
    with pytest.raises(ValueError):
        dbar(2, 3, 0, 0)  # m outside block


def test_d_coeff_identity_at_zero():
    for total in range(0, 7):
        for m in range(total + 1):
            for n in range(total + 1):
                expected = 1.0 if m == n else 0.0
                assert d_coeff(total, m, n, 0.0) == pytest.approx(expected, abs=1e-14)


def test_d_coeff_one_photon_block():
    for theta in np.linspace(0.0, 2 * math.pi, 9):
        assert d_coeff(1, 1, 0, theta) == pytest.approx(-math.sin(theta), abs=1e-14)
        assert d_coeff(1, 1, 1, theta) == pytest.approx(math.cos(theta), abs=1e-14)
        assert d_coeff(2, 0, 1, theta) == pytest.approx(
            math.sqrt(2.0) * math.cos(theta) * math.sin(theta), abs=1e-14
        )


def test_d_matrix_one_photon():
    theta = 0.37
    expected = np.array(
        [[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]]
    )
    assert np.allclose(d_matrix(1, theta), expected, atol=1e-15)
    sixth = d_matrix(1, math.pi / 6)
    assert np.allclose(
        sixth, [[math.sqrt(3) / 2, 0.5], [-0.5, math.sqrt(3) / 2]], atol=1e-15
    )


def test_d_matrix_vacuum_block():
    assert np.allclose(d_matrix(0, 1.234), [[1.0]])


def test_d_matrix_quarter_turn_antidiagonal():
    for total in range(1, 7):
        mat = np.abs(d_matrix(total, math.pi / 2))
        expected = np.fliplr(np.eye(total + 1))
        assert np.allclose(mat, expected, atol=1e-12)


def test_d_matrix_orthogonality():
    thetas = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)
    for total in range(0, 13):
        for theta in thetas:
            mat = d_matrix(total, float(theta))
            gram = mat @ mat.T
            assert np.max(np.abs(gram - np.eye(total + 1))) < 1e-10


def test_d_matrix_composition_one_photon():
    t1, t2 = 0.4, 1.1
    lhs = d_matrix(1, t1) @ d_matrix(1, t2)
    rhs = d_matrix(1, t1 + t2)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_d_matrix_against_monomial_map():
    thetas = [0.0, 0.3, math.pi / 4, 1.9, math.pi, 5.0]
    for total in range(0, 9):
        for theta in thetas:
            assert np.max(np.abs(d_matrix(total, theta) - monomial_map_matrix(total, theta))) < 1e-10


def test_d_matrix_cached_instance_reused():
    a = d_matrix(3, 0.123)
    b = d_matrix(3, 0.123)
    assert a is b
    assert not a.flags.writeable


def test_d_matrix_table_matches_scalar():
    thetas = np.array([0.1, 0.7, 2.0])
    table = d_matrix_table(2, thetas)
    for k, theta in enumerate(thetas):
        assert np.allclose(table[:, :, k], d_matrix(2, float(theta)), atol=1e-15)
