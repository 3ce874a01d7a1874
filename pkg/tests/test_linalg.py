"""Tests for the eigen-perturbation linear algebra layer."""

import numpy as np
import pytest

from cglforge.errors import NonSimpleEigenvalue, SingularMatrix
from cglforge.linalg import (
    eigen_triple,
    eigenvalue_curvature,
    inverse_norm,
    reduced_resolvent,
)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def tracked_eigenvalue(m, reference_value, reference_vector):
    """Eigenvalue of m nearest to a reference, with eigenvector overlap guard."""
    values, vectors = np.linalg.eig(m)
    order = np.argsort(np.abs(values - reference_value))
    for idx in order:
        v = vectors[:, idx]
        overlap = abs(np.vdot(v, reference_vector)) / (
            np.linalg.norm(v) * np.linalg.norm(reference_vector)
        )
        if overlap > 0.9:
            return values[idx], v
    raise AssertionError("no eigenvalue with sufficient eigenvector overlap")


class TestEigenTriple:
    def test_diagonal_largest_real(self):
        t = eigen_triple(np.diag([-1.0, -2.0]), which="largest_real")
        assert t.value == pytest.approx(-1.0)
        assert np.allclose(t.right, [1.0, 0.0])
        assert np.allclose(t.left, [1.0, 0.0])
        assert t.normalization == pytest.approx(1.0)

    def test_rotation_matrix_target(self):
        m = np.array([[0.0, 1.0], [-1.0, 0.0]])
        t = eigen_triple(m, which=1j)
        assert t.value == pytest.approx(1j)
        assert t.left @ t.right == pytest.approx(1.0)

    def test_similarity_transform_recovery(self):
        # M = V D V^{-1} with known D: eigenpairs must match V's columns/rows.
        rng = np.random.default_rng(7)
        d = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
        v = random_complex(rng, 5, 5)
        m = v @ d @ np.linalg.inv(v)
        for j, lam in enumerate([1.0, 2.0, 3.0, 4.0, 5.0]):
            t = eigen_triple(m, which=lam)
            assert t.value == pytest.approx(lam, rel=1e-9)
            col = v[:, j]
            # Right vector parallel to the planted column.
            cosang = abs(np.vdot(t.right, col)) / (
                np.linalg.norm(t.right) * np.linalg.norm(col)
            )
            assert cosang == pytest.approx(1.0, abs=1e-9)

    def test_residual_invariants(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            m = random_complex(rng, 4, 4)
            t = eigen_triple(m, which="largest_real")
            res_r, res_l = t.residuals(m)
            scale = np.linalg.norm(m, 2)
            assert res_r <= 1e-10 * scale
            assert res_l <= 1e-10 * scale
            assert t.left @ t.right == pytest.approx(1.0, abs=1e-12)
            j = np.argmax(np.abs(t.right))
            assert t.right[j].imag == pytest.approx(0.0, abs=1e-13)
            assert t.right[j].real > 0

    def test_non_simple_rejected(self):
        with pytest.raises(NonSimpleEigenvalue):
            eigen_triple(np.diag([1.0, 1.0 + 1e-12, 3.0]), which=1.0)

    def test_defective_rejected(self):
        # Jordan block: eigenvalues split by roundoff but vectors collapse.
        m = np.array([[1.0, 1.0], [0.0, 1.0 + 1e-9]])
        with pytest.raises(NonSimpleEigenvalue):
            eigen_triple(m, which=1.0)


class TestInverseNorm:
    def test_identity(self):
        assert inverse_norm(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert inverse_norm(np.diag([3.0, 0.5])) == pytest.approx(2.0)

    def test_matches_explicit_inverse(self):
        # Oracle: direct 2-norm of the explicitly computed inverse.
        rng = np.random.default_rng(11)
        for _ in range(25):
            m = random_complex(rng, 6, 6) + 3.0 * np.eye(6)
            direct = np.linalg.norm(np.linalg.inv(m), 2)
            assert inverse_norm(m) == pytest.approx(direct, rel=1e-11)

    def test_product_with_sigma_min_is_one(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            m = random_complex(rng, 6, 6) + 2.0 * np.eye(6)
            smin = np.linalg.svd(m, compute_uv=False)[-1]
            assert abs(inverse_norm(m) * smin - 1.0) <= 1e-12

    def test_singular_raises(self):
        m = np.diag([1.0, 0.0])
        with pytest.raises(SingularMatrix):
            inverse_norm(m)


def planted_zero_family(rng, n=4):
    """Random family M(x) = M0 + x M1 + x^2 M2 with a simple zero eigenvalue
    of M0 planted by construction."""
    d = np.diag(np.concatenate([[0.0], -1.0 - rng.random(n - 1)]))
    v = random_complex(rng, n, n) + 2.0 * np.eye(n)
    m0 = v @ d @ np.linalg.inv(v)
    m1 = random_complex(rng, n, n)
    m2 = random_complex(rng, n, n)
    return m0, m1, m2


class TestEigenvalueCurvature:
    def test_two_by_two_closed_form(self):
        # characteristic polynomial lambda(1+lambda) - x^2 = 0 gives
        # lambda(x) = x^2 + O(x^4), so lambda''(0) = 2.
        m0 = np.diag([0.0, -1.0])
        m1 = np.array([[0.0, 1.0], [1.0, 0.0]])
        m2 = np.zeros((2, 2))
        t = eigen_triple(m0, which=0.0)
        assert eigenvalue_curvature(m0, m1, m2, t) == pytest.approx(2.0)

    def test_no_first_order_coupling(self):
        rng = np.random.default_rng(21)
        m0, _, m2 = planted_zero_family(rng)
        t = eigen_triple(m0, which=0.0)
        expected = 2.0 * (t.left @ m2 @ t.right)
        got = eigenvalue_curvature(m0, np.zeros_like(m0), m2, t)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_gauge_invariance(self):
        rng = np.random.default_rng(22)
        m0, m1, m2 = planted_zero_family(rng)
        t = eigen_triple(m0, which=0.0)
        base = eigenvalue_curvature(m0, m1, m2, t)
        for _ in range(10):
            c = random_complex(rng)
            scaled = type(t)(value=t.value, right=t.right / c, left=t.left * c,
                             normalization=t.normalization)
            assert eigenvalue_curvature(m0, m1, m2, scaled) == pytest.approx(
                base, rel=1e-10)

    def test_matches_finite_differences(self):
        # Oracle: centered second difference of the tracked eigenvalue.
        rng = np.random.default_rng(23)
        h = 1e-4
        for _ in range(100):
            m0, m1, m2 = planted_zero_family(rng)
            t = eigen_triple(m0, which=0.0)
            formula = eigenvalue_curvature(m0, m1, m2, t)
            lam_p, _ = tracked_eigenvalue(m0 + h * m1 + h * h * m2, 0.0, t.right)
            lam_m, _ = tracked_eigenvalue(m0 - h * m1 + h * h * m2, 0.0, t.right)
            fd = (lam_p - 2.0 * t.value + lam_m) / h**2
            assert abs(formula - fd) <= 1e-5 * max(abs(formula), 1.0)


class TestReducedResolvent:
    def test_invariants(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            m0, _, _ = planted_zero_family(rng)
            t = eigen_triple(m0, which=0.0)
            res = reduced_resolvent(m0, t)
            n = m0.shape[0]
            pi = res.projector
            q = np.eye(n) - pi
            nmat = res.inverse_on_range
            scale = np.linalg.norm(m0)
            assert np.linalg.norm(nmat @ q @ m0 @ q - q) <= 1e-10 * scale
            assert np.linalg.norm(pi @ nmat) <= 1e-10 * scale
            assert np.linalg.norm(nmat @ pi) <= 1e-10 * scale
