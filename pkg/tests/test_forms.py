"""Tests for multilinear form extraction and multiplier evaluation."""

import numpy as np
import pytest

from cglforge.forms import eval_cubic, eval_quadratic, forms_from_model
from cglforge.models import builtin_model
from cglforge.symbol import ModelSpec, SemilinearNonlinearity
from cglforge.turing import locate_critical


@pytest.fixture(scope="module")
def bruss():
    model, truth = builtin_model("brusselator")
    point = locate_critical(model, truth.mu_bracket)
    q, c = forms_from_model(model, point)
    return model, point, q, c


@pytest.fixture(scope="module")
def quasi():
    model, truth = builtin_model("quasilinear_demo")
    point = locate_critical(model, truth.mu_bracket)
    q, c = forms_from_model(model, point)
    return model, point, q, c


def semilinear_model_from_callable(func, n=2):
    lin_model, _ = builtin_model("brusselator")
    return ModelSpec(dimension=n, linear=lin_model.linear,
                     nonlinearity=SemilinearNonlinearity(func=func),
                     parameter_name="b")


class TestSemilinearExtraction:
    def test_simple_square(self, bruss):
        # N(u) = (u1^2, 0): Q((a,b),(c,d)) = (ac, 0), C = 0
        _, point, _, _ = bruss
        model = semilinear_model_from_callable(
            lambda u, mu: np.stack([u[0] ** 2, 0.0 * u[1]]))
        q, c = forms_from_model(model, point)
        u = np.array([2.0, 5.0])
        v = np.array([3.0, -1.0])
        np.testing.assert_allclose(eval_quadratic(q, 1, 1, point.k_star, u, v),
                                   [6.0, 0.0], atol=1e-7)
        np.testing.assert_allclose(
            eval_cubic(c, 1, 1, -1, point.k_star, u, v, u), 0.0, atol=1e-6)

    def test_cubic_monomial(self, bruss):
        # N(u) = u^3 on component 1: third derivative 6, Taylor tensor 1
        _, point, _, _ = bruss
        model = semilinear_model_from_callable(
            lambda u, mu: np.stack([u[0] ** 3, 0.0 * u[1]]))
        q, c = forms_from_model(model, point)
        e = np.array([1.0, 0.0])
        np.testing.assert_allclose(eval_quadratic(q, 1, 1, point.k_star, e, e),
                                   0.0, atol=1e-7)
        got = eval_cubic(c, 1, 1, 1, point.k_star, e, e, e)
        np.testing.assert_allclose(got, [1.0, 0.0], atol=1e-6)

    def test_fd_matches_registered_brusselator(self, bruss):
        # Oracle: independent symbolic Taylor expansion of u^2 v about
        # (a, b/a): quadratic (b/a) U1^2 + 2 a U1 U2, cubic U1^2 U2.
        model, point, q_reg, c_reg = bruss
        a, b = 2.0, point.mu_c
        func = model.nonlinearity.func
        fd_model = semilinear_model_from_callable(lambda u, mu: func(u, point.mu_c))
        q_fd, c_fd = forms_from_model(fd_model, point)
        rng = np.random.default_rng(1)
        for _ in range(5):
            u, v, w = rng.standard_normal((3, 2))
            sym_q = ((b / a) * u[0] * v[0] + a * (u[0] * v[1] + u[1] * v[0]))
            np.testing.assert_allclose(
                eval_quadratic(q_reg, 1, -1, point.k_star, u, v),
                [sym_q, -sym_q], atol=1e-12)
            np.testing.assert_allclose(
                eval_quadratic(q_fd, 1, -1, point.k_star, u, v),
                [sym_q, -sym_q], rtol=1e-6, atol=1e-8)
            sym_c = (u[0] * v[0] * w[1] + u[0] * v[1] * w[0]
                     + u[1] * v[0] * w[0]) / 3.0
            np.testing.assert_allclose(
                eval_cubic(c_reg, 1, 1, -1, point.k_star, u, v, w),
                [sym_c, -sym_c], atol=1e-12)
            np.testing.assert_allclose(
                eval_cubic(c_fd, 1, 1, -1, point.k_star, u, v, w),
                [sym_c, -sym_c], rtol=1e-6, atol=1e-8)


class TestQuasilinearMultipliers:
    def test_scalar_flux_multiplier(self, bruss):
        # f(u) = u^2/2 gives the Burgers quadratic u u_x whose symmetric
        # multiplier is i (k1 + k2) u v / 2: check on exponentials against
        # hand differentiation of d_x(u^2/2).
        from cglforge.symbol import PolynomialMap, _quasilinear_from_terms

        _, point, _, _ = bruss
        h_map = PolynomialMap(in_dim=1, out_shape=(1, 1),
                              terms=(((0, 0), (0,), (1.0,)),))
        f_map = PolynomialMap(in_dim=1, out_shape=(1,),
                              terms=(((0,), (2,), (0.5,)),))
        g_map = PolynomialMap(in_dim=1, out_shape=(1,),
                              terms=(((0,), (1,), (-1.0,)),))
        nl = _quasilinear_from_terms(h_map, f_map, g_map, ((0.0,),))
        model = ModelSpec.from_quasilinear(nl, dimension=1)
        point1 = type(point)(k_star=1.0, mu_c=0.0, lam=0j, triple=point.triple,
                             d_lambda_dk=0j, d2_lambda_dk2=-1 + 0j,
                             d_lambda_dmu=1 + 0j)
        q, c = forms_from_model(model, point1)
        for k1, k2 in [(1.0, 2.0), (0.5, -1.3), (2.0, 2.0)]:
            t = q.tensor(k1, k2)
            assert t[0, 0, 0] == pytest.approx(1j * (k1 + k2) / 2.0)

    def test_diagonal_reproduces_flux_quadratic(self, quasi):
        # Sum of the multiplier over ordered frequency pairs must reproduce
        # the pointwise quadratic part of the expanded flux.
        model, point, q, _ = quasi
        nl = model.nonlinearity
        mu = point.mu_c
        u_star = nl.u_star(mu)
        k = point.k_star
        rng = np.random.default_rng(3)
        coeffs = {1: rng.standard_normal(2) + 1j * rng.standard_normal(2)}
        coeffs[-1] = coeffs[1].conj()
        xs = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)

        def field(deriv=0):
            out = np.zeros((2, xs.size), dtype=complex)
            for eta, vec in coeffs.items():
                out += np.outer(vec, (1j * eta * k) ** deriv
                                 * np.exp(1j * eta * k * xs / k))
            return out.real if deriv % 1 == 0 else out

        u = field(0).real
        ux = field(1).real
        uxx = field(2).real
        # direct quadratic part of the flux expansion at u*
        h_u = nl.h_u(u_star, mu)
        f_uu = nl.f_uu(u_star, mu)
        g_uu = nl.g_uu(u_star, mu)
        direct = (np.einsum("ijk,jx,kx->ix", h_u, ux, ux)
                  + np.einsum("ijk,jx,kx->ix", h_u, uxx, u)
                  + np.einsum("ijk,jx,kx->ix", f_uu, ux, u)
                  + 0.5 * np.einsum("ijk,jx,kx->ix", g_uu, u, u))
        # multiplier route on the frequency lattice
        acc = np.zeros((2, xs.size), dtype=complex)
        for e1, v1 in coeffs.items():
            for e2, v2 in coeffs.items():
                t = q.tensor(e1 * k, e2 * k)
                vec = np.einsum("ijk,j,k->i", t, v1, v2)
                acc += np.outer(vec, np.exp(1j * (e1 + e2) * xs))
        np.testing.assert_allclose(acc.imag, 0.0, atol=1e-10)
        np.testing.assert_allclose(acc.real, direct, atol=1e-9)

    def test_k_derivative_matches_fd(self, quasi):
        _, point, q, c = quasi
        k = point.k_star
        h = 1e-6
        fd = (q.tensor(k + h, 2 * k) - q.tensor(k - h, 2 * k)) / (2 * h)
        np.testing.assert_allclose(q.tensor_dk(k, 2 * k, 1, 0), fd, atol=1e-6)
        fd2 = (c.tensor(k, k + h, -k) - c.tensor(k, k - h, -k)) / (2 * h)
        np.testing.assert_allclose(c.tensor_dk(k, k, -k, 0, 1, 0), fd2, atol=1e-6)


class TestMultiplierInvariants:
    @pytest.mark.parametrize("fixture", ["bruss", "quasi"])
    def test_symmetry_and_reality(self, fixture, request):
        model, point, q, c = request.getfixturevalue(fixture)
        rng = np.random.default_rng(7)
        k = point.k_star
        for _ in range(50):
            k1, k2, k3 = rng.uniform(-3, 3, 3)
            u, v, w = (rng.standard_normal((3, 2))
                       + 1j * rng.standard_normal((3, 2)))
            tq = q.tensor(k1, k2)
            # symmetry
            np.testing.assert_allclose(
                np.einsum("ijk,j,k->i", tq, u, v),
                np.einsum("ijk,j,k->i", q.tensor(k2, k1), v, u), atol=1e-10)
            # reality: conj(Q(k1,k2)(u,v)) = Q(-k1,-k2)(conj u, conj v)
            np.testing.assert_allclose(
                np.einsum("ijk,j,k->i", tq, u, v).conj(),
                np.einsum("ijk,j,k->i", q.tensor(-k1, -k2), u.conj(), v.conj()),
                atol=1e-10)
            tc = c.tensor(k1, k2, k3)
            np.testing.assert_allclose(
                np.einsum("ijkl,j,k,l->i", tc, u, v, w).conj(),
                np.einsum("ijkl,j,k,l->i", c.tensor(-k1, -k2, -k3),
                          u.conj(), v.conj(), w.conj()), atol=1e-10)

    def test_cubic_permutation_symmetry(self, quasi):
        _, point, _, c = quasi
        rng = np.random.default_rng(11)
        from itertools import permutations

        k = point.k_star
        args = [(1, rng.standard_normal(2)), (2, rng.standard_normal(2)),
                (-1, rng.standard_normal(2))]
        base = eval_cubic(c, *(a[0] for a in args), k, *(a[1] for a in args))
        for perm in permutations(range(3)):
            ns = [args[p][0] for p in perm]
            vs = [args[p][1] for p in perm]
            np.testing.assert_allclose(
                eval_cubic(c, ns[0], ns[1], ns[2], k, vs[0], vs[1], vs[2]),
                base, atol=1e-12)

    def test_translation_identity(self, quasi):
        # Feeding e^{i n xi} u into the form and reading Fourier mode n1+n2
        # reproduces the multiplier exactly (translation-invariant forms act
        # diagonally on exponentials).
        model, point, q, _ = quasi
        nl = model.nonlinearity
        mu = point.mu_c
        u_star = nl.u_star(mu)
        k = point.k_star
        rng = np.random.default_rng(13)
        n1, n2 = 1, -2
        u1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        u2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        m = 128
        xi = np.linspace(0, 2 * np.pi, m, endpoint=False)
        field = (np.outer(u1, np.exp(1j * n1 * xi))
                 + np.outer(u2, np.exp(1j * n2 * xi)))
        # quadratic part of the flux, evaluated on the complex field, using
        # xi-derivatives scaled by k (x = xi / k)
        dfield = np.gradient  # not used; spectral derivatives below
        modes = np.fft.fft(field, axis=1) / m
        ks = np.fft.fftfreq(m, d=1.0 / m)
        d1 = np.fft.ifft(modes * (1j * ks * k) * m, axis=1)
        d2 = np.fft.ifft(modes * (1j * ks * k) ** 2 * m, axis=1)
        h_u = nl.h_u(u_star, mu)
        f_uu = nl.f_uu(u_star, mu)
        g_uu = nl.g_uu(u_star, mu)
        direct = (np.einsum("ijk,jx,kx->ix", h_u, d1, d1)
                  + np.einsum("ijk,jx,kx->ix", h_u, d2, field)
                  + np.einsum("ijk,jx,kx->ix", f_uu, d1, field)
                  + 0.5 * np.einsum("ijk,jx,kx->ix", g_uu, field, field))
        target_mode = np.fft.fft(direct, axis=1)[:, (n1 + n2) % m] / m
        via_multiplier = (
            np.einsum("ijk,j,k->i", q.tensor(n1 * k, n2 * k), u1, u2)
            + np.einsum("ijk,j,k->i", q.tensor(n2 * k, n1 * k), u2, u1))
        np.testing.assert_allclose(via_multiplier, target_mode, atol=1e-9)

    def test_mean_mode_reality(self, bruss):
        # real bilinear form on (1/2) eps A e^{i xi} r + c.c. contributes a
        # real multiple of |A|^2 at mode zero
        _, point, q, _ = bruss
        r = point.triple.right
        v = 0.25 * (eval_quadratic(q, 1, -1, point.k_star, r, r.conj())
                    + eval_quadratic(q, -1, 1, point.k_star, r.conj(), r))
        assert np.abs(v.imag).max() <= 1e-10
