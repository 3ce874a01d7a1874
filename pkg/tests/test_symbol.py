"""Tests for model specification and Fourier-symbol assembly."""

import json

import numpy as np
import pytest

from cglforge.errors import ModelFormatError, NonlocalUnsupported
from cglforge.symbol import (
    LocalLinearPart,
    ModelSpec,
    PolynomialMap,
    SemilinearNonlinearity,
    assemble_symbol,
    load_model,
    model_from_dict,
    symbol_derivative,
    symbol_on_grid,
    tail_symbol,
)


def scalar_m2_model():
    """Scalar u_t = -u + u_xx: L0 = -1, L1 = 0, L2 = 1, so S(k) = -1 - k^2."""
    lin = LocalLinearPart(matrices=(
        lambda mu: np.array([[-1.0]]),
        lambda mu: np.array([[0.0]]),
        lambda mu: np.array([[1.0]]),
    ))
    nl = SemilinearNonlinearity(func=lambda u, mu: 0.0 * u)
    return ModelSpec(dimension=1, linear=lin, nonlinearity=nl)


def random_local_model(rng, n=3, m=3):
    mats = []
    coeff_sets = [
        (rng.standard_normal((n, n)), rng.standard_normal((n, n)))
        for _ in range(m + 1)
    ]
    for c0, c1 in coeff_sets:
        mats.append(lambda mu, c0=c0, c1=c1: c0 + mu * c1)
    lin = LocalLinearPart(matrices=tuple(mats))
    nl = SemilinearNonlinearity(func=lambda u, mu: 0.0 * u)
    return ModelSpec(dimension=n, linear=lin, nonlinearity=nl)


class TestAssembleSymbol:
    def test_scalar_m2(self):
        model = scalar_m2_model()
        s = assemble_symbol(model, 1.0, 0.0)
        assert s.matrix[0, 0] == pytest.approx(-2.0)

    def test_zero_frequency_is_l0(self):
        rng = np.random.default_rng(0)
        model = random_local_model(rng)
        mu = 0.37
        s = assemble_symbol(model, 0.0, mu)
        np.testing.assert_allclose(s.matrix, model.linear.coefficient(0, mu))

    def test_brusselator_against_hand_rolled(self):
        # Independent re-implementation of the classic 2x2 dispersion matrix:
        # S(k, b) = [[b - 1 - D1 k^2, a^2], [-b, -a^2 - D2 k^2]].
        from cglforge.models import builtin_model

        a, d1, d2 = 2.0, 1.0, 16.0
        model, _ = builtin_model("brusselator")
        for k in np.linspace(0.0, 4.0, 100):
            for b in (1.9, 2.25, 2.6):
                expected = np.array([
                    [b - 1.0 - d1 * k**2, a**2],
                    [-b, -(a**2) - d2 * k**2],
                ])
                got = assemble_symbol(model, k, b).matrix
                np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(5)
        model = random_local_model(rng)
        for _ in range(20):
            k = rng.uniform(-3, 3)
            mu = rng.uniform(-1, 1)
            sp = assemble_symbol(model, k, mu).matrix
            sm = assemble_symbol(model, -k, mu).matrix
            np.testing.assert_allclose(sm, sp.conj(), atol=1e-12)

    def test_grid_matches_pointwise(self):
        rng = np.random.default_rng(6)
        model = random_local_model(rng)
        ks = np.linspace(-2, 5, 17)
        stack = symbol_on_grid(model, ks, 0.3)
        for i, k in enumerate(ks):
            np.testing.assert_allclose(
                stack[i], assemble_symbol(model, k, 0.3).matrix, atol=1e-12)


class TestSymbolDerivative:
    def test_scalar_dk(self):
        model = scalar_m2_model()
        # d/dk (-1 - k^2) = -2k
        assert symbol_derivative(model, 1.0, 0.0, dk=1)[0, 0] == pytest.approx(-2.0)

    def test_second_k_derivative_constant(self):
        rng = np.random.default_rng(7)
        model = random_local_model(rng, n=2, m=2)
        mu = 0.1
        l2 = model.linear.coefficient(2, mu)
        for k in (0.0, 0.7, 2.1):
            np.testing.assert_allclose(
                symbol_derivative(model, k, mu, dk=2), -2.0 * l2, atol=1e-12)

    @pytest.mark.parametrize("dk,dmu", [(1, 0), (2, 0), (0, 1)])
    def test_matches_finite_differences(self, dk, dmu):
        rng = np.random.default_rng(8)
        model = random_local_model(rng)
        k, mu = 0.9, 0.25
        got = symbol_derivative(model, k, mu, dk=dk, dmu=dmu)
        h = 1e-5
        if dmu == 1:
            fd = (symbol_on_grid(model, [k], mu + h)[0]
                  - symbol_on_grid(model, [k], mu - h)[0]) / (2 * h)
        elif dk == 1:
            fd = (assemble_symbol(model, k + h, mu).matrix
                  - assemble_symbol(model, k - h, mu).matrix) / (2 * h)
        else:
            fd = (assemble_symbol(model, k + h, mu).matrix
                  - 2 * assemble_symbol(model, k, mu).matrix
                  + assemble_symbol(model, k - h, mu).matrix) / h**2
        scale = max(np.abs(got).max(), 1.0)
        assert np.abs(got - fd).max() <= 1e-6 * scale


class TestTailSymbol:
    def test_eta_zero_limit(self):
        rng = np.random.default_rng(9)
        model = random_local_model(rng, n=2, m=3)
        mu = 0.4
        np.testing.assert_allclose(
            tail_symbol(model, 0.0, mu),
            1j**3 * model.linear.coefficient(3, mu), atol=1e-12)

    def test_scalar_value_and_scaling(self):
        model = scalar_m2_model()
        # S~(1/2) = -1 + (1/2)^2 * (-1) = -1.25; times k^2 = 4 gives S(2) = -5.
        st = tail_symbol(model, 0.5, 0.0)
        assert st[0, 0] == pytest.approx(-1.25)
        assert 4.0 * st[0, 0] == pytest.approx(
            assemble_symbol(model, 2.0, 0.0).matrix[0, 0])

    def test_scaling_identity_random(self):
        rng = np.random.default_rng(10)
        model = random_local_model(rng, n=2, m=3)
        m = model.order
        for _ in range(20):
            k = rng.uniform(0.2, 4.0) * rng.choice([-1.0, 1.0])
            mu = rng.uniform(-1, 1)
            lhs = k**m * tail_symbol(model, 1.0 / k, mu)
            rhs = assemble_symbol(model, k, mu).matrix
            assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())

    def test_nonlocal_rejected(self):
        from cglforge.models import builtin_model

        model, _ = builtin_model("nonlocal_demo")
        with pytest.raises(NonlocalUnsupported):
            tail_symbol(model, 0.1, 0.0)


class TestPolynomialMap:
    def test_value_and_jacobian_tensor(self):
        # f(u) = (u0^2 u1, 3 u1^3)
        pm = PolynomialMap(in_dim=2, out_shape=(2,), terms=(
            ((0,), (2, 1), (1.0,)),
            ((1,), (0, 3), (3.0,)),
        ))
        u = np.array([1.5, -2.0])
        np.testing.assert_allclose(pm.value(u, 0.0), [1.5**2 * -2.0, 3 * (-8.0)])
        d1 = pm.derivative_tensor(1, u, 0.0)
        np.testing.assert_allclose(d1, [[2 * 1.5 * -2.0, 1.5**2],
                                        [0.0, 9.0 * 4.0]])
        d2 = pm.derivative_tensor(2, u, 0.0)
        # d^2 f0 = [[2 u1, 2 u0], [2 u0, 0]]
        np.testing.assert_allclose(d2[0], [[-4.0, 3.0], [3.0, 0.0]])
        np.testing.assert_allclose(d2[1], [[0.0, 0.0], [0.0, 18.0 * -2.0]])

    def test_taylor_reconstruction(self):
        rng = np.random.default_rng(11)
        pm = PolynomialMap(in_dim=2, out_shape=(2,), terms=(
            ((0,), (2, 1), (0.7,)),
            ((0,), (1, 1), (-0.3,)),
            ((1,), (3, 0), (1.1,)),
            ((1,), (0, 2), (0.4,)),
        ))
        u0 = rng.standard_normal(2)
        v = rng.standard_normal(2)
        exact = pm.value(u0 + v, 0.0)
        total = pm.value(u0, 0.0)
        for order in range(1, 4):
            t = pm.taylor_tensor(order, u0, 0.0)
            idx = "jklm"[:order]
            total = total + np.einsum(f"i{idx}," + ",".join(idx) + "->i",
                                      t, *([v] * order))
        np.testing.assert_allclose(total, exact, atol=1e-12)


BRUSSELATOR_JSON = {
    "version": 1,
    "name": "brusselator-json",
    "dimension": 2,
    "parameter_name": "b",
    "linear": {
        "kind": "local",
        "matrices": [
            {"poly": [[[-1.0, 4.0], [0.0, -4.0]], [[1.0, 0.0], [-1.0, 0.0]]]},
            {"poly": [[[0.0, 0.0], [0.0, 0.0]]]},
            {"poly": [[[1.0, 0.0], [0.0, 16.0]]]},
        ],
    },
    "nonlinearity": {
        "kind": "semilinear",
        "terms": [
            {"component": 0, "powers": [2, 0], "mu_poly": [0.0, 0.5]},
            {"component": 1, "powers": [2, 0], "mu_poly": [0.0, -0.5]},
            {"component": 0, "powers": [1, 1], "coeff": 4.0},
            {"component": 1, "powers": [1, 1], "coeff": -4.0},
            {"component": 0, "powers": [2, 1], "coeff": 1.0},
            {"component": 1, "powers": [2, 1], "coeff": -1.0},
        ],
    },
}


class TestJsonModels:
    def test_round_trip_matches_builtin(self, tmp_path):
        from cglforge.models import builtin_model

        path = tmp_path / "bruss.json"
        path.write_text(json.dumps(BRUSSELATOR_JSON))
        loaded = load_model(path)
        builtin, _ = builtin_model("brusselator")
        for k in (0.0, 0.7, 1.3):
            for b in (2.0, 2.25):
                np.testing.assert_allclose(
                    assemble_symbol(loaded, k, b).matrix,
                    assemble_symbol(builtin, k, b).matrix, atol=1e-12)
        u = np.array([0.13, -0.21])
        np.testing.assert_allclose(
            loaded.nonlinearity.func(u, 2.25),
            builtin.nonlinearity.func(u, 2.25), atol=1e-12)

    def test_validation_errors(self):
        bad = dict(BRUSSELATOR_JSON)
        bad.pop("version")
        with pytest.raises(ModelFormatError, match="version"):
            model_from_dict(bad)
        bad = json.loads(json.dumps(BRUSSELATOR_JSON))
        bad["nonlinearity"]["terms"][0]["powers"] = [1, 0]
        with pytest.raises(ModelFormatError, match="degree"):
            model_from_dict(bad)
        bad = json.loads(json.dumps(BRUSSELATOR_JSON))
        bad["linear"]["matrices"][0]["poly"][0] = [[1.0]]
        with pytest.raises(ModelFormatError, match="2x2"):
            model_from_dict(bad)

    def test_semilinear_quadratic_order_guard(self):
        model = model_from_dict(BRUSSELATOR_JSON)
        model.validate(mu_samples=(2.25,))
