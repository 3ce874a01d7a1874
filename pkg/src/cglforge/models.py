"""Built-in fixture models with independently derivable ground truth.

Each constructor returns (ModelSpec, GroundTruth).  The ground-truth records
are computed from hand-rolled 2x2 dispersion entries (trace/determinant
algebra), deliberately bypassing the symbol/eigensolver machinery so they can
serve as oracles for it.

Catalog:
  brusselator            classic 2-component O(2) fixture (semilinear, m = 2);
                         optional ``galilean`` advection c*d_x on both
                         components shifts d* by -c and nothing else
  brusselator_advective  cross-convection on the first component only: SO(2)
                         but not O(2), genuinely complex Landau constant
  quasilinear_demo       Brusselator reaction with solution-dependent
                         diffusion h(u) and a convective flux f(u)
  nonlocal_demo          Brusselator plus a Gaussian-times-cosine convolution
                         coupling, declared as a nonlocal multiplier with
                         exact derivative callbacks
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownFixture
from .symbol import (
    NONLOCAL_FAMILIES,
    LocalLinearPart,
    ModelSpec,
    NonlocalLinearPart,
    PolynomialMap,
    QuasilinearNonlinearity,
    _quasilinear_from_terms,
    _semilinear_from_terms,
)

__all__ = ["GroundTruth", "builtin_model", "planted_resonance_model", "FIXTURES"]


@dataclass(frozen=True)
class GroundTruth:
    """Closed forms where they exist; tagged oracles where they do not."""

    name: str
    params: dict
    mu_bracket: tuple
    o2_symmetric: bool
    k_star: float | None = None
    mu_c: float | None = None
    d_star: float | None = None
    delta: float | None = None
    char_roots: object = None  # (k, mu) -> both eigenvalues, independent algebra
    notes: tuple = ()


def _two_by_two_roots(m):
    """Both eigenvalues of a 2x2 matrix from trace/determinant algebra."""
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = np.sqrt(complex(tr * tr - 4.0 * det))
    return np.array([(tr + disc) / 2.0, (tr - disc) / 2.0])


def _brusselator_reaction_jacobian(a, b):
    # linearization of (a - (b+1)u + u^2 v, b u - u^2 v) at (a, b/a)
    return np.array([[b - 1.0, a * a], [-b, -a * a]])


def _brusselator_semilinear(a):
    """Exact Taylor terms of the Brusselator reaction beyond linear order.

    About (a, b/a) the u^2 v reaction contributes
    (b/a) U1^2 + 2 a U1 U2 + U1^2 U2 to the first component and its negative
    to the second.
    """
    terms = []
    for comp, sign in ((0, 1.0), (1, -1.0)):
        terms.append(((comp,), (2, 0), (0.0, sign / a)))   # (b/a) U1^2
        terms.append(((comp,), (1, 1), (sign * 2.0 * a,)))  # 2 a U1 U2
        terms.append(((comp,), (2, 1), (sign,)))            # U1^2 U2
    return _semilinear_from_terms(
        PolynomialMap(in_dim=2, out_shape=(2,), terms=tuple(terms)))


def brusselator(a=2.0, d1=1.0, d2=16.0, galilean=0.0):
    """Classic Brusselator with bifurcation parameter b.

    Closed forms from the determinant of the dispersion matrix:
    k*^2 = a / sqrt(d1 d2) and b_c = (1 + a sqrt(d1/d2))^2.
    """
    a, d1, d2, galilean = map(float, (a, d1, d2, galilean))

    def l0(b):
        return _brusselator_reaction_jacobian(a, b)

    def l1(b):
        return galilean * np.eye(2)

    def l2(b):
        return np.diag([d1, d2])

    linear = LocalLinearPart(matrices=(l0, l1, l2))
    model = ModelSpec(dimension=2, linear=linear,
                      nonlinearity=_brusselator_semilinear(a),
                      parameter_name="b", name="brusselator",
                      meta={"a": a, "d1": d1, "d2": d2, "galilean": galilean})

    k_star = math.sqrt(a / math.sqrt(d1 * d2))
    b_c = (1.0 + a * math.sqrt(d1 / d2)) ** 2

    def char_roots(k, b):
        m = (_brusselator_reaction_jacobian(a, b)
             - k * k * np.diag([d1, d2])
             + 1j * k * galilean * np.eye(2))
        return _two_by_two_roots(m)

    truth = GroundTruth(
        name="brusselator", params=model.meta,
        mu_bracket=(0.8 * b_c, 1.2 * b_c),
        o2_symmetric=(galilean == 0.0),
        k_star=k_star, mu_c=b_c,
        d_star=-galilean, delta=0.0,
        char_roots=char_roots,
        notes=("k* and b_c from the closed-form determinant minimum",))
    return model, truth


def brusselator_advective(a=2.0, d1=1.0, d2=16.0, c=0.3):
    """Brusselator with cross-convection on the first component only.

    The first species drifts with the gradient of the second (convection
    block c d_x in the (0, 1) slot): component-asymmetric, so unlike a
    Galilean shift it leaves no reflection symmetry and d*, delta and
    Im(gamma) are all genuinely nonzero.  No closed forms exist for
    (k*, b_c); the char_roots oracle is exact.
    """
    a, d1, d2, c = map(float, (a, d1, d2, c))
    conv = np.array([[0.0, c], [0.0, 0.0]])

    def l0(b):
        return _brusselator_reaction_jacobian(a, b)

    def l1(b):
        return conv

    def l2(b):
        return np.diag([d1, d2])

    linear = LocalLinearPart(matrices=(l0, l1, l2))
    model = ModelSpec(dimension=2, linear=linear,
                      nonlinearity=_brusselator_semilinear(a),
                      parameter_name="b", name="brusselator_advective",
                      meta={"a": a, "d1": d1, "d2": d2, "c": c})

    def char_roots(k, b):
        m = (_brusselator_reaction_jacobian(a, b)
             - k * k * np.diag([d1, d2]) + 1j * k * conv)
        return _two_by_two_roots(m)

    b_c0 = (1.0 + a * math.sqrt(d1 / d2)) ** 2
    truth = GroundTruth(
        name="brusselator_advective", params=model.meta,
        mu_bracket=(0.85 * b_c0, 1.3 * b_c0),
        o2_symmetric=False,
        char_roots=char_roots,
        notes=("critical data located numerically; char_roots is the oracle",))
    return model, truth


def quasilinear_demo(a=2.0, d1=1.0, d2=16.0, s=0.4, c=0.25):
    """Brusselator reaction with solution-dependent diffusion and a flux.

    h(u) = diag(d1 + s (u1 - a), d2), f(u) = (c u1^2 / 2, 0),
    g(u; b) = Brusselator reaction.  The equilibrium keeps u1* = a, so the
    linearization has L2 = diag(d1, d2) and L1 = diag(c a, 0) at every b.
    """
    a, d1, d2, s, c = map(float, (a, d1, d2, s, c))
    h_map = PolynomialMap(in_dim=2, out_shape=(2, 2), terms=(
        ((0, 0), (0, 0), (d1 - s * a,)),
        ((0, 0), (1, 0), (s,)),
        ((1, 1), (0, 0), (d2,)),
    ))
    f_map = PolynomialMap(in_dim=2, out_shape=(2,), terms=(
        ((0,), (2, 0), (c / 2.0,)),
    ))
    g_map = PolynomialMap(in_dim=2, out_shape=(2,), terms=(
        ((0,), (0, 0), (a, -0.0)),
        ((0,), (1, 0), (-1.0, -1.0)),
        ((0,), (2, 1), (1.0,)),
        ((1,), (1, 0), (0.0, 1.0)),
        ((1,), (2, 1), (-1.0,)),
    ))
    u_star_poly = ((a,), (0.0, 1.0 / a))
    nl = _quasilinear_from_terms(h_map, f_map, g_map, u_star_poly)
    model = ModelSpec.from_quasilinear(
        nl, dimension=2, parameter_name="b", name="quasilinear_demo",
        meta={"a": a, "d1": d1, "d2": d2, "s": s, "c": c})

    def char_roots(k, b):
        m = (_brusselator_reaction_jacobian(a, b)
             - k * k * np.diag([d1, d2])
             + 1j * k * np.diag([c * a, 0.0]))
        return _two_by_two_roots(m)

    b_c0 = (1.0 + a * math.sqrt(d1 / d2)) ** 2
    truth = GroundTruth(
        name="quasilinear_demo", params=model.meta,
        mu_bracket=(0.85 * b_c0, 1.3 * b_c0),
        o2_symmetric=False,
        char_roots=char_roots,
        notes=("symbol coincides with an advected Brusselator at c*a; the "
               "nonlinearity is where the quasilinear structure shows",))
    return model, truth


def _gauss_cosine_multiplier(a=2.0, d1=1.0, d2=16.0, alpha=0.3, q=1.5, w=1.0):
    """Brusselator symbol plus alpha * K^(k) on the (0, 0) entry.

    K(x) = exp(-x^2 / 2w^2) cos(q x) / (w sqrt(2 pi)) has the exact transform
    K^(k) = (exp(-w^2 (k-q)^2 / 2) + exp(-w^2 (k+q)^2 / 2)) / 2.
    """
    a, d1, d2, alpha, q, w = map(float, (a, d1, d2, alpha, q, w))
    dmat = np.diag([d1, d2])
    e00 = np.zeros((2, 2))
    e00[0, 0] = 1.0

    def khat(k, order=0):
        out = 0.0
        for sgn in (+1.0, -1.0):
            z = k + sgn * q
            g = math.exp(-0.5 * w * w * z * z)
            if order == 0:
                out += g
            elif order == 1:
                out += -w * w * z * g
            else:
                out += (w**4 * z * z - w * w) * g
        return 0.5 * out

    def multiplier(k, b):
        return (_brusselator_reaction_jacobian(a, b)
                - k * k * dmat + alpha * khat(k) * e00).astype(complex)

    def d_k(k, b):
        return (-2.0 * k * dmat + alpha * khat(k, 1) * e00).astype(complex)

    def d_k2(k, b):
        return (-2.0 * dmat + alpha * khat(k, 2) * e00).astype(complex)

    def d_mu(k, b):
        return np.array([[1.0, 0.0], [-1.0, 0.0]], dtype=complex)

    zero = lambda k, b: np.zeros((2, 2), dtype=complex)
    # sigma_min(S) >= min(d1,d2) k^2 - (bounded part); the declared constant
    # is validated on samples by the test suite.
    bounded = np.linalg.norm(_brusselator_reaction_jacobian(a, 3.0), 2) + abs(alpha)
    c_ell = min(d1, d2) / 4.0
    k_from = math.sqrt((bounded + min(d1, d2)) / c_ell)
    return NonlocalLinearPart(
        multiplier=multiplier, d_k=d_k, d_k2=d_k2, d_mu=d_mu,
        mixed={(1, 1): zero, (2, 1): zero},
        ellipticity_order=2.0, ellipticity_constant=c_ell,
        ellipticity_from=k_from)


NONLOCAL_FAMILIES["gauss_cosine"] = _gauss_cosine_multiplier


def nonlocal_demo(a=2.0, d1=1.0, d2=16.0, alpha=0.3, q=1.5, w=1.0):
    """Brusselator with a nonlocal Gaussian-times-cosine self-coupling."""
    linear = _gauss_cosine_multiplier(a, d1, d2, alpha, q, w)
    model = ModelSpec(dimension=2, linear=linear,
                      nonlinearity=_brusselator_semilinear(float(a)),
                      parameter_name="b", name="nonlocal_demo",
                      meta={"a": a, "d1": d1, "d2": d2, "alpha": alpha,
                            "q": q, "w": w})

    def char_roots(k, b):
        return _two_by_two_roots(np.asarray(linear.multiplier(k, b)))

    b_c0 = (1.0 + float(a) * math.sqrt(float(d1) / float(d2))) ** 2
    truth = GroundTruth(
        name="nonlocal_demo", params=model.meta,
        mu_bracket=(0.7 * b_c0, 1.3 * b_c0),
        o2_symmetric=True,  # multiplier is even in k and real
        char_roots=char_roots,
        notes=("kernel transform exact, so every derivative callback is exact",))
    return model, truth


def planted_resonance_model(a=2.0, d1=1.0, d2=16.0):
    """Brusselator with a planted zero eigenvalue of S(2 k*, b_c).

    A narrow Gaussian bump in k, centered on 2 k* and vanishing (to double
    precision) at 0 and k*, adds alpha to the (0,0) entry with alpha chosen
    so det S(2 k*, b_c) = 0.  The critical point is untouched while the 2:1
    harmonic response matrix becomes exactly singular: an H3 violation at the
    second harmonic.
    """
    a, d1, d2 = map(float, (a, d1, d2))
    k_star = math.sqrt(a / math.sqrt(d1 * d2))
    b_c = (1.0 + a * math.sqrt(d1 / d2)) ** 2
    dmat = np.diag([d1, d2])
    s2 = _brusselator_reaction_jacobian(a, b_c) - (2 * k_star) ** 2 * dmat
    # det(S2 + alpha e00) = det(S2) + alpha * S2[1,1]
    alpha = -np.linalg.det(s2) / s2[1, 1]
    sigma = k_star / 6.0
    e00 = np.zeros((2, 2))
    e00[0, 0] = 1.0

    def bump(k, order=0):
        z = abs(k) - 2.0 * k_star
        g = math.exp(-0.5 * (z / sigma) ** 2)
        sk = math.copysign(1.0, k) if k != 0.0 else 0.0
        if order == 0:
            return g
        if order == 1:
            return -z / sigma**2 * g * sk
        return (z * z / sigma**4 - 1.0 / sigma**2) * g

    def multiplier(k, b):
        return (_brusselator_reaction_jacobian(a, b) - k * k * dmat
                + alpha * bump(k) * e00).astype(complex)

    def d_k(k, b):
        return (-2.0 * k * dmat + alpha * bump(k, 1) * e00).astype(complex)

    def d_k2(k, b):
        return (-2.0 * dmat + alpha * bump(k, 2) * e00).astype(complex)

    def d_mu(k, b):
        return np.array([[1.0, 0.0], [-1.0, 0.0]], dtype=complex)

    linear = NonlocalLinearPart(
        multiplier=multiplier, d_k=d_k, d_k2=d_k2, d_mu=d_mu,
        ellipticity_order=2.0, ellipticity_constant=min(d1, d2) / 4.0,
        ellipticity_from=4.0 * k_star + 6.0 * sigma)
    model = ModelSpec(dimension=2, linear=linear,
                      nonlinearity=_brusselator_semilinear(a),
                      parameter_name="b", name="planted_resonance",
                      meta={"a": a, "d1": d1, "d2": d2, "alpha": float(alpha)})
    return model, (k_star, b_c)


FIXTURES = {
    "brusselator": brusselator,
    "brusselator_advective": brusselator_advective,
    "quasilinear_demo": quasilinear_demo,
    "nonlocal_demo": nonlocal_demo,
}


def builtin_model(name: str, **overrides):
    """Fixture by name with parameter overrides; returns (model, truth)."""
    if name not in FIXTURES:
        raise UnknownFixture(
            f"unknown fixture '{name}'; available: {sorted(FIXTURES)}")
    return FIXTURES[name](**overrides)
