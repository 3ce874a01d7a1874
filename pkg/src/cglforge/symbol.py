"""Model descriptions and their Fourier symbols.

A ModelSpec packages the linear part (either a list of mu-dependent real
matrix coefficients L_0..L_m of the spatial-derivative expansion, or a
nonlocal multiplier callback with declared derivatives and ellipticity data)
together with a nonlinearity in semilinear, quasilinear (h, f, g), or raw
multilinear-multiplier form.

The symbol of the local operator sum_j L_j(mu) d_x^j is
``S(k, mu) = sum_j L_j(mu) (ik)^j`` and its exact k-derivatives are
``d_k^l S = sum_{j>=l} j!/(j-l)! i^l (ik)^{j-l} L_j``.  The high-frequency
rescaling is ``S(k, mu) = k^m S~(1/k, mu)`` with
``S~(eta, mu) = i^m L_m + i^{m-1} eta L_{m-1} + ... + eta^m L_0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    CallbackFailure,
    MissingDerivativeCallback,
    ModelFormatError,
    NonlocalUnsupported,
    NonQuadraticOrder,
)

__all__ = [
    "LocalLinearPart",
    "NonlocalLinearPart",
    "SemilinearNonlinearity",
    "QuasilinearNonlinearity",
    "MultilinearNonlinearity",
    "ModelSpec",
    "SymbolValue",
    "PolynomialMap",
    "assemble_symbol",
    "symbol_derivative",
    "symbol_on_grid",
    "tail_symbol",
    "load_model",
    "model_from_dict",
]

MU_FD_STEP = 1e-6

# Named nonlocal families addressable from JSON documents; populated by
# cglforge.models on import.
NONLOCAL_FAMILIES: dict[str, Callable[..., "NonlocalLinearPart"]] = {}


# ---------------------------------------------------------------------------
# polynomial maps (shared by JSON loading and the built-in fixtures)


@dataclass(frozen=True)
class PolynomialMap:
    """Polynomial map R^n -> R^m with mu-dependent coefficients.

    Each term is (target, powers, mu_poly): output slot ``target`` (a tuple
    indexing the leading axes) gains ``polyval(mu_poly, mu) *
    prod_j u_j^powers[j]``.
    """

    in_dim: int
    out_shape: tuple
    terms: tuple

    def value(self, u: np.ndarray, mu: float) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros(self.out_shape + u.shape[1:], dtype=float)
        for target, powers, mu_poly in self.terms:
            c = float(np.polyval(mu_poly[::-1], mu))
            mono = c * np.ones(u.shape[1:], dtype=float)
            for j, p in enumerate(powers):
                if p:
                    mono = mono * u[j] ** p
            out[target] += mono
        return out

    def taylor_tensor(self, order: int, u0: np.ndarray, mu: float) -> np.ndarray:
        """Symmetric order-``order`` Taylor tensor at u0 (D^order / order!).

        The returned T satisfies: the total-degree-``order`` term of
        value(u0 + v) equals ``sum_{j1..jr} T[target, j1..jr] v_j1 ... v_jr``.
        u0 may carry a trailing grid axis, in which case T does too.
        """
        u0 = np.asarray(u0, dtype=float)
        shape = self.out_shape + (self.in_dim,) * order + u0.shape[1:]
        out = np.zeros(shape, dtype=float)
        for target, powers, mu_poly in self.terms:
            c = float(np.polyval(mu_poly[::-1], mu))
            if c == 0.0:
                continue
            for combo, coeff in _monomial_taylor_terms(powers, u0, order):
                slots = set(permutations(combo))
                share = c * coeff / len(slots)
                for slot in slots:
                    out[target + slot] += share
        return out

    def derivative_tensor(self, order: int, u0: np.ndarray, mu: float) -> np.ndarray:
        """Plain symmetric derivative tensor D^order value at u0."""
        return self.taylor_tensor(order, u0, mu) * math.factorial(order)


def _monomial_taylor_terms(powers, u0, order):
    """Order-``order`` Taylor data of prod_j u_j^p_j about u0.

    Yields (combo, coeff) where combo is a sorted index tuple of length
    ``order`` (variable j repeated a_j times) and coeff is
    prod_j C(p_j, a_j) u0_j^(p_j - a_j); summing coeff * prod v over the
    multi-indices reproduces the Taylor term exactly.
    """
    n = len(powers)

    def rec(j, remaining, combo, coeff):
        if j == n:
            if remaining == 0:
                yield tuple(combo), coeff
            return
        p = powers[j]
        for a in range(0, min(p, remaining) + 1):
            base = u0[j] ** (p - a) if p - a > 0 else 1.0
            c = math.comb(p, a) * base
            if np.all(c == 0.0):
                continue
            yield from rec(j + 1, remaining - a, combo + [j] * a, coeff * c)

    yield from rec(0, order, [], 1.0)


# ---------------------------------------------------------------------------
# linear parts


@dataclass(frozen=True)
class LocalLinearPart:
    """Matrix coefficients L_0(mu)..L_m(mu) of sum_j L_j(mu) d_x^j."""

    matrices: tuple  # callables mu -> (n, n) real array
    d_mu: tuple | None = None  # optional analytic mu-derivatives, same layout

    @property
    def order(self) -> int:
        return len(self.matrices) - 1

    def coefficient(self, j: int, mu: float, dmu: int = 0) -> np.ndarray:
        if dmu == 0:
            return np.asarray(self.matrices[j](mu), dtype=float)
        if dmu == 1 and self.d_mu is not None:
            return np.asarray(self.d_mu[j](mu), dtype=float)
        h = MU_FD_STEP * max(1.0, abs(mu))
        if dmu == 1:
            return (self.coefficient(j, mu + h) - self.coefficient(j, mu - h)) / (2 * h)
        if dmu == 2:
            return (
                self.coefficient(j, mu + h)
                - 2 * self.coefficient(j, mu)
                + self.coefficient(j, mu - h)
            ) / h**2
        raise ValueError(f"unsupported mu-derivative order {dmu}")


@dataclass(frozen=True)
class NonlocalLinearPart:
    """User-declared Fourier multiplier with derivative callbacks.

    ``multiplier(k, mu)`` returns the complex n x n symbol; derivative
    callbacks cover (dk, dmu) up to (2, 1).  ``ellipticity_order`` is the
    growth exponent s with declared constant: sigma_min(S(k, mu)) >=
    ellipticity_constant * (1 + k^2)^(s/2) for |k| >= ellipticity_from.
    """

    multiplier: Callable
    d_k: Callable | None = None
    d_k2: Callable | None = None
    d_mu: Callable | None = None
    mixed: Mapping | None = None  # {(dk, dmu): callable}
    ellipticity_order: float = 2.0
    ellipticity_constant: float = 0.0
    ellipticity_from: float = 0.0

    @property
    def order(self) -> float:
        return self.ellipticity_order


# ---------------------------------------------------------------------------
# nonlinearities


@dataclass(frozen=True)
class SemilinearNonlinearity:
    """Smooth N: R^n -> R^n with N(0) = DN(0) = 0.

    ``func(u, mu)`` and optional ``jacobian(u, mu)`` must be vectorized over
    a trailing grid axis.  ``form_provider(mu, order)``, when registered,
    returns the exact symmetric Taylor tensor of N at 0: the order-p tensor T
    contributes ``T[i, j1..jp] u_j1 ... u_jp`` to N(u).  Without it, Taylor
    tensors are extracted by Richardson-extrapolated central differences.
    """

    func: Callable
    jacobian: Callable | None = None
    form_provider: Callable | None = None


@dataclass(frozen=True)
class QuasilinearNonlinearity:
    """System u_t = (h(u; mu) u_x)_x + f(u; mu)_x + g(u; mu).

    All callables take (u, mu) and are vectorized over a trailing grid axis.
    Derivative tensors follow index conventions
    h_u[i,j,k] = d h_ij / d u_k (so h_u(U, V)_i = h_u[i,j,k] U_j V_k),
    f_uu[i,j,k] = d^2 f_i / d u_j d u_k, and analogously at third order.
    ``u_star(mu)`` is the spatially constant equilibrium with g(u*, mu) = 0.
    """

    h: Callable
    f: Callable
    g: Callable
    h_u: Callable
    h_uu: Callable
    f_u: Callable
    f_uu: Callable
    f_uuu: Callable
    g_u: Callable
    g_uu: Callable
    g_uuu: Callable
    u_star: Callable


@dataclass(frozen=True)
class MultilinearNonlinearity:
    """Explicit quadratic/cubic Fourier multipliers.

    ``quadratic`` is either a constant (n,n,n) tensor or a callable
    (k1, k2) -> (n,n,n); ``cubic`` likewise with one more slot.  Tensors are
    in the Taylor-form normalization: N(U) = Q(U, U) + C(U, U, U) + h.o.t.
    """

    quadratic: object
    cubic: object
    symmetric: bool = True


@dataclass(frozen=True)
class ModelSpec:
    """A reaction-diffusion-convection model near a Turing bifurcation."""

    dimension: int
    linear: LocalLinearPart | NonlocalLinearPart
    nonlinearity: object
    parameter_name: str = "mu"
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def is_local(self) -> bool:
        return isinstance(self.linear, LocalLinearPart)

    @property
    def order(self):
        return self.linear.order

    @staticmethod
    def from_quasilinear(nl: QuasilinearNonlinearity, dimension: int,
                         parameter_name: str = "mu", name: str = "",
                         meta: dict | None = None) -> "ModelSpec":
        """Derive the linearization L_2 = h(u*), L_1 = f_u(u*), L_0 = g_u(u*)."""

        def l0(mu):
            return np.asarray(nl.g_u(nl.u_star(mu), mu), dtype=float)

        def l1(mu):
            return np.asarray(nl.f_u(nl.u_star(mu), mu), dtype=float)

        def l2(mu):
            return np.asarray(nl.h(nl.u_star(mu), mu), dtype=float)

        linear = LocalLinearPart(matrices=(l0, l1, l2))
        return ModelSpec(dimension=dimension, linear=linear, nonlinearity=nl,
                         parameter_name=parameter_name, name=name,
                         meta=meta or {})

    def semilinear_rhs(self, u: np.ndarray, mu: float) -> np.ndarray:
        """Evaluate the nonlinear term for semilinear/constant-multilinear models."""
        nl = self.nonlinearity
        if isinstance(nl, SemilinearNonlinearity):
            return np.asarray(nl.func(u, mu))
        if isinstance(nl, MultilinearNonlinearity):
            q = nl.quadratic if not callable(nl.quadratic) else None
            c = nl.cubic if not callable(nl.cubic) else None
            if q is None or c is None:
                raise NonlocalUnsupported(
                    "frequency-dependent multilinear nonlinearities have no "
                    "pointwise evaluation")
            return np.einsum("ijk,j...,k...->i...", q, u, u) + np.einsum(
                "ijkl,j...,k...,l...->i...", c, u, u, u)
        raise TypeError("quasilinear models evaluate their flux explicitly")

    def validate(self, mu_samples: Sequence[float] = (0.0, 0.5),
                 rng: np.random.Generator | None = None) -> None:
        """Check declared invariants: real coefficients, quadratic-order N."""
        rng = rng or np.random.default_rng(0)
        if self.is_local:
            for mu in mu_samples:
                for j in range(self.order + 1):
                    lj = self.linear.coefficient(j, float(mu))
                    if not np.isrealobj(lj) and np.abs(lj.imag).max() > 0:
                        raise ModelFormatError(
                            f"linear coefficient L_{j}({mu}) is not real")
        nl = self.nonlinearity
        if isinstance(nl, SemilinearNonlinearity):
            mu0 = float(mu_samples[0])
            zero = np.zeros(self.dimension)
            n0 = np.linalg.norm(np.asarray(nl.func(zero, mu0), dtype=float))
            if n0 > 1e-10:
                raise NonQuadraticOrder(f"N(0) has norm {n0:.3e}")
            u = rng.standard_normal(self.dimension)
            u /= np.linalg.norm(u)
            for eps in (1e-3, 1e-4):
                ratio = np.linalg.norm(np.asarray(nl.func(eps * u, mu0))) / eps**2
                if ratio > 1e6:
                    raise NonQuadraticOrder(
                        f"||N(eps u)||/eps^2 = {ratio:.3e} at eps={eps}")


@dataclass(frozen=True)
class SymbolValue:
    k: float
    mu: float
    matrix: np.ndarray


# ---------------------------------------------------------------------------
# symbol evaluation


def assemble_symbol(model: ModelSpec, k: float, mu: float) -> SymbolValue:
    """Fourier symbol S(k, mu) of the linearized operator."""
    if model.is_local:
        lin = model.linear
        n = model.dimension
        matrix = np.zeros((n, n), dtype=complex)
        ik = 1j * k
        for j in range(lin.order + 1):
            matrix += lin.coefficient(j, mu) * ik**j
        return SymbolValue(k=float(k), mu=float(mu), matrix=matrix)
    try:
        matrix = np.asarray(model.linear.multiplier(k, mu), dtype=complex)
    except Exception as exc:
        raise CallbackFailure(f"multiplier callback failed at (k={k}, mu={mu}): {exc}") from exc
    return SymbolValue(k=float(k), mu=float(mu), matrix=matrix)


def symbol_derivative(model: ModelSpec, k: float, mu: float,
                      dk: int = 0, dmu: int = 0) -> np.ndarray:
    """Exact (local) or declared (nonlocal) derivative d_k^dk d_mu^dmu S."""
    if dk + dmu < 1:
        raise ValueError("request at least one derivative")
    if model.is_local:
        lin = model.linear
        n = model.dimension
        out = np.zeros((n, n), dtype=complex)
        ik = 1j * k
        for j in range(dk, lin.order + 1):
            falling = math.factorial(j) // math.factorial(j - dk)
            out += falling * 1j**dk * ik ** (j - dk) * lin.coefficient(j, mu, dmu=dmu)
        return out
    nl = model.linear
    table = {(1, 0): nl.d_k, (2, 0): nl.d_k2, (0, 1): nl.d_mu}
    cb = table.get((dk, dmu))
    if cb is None and nl.mixed is not None:
        cb = nl.mixed.get((dk, dmu))
    if cb is None:
        raise MissingDerivativeCallback(
            f"nonlocal model declares no (dk={dk}, dmu={dmu}) derivative callback")
    try:
        return np.asarray(cb(k, mu), dtype=complex)
    except Exception as exc:
        raise CallbackFailure(f"derivative callback ({dk},{dmu}) failed: {exc}") from exc


def symbol_on_grid(model: ModelSpec, k_grid: np.ndarray, mu: float) -> np.ndarray:
    """Stack of symbols S(k, mu) over a wavenumber grid, shape (K, n, n)."""
    k_grid = np.asarray(k_grid, dtype=float)
    n = model.dimension
    if model.is_local:
        lin = model.linear
        ik = 1j * k_grid
        out = np.zeros((k_grid.size, n, n), dtype=complex)
        for j in range(lin.order + 1):
            out += ik[:, None, None] ** j * lin.coefficient(j, mu)[None, :, :]
        return out
    out = np.empty((k_grid.size, n, n), dtype=complex)
    for i, k in enumerate(k_grid):
        out[i] = assemble_symbol(model, float(k), mu).matrix
    return out


def tail_symbol(model: ModelSpec, eta: float, mu: float) -> np.ndarray:
    """High-frequency rescaled symbol S~(eta, mu) with eta = 1/k.

    Satisfies S(k, mu) = k^m S~(1/k, mu) for k != 0; the eta -> 0 limit is
    i^m L_m, which governs the symbol beyond any finite grid.
    """
    if not model.is_local:
        raise NonlocalUnsupported(
            "tail rescaling needs matrix coefficients; nonlocal models "
            "declare an ellipticity order instead")
    lin = model.linear
    m = lin.order
    n = model.dimension
    out = np.zeros((n, n), dtype=complex)
    for j in range(m + 1):
        out += 1j**j * eta ** (m - j) * lin.coefficient(j, mu)
    return out


# ---------------------------------------------------------------------------
# JSON model documents

SCHEMA_VERSION = 1


def _require(doc: Mapping, key: str, ctx: str):
    if key not in doc:
        raise ModelFormatError(f"{ctx}: missing required field '{key}'")
    return doc[key]


def _parse_mu_poly(entry, ctx: str) -> tuple:
    if "coeff" in entry:
        return (float(entry["coeff"]),)
    if "mu_poly" in entry:
        poly = tuple(float(c) for c in entry["mu_poly"])
        if len(poly) > 5:
            raise ModelFormatError(f"{ctx}: mu-polynomial degree exceeds 4")
        return poly
    raise ModelFormatError(f"{ctx}: term needs 'coeff' or 'mu_poly'")


def _parse_terms(entries, n, ctx, matrix_valued=False):
    terms = []
    for i, entry in enumerate(entries):
        tctx = f"{ctx}[{i}]"
        powers = tuple(int(p) for p in _require(entry, "powers", tctx))
        if len(powers) != n or any(p < 0 for p in powers):
            raise ModelFormatError(f"{tctx}: 'powers' must be {n} nonnegative ints")
        if matrix_valued:
            target = (int(_require(entry, "row", tctx)), int(_require(entry, "col", tctx)))
            if not all(0 <= t < n for t in target):
                raise ModelFormatError(f"{tctx}: row/col out of range")
        else:
            target = (int(_require(entry, "component", tctx)),)
            if not 0 <= target[0] < n:
                raise ModelFormatError(f"{tctx}: component out of range")
        terms.append((target, powers, _parse_mu_poly(entry, tctx)))
    return tuple(terms)


def _semilinear_from_terms(terms: PolynomialMap) -> SemilinearNonlinearity:
    n = terms.in_dim

    def func(u, mu):
        return terms.value(u, mu)

    def jacobian(u, mu):
        u = np.asarray(u, dtype=float)
        out = np.zeros((n, n) + u.shape[1:], dtype=float)
        for target, powers, mu_poly in terms.terms:
            c = float(np.polyval(mu_poly[::-1], mu))
            for j, p in enumerate(powers):
                if p == 0:
                    continue
                mono = c * p * np.ones(u.shape[1:], dtype=float)
                for jj, pp in enumerate(powers):
                    q = pp - 1 if jj == j else pp
                    if q:
                        mono = mono * u[jj] ** q
                out[target[0], j] += mono
        return out

    def form_provider(mu, order):
        return terms.taylor_tensor(order, np.zeros(n), mu)

    return SemilinearNonlinearity(func=func, jacobian=jacobian,
                                  form_provider=form_provider)


def _quasilinear_from_terms(h_map, f_map, g_map, u_star_poly):
    def u_star(mu):
        return np.array([np.polyval(c[::-1], mu) for c in u_star_poly], dtype=float)

    def mk_val(pmap):
        return lambda u, mu: pmap.value(u, mu)

    def mk_tensor(pmap, order):
        def eval_tensor(u, mu):
            return pmap.derivative_tensor(order, np.asarray(u, dtype=float), mu)
        return eval_tensor

    return QuasilinearNonlinearity(
        h=mk_val(h_map), f=mk_val(f_map), g=mk_val(g_map),
        h_u=mk_tensor(h_map, 1), h_uu=mk_tensor(h_map, 2),
        f_u=mk_tensor(f_map, 1), f_uu=mk_tensor(f_map, 2), f_uuu=mk_tensor(f_map, 3),
        g_u=mk_tensor(g_map, 1), g_uu=mk_tensor(g_map, 2), g_uuu=mk_tensor(g_map, 3),
        u_star=u_star,
    )


def model_from_dict(doc: Mapping) -> ModelSpec:
    """Build a ModelSpec from a parsed JSON document."""
    version = _require(doc, "version", "model")
    if int(version) != SCHEMA_VERSION:
        raise ModelFormatError(f"model: unsupported schema version {version}")
    n = int(_require(doc, "dimension", "model"))
    if n < 1:
        raise ModelFormatError("model: dimension must be positive")
    lin_doc = _require(doc, "linear", "model")
    kind = _require(lin_doc, "kind", "model.linear")
    if kind == "local":
        mats_doc = _require(lin_doc, "matrices", "model.linear")
        callables = []
        for j, entry in enumerate(mats_doc):
            ctx = f"model.linear.matrices[{j}]"
            poly = _require(entry, "poly", ctx)
            coeffs = [np.asarray(m, dtype=float) for m in poly]
            if len(coeffs) > 5:
                raise ModelFormatError(f"{ctx}: mu-polynomial degree exceeds 4")
            for m in coeffs:
                if m.shape != (n, n):
                    raise ModelFormatError(f"{ctx}: matrices must be {n}x{n}")
            callables.append(_matrix_poly(coeffs))
        linear = LocalLinearPart(matrices=tuple(callables))
    elif kind == "nonlocal_family":
        family = _require(lin_doc, "family", "model.linear")
        from . import models as _models  # registers built-in families

        _ = _models
        if family not in NONLOCAL_FAMILIES:
            raise ModelFormatError(f"model.linear: unknown nonlocal family '{family}'")
        linear = NONLOCAL_FAMILIES[family](**lin_doc.get("params", {}))
    else:
        raise ModelFormatError(f"model.linear: unknown kind '{kind}'")

    nl_doc = _require(doc, "nonlinearity", "model")
    nl_kind = _require(nl_doc, "kind", "model.nonlinearity")
    if nl_kind == "semilinear":
        terms = _parse_terms(_require(nl_doc, "terms", "model.nonlinearity"),
                             n, "model.nonlinearity.terms")
        for target, powers, _ in terms:
            if sum(powers) < 2:
                raise ModelFormatError(
                    "model.nonlinearity.terms: semilinear terms must have "
                    "total degree >= 2")
        nonlinearity = _semilinear_from_terms(
            PolynomialMap(in_dim=n, out_shape=(n,), terms=terms))
    elif nl_kind == "quasilinear":
        h_map = PolynomialMap(in_dim=n, out_shape=(n, n), terms=_parse_terms(
            _require(nl_doc, "h_terms", "model.nonlinearity"), n,
            "model.nonlinearity.h_terms", matrix_valued=True))
        f_map = PolynomialMap(in_dim=n, out_shape=(n,), terms=_parse_terms(
            _require(nl_doc, "f_terms", "model.nonlinearity"), n,
            "model.nonlinearity.f_terms"))
        g_map = PolynomialMap(in_dim=n, out_shape=(n,), terms=_parse_terms(
            _require(nl_doc, "g_terms", "model.nonlinearity"), n,
            "model.nonlinearity.g_terms"))
        u_star_poly = _require(nl_doc, "u_star", "model.nonlinearity")
        if len(u_star_poly) != n:
            raise ModelFormatError("model.nonlinearity.u_star: need one "
                                   "polynomial per component")
        nonlinearity = _quasilinear_from_terms(h_map, f_map, g_map, u_star_poly)
        return ModelSpec.from_quasilinear(
            nonlinearity, dimension=n,
            parameter_name=doc.get("parameter_name", "mu"),
            name=doc.get("name", ""))
    elif nl_kind == "multilinear":
        q = np.asarray(_require(nl_doc, "quadratic", "model.nonlinearity"), dtype=complex)
        c = np.asarray(_require(nl_doc, "cubic", "model.nonlinearity"), dtype=complex)
        if q.shape != (n, n, n) or c.shape != (n, n, n, n):
            raise ModelFormatError("model.nonlinearity: multilinear tensor shapes "
                                   f"must be ({n},{n},{n}) and ({n},{n},{n},{n})")
        nonlinearity = MultilinearNonlinearity(quadratic=q, cubic=c)
    else:
        raise ModelFormatError(f"model.nonlinearity: unknown kind '{nl_kind}'")

    return ModelSpec(dimension=n, linear=linear, nonlinearity=nonlinearity,
                     parameter_name=doc.get("parameter_name", "mu"),
                     name=doc.get("name", ""))


def _matrix_poly(coeffs):
    def call(mu):
        out = np.zeros_like(coeffs[0])
        for p, m in enumerate(coeffs):
            out = out + m * mu**p
        return out
    return call


def load_model(path) -> ModelSpec:
    """Load a ModelSpec from a JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: "
                               f"{exc.msg}") from exc
    return model_from_dict(doc)
