"""Amplitude-equation coefficients and their predictions.

For a system at a Turing point the slow modulation A of the critical mode
(ansatz ``u = (1/2) eps A e^{i xi} r + c.c. + O(eps^2)``) obeys the complex
Ginzburg-Landau equation

    A_T = -(1/2) d_k^2 lambda A_XX + d_mu lambda A + gamma |A|^2 A

in the frame xi = k*(x - d* t), X = eps (x - (d* + delta) t), T = eps^2 t.
This module computes the frame speeds d*, delta, the slaved mean/second
harmonic responses v0, v2 and the first-harmonic slave map, the Landau
constant gamma (by two structurally different assemblies that must agree),
and the resulting nonlinear dispersion relation with its existence band.

Factor convention, fixed once: multipliers are Taylor forms (see forms.py),
the ansatz carries (1/2) eps A, harmonics are stored as Psi_0 = |A|^2 v0 and
Psi_2 = A^2 v2 with

    v0 = -(1/4) S(0)^{-1} [Q(1,-1)(r, r~) + Q(-1,1)(r~, r)]
    v2 = -(1/2) (S(2k*) + 2 i k* d*)^{-1} Q(1,1)(r, r)

(r~ the conjugate), and gamma is normalized so that the cubic Swift-
Hohenberg model u_t = -(1+d_x^2)^2 u + mu u - u^3 yields gamma = -3/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RouteMismatch, SecondHarmonicSingular, ZeroModeSingular
from .forms import CubicMultiplier, QuadraticMultiplier, eval_cubic, eval_quadratic, forms_from_model
from .linalg import reduced_resolvent
from .symbol import ModelSpec, assemble_symbol, symbol_derivative
from .turing import TuringPoint

__all__ = [
    "CglCoefficients",
    "DispersionPrediction",
    "phase_and_group",
    "harmonic_responses",
    "landau_constant",
    "compute_cgl_coefficients",
    "dispersion_band",
]

ROUTE_TOL = 1e-8


@dataclass(frozen=True)
class CglCoefficients:
    """Everything the amplitude equation needs, in one bundle."""

    d_star: float
    delta: float
    diffusion: complex  # -(1/2) d_k^2 lambda
    growth: complex     # d_mu lambda
    gamma: complex
    v0: np.ndarray      # real mean-mode response
    v2: np.ndarray      # complex second-harmonic response
    slave_matrix: np.ndarray  # A_X |-> psi^(1): apply to r
    criticality: str    # "supercritical" | "subcritical"

    def to_dict(self) -> dict:
        c2l = lambda z: [complex(z).real, complex(z).imag]
        return {
            "d_star": self.d_star,
            "delta": self.delta,
            "diffusion": c2l(self.diffusion),
            "growth": c2l(self.growth),
            "gamma": c2l(self.gamma),
            "v0": [c2l(z) for z in self.v0],
            "v2": [c2l(z) for z in self.v2],
            "slave_matrix": [[c2l(z) for z in row] for row in self.slave_matrix],
            "criticality": self.criticality,
        }


@dataclass(frozen=True)
class DispersionPrediction:
    kappa_tilde: float
    mu_tilde: float
    amplitude: float
    omega: float
    in_band: bool
    band_edge: float
    subcritical: bool = False

    def to_dict(self) -> dict:
        return {"kappa_tilde": self.kappa_tilde, "mu_tilde": self.mu_tilde,
                "amplitude": self.amplitude, "omega": self.omega,
                "in_band": self.in_band, "band_edge": self.band_edge,
                "subcritical": self.subcritical}


def phase_and_group(point: TuringPoint) -> tuple[float, float]:
    """Carrier speed d* = -Im lambda / k* and envelope shift
    delta = -Im d_k lambda - d*."""
    d_star = -point.lam.imag / point.k_star
    delta = -point.d_lambda_dk.imag - d_star
    return float(d_star), float(delta)


def harmonic_responses(model: ModelSpec, point: TuringPoint,
                       q: QuadraticMultiplier):
    """Slaved responses: mean mode v0, second harmonic v2, and the
    first-harmonic slave map psi^(1) = i A_X N (I-Pi) d_k S r."""
    n = model.dimension
    k, mu = point.k_star, point.mu_c
    r = point.triple.right
    d_star, _ = phase_and_group(point)

    s0 = assemble_symbol(model, 0.0, mu).matrix
    rhs0 = (eval_quadratic(q, 1, -1, k, r, r.conj())
            + eval_quadratic(q, -1, 1, k, r.conj(), r))
    try:
        v0 = np.linalg.solve(s0, -0.25 * rhs0)
    except np.linalg.LinAlgError as exc:
        raise ZeroModeSingular(f"S(0, mu_c) is singular: {exc}") from exc
    if np.linalg.cond(s0) > 1e12:
        raise ZeroModeSingular("S(0, mu_c) is numerically singular")

    s2 = assemble_symbol(model, 2.0 * k, mu).matrix \
        + 2j * k * d_star * np.eye(n)
    rhs2 = eval_quadratic(q, 1, 1, k, r, r)
    try:
        v2 = np.linalg.solve(s2, -0.5 * rhs2)
    except np.linalg.LinAlgError as exc:
        raise SecondHarmonicSingular(
            f"S(2k*, mu_c) + 2 i k* d* is singular: {exc}") from exc
    if np.linalg.cond(s2) > 1e12:
        raise SecondHarmonicSingular(
            "S(2k*, mu_c) + 2 i k* d* is numerically singular")

    m0 = assemble_symbol(model, k, mu).matrix + 1j * d_star * k * np.eye(n)
    triple0 = type(point.triple)(value=0.0, right=point.triple.right,
                                 left=point.triple.left,
                                 normalization=point.triple.normalization)
    res = reduced_resolvent(m0, triple0)
    pi = point.triple.projector
    slave = 1j * res.inverse_on_range @ (np.eye(n) - pi) \
        @ symbol_derivative(model, k, mu, dk=1)
    return v0, v2, slave


def landau_constant(model: ModelSpec, point: TuringPoint,
                    q: QuadraticMultiplier, c: CubicMultiplier) -> complex:
    """Landau constant gamma via two structurally different assemblies.

    Route A collects the third-order first-harmonic terms of the multiscale
    hierarchy through the stored v0, v2 responses, summing every argument
    order explicitly.  Route B evaluates the closed formula in the
    derivative-multiplier normalization, re-solving the slaved responses from
    scratch and exploiting the symmetry and reality of the forms.  The
    routes agree only when the multipliers actually are symmetric and real,
    so a mismatch signals a defect in the form assembly.
    """
    k = point.k_star
    r = point.triple.right
    l = point.triple.left
    rb = r.conj()
    v0, v2, _ = harmonic_responses(model, point, q)

    quad_01 = eval_quadratic(q, 0, 1, k, v0, r) + eval_quadratic(q, 1, 0, k, r, v0)
    quad_21 = eval_quadratic(q, 2, -1, k, v2, rb) + eval_quadratic(q, -1, 2, k, rb, v2)
    cubic = (eval_cubic(c, 1, 1, -1, k, r, r, rb)
             + eval_cubic(c, 1, -1, 1, k, r, rb, r)
             + eval_cubic(c, -1, 1, 1, k, rb, r, r))
    gamma_a = complex(l @ (quad_01 + 0.5 * quad_21 + 0.25 * cubic))

    # Route B: derivative multipliers sQ = 2Q, sC = 6C; slaved vectors
    # re-derived by direct solves; reality enters through the elementwise
    # real part of sQ(1,-1)(r, r~).
    n = model.dimension
    mu = point.mu_c
    d_star, _ = phase_and_group(point)
    s0 = assemble_symbol(model, 0.0, mu).matrix
    s2 = assemble_symbol(model, 2 * k, mu).matrix + 2j * k * d_star * np.eye(n)
    sq_11m = 2.0 * eval_quadratic(q, 1, -1, k, r, rb)
    arg0 = np.linalg.solve(s0, -0.125 * sq_11m.real)
    sq_11 = 2.0 * eval_quadratic(q, 1, 1, k, r, r)
    arg2 = np.linalg.solve(s2, -0.0625 * sq_11)
    sc = 6.0 * eval_cubic(c, 1, 1, -1, k, r, r, rb)
    gamma_b = 2.0 * complex(l @ (2.0 * eval_quadratic(q, 0, 1, k, arg0, r)
                                 + 2.0 * eval_quadratic(q, 2, -1, k, arg2, rb)
                                 + 0.0625 * sc))

    if abs(gamma_a - gamma_b) > ROUTE_TOL * max(1.0, abs(gamma_a)):
        raise RouteMismatch(
            f"Landau-constant assemblies disagree: {gamma_a:.12g} vs "
            f"{gamma_b:.12g}; check symmetry/reality of the multipliers")
    return gamma_a


def compute_cgl_coefficients(model: ModelSpec, point: TuringPoint,
                             forms=None) -> CglCoefficients:
    """Assemble the full coefficient bundle at a Turing point."""
    if forms is None:
        forms = forms_from_model(model, point)
    q, c = forms
    d_star, delta = phase_and_group(point)
    v0, v2, slave = harmonic_responses(model, point, q)
    gamma = landau_constant(model, point, q, c)
    diffusion = -0.5 * point.d2_lambda_dk2
    growth = point.d_lambda_dmu
    if diffusion.real <= 0:
        raise ValueError("Re(diffusion) <= 0 contradicts (H4)")
    if growth.real <= 0:
        raise ValueError("Re(growth) <= 0 contradicts (H4)")
    if np.abs(v0.imag).max() > 1e-10:
        raise ZeroModeSingular(
            f"mean-mode response has imaginary part {np.abs(v0.imag).max():.3e}; "
            "the quadratic form is not real")
    return CglCoefficients(
        d_star=d_star, delta=delta, diffusion=complex(diffusion),
        growth=complex(growth), gamma=complex(gamma), v0=v0.real.copy(),
        v2=v2, slave_matrix=slave,
        criticality="supercritical" if gamma.real < 0 else "subcritical")


def dispersion_band(coeffs: CglCoefficients, kappa_tilde: float,
                    mu_tilde: float) -> DispersionPrediction:
    """Amplitude and frequency of the periodic cGL solution
    A = alpha e^{i(kappa X + omega T)}, plus the existence band.

    |alpha|^2 = (Re(growth) mu~ - kappa~^2 Re(diffusion)) / (-Re gamma),
    positive exactly on the band kappa~^2 < Re(growth) mu~ / Re(diffusion);
    omega = -kappa~^2 Im(diffusion) + mu~ Im(growth) + Im(gamma) |alpha|^2.
    """
    if mu_tilde <= 0:
        raise ValueError("mu_tilde must be positive")
    band_edge = coeffs.growth.real * mu_tilde / coeffs.diffusion.real
    subcritical = coeffs.criticality == "subcritical"
    radicand = (coeffs.growth.real * mu_tilde
                - kappa_tilde**2 * coeffs.diffusion.real) / (-coeffs.gamma.real)
    if subcritical or radicand <= 0:
        return DispersionPrediction(
            kappa_tilde=float(kappa_tilde), mu_tilde=float(mu_tilde),
            amplitude=0.0, omega=0.0, in_band=False,
            band_edge=float(band_edge), subcritical=subcritical)
    amp = float(np.sqrt(radicand))
    omega = (-kappa_tilde**2 * coeffs.diffusion.imag
             + mu_tilde * coeffs.growth.imag + coeffs.gamma.imag * radicand)
    return DispersionPrediction(
        kappa_tilde=float(kappa_tilde), mu_tilde=float(mu_tilde),
        amplitude=amp, omega=float(omega), in_band=True,
        band_edge=float(band_edge), subcritical=False)
