"""Exact small-amplitude periodic traveling waves by Fourier-Galerkin Newton.

In the co-moving phase xi = k(x - d t) a profile U(xi) with wavenumber
k = k* + eps kappa~ and speed d solves

    0 = L(k, mu) U + d k U_xi + N(U)          (semilinear / nonlocal)
    0 = k^2 (h(u) u_xi)_xi + k f(u)_xi + g(u) + d k u_xi   (quasilinear)

at mu = mu_c + eps^2 mu~.  Unknowns are the Fourier modes U^(0..N) plus the
speed d, closed by the translation gauge Im(l U^(1)) = 0; the amplitude is
left free and selected by the Newton basin around the cGL predictor.
Nonlinear terms are evaluated pseudospectrally with 3x zero padding and the
Jacobian is assembled column-by-column from the analytic Frechet-derivative
formulas (never from finite differences of the residual, which serve only as
an independent audit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .amplitude import CglCoefficients, dispersion_band, phase_and_group
from .errors import (
    CglforgeError,
    CollapseToZero,
    FitIllConditioned,
    NoConvergence,
    TruncationInsufficient,
)
from .forms import forms_from_model
from .symbol import (
    ModelSpec,
    MultilinearNonlinearity,
    QuasilinearNonlinearity,
    SemilinearNonlinearity,
    assemble_symbol,
)
from .turing import TuringPoint

__all__ = [
    "WaveSolution",
    "BranchData",
    "newton_wave",
    "continue_branch",
    "fit_landau",
    "nonexistence_probe",
    "mode_projections",
    "SteadyProblem",
    "predictor_modes",
]

NEWTON_MAX_ITER = 25
NEWTON_RTOL = 1e-11


@dataclass(frozen=True)
class WaveSolution:
    """Converged periodic traveling wave, modes eta = 0..n_trunc."""

    modes: np.ndarray
    k: float
    d: float
    epsilon: float
    mu: float
    residual_norm: float
    alpha_measured: complex
    omega_measured: float
    n_trunc: int
    iterations: int

    def profile(self, points: int = 256) -> np.ndarray:
        """Real-space profile on a uniform xi-grid (n, points)."""
        return _modes_to_grid(self.modes, points)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "d": self.d, "epsilon": self.epsilon, "mu": self.mu,
            "residual_norm": self.residual_norm,
            "alpha_measured": [self.alpha_measured.real, self.alpha_measured.imag],
            "omega_measured": self.omega_measured,
            "n_trunc": self.n_trunc, "iterations": self.iterations,
            "modes": [[[z.real, z.imag] for z in row] for row in self.modes],
        }


@dataclass
class BranchData:
    entries: list  # (epsilon, kappa_tilde, WaveSolution)
    point: TuringPoint
    coeffs: CglCoefficients
    mu_tilde: float
    gamma_ls: complex | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "mu_tilde": self.mu_tilde,
            "gamma_ls": None if self.gamma_ls is None else
                        [self.gamma_ls.real, self.gamma_ls.imag],
            "diagnostics": self.diagnostics,
            "entries": [
                {"epsilon": e, "kappa_tilde": kt, "solution": sol.to_dict()}
                for e, kt, sol in self.entries],
        }
        return out


# ---------------------------------------------------------------------------
# spectral helpers


def _modes_to_grid(modes, g):
    n_trunc = modes.shape[0] - 1
    n = modes.shape[1]
    spec = np.zeros((g, n), dtype=complex)
    spec[0] = modes[0]
    for eta in range(1, n_trunc + 1):
        spec[eta] = modes[eta]
        spec[g - eta] = modes[eta].conj()
    return np.fft.ifft(spec, axis=0).real.T * g


def _grid_to_modes(values, n_trunc):
    g = values.shape[1]
    spec = np.fft.fft(values, axis=1) / g
    out = np.empty((n_trunc + 1, values.shape[0]), dtype=complex)
    out[0] = spec[:, 0]
    for eta in range(1, n_trunc + 1):
        out[eta] = spec[:, eta]
    return out


class SteadyProblem:
    """Steady traveling-wave operator and its Frechet derivative.

    Owns per-mode symbol matrices and the padded collocation grid; exposes
    residual(U, d), jacobian_apply(U, d, V, e_d) and the packed real
    parametrization used by Newton.
    """

    def __init__(self, model: ModelSpec, k: float, mu: float, n_trunc: int):
        self.model = model
        self.k = float(k)
        self.mu = float(mu)
        self.n_trunc = int(n_trunc)
        self.n = model.dimension
        self.grid = scipy.fft.next_fast_len(3 * (2 * n_trunc + 1))
        self.symbols = np.stack([
            assemble_symbol(model, eta * self.k, self.mu).matrix
            for eta in range(n_trunc + 1)])
        # convergence is measured against the low-harmonic operator scale,
        # where the solution content lives; the top modes only add stiffness
        self.op_scale = float(max(
            np.linalg.norm(self.symbols[eta])
            for eta in range(min(4, n_trunc) + 1)))
        nl = model.nonlinearity
        self._quasi = isinstance(nl, QuasilinearNonlinearity)
        self._conv = (isinstance(nl, MultilinearNonlinearity)
                      and (callable(nl.quadratic) or callable(nl.cubic)))
        if self._quasi:
            self.u_star = np.asarray(nl.u_star(self.mu), dtype=float)

    # -- grid transforms ----------------------------------------------------
    def to_grid(self, modes):
        return _modes_to_grid(modes, self.grid)

    def to_modes(self, values):
        return _grid_to_modes(values, self.n_trunc)

    def xi_derivative(self, modes, order=1):
        etas = np.arange(self.n_trunc + 1)
        return modes * (1j * etas[:, None]) ** order

    # -- residual -----------------------------------------------------------
    def residual(self, modes, d):
        lin = np.einsum("eij,ej->ei", self.symbols, modes)
        lin += 1j * d * self.k * np.arange(self.n_trunc + 1)[:, None] * modes
        return lin + self._nonlinear(modes, d)

    def _nonlinear(self, modes, d):
        nl = self.model.nonlinearity
        if self._conv:
            return self._nonlinear_convolution(modes)
        if not self._quasi:
            u = self.to_grid(modes)
            return self.to_modes(np.asarray(
                self.model.semilinear_rhs(u, self.mu), dtype=float))
        # quasilinear: full flux minus its linearization at u*, since the
        # linear part is already applied through the symbols
        k, mu = self.k, self.mu
        u_dev = self.to_grid(modes)
        u = self.u_star[:, None] + u_dev
        du = self.to_grid(self.xi_derivative(modes, 1))
        ddu = self.to_grid(self.xi_derivative(modes, 2))
        qn = nl
        h = qn.h(u, mu)
        h_u = qn.h_u(u, mu)
        f_u = qn.f_u(u, mu)
        g = qn.g(u, mu)
        h_star = qn.h(self.u_star, mu)
        f_u_star = qn.f_u(self.u_star, mu)
        g_u_star = qn.g_u(self.u_star, mu)
        full = (k**2 * (np.einsum("ijx,jx->ix", h, ddu)
                        + np.einsum("ijkx,jx,kx->ix", h_u, du, du))
                + k * np.einsum("ijx,jx->ix", f_u, du) + g)
        linear = (k**2 * np.einsum("ij,jx->ix", h_star, ddu)
                  + k * np.einsum("ij,jx->ix", f_u_star, du)
                  + np.einsum("ij,jx->ix", g_u_star, u_dev))
        return self.to_modes(full - linear)

    def _nonlinear_convolution(self, modes):
        from .forms import forms_from_model  # noqa: F401  (tensors come raw)

        nl = self.model.nonlinearity
        nt = self.n_trunc
        full = np.zeros((2 * nt + 1, self.n), dtype=complex)
        full[nt:] = modes
        full[:nt] = modes[1:][::-1].conj()

        def mode(eta):
            return full[eta + nt]

        out = np.zeros((nt + 1, self.n), dtype=complex)
        q, c = nl.quadratic, nl.cubic
        qt = q if callable(q) else (lambda k1, k2: q)
        ct = c if callable(c) else (lambda k1, k2, k3: c)
        for eta in range(nt + 1):
            acc = np.zeros(self.n, dtype=complex)
            for e1 in range(-nt, nt + 1):
                e2 = eta - e1
                if abs(e2) <= nt:
                    t = np.asarray(qt(e1 * self.k, e2 * self.k), dtype=complex)
                    acc += np.einsum("ijk,j,k->i", t, mode(e1), mode(e2))
            for e1 in range(-nt, nt + 1):
                for e2 in range(-nt, nt + 1):
                    e3 = eta - e1 - e2
                    if abs(e3) <= nt:
                        t = np.asarray(ct(e1 * self.k, e2 * self.k, e3 * self.k),
                                       dtype=complex)
                        acc += np.einsum("ijkl,j,k,l->i", t,
                                         mode(e1), mode(e2), mode(e3))
            out[eta] = acc
        return out

    # -- Frechet derivative --------------------------------------------------
    def jacobian_apply(self, modes, d, v_modes, e_d):
        """Directional derivative of the residual at (U, d) along (V, e_d)."""
        etas = np.arange(self.n_trunc + 1)[:, None]
        lin = np.einsum("eij,ej->ei", self.symbols, v_modes)
        lin += 1j * d * self.k * etas * v_modes
        lin += 1j * e_d * self.k * etas * modes
        return lin + self._nonlinear_derivative(modes, v_modes)

    def _nonlinear_derivative(self, modes, v_modes):
        nl = self.model.nonlinearity
        if self._conv:
            return self._convolution_derivative(modes, v_modes)
        if not self._quasi:
            u = self.to_grid(modes)
            v = self.to_grid(v_modes)
            dn = self._semilinear_jacobian(u)
            return self.to_modes(np.einsum("ijx,jx->ix", dn, v))
        k, mu = self.k, self.mu
        qn = nl
        u_dev = self.to_grid(modes)
        u = self.u_star[:, None] + u_dev
        du = self.to_grid(self.xi_derivative(modes, 1))
        ddu = self.to_grid(self.xi_derivative(modes, 2))
        v = self.to_grid(v_modes)
        dv = self.to_grid(self.xi_derivative(v_modes, 1))
        ddv = self.to_grid(self.xi_derivative(v_modes, 2))
        h = qn.h(u, mu)
        h_u = qn.h_u(u, mu)
        h_uu = qn.h_uu(u, mu)
        f_u = qn.f_u(u, mu)
        f_uu = qn.f_uu(u, mu)
        g_u = qn.g_u(u, mu)
        h_star = qn.h(self.u_star, mu)
        f_u_star = qn.f_u(self.u_star, mu)
        g_u_star = qn.g_u(self.u_star, mu)
        out = (k**2 * (np.einsum("ijx,jx->ix", h, ddv)
                       + np.einsum("ijkx,jx,kx->ix", h_u, ddu, v)
                       + np.einsum("ijkx,jx,kx->ix", h_u, dv, du)
                       + np.einsum("ijkx,jx,kx->ix", h_u, du, dv)
                       + np.einsum("ijklx,jx,kx,lx->ix", h_uu, du, du, v))
               + k * (np.einsum("ijx,jx->ix", f_u, dv)
                      + np.einsum("ijkx,jx,kx->ix", f_uu, du, v))
               + np.einsum("ijx,jx->ix", g_u, v))
        out -= (k**2 * np.einsum("ij,jx->ix", h_star, ddv)
                + k * np.einsum("ij,jx->ix", f_u_star, dv)
                + np.einsum("ij,jx->ix", g_u_star, v))
        return self.to_modes(out)

    def _semilinear_jacobian(self, u):
        nl = self.model.nonlinearity
        if isinstance(nl, SemilinearNonlinearity) and nl.jacobian is not None:
            return np.asarray(nl.jacobian(u, self.mu), dtype=float)
        if isinstance(nl, MultilinearNonlinearity):
            q = np.asarray(nl.quadratic, dtype=complex).real
            c = np.asarray(nl.cubic, dtype=complex).real
            return (np.einsum("ijk,kx->ijx", q, u)
                    + np.einsum("ikj,kx->ijx", q, u)
                    + np.einsum("ijkl,kx,lx->ijx", c, u, u)
                    + np.einsum("ikjl,kx,lx->ijx", c, u, u)
                    + np.einsum("iklj,kx,lx->ijx", c, u, u))
        # pointwise finite-difference fallback for callable-only models
        func = nl.func
        n, g = u.shape
        out = np.empty((n, n, g))
        h = 1e-7
        for j in range(n):
            e = np.zeros((n, 1))
            e[j] = h
            out[:, j, :] = (np.asarray(func(u + e, self.mu))
                            - np.asarray(func(u - e, self.mu))) / (2 * h)
        return out

    def _convolution_derivative(self, modes, v_modes):
        nl = self.model.nonlinearity
        nt = self.n_trunc
        full = np.zeros((2 * nt + 1, self.n), dtype=complex)
        full[nt:] = modes
        full[:nt] = modes[1:][::-1].conj()
        vfull = np.zeros((2 * nt + 1, self.n), dtype=complex)
        vfull[nt:] = v_modes
        vfull[:nt] = v_modes[1:][::-1].conj()

        q, c = nl.quadratic, nl.cubic
        qt = q if callable(q) else (lambda k1, k2: q)
        ct = c if callable(c) else (lambda k1, k2, k3: c)
        out = np.zeros((nt + 1, self.n), dtype=complex)
        for eta in range(nt + 1):
            acc = np.zeros(self.n, dtype=complex)
            for e1 in range(-nt, nt + 1):
                e2 = eta - e1
                if abs(e2) <= nt:
                    t = np.asarray(qt(e1 * self.k, e2 * self.k), dtype=complex)
                    acc += np.einsum("ijk,j,k->i", t, vfull[e1 + nt], full[e2 + nt])
                    acc += np.einsum("ijk,j,k->i", t, full[e1 + nt], vfull[e2 + nt])
            for e1 in range(-nt, nt + 1):
                for e2 in range(-nt, nt + 1):
                    e3 = eta - e1 - e2
                    if abs(e3) <= nt:
                        t = np.asarray(ct(e1 * self.k, e2 * self.k, e3 * self.k),
                                       dtype=complex)
                        a, b, cc = full[e1 + nt], full[e2 + nt], full[e3 + nt]
                        va, vb, vc = (vfull[e1 + nt], vfull[e2 + nt],
                                      vfull[e3 + nt])
                        acc += np.einsum("ijkl,j,k,l->i", t, va, b, cc)
                        acc += np.einsum("ijkl,j,k,l->i", t, a, vb, cc)
                        acc += np.einsum("ijkl,j,k,l->i", t, a, b, vc)
            out[eta] = acc
        return out

    # -- packing ------------------------------------------------------------
    @property
    def dof(self):
        return self.n + 2 * self.n * self.n_trunc + 1

    def pack(self, modes, d):
        parts = [modes[0].real]
        for eta in range(1, self.n_trunc + 1):
            parts.append(modes[eta].real)
            parts.append(modes[eta].imag)
        parts.append([d])
        return np.concatenate(parts)

    def unpack(self, z):
        n = self.n
        modes = np.zeros((self.n_trunc + 1, n), dtype=complex)
        modes[0] = z[:n]
        at = n
        for eta in range(1, self.n_trunc + 1):
            modes[eta] = z[at:at + n] + 1j * z[at + n:at + 2 * n]
            at += 2 * n
        return modes, float(z[at])

    def pack_residual(self, f_modes, gauge):
        parts = [f_modes[0].real]
        for eta in range(1, self.n_trunc + 1):
            parts.append(f_modes[eta].real)
            parts.append(f_modes[eta].imag)
        parts.append([gauge])
        return np.concatenate(parts)


# ---------------------------------------------------------------------------
# predictor and Newton driver


def predictor_modes(point: TuringPoint, coeffs: CglCoefficients,
                    epsilon: float, kappa_tilde: float, mu_tilde: float,
                    n_trunc: int, alpha: float | None = None):
    """Initial guess from the amplitude expansion: carrier (1/2) eps alpha r
    plus the eps^2 mean, second-harmonic and first-harmonic slave terms."""
    n = point.triple.right.size
    modes = np.zeros((n_trunc + 1, n), dtype=complex)
    if alpha is None:
        pred = dispersion_band(coeffs, kappa_tilde, mu_tilde)
        alpha = pred.amplitude
    r = point.triple.right
    modes[1] = 0.5 * epsilon * alpha * r
    modes[1] += 0.5 * epsilon**2 * (1j * kappa_tilde * alpha) \
        * (coeffs.slave_matrix @ r)
    if n_trunc >= 2:
        modes[2] = 0.5 * epsilon**2 * alpha**2 * coeffs.v2
    modes[0] = epsilon**2 * abs(alpha) ** 2 * coeffs.v0
    return modes


def _predicted_speed(point, coeffs, epsilon, kappa_tilde, mu_tilde):
    pred = dispersion_band(coeffs, kappa_tilde, mu_tilde)
    k = point.k_star + epsilon * kappa_tilde
    omega_bar = (point.lam.imag
                 + epsilon * kappa_tilde * point.d_lambda_dk.imag
                 + epsilon**2 * pred.omega)
    return -omega_bar / k


def _newton(problem: SteadyProblem, point: TuringPoint, modes, d,
            epsilon: float, collapse_guard: bool = True,
            ball_radius: float | None = None, debug: bool = False,
            rng=None):
    """Gauged Newton iteration.  Returns (modes, d, residual_norm, iters)
    or raises NoConvergence / CollapseToZero; when ``ball_radius`` is given,
    iterates leaving the ball return the string outcome "exited"."""
    l = point.triple.left
    scale = problem.op_scale

    def build_jacobian(modes, d):
        dim = problem.dof
        jac = np.empty((dim, dim))
        basis = np.zeros(dim)
        for col in range(dim):
            basis[:] = 0.0
            basis[col] = 1.0
            v_modes, e_d = problem.unpack(basis)
            ap = problem.jacobian_apply(modes, d, v_modes, e_d)
            gauge_dir = (l @ v_modes[1]).imag
            jac[:, col] = problem.pack_residual(ap, gauge_dir)
        return jac

    res = problem.residual(modes, d)
    gauge = (l @ modes[1]).imag
    rvec = problem.pack_residual(res, gauge)
    rnorm = np.linalg.norm(rvec)
    tol = NEWTON_RTOL * scale * max(np.linalg.norm(modes), epsilon**2, 1e-8)
    if debug:
        _debug_jacobian_check(problem, point, modes, d, rng)
    for it in range(NEWTON_MAX_ITER):
        if rnorm <= tol:
            # one free polish step: quadratic convergence puts the iterate
            # on the roundoff floor, making warm and cold starts agree
            jac = build_jacobian(modes, d)
            try:
                step = np.linalg.solve(jac, -rvec)
            except np.linalg.LinAlgError:
                return modes, d, float(rnorm), it
            pm, pd = problem.unpack(problem.pack(modes, d) + step)
            pres = problem.residual(pm, pd)
            pvec = problem.pack_residual(pres, (l @ pm[1]).imag)
            pnorm = np.linalg.norm(pvec)
            if pnorm < rnorm:
                return pm, pd, float(pnorm), it + 1
            return modes, d, float(rnorm), it
        jac = build_jacobian(modes, d)
        try:
            step = np.linalg.solve(jac, -rvec)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Newton system: {exc}") from exc
        new_modes, new_d = problem.unpack(problem.pack(modes, d) + step)
        new_res = problem.residual(new_modes, new_d)
        new_gauge = (l @ new_modes[1]).imag
        new_rvec = problem.pack_residual(new_res, new_gauge)
        new_rnorm = np.linalg.norm(new_rvec)
        if new_rnorm > rnorm:
            # one backtracking halving allowed per step
            half_modes, half_d = problem.unpack(
                problem.pack(modes, d) + 0.5 * step)
            half_res = problem.residual(half_modes, half_d)
            half_rvec = problem.pack_residual(
                half_res, (l @ half_modes[1]).imag)
            half_rnorm = np.linalg.norm(half_rvec)
            if half_rnorm < new_rnorm:
                new_modes, new_d = half_modes, half_d
                new_rvec, new_rnorm = half_rvec, half_rnorm
        modes, d = new_modes, new_d
        rvec, rnorm = new_rvec, new_rnorm
        size = np.linalg.norm(modes)
        if collapse_guard and size < epsilon**3:
            raise CollapseToZero(
                f"iterate norm {size:.3e} fell below eps^3 = {epsilon**3:.3e}")
        if ball_radius is not None and size > ball_radius:
            return "exited"
        tol = NEWTON_RTOL * scale * max(size, epsilon**2, 1e-8)
    if rnorm <= tol:
        return modes, d, float(rnorm), NEWTON_MAX_ITER
    raise NoConvergence(
        f"Newton did not converge in {NEWTON_MAX_ITER} steps: "
        f"residual {rnorm:.3e} vs tol {tol:.3e}")


def _debug_jacobian_check(problem, point, modes, d, rng, n_directions=10,
                          rtol=1e-6):
    rng = rng or np.random.default_rng(0)
    errs = jacobian_audit(problem, point, modes, d, rng, n_directions)
    if max(errs) > rtol:
        raise NoConvergence(
            f"assembled Jacobian disagrees with finite differences: "
            f"max rel error {max(errs):.3e}")


def jacobian_audit(problem: SteadyProblem, point: TuringPoint, modes, d,
                   rng, n_directions: int = 10):
    """Relative errors between the assembled Frechet derivative and centered
    finite differences of the residual, along random directions."""
    z0 = problem.pack(modes, d)
    base_scale = max(np.linalg.norm(z0), 1.0)
    errs = []
    for _ in range(n_directions):
        v = rng.standard_normal(problem.dof)
        v /= np.linalg.norm(v)
        v_modes, e_d = problem.unpack(v)
        analytic = problem.jacobian_apply(modes, d, v_modes, e_d)
        h = 1e-6 * base_scale
        mp, dp = problem.unpack(z0 + h * v)
        mm, dm = problem.unpack(z0 - h * v)
        fd = (problem.residual(mp, dp) - problem.residual(mm, dm)) / (2 * h)
        num = np.linalg.norm(analytic - fd)
        den = max(np.linalg.norm(analytic), 1e-12 * problem.op_scale)
        errs.append(float(num / den))
    return errs


def _finalize(problem, point, modes, d, epsilon, rnorm, iters):
    l = point.triple.left
    # phase gauge: l U^(1) real and nonnegative (shift by half a period
    # when Newton landed on the opposite sign)
    if (l @ modes[1]).real < 0:
        signs = (-1.0) ** np.arange(problem.n_trunc + 1)
        modes = modes * signs[:, None]
    total = float(np.sum(np.abs(modes) ** 2))
    tail = float(np.sum(np.abs(modes[problem.n_trunc // 2 + 1:]) ** 2))
    if total > 0 and tail > 1e-20 * total:
        raise TruncationInsufficient(
            f"tail energy fraction {tail / total:.3e} exceeds 1e-20; "
            f"increase n_trunc beyond {problem.n_trunc}")
    alpha = complex(l @ modes[1]) * 2.0 / epsilon if epsilon > 0 else 0.0j
    return WaveSolution(
        modes=modes, k=problem.k, d=float(d), epsilon=float(epsilon),
        mu=problem.mu, residual_norm=float(rnorm),
        alpha_measured=alpha, omega_measured=float(-d * problem.k),
        n_trunc=problem.n_trunc, iterations=iters)


def newton_wave(model: ModelSpec, point: TuringPoint, coeffs: CglCoefficients,
                epsilon: float, kappa_tilde: float, mu_tilde: float,
                n_trunc: int = 32, debug: bool = False,
                initial=None, rng=None) -> WaveSolution:
    """Solve for the periodic traveling wave at (eps, kappa~, mu~).

    The initial guess is the amplitude-expansion predictor including the
    second-order corrections; ``initial`` overrides it (modes, d).
    """
    if n_trunc < 16:
        raise ValueError("n_trunc >= 16 is required")
    if epsilon == 0.0:
        problem = SteadyProblem(model, point.k_star, point.mu_c, n_trunc)
        modes = np.zeros((n_trunc + 1, model.dimension), dtype=complex)
        return _finalize(problem, point, modes, coeffs.d_star, 0.0, 0.0, 0)
    pred = dispersion_band(coeffs, kappa_tilde, mu_tilde)
    if initial is None and not pred.in_band:
        raise CglforgeError(
            "no in-band prediction at these parameters; use "
            "nonexistence_probe to explore outside the band")
    k = point.k_star + epsilon * kappa_tilde
    mu = point.mu_c + epsilon**2 * mu_tilde
    problem = SteadyProblem(model, k, mu, n_trunc)
    if initial is None:
        modes = predictor_modes(point, coeffs, epsilon, kappa_tilde,
                                mu_tilde, n_trunc)
        d = _predicted_speed(point, coeffs, epsilon, kappa_tilde, mu_tilde)
    else:
        modes, d = initial
        modes = np.array(modes, dtype=complex)
    out = _newton(problem, point, modes, d, epsilon, debug=debug, rng=rng)
    modes, d, rnorm, iters = out
    return _finalize(problem, point, modes, d, epsilon, rnorm, iters)


def continue_branch(model: ModelSpec, point: TuringPoint,
                    coeffs: CglCoefficients, epsilon_list,
                    kappa_tilde: float, mu_tilde: float,
                    n_trunc: int = 32) -> BranchData:
    """March along ascending epsilon with warm starts rescaled mode-by-mode."""
    eps_list = [float(e) for e in epsilon_list]
    if any(b <= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("epsilon_list must be strictly ascending")
    entries = []
    prev = None
    for eps in eps_list:
        if prev is None:
            initial = None
        else:
            e_prev, sol_prev = prev
            ratio = eps / e_prev
            powers = np.maximum(np.arange(n_trunc + 1), 1).astype(float)
            powers[0] = 2.0  # mean mode scales like eps^2
            scal = ratio ** powers
            initial = (sol_prev.modes * scal[:, None], sol_prev.d)
        try:
            sol = newton_wave(model, point, coeffs, eps, kappa_tilde,
                              mu_tilde, n_trunc=n_trunc, initial=initial)
        except CglforgeError as exc:
            raise type(exc)(f"epsilon = {eps}: {exc}") from exc
        entries.append((eps, kappa_tilde, sol))
        prev = (eps, sol)
    branch = BranchData(entries=entries, point=point, coeffs=coeffs,
                        mu_tilde=mu_tilde)
    branch.diagnostics = _branch_diagnostics(branch)
    return branch


def _branch_diagnostics(branch: BranchData) -> dict:
    point, coeffs = branch.point, branch.coeffs
    rows = []
    for eps, kt, sol in branch.entries:
        pred = dispersion_band(coeffs, kt, branch.mu_tilde)
        omega_exp = (point.lam.imag + eps * kt * point.d_lambda_dk.imag
                     + eps**2 * pred.omega)
        rows.append({
            "epsilon": eps,
            "alpha_measured": abs(sol.alpha_measured),
            "alpha_predicted": pred.amplitude,
            "alpha_deviation": abs(abs(sol.alpha_measured) - pred.amplitude),
            "omega_measured": sol.omega_measured,
            "omega_expansion": omega_exp,
            "omega_deviation": abs(sol.omega_measured - omega_exp),
        })
    return {"per_epsilon": rows}


def fit_landau(branch: BranchData, mu_tilde: float | None = None) -> complex:
    """Fit the Landau constant from measured branch amplitudes and speeds.

    Inverts |alpha|^2 = (Re growth mu~ - kappa~^2 Re diffusion)/(-Re gamma)
    per branch point and Richardson-extrapolates eps -> 0; the imaginary
    part comes the same way from the measured frequencies.
    """
    if mu_tilde is None:
        mu_tilde = branch.mu_tilde
    if len(branch.entries) < 3:
        raise FitIllConditioned("need at least 3 branch points")
    coeffs, point = branch.coeffs, branch.point
    eps = np.array([e for e, _, _ in branch.entries])
    kts = np.array([kt for _, kt, _ in branch.entries])
    if np.ptp(kts) > 0:
        raise FitIllConditioned("kappa_tilde must be fixed along the branch")
    kt = float(kts[0])
    amps = np.array([abs(s.alpha_measured) for _, _, s in branch.entries])
    if np.ptp(amps) < 1e-6 and np.max(amps) < 1e-6:
        raise FitIllConditioned("branch amplitudes nearly identical/degenerate")
    numer = coeffs.growth.real * mu_tilde - kt**2 * coeffs.diffusion.real
    re_gamma = -numer / amps**2
    omegas = np.array([s.omega_measured for _, _, s in branch.entries])
    om2 = (omegas - point.lam.imag - eps * kt * point.d_lambda_dk.imag) / eps**2
    im_gamma = (om2 + kt**2 * coeffs.diffusion.imag
                - mu_tilde * coeffs.growth.imag) / amps**2
    re0, re_order = _richardson(eps, re_gamma)
    im0, im_order = _richardson(eps, im_gamma)
    gamma = complex(re0, im0)
    branch.gamma_ls = gamma
    branch.diagnostics["fit"] = {
        "re_gamma_sequence": re_gamma.tolist(),
        "im_gamma_sequence": im_gamma.tolist(),
        "observed_order_re": re_order,
        "observed_order_im": im_order,
    }
    return gamma


def _richardson(eps, values):
    """Extrapolate values(eps) = v0 + c1 eps + c2 eps^2 + ... to eps -> 0
    by polynomial least squares; observed order from successive differences."""
    deg = min(len(eps) - 1, 2)
    coef = np.polynomial.polynomial.polyfit(eps, values, deg)
    order = None
    if len(eps) >= 3:
        d1 = abs(values[1] - values[0])
        d2 = abs(values[2] - values[1])
        if d1 > 0 and d2 > 0 and eps[2] > eps[1] > eps[0]:
            order = float(np.log(d2 / d1) / np.log(eps[2] / eps[1]))
    return float(coef[0]), order


def nonexistence_probe(model: ModelSpec, point: TuringPoint,
                       coeffs: CglCoefficients, epsilon: float,
                       kappa_tilde: float, mu_tilde: float,
                       n_trunc: int = 32, n_starts: int = 8,
                       seed: int = 0) -> dict:
    """Hunt for small nontrivial waves outside the existence band.

    Runs Newton from randomized small starts; PASS means every start either
    collapses onto the trivial branch or leaves the small ball of radius
    sqrt(eps).  A converged small nontrivial solution is reported as a
    theorem contradiction for human review, never silently."""
    band = dispersion_band(coeffs, 0.0, mu_tilde)
    if kappa_tilde**2 < 1.2 * band.band_edge:
        raise ValueError("probe expects kappa_tilde^2 >= 1.2 * band_edge")
    rng = np.random.default_rng(seed)
    k = point.k_star + epsilon * kappa_tilde
    mu = point.mu_c + epsilon**2 * mu_tilde
    problem = SteadyProblem(model, k, mu, n_trunc)
    ref_scale = 0.5 * epsilon * band.amplitude if band.amplitude > 0 else \
        0.5 * epsilon * np.sqrt(coeffs.growth.real * mu_tilde
                                / abs(coeffs.gamma.real))
    outcomes = []
    ball = np.sqrt(epsilon)
    for start in range(n_starts):
        if epsilon == 0.0:
            outcomes.append({"start": start, "outcome": "collapsed",
                             "norm": 0.0})
            continue
        modes = np.zeros((n_trunc + 1, model.dimension), dtype=complex)
        active = min(4, n_trunc)
        raw = (rng.standard_normal((active + 1, model.dimension))
               + 1j * rng.standard_normal((active + 1, model.dimension)))
        raw[0] = raw[0].real
        modes[:active + 1] = raw
        modes *= rng.uniform(0.2, 1.0) * 2.0 * epsilon * ref_scale \
            / np.linalg.norm(modes)
        d0 = coeffs.d_star + 0.01 * rng.standard_normal()
        try:
            out = _newton(problem, point, modes, d0, epsilon,
                          ball_radius=ball)
        except CollapseToZero:
            outcomes.append({"start": start, "outcome": "collapsed"})
            continue
        except NoConvergence:
            outcomes.append({"start": start, "outcome": "no_convergence"})
            continue
        if out == "exited":
            outcomes.append({"start": start, "outcome": "exited_ball"})
            continue
        sol_modes, d, rnorm, _ = out
        size = np.linalg.norm(sol_modes)
        if size < epsilon**2.5:
            outcomes.append({"start": start, "outcome": "collapsed",
                             "norm": float(size)})
        elif size > ball:
            outcomes.append({"start": start, "outcome": "exited_ball",
                             "norm": float(size)})
        else:
            outcomes.append({
                "start": start, "outcome": "THEOREM-CONTRADICTION",
                "norm": float(size), "d": float(d),
                "residual": float(rnorm)})
    ok = all(o["outcome"] in ("collapsed", "exited_ball") for o in outcomes)
    return {"pass": ok, "epsilon": epsilon, "kappa_tilde": kappa_tilde,
            "mu_tilde": mu_tilde, "band_edge": band.band_edge,
            "starts": outcomes}


def mode_projections(model: ModelSpec, point: TuringPoint,
                     solution: WaveSolution) -> dict:
    """Critical/deflated/harmonic energy split of a converged wave.

    P extracts the critical-eigendirection part of the +-1 modes, Q the
    complementary part, R all other harmonics; the slaving scalings demand
    Q, R = O(eps^2) against the P-part O(eps)."""
    pi = point.triple.projector
    u1 = solution.modes[1]
    p_norm = float(np.sqrt(2.0) * np.linalg.norm(pi @ u1))
    q_norm = float(np.sqrt(2.0) * np.linalg.norm(u1 - pi @ u1))
    r_sq = float(np.linalg.norm(solution.modes[0]) ** 2)
    for eta in range(2, solution.n_trunc + 1):
        r_sq += 2.0 * float(np.linalg.norm(solution.modes[eta]) ** 2)
    r_norm = float(np.sqrt(r_sq))
    eps = solution.epsilon
    out = {"P": p_norm, "Q": q_norm, "R": r_norm,
           "P_over_eps": p_norm / eps if eps else 0.0,
           "Q_over_eps2": q_norm / eps**2 if eps else 0.0,
           "R_over_eps2": r_norm / eps**2 if eps else 0.0}
    if eps:
        alpha = solution.alpha_measured
        predicted2 = 0.5 * eps**2 * alpha**2
        if solution.n_trunc >= 2:
            out["second_harmonic_deviation"] = float(
                np.linalg.norm(solution.modes[2] - predicted2
                               * np.asarray(_second_harmonic_vector(model, point)))
                / max(np.linalg.norm(solution.modes[2]), 1e-300))
    return out


def _second_harmonic_vector(model, point):
    q, _ = forms_from_model(model, point)
    from .amplitude import harmonic_responses

    _, v2, _ = harmonic_responses(model, point, q)
    return v2
