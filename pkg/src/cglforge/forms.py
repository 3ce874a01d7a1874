"""Quadratic and cubic multilinear forms and their Fourier multipliers.

Conventions: all multipliers are stored in the Taylor-form normalization,
``N(U) = Q(U, U) + C(U, U, U) + h.o.t.``; that is, Q is half of the second
derivative multiplier of N and C is one sixth of the third.  A multiplier at
frequencies (k1, ..) is an (n, n, ..) tensor contracting against one vector
per slot.  Translation invariance means the form acts diagonally on
exponentials: feeding e^{i k1 x} u into slot 1 etc. produces the tensor value
times e^{i (k1+k2+..) x}, which is how every lattice computation here uses it.

Semilinear models have frequency-independent multipliers, exact when the
model registers analytic Taylor tensors and otherwise extracted by
Richardson-extrapolated central differences.  Quasilinear models get exact
polynomial-in-k multipliers carrying one (ik) factor per differentiated slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import NonQuadraticOrder
from .linalg import EigenTriple
from .symbol import (
    ModelSpec,
    MultilinearNonlinearity,
    QuasilinearNonlinearity,
    SemilinearNonlinearity,
)

__all__ = [
    "QuadraticMultiplier",
    "CubicMultiplier",
    "forms_from_model",
    "eval_quadratic",
    "eval_cubic",
]


def _axes_perm(tensor, perm):
    """Permute the trailing slot axes of a multiplier tensor."""
    lead = tensor.ndim - len(perm)
    axes = tuple(range(lead)) + tuple(lead + p for p in perm)
    return np.transpose(tensor, axes)


@dataclass(frozen=True)
class _PolyTerm:
    # tensor * prod_slots (i k_slot)^powers[slot]
    powers: tuple
    tensor: np.ndarray


class QuadraticMultiplier:
    """Symmetric bilinear Fourier multiplier (k1, k2) -> (n, n, n) tensor."""

    def __init__(self, n, evaluator=None, poly_terms=None, symmetric=True):
        self.n = n
        self.symmetric = symmetric
        self._evaluator = evaluator
        self._poly_terms = poly_terms  # already symmetrized term list

    @property
    def frequency_dependent(self):
        if self._poly_terms is not None:
            return any(sum(t.powers) > 0 for t in self._poly_terms)
        return True

    def tensor(self, k1, k2):
        if self._poly_terms is not None:
            return _poly_eval(self._poly_terms, (k1, k2))
        return np.asarray(self._evaluator(k1, k2), dtype=complex)

    def tensor_dk(self, k1, k2, c1, c2):
        """Per-slot frequency derivatives d_{k1}^c1 d_{k2}^c2 of the tensor."""
        if self._poly_terms is not None:
            return _poly_eval(self._poly_terms, (k1, k2), (c1, c2))
        return _fd_tensor_dk(self.tensor, (k1, k2), (c1, c2))


class CubicMultiplier:
    """Symmetric trilinear Fourier multiplier -> (n, n, n, n) tensor."""

    def __init__(self, n, evaluator=None, poly_terms=None, symmetric=True):
        self.n = n
        self.symmetric = symmetric
        self._evaluator = evaluator
        self._poly_terms = poly_terms

    @property
    def frequency_dependent(self):
        if self._poly_terms is not None:
            return any(sum(t.powers) > 0 for t in self._poly_terms)
        return True

    def tensor(self, k1, k2, k3):
        if self._poly_terms is not None:
            return _poly_eval(self._poly_terms, (k1, k2, k3))
        return np.asarray(self._evaluator(k1, k2, k3), dtype=complex)

    def tensor_dk(self, k1, k2, k3, c1, c2, c3):
        if self._poly_terms is not None:
            return _poly_eval(self._poly_terms, (k1, k2, k3), (c1, c2, c3))
        return _fd_tensor_dk(self.tensor, (k1, k2, k3), (c1, c2, c3))


def _poly_eval(terms, ks, derivs=None):
    nslots = len(ks)
    derivs = derivs or (0,) * nslots
    out = None
    for term in terms:
        coeff = 1.0 + 0.0j
        for p, k, c in zip(term.powers, ks, derivs):
            if c > p:
                coeff = 0.0
                break
            fall = 1.0
            for q in range(c):
                fall *= (p - q)
            coeff *= fall * 1j**p * (1.0 * k) ** (p - c)
        if np.all(coeff == 0.0):
            continue
        contrib = coeff * term.tensor
        out = contrib if out is None else out + contrib
    if out is None:
        shape = terms[0].tensor.shape if terms else ()
        out = np.zeros(shape, dtype=complex)
    return out


def _fd_tensor_dk(tensor_fn, ks, derivs, h=1e-4):
    """Central finite differences in the frequency slots, one slot at a time."""
    slot = next((i for i, c in enumerate(derivs) if c > 0), None)
    if slot is None:
        return tensor_fn(*ks)
    lower = tuple(c - 1 if i == slot else c for i, c in enumerate(derivs))
    kp = tuple(k + h if i == slot else k for i, k in enumerate(ks))
    km = tuple(k - h if i == slot else k for i, k in enumerate(ks))
    return (_fd_tensor_dk(tensor_fn, kp, lower, h)
            - _fd_tensor_dk(tensor_fn, km, lower, h)) / (2 * h)


# ---------------------------------------------------------------------------
# evaluation


def eval_quadratic(q: QuadraticMultiplier, n1: int, n2: int, k_star: float,
                   u, v) -> np.ndarray:
    """Q(n1 k*, n2 k*)(u, v) on the critical lattice."""
    t = q.tensor(n1 * k_star, n2 * k_star)
    return np.einsum("ijk,j,k->i", t, u, v)


def eval_cubic(c: CubicMultiplier, n1: int, n2: int, n3: int, k_star: float,
               u, v, w) -> np.ndarray:
    """C(n1 k*, n2 k*, n3 k*)(u, v, w) on the critical lattice."""
    t = c.tensor(n1 * k_star, n2 * k_star, n3 * k_star)
    return np.einsum("ijkl,j,k,l->i", t, u, v, w)


# ---------------------------------------------------------------------------
# extraction from models


def _symmetrize_quadratic(raw_terms):
    """Average a slot-annotated term list over both slot orders."""
    out = []
    for powers, tensor in raw_terms:
        out.append(_PolyTerm(powers=powers, tensor=0.5 * tensor))
        out.append(_PolyTerm(powers=powers[::-1],
                             tensor=0.5 * _axes_perm(tensor, (1, 0))))
    return _merge_terms(out)


def _symmetrize_cubic(raw_terms):
    out = []
    perms = list(permutations(range(3)))
    for powers, tensor in raw_terms:
        for perm in perms:
            # slot s of the new tensor is slot perm[s] of the raw one
            new_powers = tuple(powers[perm[s]] for s in range(3))
            out.append(_PolyTerm(powers=new_powers,
                                 tensor=_axes_perm(tensor, perm) / 6.0))
    return _merge_terms(out)


def _merge_terms(terms):
    acc = {}
    for t in terms:
        if t.powers in acc:
            acc[t.powers] = acc[t.powers] + t.tensor
        else:
            acc[t.powers] = t.tensor.astype(complex)
    return tuple(_PolyTerm(powers=p, tensor=t) for p, t in sorted(
        acc.items(), key=lambda kv: kv[0]))


def _quadratic_fd(func, mu, n, step):
    """Taylor quadratic tensor of N by polarized central differences."""

    def d2(u, v, eps):
        if np.array_equal(u, v):
            return (func(eps * u, mu) + func(-eps * u, mu)) / eps**2
        up, um = u + v, u - v
        return (func(eps * up, mu) + func(-eps * up, mu)
                - func(eps * um, mu) - func(-eps * um, mu)) / (4 * eps**2)

    out = np.zeros((n, n, n))
    eye = np.eye(n)
    for j in range(n):
        for k in range(j, n):
            coarse = d2(eye[j], eye[k], step)
            fine = d2(eye[j], eye[k], step / 2)
            val = (4 * fine - coarse) / 3  # one Richardson level
            out[:, j, k] = val / 2.0
            out[:, k, j] = val / 2.0
    return out


def _cubic_fd(func, mu, n, step):
    """Taylor cubic tensor by odd-part extraction plus full polarization."""

    def t_diag(w, eps):
        coarse = 3.0 * (func(eps * w, mu) - func(-eps * w, mu)) / eps**3
        fine = 3.0 * (func(eps / 2 * w, mu) - func(-eps / 2 * w, mu)) / (eps / 2) ** 3
        return (4 * fine - coarse) / 3

    def d3(u, v, w, eps):
        # T(u,v,w) = (1/48) sum_{signs} s1 s2 s3 T(s1 u + s2 v + s3 w)^diag
        acc = np.zeros(n)
        for s1 in (1.0, -1.0):
            for s2 in (1.0, -1.0):
                for s3 in (1.0, -1.0):
                    acc = acc + s1 * s2 * s3 * t_diag(s1 * u + s2 * v + s3 * w, eps)
        return acc / 48.0

    out = np.zeros((n, n, n, n))
    eye = np.eye(n)
    for j in range(n):
        for k in range(j, n):
            for l in range(k, n):
                val = d3(eye[j], eye[k], eye[l], step) / 6.0
                for perm in set(permutations((j, k, l))):
                    out[(slice(None),) + perm] = val
    return out


def forms_from_model(model: ModelSpec, point) -> tuple:
    """Quadratic and cubic multipliers of the nonlinearity at the critical
    point.  Semilinear models give frequency-independent tensors; quasilinear
    models get exact polynomial multipliers carrying the (ik) derivative
    factors of each slot; explicit multilinear models pass through."""
    n = model.dimension
    mu_c = point.mu_c
    nl = model.nonlinearity

    if isinstance(nl, MultilinearNonlinearity):
        q = nl.quadratic
        c = nl.cubic
        if callable(q):
            quad = QuadraticMultiplier(n, evaluator=q, symmetric=nl.symmetric)
        else:
            quad = QuadraticMultiplier(n, poly_terms=(
                _PolyTerm(powers=(0, 0), tensor=np.asarray(q, dtype=complex)),),
                symmetric=nl.symmetric)
        if callable(c):
            cub = CubicMultiplier(n, evaluator=c, symmetric=nl.symmetric)
        else:
            cub = CubicMultiplier(n, poly_terms=(
                _PolyTerm(powers=(0, 0, 0), tensor=np.asarray(c, dtype=complex)),),
                symmetric=nl.symmetric)
        return quad, cub

    if isinstance(nl, SemilinearNonlinearity):
        zero = np.zeros(n)
        n0 = np.linalg.norm(np.asarray(nl.func(zero, mu_c), dtype=float))
        if n0 > 1e-10:
            raise NonQuadraticOrder(f"||N(0)|| = {n0:.3e}")
        if nl.jacobian is not None:
            dn0 = np.linalg.norm(np.asarray(nl.jacobian(zero, mu_c), dtype=float))
            if dn0 > 1e-10:
                raise NonQuadraticOrder(f"||DN(0)|| = {dn0:.3e}")
        if nl.form_provider is not None:
            q_arr = np.asarray(nl.form_provider(mu_c, 2), dtype=float)
            c_arr = np.asarray(nl.form_provider(mu_c, 3), dtype=float)
        else:
            q_arr = _quadratic_fd(nl.func, mu_c, n, step=1e-4)
            c_arr = _cubic_fd(nl.func, mu_c, n, step=1e-3)
        quad = QuadraticMultiplier(n, poly_terms=(
            _PolyTerm(powers=(0, 0), tensor=q_arr.astype(complex)),))
        cub = CubicMultiplier(n, poly_terms=(
            _PolyTerm(powers=(0, 0, 0), tensor=c_arr.astype(complex)),))
        return quad, cub

    if isinstance(nl, QuasilinearNonlinearity):
        u_star = np.asarray(nl.u_star(mu_c), dtype=float)
        h_u = np.asarray(nl.h_u(u_star, mu_c), dtype=float)
        h_uu = np.asarray(nl.h_uu(u_star, mu_c), dtype=float)
        f_uu = np.asarray(nl.f_uu(u_star, mu_c), dtype=float)
        f_uuu = np.asarray(nl.f_uuu(u_star, mu_c), dtype=float)
        g_uu = np.asarray(nl.g_uu(u_star, mu_c), dtype=float)
        g_uuu = np.asarray(nl.g_uuu(u_star, mu_c), dtype=float)
        # quadratic part of the flux expansion:
        #   h_u(U_x, U_x) + h_u(U_xx, U) + f_uu(U_x, U) + 1/2 g_uu(U, U)
        quad_raw = [
            ((1, 1), h_u),
            ((2, 0), h_u),
            ((1, 0), f_uu),
            ((0, 0), 0.5 * g_uu),
        ]
        # cubic part:
        #   h_uu(U_x, U_x, U) + 1/2 h_uu(U_xx, U, U) + 1/2 f_uuu(U_x, U, U)
        #   + 1/6 g_uuu(U, U, U)
        cubic_raw = [
            ((1, 1, 0), h_uu),
            ((2, 0, 0), 0.5 * h_uu),
            ((1, 0, 0), 0.5 * f_uuu),
            ((0, 0, 0), g_uuu / 6.0),
        ]
        quad = QuadraticMultiplier(n, poly_terms=_symmetrize_quadratic(quad_raw))
        cub = CubicMultiplier(n, poly_terms=_symmetrize_cubic(cubic_raw))
        return quad, cub

    raise TypeError(f"unsupported nonlinearity {type(nl).__name__}")
