"""Dense complex eigen-perturbation utilities.

Matched left/right eigenvectors with a fixed phase gauge, reduced resolvents
computed through a bordered solve, the operator norm of a matrix inverse via
the smallest singular value, and the second-derivative formula for a simple
eigenvalue of an analytic matrix family
``lambda''(0) = 2 (l M2 r - l M1 (I-Pi) N (I-Pi) M1 r)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonSimpleEigenvalue, ReducedResolventSingular, SingularMatrix

__all__ = [
    "EigenTriple",
    "ReducedResolvent",
    "eigen_triple",
    "inverse_norm",
    "eigenvalue_curvature",
]

SIMPLE_GAP_RTOL = 1e-8
RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class EigenTriple:
    """A simple eigenvalue with matched left/right eigenvectors.

    The gauge: ``left @ right == 1`` and the largest-modulus component of
    ``right`` is real and positive.  ``left`` is stored as a 1-d array acting
    as a row covector.
    """

    value: complex
    right: np.ndarray
    left: np.ndarray
    normalization: complex

    @property
    def projector(self) -> np.ndarray:
        """Spectral projector Pi = r l onto the eigendirection."""
        return np.outer(self.right, self.left)

    def residuals(self, matrix: np.ndarray) -> tuple[float, float]:
        """Right and left eigen-residual norms for a given matrix."""
        res_r = np.linalg.norm(matrix @ self.right - self.value * self.right)
        res_l = np.linalg.norm(self.left @ matrix - self.value * self.left)
        return float(res_r), float(res_l)


@dataclass(frozen=True)
class ReducedResolvent:
    """Inverse of (I-Pi) M0 (I-Pi) on range(I-Pi), zero on range(Pi)."""

    projector: np.ndarray
    inverse_on_range: np.ndarray


def _select_index(values: np.ndarray, which) -> int:
    if isinstance(which, str):
        if which == "largest_real":
            return int(np.argmax(values.real))
        raise ValueError(f"unknown eigenvalue selector {which!r}")
    target = complex(which)
    return int(np.argmin(np.abs(values - target)))


def eigen_triple(matrix: np.ndarray, which="largest_real") -> EigenTriple:
    """Eigen-triple (value, right, left) for a selected simple eigenvalue.

    ``which`` is either the string ``"largest_real"`` or a complex target;
    the nearest eigenvalue to the target is chosen.  Raises
    NonSimpleEigenvalue when the gap to the nearest other eigenvalue is
    below ``1e-8 * ||M||``.
    """
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    scale = max(np.linalg.norm(matrix, 2), 1e-300)
    values, vl, vr = scipy.linalg.eig(matrix, left=True, right=True)
    idx = _select_index(values, which)
    value = values[idx]

    if n > 1:
        others = np.delete(values, idx)
        gap = np.min(np.abs(others - value))
        if gap <= SIMPLE_GAP_RTOL * scale:
            raise NonSimpleEigenvalue(
                f"eigenvalue {value:.6g} has gap {gap:.3e} <= "
                f"{SIMPLE_GAP_RTOL:.0e} * ||M|| = {SIMPLE_GAP_RTOL * scale:.3e}"
            )

    right = vr[:, idx]
    # scipy returns left eigenvectors as columns of vl with vl^H M = w vl^H.
    left = vl[:, idx].conj()

    # Phase gauge: largest-modulus component of r real and positive.
    j = int(np.argmax(np.abs(right)))
    right = right / np.linalg.norm(right)
    phase = right[j] / abs(right[j])
    right = right / phase

    dot = left @ right
    if abs(dot) < 1e-13 * np.linalg.norm(left):
        raise NonSimpleEigenvalue(
            "left/right eigenvectors nearly orthogonal; eigenvalue is "
            "defective to working precision"
        )
    left = left / dot
    return EigenTriple(value=complex(value), right=right, left=left,
                       normalization=complex(left @ right))


def inverse_norm(matrix: np.ndarray) -> float:
    """Operator 2-norm of M^{-1}, computed as 1 / sigma_min(M)."""
    matrix = np.asarray(matrix, dtype=complex)
    sigma = scipy.linalg.svdvals(matrix)
    smin = sigma[-1]
    smax = sigma[0]
    if smin <= 1e-14 * max(smax, 1e-300):
        raise SingularMatrix(
            f"sigma_min = {smin:.3e} below 1e-14 * ||M|| = {1e-14 * smax:.3e}"
        )
    return float(1.0 / smin)


def reduced_resolvent(m0: np.ndarray, triple: EigenTriple) -> ReducedResolvent:
    """Reduced resolvent N of M0 at its simple zero eigenvalue.

    Solves the bordered system [[M0, r], [l, 0]] rather than pseudo-inverting,
    so conditioning degrades only with the deflated problem.  Satisfies
    ``N (I-Pi) M0 (I-Pi) = I-Pi`` and ``Pi N = N Pi = 0``.
    """
    m0 = np.asarray(m0, dtype=complex)
    n = m0.shape[0]
    pi = triple.projector
    bordered = np.zeros((n + 1, n + 1), dtype=complex)
    bordered[:n, :n] = m0
    bordered[:n, n] = triple.right
    bordered[n, :n] = triple.left
    rhs = np.zeros((n + 1, n), dtype=complex)
    rhs[:n, :] = np.eye(n) - pi
    try:
        sol = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError as exc:
        raise ReducedResolventSingular(str(exc)) from exc
    resolvent = sol[:n, :]
    check = resolvent @ (np.eye(n) - pi) @ m0 @ (np.eye(n) - pi)
    scale = max(np.linalg.norm(m0), 1.0)
    if np.linalg.norm(check - (np.eye(n) - pi)) > 1e-8 * scale:
        raise ReducedResolventSingular(
            "bordered solve did not produce a valid reduced resolvent; "
            "(I-Pi) M0 (I-Pi) is singular on range(I-Pi)"
        )
    return ReducedResolvent(projector=pi, inverse_on_range=resolvent)


def eigenvalue_curvature(m0: np.ndarray, m1: np.ndarray, m2: np.ndarray,
                         triple: EigenTriple) -> complex:
    """Second derivative at x=0 of the simple zero eigenvalue of
    M(x) = M0 + x M1 + x^2 M2.

    Returns ``2 (l M2 r - l M1 (I-Pi) N (I-Pi) M1 r)`` with N the reduced
    resolvent of M0.
    """
    m1 = np.asarray(m1, dtype=complex)
    m2 = np.asarray(m2, dtype=complex)
    n = m0.shape[0]
    pi = triple.projector
    res = reduced_resolvent(m0, triple)
    q = np.eye(n) - pi
    l, r = triple.left, triple.right
    correction = l @ m1 @ q @ res.inverse_on_range @ q @ m1 @ r
    return complex(2.0 * (l @ m2 @ r - correction))
