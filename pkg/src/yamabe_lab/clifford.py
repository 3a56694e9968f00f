"""Clifford action of self-dual 2-forms on the positive spinor space.

Self-dual forms are written in the orthogonal basis

    w1 = dx1^dx2 + dx3^dx4,  w2 = dx1^dx3 - dx2^dx4,  w3 = dx1^dx4 + dx2^dx3,

each of pointwise norm sqrt(2). The representation on C^2 is
``rho(w) = -2i (a1 s1 + a2 s2 + a3 s3)`` with Pauli matrices ``s_k``. Only the
eigenvalue magnitude ``sqrt(2)|w|`` is convention independent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .confgrid import TwoFormField, selfdual_projection

PAULI = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=np.complex128,
)

SELFDUAL_BASIS = np.array(
    [
        [1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, 1.0, 0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class SelfDualPoint:
    a: tuple[float, float, float]

    def __init__(self, a1: float, a2: float = 0.0, a3: float = 0.0):
        object.__setattr__(self, "a", (float(a1), float(a2), float(a3)))

    @classmethod
    def from_array(cls, a) -> "SelfDualPoint":
        return cls(*np.asarray(a, dtype=float).reshape(3))

    @classmethod
    def from_two_form(cls, omega: TwoFormField) -> "SelfDualPoint":
        """Coefficients of the self-dual part of a constant 2-form."""
        plus = selfdual_projection(omega).components.reshape(6)
        return cls(*(SELFDUAL_BASIS @ plus / 2.0))

    def as_array(self) -> np.ndarray:
        return np.array(self.a)

    def as_two_form(self) -> TwoFormField:
        return TwoFormField(self.as_array() @ SELFDUAL_BASIS)

    @property
    def norm(self) -> float:
        """Pointwise norm ``|w| = sqrt(2 (a1^2 + a2^2 + a3^2))``."""
        return math.sqrt(2.0 * sum(x * x for x in self.a))

    def dot(self, other: "SelfDualPoint") -> float:
        return 2.0 * sum(x * y for x, y in zip(self.a, other.a))


def clifford_action(omega: SelfDualPoint) -> np.ndarray:
    """2x2 complex matrix of ``omega`` acting on V+; ``rho^2 = -2|omega|^2``."""
    return -2.0j * np.einsum("k,kij->ij", omega.as_array(), PAULI)


def clifford_eigenvalues(omega: SelfDualPoint) -> np.ndarray:
    """Eigenvalues sorted by imaginary part; expected ``-+ i sqrt(2) |omega|``."""
    ev = np.linalg.eigvals(clifford_action(omega))
    return ev[np.argsort(ev.imag)]


def anticommutator_check(omega: SelfDualPoint, omega_prime: SelfDualPoint) -> float:
    """Frobenius norm of ``rho(w) rho(w') + rho(w') rho(w) + 4 <w, w'> Id``."""
    r, rp = clifford_action(omega), clifford_action(omega_prime)
    m = r @ rp + rp @ r + 4.0 * omega.dot(omega_prime) * np.eye(2)
    return float(np.linalg.norm(m))


def weitzenboeck_margin(s, phi_plus_norm) -> tuple[np.ndarray, float]:
    """Pointwise margin ``s - 4 pi sqrt(2) |phi+|`` and its minimum.

    A strictly positive minimum rules out harmonic spinors for the twisted
    Dirac operator whose curvature is ``-2 pi i phi``.
    """
    s = np.asarray(s, dtype=np.float64)
    phi = np.asarray(phi_plus_norm, dtype=np.float64)
    if s.shape != phi.shape:
        raise ValueError(f"shape mismatch: {s.shape} vs {phi.shape}")
    margin = s - 4.0 * math.pi * math.sqrt(2.0) * phi
    return margin, float(margin.min())
