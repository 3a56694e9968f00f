"""Lowest eigenpair of the perturbed Yamabe operator and what follows from it.

On the metric ``g = u^2 delta`` the perturbed operator is

    P_g phi = 6 Delta_g phi + s_g phi - f_g phi,

with ``f`` a weight -2 function. Perturbations are passed in the flat
background gauge (``f_delta``); on ``g`` they act as ``f_g = u^-2 f_delta``.
Keeping ``f_delta`` fixed while changing ``u`` therefore stays inside one
conformal class of pairs ``(g, f)``.

Two assemblies exist:

``"covariant"`` (default)
    ``P_g phi = u^-3 P_delta(u phi)``, i.e. the Laplacian is defined through
    the covariance law and conformal covariance holds to rounding.
``"stencil"``
    Conservative-form Laplace-Beltrami stencil plus the log-form scalar
    curvature. Carries a genuine O(h^2) discretisation error, used as an
    independent check of the covariant assembly.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .confgrid import (
    ConformalGrid,
    WeightedField,
    laplace_beltrami_stencil,
    scalar_curvature_log_form,
    yamabe_operator_flat,
)

log = logging.getLogger(__name__)

SCHEMES = ("covariant", "stencil")


class SolverError(RuntimeError):
    """Iteration did not converge, or the ground state failed a sanity check."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 200
    cg_tol: float = 1e-13
    cg_max_iter: int = 20000
    shift_margin: float = 1.0
    zero_band_factor: float = 10.0

    @classmethod
    def from_dict(cls, doc: dict) -> "SolverConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown solver option(s): {sorted(unknown)}")
        cfg = cls(**doc)
        if cfg.tol <= 0 or cfg.cg_tol <= 0:
            raise ValueError("tolerances must be positive")
        if cfg.max_iter < 1 or cfg.cg_max_iter < 1:
            raise ValueError("iteration caps must be at least 1")
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "SolverConfig":
        return cls.from_dict(json.loads(text))


class PerturbedOperator:
    """``6 Delta_g + s_g - f_g`` on the lattice, self-adjoint in ``L^2(dmu_g)``."""

    def __init__(self, grid: ConformalGrid, f: WeightedField, scheme: str = "covariant"):
        if f.weight != -2:
            raise ValueError(f"perturbation must have conformal weight -2, got {f.weight}")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
        self.grid = grid
        self.scheme = scheme
        self.f = f
        self.f_background = np.broadcast_to(f.values, grid.shape).astype(np.float64)
        u = grid.u
        if scheme == "covariant":
            self.potential = -(u**-2) * self.f_background
        else:
            self.potential = scalar_curvature_log_form(grid) - u**-2 * self.f_background

    @property
    def shape(self):
        return self.grid.shape

    def apply(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=np.float64).reshape(self.shape)
        u, h = self.grid.u, self.grid.h
        if self.scheme == "covariant":
            kinetic = u**-3 * yamabe_operator_flat(u * phi, h)
        else:
            kinetic = 6.0 * laplace_beltrami_stencil(self.grid, phi)
        return kinetic + self.potential * phi

    __call__ = apply

    def inner(self, a, b) -> float:
        return float(np.sum(self.grid.volume_weights() * a * b))

    def norm(self, a) -> float:
        return float(np.sqrt(self.inner(a, a)))

    def rayleigh_quotient(self, w) -> float:
        return self.inner(self.apply(w), w) / self.inner(w, w)

    def symmetric_apply(self, z) -> np.ndarray:
        """``M^(1/2) P M^(-1/2) z`` with ``M = diag(u^4 h^4)``; symmetric in the plain dot product."""
        u2 = self.grid.u**2
        return u2 * self.apply(z / u2)

    def lower_bound(self) -> float:
        """The kinetic part is non-negative, so ``min(potential)`` bounds the spectrum below."""
        return float(self.potential.min())


def assemble(grid: ConformalGrid, f: WeightedField, scheme: str = "covariant") -> PerturbedOperator:
    return PerturbedOperator(grid, f, scheme)


def conjugate_gradient(matvec, b, rtol: float, max_iter: int, x0=None):
    """Plain CG for a symmetric positive-definite ``matvec``.

    Returns ``(x, iterations, relative_residual)``; does not raise on
    stagnation, the caller judges the eigen-residual directly.
    """
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - matvec(x) if x0 is not None else b.copy()
    p = r.copy()
    rr = float(np.vdot(r, r))
    bnorm = float(np.sqrt(np.vdot(b, b))) or 1.0
    best = (x.copy(), np.sqrt(rr) / bnorm)
    it = 0
    for it in range(1, max_iter + 1):
        if np.sqrt(rr) <= rtol * bnorm:
            break
        Ap = matvec(p)
        alpha = rr / float(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(np.vdot(r, r))
        if np.sqrt(rr_new) / bnorm < best[1]:
            best = (x.copy(), np.sqrt(rr_new) / bnorm)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return best[0], it, best[1]


@dataclass
class SpectralResult:
    lam: float
    eigenfunction: np.ndarray = field(repr=False)
    residual: float
    iterations: int
    n: int

    def to_dict(self, sign: int | None = None) -> dict:
        doc = {"N": self.n, "lambda": _round12(self.lam), "residual": _round12(self.residual)}
        if sign is not None:
            doc["sign"] = sign_symbol(sign)
        return doc


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def sign_symbol(sign: int) -> str:
    return {1: "+", 0: "0", -1: "-"}[sign]


def lowest_eigenpair(op: PerturbedOperator, tol: float = 1e-10, config: SolverConfig | None = None) -> SpectralResult:
    """Shifted inverse-power iteration with CG inner solves.

    The shift sits below the spectrum, so every inner system is SPD; the
    contraction per step is ``(lambda_0 - shift) / (lambda_1 - shift)``. The
    eigenfunction is normalised in ``L^2(dmu_g)``, signed to have positive
    mean, and must then be positive at every node.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    cfg = config or SolverConfig()
    shift = op.lower_bound() - cfg.shift_margin
    u2 = op.grid.u**2

    def shifted(z):
        return op.symmetric_apply(z) - shift * z

    y = u2.copy()
    y /= np.linalg.norm(y)
    lam, residual = np.nan, np.inf
    for it in range(1, cfg.max_iter + 1):
        By = op.symmetric_apply(y)
        lam = float(np.vdot(y, By))
        residual = float(np.linalg.norm(By - lam * y))
        log.debug("inverse power it=%d lambda=%.15g residual=%.3e", it, lam, residual)
        if residual < tol:
            break
        y, _, _ = conjugate_gradient(shifted, y, cfg.cg_tol, cfg.cg_max_iter, x0=y / max(lam - shift, 1e-300))
        y /= np.linalg.norm(y)
    else:
        raise SolverError(f"inverse iteration hit the cap of {cfg.max_iter} (residual {residual:.3e})", residual)

    psi = positive_ground_state(op, y)
    return SpectralResult(lam, psi, residual, it, op.grid.n)


def positive_ground_state(op: PerturbedOperator, y: np.ndarray) -> np.ndarray:
    """Map a symmetric-frame eigenvector back to a unit-norm positive eigenfunction."""
    psi = y / op.grid.u**2
    if psi.mean() < 0:
        psi = -psi
    psi = psi / op.norm(psi)
    if np.any(psi <= 0):
        raise SolverError(
            f"ground state has {int(np.sum(psi <= 0))} non-positive node(s); grid too coarse or operator wrong"
        )
    return psi


def zero_band(lam: float, h: float, factor: float = 10.0) -> float:
    return factor * h * h * (1.0 + abs(lam))


def classify(lam: float, h: float, factor: float = 10.0) -> int:
    if abs(lam) < zero_band(lam, h, factor):
        return 0
    return 1 if lam > 0 else -1


@dataclass
class NormalizedMetric:
    grid: ConformalGrid
    sign: int
    spectral: SpectralResult
    sigma: np.ndarray = field(repr=False)


def conformal_normalize(grid: ConformalGrid, f: WeightedField, tol: float = 1e-10,
                        config: SolverConfig | None = None, scheme: str = "covariant") -> NormalizedMetric:
    """Rescale by the ground state so the modified scalar curvature has one sign.

    With ``P psi = lambda psi`` the metric ``psi^2 g`` has modified scalar
    curvature ``psi^-3 P psi = lambda psi^-2``.
    """
    cfg = config or SolverConfig()
    res = lowest_eigenpair(assemble(grid, f, scheme), tol, cfg)
    new_grid = grid.rescaled(res.eigenfunction)
    sigma = res.lam * res.eigenfunction**-2
    return NormalizedMetric(new_grid, classify(res.lam, grid.h, cfg.zero_band_factor), res, sigma)


def modified_scalar_curvature(grid: ConformalGrid, f: WeightedField, scheme: str = "covariant") -> np.ndarray:
    """``sigma = s - f = P(1)`` evaluated directly on ``grid``."""
    return assemble(grid, f, scheme).apply(np.ones(grid.shape))


def trichotomy_sign(grid: ConformalGrid, f: WeightedField, tol: float = 1e-10,
                    config: SolverConfig | None = None) -> int:
    return conformal_normalize(grid, f, tol, config).sign


# --------------------------------------------------------------------------
# Yamabe quotient


def _quotient_parts(grid: ConformalGrid, w: np.ndarray):
    h4 = grid.h**4
    uw = grid.u * w
    energy = h4 * float(np.sum(uw * yamabe_operator_flat(uw, grid.h)))
    quartic = h4 * float(np.sum((grid.u * w) ** 4))
    return energy, quartic


def yamabe_quotient(grid: ConformalGrid, trial) -> float:
    """Normalised total scalar curvature of ``trial^2 * g``.

    ``int (6|grad w|^2 + s w^2) dmu / (int w^4 dmu)^(1/2)`` with the gradient
    energy taken as ``<6 Delta_g w, w>``.
    """
    w = np.broadcast_to(np.asarray(trial, dtype=np.float64), grid.shape)
    if np.any(w <= 0):
        raise ValueError("trial function must be positive")
    energy, quartic = _quotient_parts(grid, w)
    return energy / np.sqrt(quartic)


@dataclass
class DescentResult:
    estimate: float
    trace: list[float]
    trial: np.ndarray = field(repr=False)
    steps_accepted: int = 0


def _max_step(grid: ConformalGrid) -> float:
    # 6 * (4 axes * 4 / h^2) bounds the flat stencil; u^-2 converts to g
    return 1.0 / (6.0 * 16.0 / grid.h**2 * float(np.max(grid.u**-2)))


def yamabe_constant_estimate(grid: ConformalGrid, iters: int = 500, step: float | None = None,
                             trial=None, max_halvings: int = 40) -> DescentResult:
    """Estimate ``inf S(g)`` over the conformal class by projected gradient descent.

    The trial is renormalised to ``int w^4 dmu = 1`` after every step and a
    step is accepted only if it lowers (or keeps) the quotient, so the trace is
    non-increasing. Steps that lose positivity are halved.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    w = np.ones(grid.shape) if trial is None else np.array(np.broadcast_to(trial, grid.shape), dtype=np.float64)
    if np.any(w <= 0):
        raise ValueError("initial trial must be positive")
    op = assemble(grid, WeightedField(0.0, -2))

    def normalise(v):
        return v / np.sum(grid.volume_weights() * v**4) ** 0.25

    w = normalise(w)
    q = yamabe_quotient(grid, w)
    trace = [q]
    base = _max_step(grid) if step is None else float(step)
    tau = base
    accepted = 0
    for _ in range(iters):
        grad = 2.0 * (op.apply(w) - q * w**3)
        for _halving in range(max_halvings):
            cand = w - tau * grad
            if np.all(cand > 0):
                cand = normalise(cand)
                q_new = yamabe_quotient(grid, cand)
                if q_new <= q:
                    break
            tau *= 0.5
        else:
            if not np.all(w - tau * grad > 0):
                raise SolverError("descent cannot keep the trial positive")
            break  # no decrease at any step size: stationary to rounding
        w, q = cand, q_new
        trace.append(q)
        accepted += 1
        tau = min(tau * 1.5, base)
    return DescentResult(min(trace), trace, w, accepted)


def constant_field(value: float, n: int, weight: int = -2) -> WeightedField:
    return WeightedField(np.full((n,) * 4, float(value)), weight)


def ground_state_deviation(res: SpectralResult, grid: ConformalGrid) -> float:
    """``|| psi/||psi|| - u^-1/||u^-1|| ||_inf`` with norms in ``L^2(dmu_g)``."""
    w = grid.volume_weights()
    a = res.eigenfunction / np.sqrt(np.sum(w * res.eigenfunction**2))
    b = grid.u**-1 / np.sqrt(np.sum(w * grid.u**-2))
    return float(np.max(np.abs(a - b)))


__all__ = [
    "DescentResult",
    "NormalizedMetric",
    "PerturbedOperator",
    "SolverConfig",
    "SolverError",
    "SpectralResult",
    "assemble",
    "classify",
    "conformal_normalize",
    "conjugate_gradient",
    "constant_field",
    "ground_state_deviation",
    "lowest_eigenpair",
    "modified_scalar_curvature",
    "positive_ground_state",
    "trichotomy_sign",
    "yamabe_constant_estimate",
    "yamabe_quotient",
    "zero_band",
]
