"""Conformally flat geometry on the periodic unit 4-torus.

A :class:`ConformalGrid` carries a positive conformal factor ``u`` on an
``N^4`` lattice and represents the metric ``u^2 * delta``. Arrays are indexed
``[x1, x2, x3, x4]`` in C order, so ``x4`` varies fastest in any flattened
view.

Orientation is ``dx1^dx2^dx3^dx4 > 0``. Two-forms store six components in
the order ``BASIS_2FORMS``.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels

BASIS_2FORMS = ("12", "13", "14", "23", "24", "34")

# star(dx^I) = sign * dx^{J}; index pairs refer to BASIS_2FORMS
_STAR_PERM = (5, 4, 3, 2, 1, 0)
_STAR_SIGN = np.array([1.0, -1.0, 1.0, 1.0, -1.0, 1.0])


def _as_lattice(values, n: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full((n,) * 4, float(arr))
    if arr.shape != (n,) * 4:
        raise ValueError(f"field shape {arr.shape} does not match lattice {(n,) * 4}")
    return arr


@dataclass(frozen=True, eq=False)
class ConformalGrid:
    """Metric ``u^2 * delta`` sampled on the periodic ``N^4`` unit lattice."""

    n: int
    u: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 nodes per axis")
        u = _as_lattice(self.u, self.n).copy()
        if not np.all(np.isfinite(u)) or np.any(u <= 0):
            raise ValueError("conformal factor must be finite and positive at every node")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def flat(cls, n: int) -> "ConformalGrid":
        return cls(n, np.ones((n,) * 4))

    @classmethod
    def from_function(cls, n: int, fn: Callable[..., np.ndarray]) -> "ConformalGrid":
        x = coordinates(n)
        return cls(n, np.broadcast_to(fn(*x), (n,) * 4))

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n,) * 4

    def coordinates(self) -> np.ndarray:
        return coordinates(self.n)

    def volume_weights(self) -> np.ndarray:
        """Nodal volume ``u^4 h^4`` of the metric ``u^2 delta``."""
        return self.u**4 * self.h**4

    def rescaled(self, v) -> "ConformalGrid":
        """Grid for the metric ``v^2 (u^2 delta)``."""
        return ConformalGrid(self.n, self.u * _as_lattice(v, self.n))


def coordinates(n: int) -> np.ndarray:
    """Node coordinates, shape ``(4, n, n, n, n)``, spacing ``1/n``."""
    return np.indices((n,) * 4, dtype=np.float64) / n


@dataclass(frozen=True, eq=False)
class WeightedField:
    """Grid function that rescales by ``v**weight`` when the metric goes to ``v^2 g``."""

    values: np.ndarray
    weight: int

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weight", int(self.weight))


def apply_conformal_rescale(field: WeightedField, v) -> WeightedField:
    v = np.asarray(v, dtype=np.float64)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("rescaling factor must be positive")
    return WeightedField(field.values * v**field.weight, field.weight)


def flat_laplacian(phi, h: float) -> np.ndarray:
    """Positive (geometer's) flat Laplacian, second-order central differences."""
    return kernels.laplacian(phi, h)


def yamabe_operator_flat(phi, h: float) -> np.ndarray:
    """``6 Delta phi`` for the flat metric, whose scalar curvature vanishes."""
    return 6.0 * flat_laplacian(phi, h)


def scalar_curvature_of_conformal_metric(grid: ConformalGrid) -> WeightedField:
    """Scalar curvature of ``u^2 delta`` from ``s = u^-3 * 6 Delta u``."""
    s = grid.u**-3 * yamabe_operator_flat(grid.u, grid.h)
    return WeightedField(s, 0)


def _central_diff(a: np.ndarray, h: float, axis: int) -> np.ndarray:
    return (np.roll(a, -1, axis) - np.roll(a, 1, axis)) / (2.0 * h)


def scalar_curvature_log_form(grid: ConformalGrid) -> np.ndarray:
    """Scalar curvature from ``-6 e^{-2w} (Delta_a w + |grad w|^2)``, ``w = log u``.

    ``Delta_a`` is the analyst's Laplacian. Continuum-equal to
    :func:`scalar_curvature_of_conformal_metric`, discretised differently.
    """
    w = np.log(grid.u)
    grad2 = sum(_central_diff(w, grid.h, a) ** 2 for a in range(4))
    return -6.0 * np.exp(-2.0 * w) * (-flat_laplacian(w, grid.h) + grad2)


def laplace_beltrami_covariant(grid: ConformalGrid, phi) -> np.ndarray:
    """``Delta_{u^2 delta}`` defined through the conformal covariance law.

    ``6 Delta_g phi = u^-3 6 Delta_delta(u phi) - s_g phi``; exact covariance of
    the Yamabe operator holds by construction.
    """
    u = grid.u
    s = scalar_curvature_of_conformal_metric(grid).values
    return (u**-3 * yamabe_operator_flat(u * phi, grid.h) - s * phi) / 6.0


def laplace_beltrami_stencil(grid: ConformalGrid, phi) -> np.ndarray:
    """``Delta_g phi = -u^-4 div(u^2 grad phi)`` in conservative form."""
    return grid.u**-4 * kernels.div_grad(phi, grid.u**2, grid.h)


# --------------------------------------------------------------------------
# two-forms


@dataclass(frozen=True, eq=False)
class TwoFormField:
    """Six components in the basis ``dx^i ^ dx^j`` (i < j), ordered as BASIS_2FORMS.

    ``components`` has shape ``(6,)`` for a constant form or ``(6, N, N, N, N)``.
    """

    components: np.ndarray

    def __post_init__(self):
        c = np.array(self.components, dtype=np.float64)
        if c.shape[:1] != (6,):
            raise ValueError("a 2-form needs six components")
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    @classmethod
    def from_dict(cls, coeffs: dict[str, float]) -> "TwoFormField":
        c = np.zeros(6)
        for key, val in coeffs.items():
            c[BASIS_2FORMS.index(key)] = val
        return cls(c)

    def __add__(self, other: "TwoFormField") -> "TwoFormField":
        return TwoFormField(self.components + other.components)

    def __sub__(self, other: "TwoFormField") -> "TwoFormField":
        return TwoFormField(self.components - other.components)

    def __mul__(self, scalar) -> "TwoFormField":
        return TwoFormField(self.components * scalar)

    __rmul__ = __mul__

    def on_grid(self, n: int) -> "TwoFormField":
        if self.components.ndim == 5:
            return self
        return TwoFormField(np.broadcast_to(self.components[:, None, None, None, None], (6,) + (n,) * 4))


def hodge_star_2form(omega: TwoFormField, grid: ConformalGrid | None = None) -> TwoFormField:
    """Hodge star on 2-forms; conformally invariant, so the flat star is used."""
    c = omega.components
    sign = _STAR_SIGN.reshape((6,) + (1,) * (c.ndim - 1))
    return TwoFormField(sign * c[list(_STAR_PERM)])


def selfdual_projection(omega: TwoFormField) -> TwoFormField:
    return TwoFormField(0.5 * (omega.components + hodge_star_2form(omega).components))


def antiselfdual_projection(omega: TwoFormField) -> TwoFormField:
    return TwoFormField(0.5 * (omega.components - hodge_star_2form(omega).components))


def flat_norm_squared(omega: TwoFormField) -> np.ndarray:
    return np.sum(omega.components**2, axis=0)


def pointwise_norm_2form(omega: TwoFormField, grid: ConformalGrid) -> WeightedField:
    """``|omega|`` in the metric ``u^2 delta``: ``u^-2 |omega|_delta``, weight -2."""
    flat = np.sqrt(flat_norm_squared(omega))
    return WeightedField(grid.u**-2 * np.broadcast_to(flat, grid.shape), -2)


def l2_norm_2form(omega: TwoFormField, grid: ConformalGrid) -> float:
    """``(sum |omega|_g^2 dmu_g)^(1/2)`` with ``dmu_g = u^4 h^4`` per node."""
    pointwise = pointwise_norm_2form(omega, grid).values
    return float(np.sqrt(np.sum(pointwise**2 * grid.volume_weights())))


def wedge_coefficient(a: TwoFormField, b: TwoFormField) -> np.ndarray:
    """Coefficient of ``dx1^dx2^dx3^dx4`` in ``a ^ b``."""
    x, y = a.components, b.components
    return (
        x[0] * y[5] + x[5] * y[0]
        - x[1] * y[4] - x[4] * y[1]
        + x[2] * y[3] + x[3] * y[2]
    )


def cup_pairing(a: TwoFormField, b: TwoFormField, grid: ConformalGrid | None = None) -> float:
    """``int a ^ b`` over the unit torus (constant forms need no grid)."""
    w = wedge_coefficient(a, b)
    if np.ndim(w) == 0:
        return float(w)
    n = w.shape[0]
    return float(np.sum(w) / n**4)


@dataclass(frozen=True)
class HarmonicSplit:
    form: TwoFormField
    plus: TwoFormField
    minus: TwoFormField

    @property
    def plus_square(self) -> float:
        """``(zeta^+)^2 = int zeta^+ ^ zeta^+ >= 0``."""
        return cup_pairing(self.plus, self.plus)

    @property
    def minus_square(self) -> float:
        return cup_pairing(self.minus, self.minus)


def harmonic_representative_torus(coeffs) -> HarmonicSplit:
    """Harmonic 2-forms on the flat torus are the constant-coefficient ones."""
    form = TwoFormField(np.asarray(coeffs, dtype=np.float64).reshape(6))
    return HarmonicSplit(form, selfdual_projection(form), antiselfdual_projection(form))


# --------------------------------------------------------------------------
# serialisation

_MAGIC = b"YLF1"


def field_header(values: np.ndarray, weight: int) -> dict:
    values = np.asarray(values)
    comps = 1 if values.ndim == 4 else values.shape[0]
    return {"N": int(values.shape[-1]), "weight": int(weight), "components": int(comps), "order": "x4-fastest"}


def field_to_json(values, weight: int = 0) -> str:
    values = np.asarray(values, dtype=np.float64)
    return json.dumps({"header": field_header(values, weight), "values": values.ravel(order="C").tolist()})


def field_from_json(text: str) -> tuple[np.ndarray, int]:
    doc = json.loads(text)
    hdr = doc["header"]
    n, comps = int(hdr["N"]), int(hdr["components"])
    shape = (n,) * 4 if comps == 1 else (comps,) + (n,) * 4
    return np.asarray(doc["values"], dtype=np.float64).reshape(shape), int(hdr["weight"])


def field_to_bytes(values, weight: int = 0) -> bytes:
    """Magic, uint32 header length, JSON header, then little-endian float64 data."""
    values = np.asarray(values, dtype=np.float64)
    hdr = json.dumps(field_header(values, weight), sort_keys=True).encode()
    return _MAGIC + struct.pack("<I", len(hdr)) + hdr + values.astype("<f8").tobytes(order="C")


def field_from_bytes(blob: bytes) -> tuple[np.ndarray, int]:
    if blob[:4] != _MAGIC:
        raise ValueError("not a yamabe-lab field file")
    (hlen,) = struct.unpack("<I", blob[4:8])
    hdr = json.loads(blob[8 : 8 + hlen])
    n, comps = int(hdr["N"]), int(hdr["components"])
    shape = (n,) * 4 if comps == 1 else (comps,) + (n,) * 4
    data = np.frombuffer(blob[8 + hlen :], dtype="<f8").astype(np.float64)
    return data.reshape(shape), int(hdr["weight"])
