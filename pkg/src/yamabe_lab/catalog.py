"""Closed-form Yamabe constants and the bound tables built from them.

Constants are kept as ``coeff * pi**pi_power * sqrt(radicand)`` with a
rational ``coeff`` and square-free integer ``radicand``; comparisons between
values with the same power of pi are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import lattice


def _square_free(n: int) -> tuple[int, int]:
    """Write ``n = k^2 * r`` with ``r`` square-free; return ``(k, r)``."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    k, r, p = 1, n, 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            k *= p
        p += 1
    return k, r


@dataclass(frozen=True)
class ClosedForm:
    coeff: Fraction
    pi_power: int
    radicand: int

    def __init__(self, coeff, pi_power: int = 1, radicand: int = 1):
        c = Fraction(coeff)
        k, r = _square_free(int(radicand))
        object.__setattr__(self, "coeff", c * k)
        object.__setattr__(self, "pi_power", int(pi_power))
        object.__setattr__(self, "radicand", r)

    def __float__(self) -> float:
        return float(self.coeff) * math.pi**self.pi_power * math.sqrt(self.radicand)

    def _key(self):
        # sign(c) * c^2 * r orders values sharing a power of pi
        c = self.coeff
        return (1 if c > 0 else -1 if c < 0 else 0) * c * c * self.radicand

    def _cmp(self, other) -> int:
        if isinstance(other, ClosedForm) and other.pi_power == self.pi_power:
            a, b = self._key(), other._key()
        elif isinstance(other, (int, Fraction)) and other == 0:
            a, b = self._key(), 0
        else:
            a, b = float(self), float(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, ClosedForm):
            return self._cmp(other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.coeff, self.pi_power, self.radicand))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __str__(self) -> str:
        c = str(self.coeff) if self.coeff != 1 else ""
        root = f"sqrt({self.radicand})" if self.radicand != 1 else ""
        pi = {0: "", 1: "pi"}.get(self.pi_power, f"pi^{self.pi_power}")
        parts = [p for p in (c, root, pi) if p]
        return "*".join(parts) if parts else "1"


Y_CP2 = ClosedForm(12, 1, 2)
Y_S4 = ClosedForm(8, 1, 6)

# Volume of the round unit n-sphere, as (rational, power of pi)
SPHERE_VOLUMES = {
    3: (Fraction(2), 2),
    4: (Fraction(8, 3), 2),
    5: (Fraction(1), 3),
    6: (Fraction(16, 15), 3),
    7: (Fraction(1, 3), 4),
    8: (Fraction(32, 105), 4),
}


def aubin_sphere_value(n: int) -> float:
    """``Y(S^n) = n(n-1) V_n^(2/n)``."""
    if n not in SPHERE_VOLUMES:
        raise ValueError(f"sphere volume for n={n} is not tabulated (3..8)")
    rat, pw = SPHERE_VOLUMES[n]
    vol = float(rat) * math.pi**pw
    return n * (n - 1) * vol ** (2.0 / n)


def aubin_sphere_value_exact_s4() -> ClosedForm:
    # 12 * sqrt(8 pi^2 / 3) = 12 pi sqrt(24) / 3
    return ClosedForm(Fraction(12, 3), 1, 24)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    lo: ClosedForm
    hi: ClosedForm
    provenance: tuple[str, ...]

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError(f"{self.name}: empty interval")

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lower": float(f"{float(self.lo):.12g}"),
            "upper": float(f"{float(self.hi):.12g}"),
            "lower_exact": str(self.lo),
            "upper_exact": str(self.hi),
            "exact": self.exact,
            "provenance": list(self.provenance),
        }


def fubini_study_quotient() -> ClosedForm:
    """``S(g_FS)`` on CP2, normalised so that ``Y(CP2) >= S(g_FS) = 12 sqrt(2) pi``."""
    return Y_CP2


def lattice_upper_bound(k: int, bound: int = 5) -> tuple[ClosedForm, int, lattice.CohomologyVector]:
    """Upper bound ``4 pi sqrt(2 eta^2)`` from the minimal characteristic square on ``k <1>``."""
    eta_sq, witness = lattice.min_characteristic_square(lattice.IntersectionForm.identity(k), bound)
    return ClosedForm(4, 1, 2 * eta_sq), eta_sq, witness


def theorem_B_bounds(k: int, m: int) -> CatalogEntry:
    """``[12 sqrt(2) pi, 4 pi sqrt(2k + 16)]`` for ``k CP2 # m (S1 x S3)``."""
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    if m < 0:
        raise ValueError("m must be non-negative")
    summands = [fubini_study_quotient()] * k + [Y_S4] * m
    lo = lattice.kobayashi_lower_bound(summands)
    hi, eta_sq, _ = lattice_upper_bound(k)
    closed = ClosedForm(4, 1, 2 * k + 16)
    if hi != closed or abs(float(hi) - lattice.upper_bound_from_eta_sq(eta_sq)) > 1e-12 * float(hi):
        raise AssertionError(f"lattice route {hi} disagrees with closed form {closed}")
    name = f"{k}CP2#{m}(S1xS3)" if k > 1 else f"CP2#{m}(S1xS3)"
    return CatalogEntry(
        name, lo, hi,
        ("Fubini-Study metric is Einstein", "connected-sum inequality (O. Kobayashi)",
         f"characteristic element with eta^2 = {eta_sq}"),
    )


def hopf_comparison() -> tuple[float, float]:
    """Yamabe invariants of the primary Hopf surface and of its one-point blow-up."""
    hopf, blowup = Y_S4, theorem_B_bounds(1, 1).lo
    if not blowup < hopf:
        raise AssertionError("Hopf surface and its blow-up should have different invariants")
    return float(hopf), float(blowup)


def _named_entries() -> dict[str, list[CatalogEntry]]:
    s4 = CatalogEntry("S4", Y_S4, Y_S4, ("Aubin: Y(S^n) = n(n-1) V_n^(2/n)",))
    cp2 = theorem_B_bounds(1, 0)
    cp2 = CatalogEntry("CP2", cp2.lo, cp2.hi, cp2.provenance)
    hopf = CatalogEntry("hopf-surface", Y_S4, Y_S4,
                        ("diffeomorphic to S1xS3", "Y(S1 x X) = Y(S4) for spherical space forms X"))
    b = theorem_B_bounds(1, 1)
    blowup = CatalogEntry("hopf-blowup", b.lo, b.hi, ("diffeomorphic to CP2#(S1xS3), reversed orientation",)
                          + b.provenance)
    return {
        "S4": [s4],
        "CP2": [cp2],
        "S1xS3": [CatalogEntry("S1xS3", Y_S4, Y_S4, hopf.provenance[1:])],
        "hopf-surface": [hopf],
        "hopf-blowup": [blowup],
        "hopf-blowup-pair": [hopf, blowup],
    }


def catalog_names() -> list[str]:
    return sorted(_named_entries())


def lookup(name: str) -> list[CatalogEntry]:
    entries = _named_entries()
    if name not in entries:
        raise KeyError(f"unknown manifold {name!r}; known: {', '.join(sorted(entries))}")
    return entries[name]
