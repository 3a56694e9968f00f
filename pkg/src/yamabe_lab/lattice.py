"""Exact arithmetic on intersection forms of 4-manifolds.

Everything here works on the free part of H^2(M; Z): a symmetric unimodular
integer matrix ``Q`` and integer coordinate vectors. Floating point only
appears at the very end, in :func:`upper_bound_from_eta_sq`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)


class LatticeError(ValueError):
    """Invalid form, vector, or search request."""


def _checked(value: int) -> int:
    if not INT64_MIN <= value <= INT64_MAX:
        raise OverflowError(f"integer pairing left the 64-bit range: {value}")
    return value


def _fraction_det(rows: list[list[Fraction]]) -> Fraction:
    a = [row[:] for row in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            if factor:
                for c in range(col, n):
                    a[r][c] -= factor * a[col][c]
    return det


@dataclass(frozen=True)
class IntersectionForm:
    """Symmetric unimodular integer matrix for the cup product on free H^2."""

    matrix: tuple[tuple[int, ...], ...]

    def __init__(self, matrix: Iterable[Iterable[int]]):
        rows = tuple(tuple(int(x) for x in row) for row in matrix)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise LatticeError("intersection form must be a non-empty square matrix")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise LatticeError(f"form is not symmetric at ({i}, {j})")
        det = _fraction_det([[Fraction(x) for x in r] for r in rows])
        if abs(det) != 1:
            raise LatticeError(f"form is not unimodular (det = {det})")
        object.__setattr__(self, "matrix", rows)

    @classmethod
    def diagonal(cls, entries: Sequence[int]) -> "IntersectionForm":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def identity(cls, rank: int) -> "IntersectionForm":
        return cls.diagonal([1] * rank)

    @classmethod
    def hyperbolic(cls, copies: int = 1) -> "IntersectionForm":
        n = 2 * copies
        m = [[0] * n for _ in range(n)]
        for c in range(copies):
            m[2 * c][2 * c + 1] = m[2 * c + 1][2 * c] = 1
        return cls(m)

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    def is_diagonal(self) -> bool:
        return all(self.matrix[i][j] == 0 for i in range(self.rank) for j in range(self.rank) if i != j)

    def congruent(self, U: Sequence[Sequence[int]]) -> "IntersectionForm":
        """The form ``U^T Q U`` in the basis given by the columns of ``U``."""
        U = [[int(x) for x in row] for row in U]
        n = self.rank
        Q = self.matrix
        QU = [[sum(Q[i][k] * U[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        return IntersectionForm(
            [[_checked(sum(U[k][i] * QU[k][j] for k in range(n))) for j in range(n)] for i in range(n)]
        )

    def inertia(self) -> tuple[int, int]:
        """``(b_plus, b_minus)`` by exact congruence diagonalisation."""
        d = congruence_diagonal(self)
        return sum(1 for x in d if x > 0), sum(1 for x in d if x < 0)


@dataclass(frozen=True)
class CohomologyVector:
    """Integer coordinates of a class in the free part of H^2(M; Z)."""

    coords: tuple[int, ...]

    def __init__(self, coords: Iterable[int]):
        object.__setattr__(self, "coords", tuple(int(c) for c in coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)


@dataclass(frozen=True)
class ManifoldDescriptor:
    """Topological data used by the bound tables.

    ``form`` is the definite part that feeds the characteristic search;
    ``cp2_k`` and ``handles_m`` count summands in ``k CP2 # m (S1 x S3)``.
    """

    name: str
    b_plus: int
    b_minus: int
    form: IntersectionForm | None = None
    handles_m: int = 0
    cp2_k: int = 0
    provenance: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if min(self.b_plus, self.b_minus, self.handles_m, self.cp2_k) < 0:
            raise LatticeError("Betti numbers and summand counts are non-negative")
        if self.form is not None and self.form.rank != self.b_plus + self.b_minus:
            raise LatticeError("b_plus + b_minus must equal the rank of the form")

    @property
    def b2(self) -> int:
        return self.b_plus + self.b_minus

    @property
    def signature(self) -> int:
        return self.b_plus - self.b_minus


def congruence_diagonal(Q: IntersectionForm) -> list[Fraction]:
    """Diagonal entries of a rational matrix congruent to ``Q``.

    Symmetric Gaussian elimination: ``A -> E^T A E`` at every step, so
    Sylvester's law of inertia applies to the result.
    """
    a = [[Fraction(x) for x in row] for row in Q.matrix]
    n = len(a)
    diag = []
    for p in range(n):
        if a[p][p] == 0:
            j = next((j for j in range(p + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[p], a[j] = a[j], a[p]
                for row in a:
                    row[p], row[j] = row[j], row[p]
            else:
                j = next((j for j in range(p + 1, n) if a[p][j] != 0), None)
                if j is not None:
                    # e_p -> e_p + e_j: new pivot a_pp + 2 a_pj + a_jj = 2 a_pj != 0
                    for c in range(n):
                        a[p][c] += a[j][c]
                    for r in range(n):
                        a[r][p] += a[r][j]
        piv = a[p][p]
        diag.append(piv)
        if piv == 0:
            continue
        col = [a[r][p] for r in range(n)]
        for r in range(p + 1, n):
            for c in range(p + 1, n):
                a[r][c] -= col[r] * col[c] / piv
        for r in range(p + 1, n):
            a[r][p] = a[p][r] = Fraction(0)
    return diag


def signature(Q: IntersectionForm) -> int:
    """``b_plus - b_minus`` of the form, computed exactly."""
    plus, minus = Q.inertia()
    return plus - minus


def _check_lengths(eta: CohomologyVector, Q: IntersectionForm) -> None:
    if len(eta) != Q.rank:
        raise LatticeError(f"vector of length {len(eta)} does not match form of rank {Q.rank}")


def is_characteristic(eta: CohomologyVector, Q: IntersectionForm) -> bool:
    """True iff ``eta . x = x . x (mod 2)`` for every lattice vector ``x``.

    Checking basis vectors suffices: ``(Q eta)_i = Q_ii (mod 2)``.
    """
    _check_lengths(eta, Q)
    for i, row in enumerate(Q.matrix):
        if (sum(q * e for q, e in zip(row, eta.coords)) - row[i]) % 2:
            return False
    return True


def self_pairing(eta: CohomologyVector, Q: IntersectionForm) -> int:
    """``eta^T Q eta`` with every partial sum held to the int64 range."""
    _check_lengths(eta, Q)
    total = 0
    for i, row in enumerate(Q.matrix):
        for j, q in enumerate(row):
            term = _checked(_checked(q * eta.coords[i]) * eta.coords[j])
            total = _checked(total + term)
    return total


def dirac_index(eta: CohomologyVector, Q: IntersectionForm) -> Fraction:
    """Index ``(eta^2 - tau) / 8`` of the spin^c Dirac operator with ``c1(L) = eta``."""
    if not is_characteristic(eta, Q):
        raise LatticeError(f"{eta.coords} is not characteristic for this form")
    index = Fraction(self_pairing(eta, Q) - signature(Q), 8)
    if index.denominator != 1:
        raise AssertionError(f"eta^2 - tau not divisible by 8 for characteristic {eta.coords}")
    return index


def enumerate_characteristic(Q: IntersectionForm, bound: int) -> tuple[np.ndarray, np.ndarray]:
    """All characteristic vectors with ``|coord_i| <= bound`` and their squares.

    Rows come out in lexicographic order of the coordinates.
    """
    n = Q.rank
    if bound < 0:
        raise LatticeError("box bound must be non-negative")
    if (2 * bound + 1) ** n > 50_000_000:
        raise LatticeError(f"box of side {2 * bound + 1} in rank {n} is too large to enumerate")
    M = Q.as_array()
    # magnitudes here are tiny; guard anyway before trusting int64 arithmetic
    _checked(n * n * int(np.abs(M).max()) * bound * bound)
    axis = np.arange(-bound, bound + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    Qeta = grid @ M
    char = np.all((Qeta - np.diag(M)) % 2 == 0, axis=1)
    vecs = grid[char]
    squares = np.einsum("ij,ij->i", Qeta[char], vecs)
    return vecs, squares


def min_characteristic_square(Q: IntersectionForm, bound: int = 5) -> tuple[int, CohomologyVector]:
    """Smallest ``eta^2 > b_2`` over characteristic vectors in the box ``|eta_i| <= bound``.

    Only positive-definite diagonal forms are accepted. Among minimisers the
    witness is the lexicographically greatest vector, which puts the large
    coordinate first: ``(3,)``, ``(3, 1)``, ``(3, 1, 1)`` for ranks 1 to 3.
    """
    if not Q.is_diagonal() or any(Q.matrix[i][i] <= 0 for i in range(Q.rank)):
        raise LatticeError("characteristic search needs a positive-definite diagonal form")
    if bound < 3:
        raise LatticeError("box bound must be at least 3")
    vecs, squares = enumerate_characteristic(Q, bound)
    keep = squares > Q.rank
    if not np.any(keep):
        raise LatticeError(f"no characteristic vector with eta^2 > {Q.rank} in box {bound}")
    vecs, squares = vecs[keep], squares[keep]
    best = int(squares.min())
    witness = vecs[squares == best][-1]
    return best, CohomologyVector(witness.tolist())


def upper_bound_from_eta_sq(eta_sq: int) -> float:
    """``4 pi sqrt(2 eta^2)``: the Yamabe bound from a characteristic class."""
    if eta_sq <= 0:
        raise LatticeError("eta^2 must be positive")
    return 4.0 * math.pi * math.sqrt(2.0 * eta_sq)


def kobayashi_lower_bound(ys):
    """Lower bound ``min_j Y(M_j)`` for a connected sum of non-negative summands."""
    ys = list(ys)
    if not ys:
        raise LatticeError("need at least one summand")
    if any(y < 0 for y in ys):
        raise LatticeError("connected-sum bound requires every Y(M_j) >= 0")
    return min(ys)


def random_unimodular(rank: int, rng: np.random.Generator, steps: int = 6) -> list[list[int]]:
    """Product of random elementary integer matrices and sign flips (det = +-1)."""
    U = [[int(i == j) for j in range(rank)] for i in range(rank)]
    for _ in range(steps):
        if rank > 1:
            i, j = rng.choice(rank, size=2, replace=False)
            k = int(rng.choice([-1, 1]))
            for r in range(rank):
                U[r][j] += k * U[r][i]
        if rng.random() < 0.3:
            s = int(rng.integers(rank))
            for r in range(rank):
                U[r][s] = -U[r][s]
    return U


def integer_inverse(U: Sequence[Sequence[int]]) -> list[list[int]]:
    """Exact inverse of a unimodular integer matrix."""
    n = len(U)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(U)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    inv = [[a[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in inv for x in row):
        raise LatticeError("matrix is not unimodular")
    return [[int(x) for x in row] for row in inv]


def sign_pattern_forms(max_rank: int) -> list[IntersectionForm]:
    """Diagonal forms ``diag(+1^p, -1^q)`` plus hyperbolic sums, rank <= max_rank."""
    forms = []
    for n in range(1, max_rank + 1):
        for p in range(n, -1, -1):
            forms.append(IntersectionForm.diagonal([1] * p + [-1] * (n - p)))
        if n % 2 == 0:
            forms.append(IntersectionForm.hyperbolic(n // 2))
    return forms


def check_mod8(Q: IntersectionForm, bound: int) -> tuple[int, list[tuple[int, ...]]]:
    """Count characteristic vectors in the box and list any with ``eta^2 != tau (mod 8)``."""
    vecs, squares = enumerate_characteristic(Q, bound)
    tau = signature(Q)
    bad = vecs[(squares - tau) % 8 != 0]
    return len(vecs), [tuple(int(x) for x in v) for v in bad]


__all__ = [
    "CohomologyVector",
    "IntersectionForm",
    "LatticeError",
    "ManifoldDescriptor",
    "check_mod8",
    "congruence_diagonal",
    "dirac_index",
    "enumerate_characteristic",
    "integer_inverse",
    "is_characteristic",
    "kobayashi_lower_bound",
    "min_characteristic_square",
    "random_unimodular",
    "self_pairing",
    "sign_pattern_forms",
    "signature",
    "upper_bound_from_eta_sq",
]

