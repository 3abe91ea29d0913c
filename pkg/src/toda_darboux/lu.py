"""Pivot-free LU factorization of shifted banded Hessenberg matrices.

For a banded Hessenberg matrix J and a shift C, the factorization

    J - C I = L U

has a unit lower triangular L with the same number of subdiagonals as J
and an upper bidiagonal U with a unit superdiagonal.  Both factors are
computed by one forward sweep, so they commute with truncation: the
factors of a leading principal submatrix are the truncated factors.

The pivots of U are tied to the characteristic polynomials of the
leading principal submatrices.  With P_0 = 1 and

    P_{k+1}(z) = -((a_{k,k} - z) P_k(z) + sum_{i=k-p}^{k-1} a_{k,i} P_i(z)),

one has P_k(z) = det(z I_k - J_k), and the k-th pivot of U at shift C is

    u_k = -P_{k+1}(C) / P_k(C),

which is also the gamma value with index k (p + 1) + 1 in the bidiagonal
factorization downstream.  The factorization exists exactly when no
leading principal minor of J - C I is singular, and a pivot below the
tolerance reports which minor failed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .banded import BandedHessenberg, Bidiagonal, UnitLowerBanded

__all__ = [
    "PolySequence",
    "ShiftedProblem",
    "SingularLeadingMinor",
    "char_poly",
    "lu_factorize",
    "pivot_gammas",
]


class SingularLeadingMinor(ArithmeticError):
    """Leading principal minor of J - C I is singular to working tolerance."""

    def __init__(self, index: int, magnitude: float = 0.0):
        self.index = index
        self.magnitude = magnitude
        super().__init__(
            f"leading principal minor {index} is singular (pivot magnitude {magnitude:.3e})"
        )


@dataclass(frozen=True, eq=False)
class ShiftedProblem:
    """A banded Hessenberg matrix together with the shift to factor at."""

    J: BandedHessenberg
    C: complex = 0.0

    def factor(self, tol_pivot: float = None):
        return lu_factorize(self.J, self.C, tol_pivot)


@dataclass(frozen=True, eq=False)
class PolySequence:
    """Values P_0(z) .. P_m(z) of the characteristic recurrence at one point."""

    z: complex
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return complex(self.values[k])


def _default_pivot_tol(J: BandedHessenberg, C) -> float:
    scale = max(float(np.max(np.abs(b))) for b in J.bands)
    scale = max(scale, abs(C), 1.0)
    return 1e-12 * scale

def lu_factorize(J: BandedHessenberg, C=0.0, tol_pivot: float = None):
    """Factor J - C I into (UnitLowerBanded, upper Bidiagonal).

    One forward sweep over the rows: within row i the subdiagonal entries
    of L are filled left to right, each consuming the pivot of its column
    and the L entry one column to its left, and the pivot u_i closes the
    row.  Raises SingularLeadingMinor(m) when pivot m falls below
    tol_pivot (default 1e-12 times the largest band modulus).
    """
    if tol_pivot is None:
        tol_pivot = _default_pivot_tol(J, C)
    n, p = J.n, J.p
    lbands = [np.zeros(n, dtype=np.complex128) for _ in range(p)]
    u = np.zeros(n, dtype=np.complex128)

    def lentry(i, j):
        d = i - j
        if 1 <= d <= p and 0 <= j:
            return lbands[d - 1][i]
        return 1.0 if d == 0 else 0.0

    for i in range(n):
        for j in range(max(0, i - p), i):
            a = J.band(i - j)[i] - (C if i == j else 0.0)
            lbands[i - j - 1][i] = (a - lentry(i, j - 1)) / u[j]
        u[i] = J.band(0)[i] - C - lentry(i, i - 1)
        if abs(u[i]) < tol_pivot:
            raise SingularLeadingMinor(i, abs(u[i]))
    return UnitLowerBanded(p, n, tuple(lbands)), Bidiagonal("upper", n, u)


def char_poly(J: BandedHessenberg, z, m: int) -> PolySequence:
    """Evaluate P_0 .. P_m at the point z via the band recurrence.

    P_{k+1} consumes row k of J, so m may not exceed the truncation size.
    """
    if m < 0 or m > J.n:
        raise ValueError(f"degree {m} outside 0..{J.n}")
    vals = np.zeros(m + 1, dtype=np.complex128)
    vals[0] = 1.0
    for k in range(m):
        acc = (J.band(0)[k] - z) * vals[k]
        for i in range(max(0, k - J.p), k):
            acc += J.band(k - i)[k] * vals[i]
        vals[k + 1] = -acc
    return PolySequence(complex(z), vals)


def pivot_gammas(J: BandedHessenberg, C, m: int, tol: float = 1e-12) -> np.ndarray:
    """First m pivots at shift C as ratios of characteristic values.

    Entry k is -P_{k+1}(C) / P_k(C), the gamma value with index
    k (p + 1) + 1.  A value P_k(C) that is negligible against its
    neighbors means the leading principal minor k is singular and the
    ratio route breaks down there.
    """
    if m < 0 or m > J.n:
        raise ValueError(f"count {m} outside 0..{J.n}")
    seq = char_poly(J, C, m)
    vals = seq.values
    out = np.zeros(m, dtype=np.complex128)
    for k in range(m):
        scale = max(1.0, abs(vals[k - 1]) if k > 0 else 0.0, abs(vals[k + 1]))
        if abs(vals[k]) <= tol * scale:
            raise SingularLeadingMinor(k, abs(vals[k]))
        out[k] = -vals[k + 1] / vals[k]
    return out
