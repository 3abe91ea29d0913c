"""Banded Hessenberg matrices stored diagonal by diagonal.

The matrices handled here are lower Hessenberg with a bounded number of
subdiagonals: entry (i, j) may be nonzero only for i - p <= j <= i + 1,
and the superdiagonal (i, i + 1) is identically one.  Together with the
unit lower triangular factors that show up in their factorizations,
three shapes cover everything:

* ``BandedHessenberg``: free bands at offsets 0..p, implicit unit
  superdiagonal.
* ``UnitLowerBanded``: free bands at offsets 1..p, implicit unit
  diagonal.
* ``Bidiagonal``: one free band next to a structural unit band.  The
  upper kind has a free diagonal under a unit superdiagonal, the lower
  kind a free subdiagonal under a unit diagonal.

All entries are complex double precision, even when the input data is
real.  A band with offset d holds the entries (i, i - d) in row order,
so offset -1 is the superdiagonal; internally every band is padded to
the full matrix size and indexed by row.

Finite matrices stand in for truncations of semi-infinite ones, and the
leading rows are the only part of a truncation that can be trusted once
truncations are multiplied: a factor that reaches above the diagonal
pulls one uncertified row into the product.  ``ValidWindow`` carries the
count of certified leading rows through products, and ``residual``
compares matrices inside such a window only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

__all__ = [
    "BandedHessenberg",
    "Bidiagonal",
    "ShapeError",
    "UnitLowerBanded",
    "ValidWindow",
    "from_json_dict",
    "full_window",
    "graded_scale",
    "multiply",
    "multiply_chain",
    "random_hessenberg",
    "residual",
    "to_json_dict",
    "truncate",
]

Scalar = complex
Matrix = Union["BandedHessenberg", "UnitLowerBanded", "Bidiagonal"]


class ShapeError(ValueError):
    """Size mismatch, malformed band data, or an unrepresentable product."""


@dataclass(frozen=True)
class ValidWindow:
    """Number of leading rows of a truncation that are certified exact."""

    rows: int


def _row_band(values, n: int, d: int) -> np.ndarray:
    """Normalize band data to a read-only length-n array indexed by row.

    Accepts either the natural length (n - |d| entries in row order) or an
    already padded length-n array.  Slots that have no matrix entry are
    forced to zero.
    """
    v = np.asarray(values, dtype=np.complex128)
    if v.shape == (n,):
        arr = v.copy()
    elif v.shape == (max(n - abs(d), 0),):
        arr = np.zeros(n, dtype=np.complex128)
        if d >= 0:
            arr[min(d, n):] = v
        else:
            arr[: n - 1] = v
    else:
        raise ShapeError(
            f"band {d} needs {max(n - abs(d), 0)} or {n} entries, got shape {v.shape}"
        )
    if d > 0:
        arr[:d] = 0
    if d < 0:
        arr[n - 1 :] = 0
    arr.flags.writeable = False
    return arr


def _unit_superdiagonal(n: int) -> np.ndarray:
    arr = np.ones(n, dtype=np.complex128)
    arr[n - 1] = 0
    arr.flags.writeable = False
    return arr


def _zeros(n: int) -> np.ndarray:
    arr = np.zeros(n, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False, repr=False)
class BandedHessenberg:
    """Lower Hessenberg matrix with p subdiagonals and a unit superdiagonal."""

    p: int
    n: int
    bands: tuple

    def __post_init__(self):
        if self.p < 1:
            raise ShapeError(f"band count p={self.p} must be at least 1")
        if self.n < 1:
            raise ShapeError(f"size n={self.n} must be at least 1")
        if len(self.bands) != self.p + 1:
            raise ShapeError(f"expected {self.p + 1} bands, got {len(self.bands)}")
        norm = tuple(_row_band(b, self.n, d) for d, b in enumerate(self.bands))
        object.__setattr__(self, "bands", norm)

    def band(self, d: int) -> np.ndarray:
        """Band at offset d as a row-indexed length-n array, zeros off band."""
        if d == -1:
            return _unit_superdiagonal(self.n)
        if 0 <= d <= self.p:
            return self.bands[d]
        return _zeros(self.n)

    def entry(self, i: int, j: int) -> Scalar:
        return complex(self.band(i - j)[i])

    @property
    def regular(self) -> bool:
        """True when every represented entry of the deepest band is nonzero."""
        tail = self.bands[self.p][self.p :]
        return bool(tail.size == 0 or np.all(np.abs(tail) > 0))

    def to_dense(self) -> np.ndarray:
        return _dense(self)

    def __repr__(self):
        return f"BandedHessenberg(p={self.p}, n={self.n})"


@dataclass(frozen=True, eq=False, repr=False)
class UnitLowerBanded:
    """Unit lower triangular matrix with p free subdiagonals."""

    p: int
    n: int
    bands: tuple

    def __post_init__(self):
        if self.p < 1:
            raise ShapeError(f"band count p={self.p} must be at least 1")
        if self.n < 1:
            raise ShapeError(f"size n={self.n} must be at least 1")
        if len(self.bands) != self.p:
            raise ShapeError(f"expected {self.p} bands, got {len(self.bands)}")
        norm = tuple(_row_band(b, self.n, d + 1) for d, b in enumerate(self.bands))
        object.__setattr__(self, "bands", norm)

    def band(self, d: int) -> np.ndarray:
        if d == 0:
            arr = np.ones(self.n, dtype=np.complex128)
            arr.flags.writeable = False
            return arr
        if 1 <= d <= self.p:
            return self.bands[d - 1]
        return _zeros(self.n)

    def entry(self, i: int, j: int) -> Scalar:
        return complex(self.band(i - j)[i])

    def to_dense(self) -> np.ndarray:
        return _dense(self)

    def __repr__(self):
        return f"UnitLowerBanded(p={self.p}, n={self.n})"


@dataclass(frozen=True, eq=False, repr=False)
class Bidiagonal:
    """Two-band matrix, one band free and the neighboring band unit.

    kind="upper": free diagonal, unit superdiagonal.
    kind="lower": unit diagonal, free subdiagonal.
    """

    kind: str
    n: int
    entries: np.ndarray

    def __post_init__(self):
        if self.kind not in ("upper", "lower"):
            raise ShapeError(f"kind must be 'upper' or 'lower', got {self.kind!r}")
        if self.n < 1:
            raise ShapeError(f"size n={self.n} must be at least 1")
        d = 0 if self.kind == "upper" else 1
        object.__setattr__(self, "entries", _row_band(self.entries, self.n, d))

    def band(self, d: int) -> np.ndarray:
        if self.kind == "upper":
            if d == -1:
                return _unit_superdiagonal(self.n)
            if d == 0:
                return self.entries
        else:
            if d == 0:
                arr = np.ones(self.n, dtype=np.complex128)
                arr.flags.writeable = False
                return arr
            if d == 1:
                return self.entries
        return _zeros(self.n)

    def entry(self, i: int, j: int) -> Scalar:
        return complex(self.band(i - j)[i])

    def to_dense(self) -> np.ndarray:
        return _dense(self)

    def __repr__(self):
        return f"Bidiagonal(kind={self.kind!r}, n={self.n})"


# ---------------------------------------------------------------------------
# structural reach


def _upper_reach(m: Matrix) -> int:
    if isinstance(m, BandedHessenberg):
        return 1
    if isinstance(m, Bidiagonal) and m.kind == "upper":
        return 1
    return 0


def _lower_reach(m: Matrix) -> int:
    if isinstance(m, BandedHessenberg) or isinstance(m, UnitLowerBanded):
        return m.p
    if isinstance(m, Bidiagonal) and m.kind == "lower":
        return 1
    return 0


def _offsets(m: Matrix) -> range:
    return range(-_upper_reach(m), _lower_reach(m) + 1)


def _dense(m: Matrix) -> np.ndarray:
    out = np.zeros((m.n, m.n), dtype=np.complex128)
    for d in _offsets(m):
        b = m.band(d)
        rows = np.arange(max(d, 0), m.n if d >= 0 else m.n - 1)
        out[rows, rows - d] = b[rows]
    return out


def full_window(m: Matrix) -> ValidWindow:
    return ValidWindow(m.n)


# ---------------------------------------------------------------------------
# operations


def truncate(m: Matrix, size: int) -> Matrix:
    """Leading principal submatrix of the given size, same shape class.

    Truncation commutes with reading entries: band arrays are simply cut.
    """
    if size < 1 or size > m.n:
        raise ShapeError(f"truncation size {size} outside 1..{m.n}")
    if isinstance(m, BandedHessenberg):
        return BandedHessenberg(m.p, size, tuple(b[:size] for b in m.bands))
    if isinstance(m, UnitLowerBanded):
        return UnitLowerBanded(m.p, size, tuple(b[:size] for b in m.bands))
    return Bidiagonal(m.kind, size, m.entries[:size])


def multiply(a: Matrix, b: Matrix, window_a: ValidWindow = None, window_b: ValidWindow = None):
    """Banded product with window tracking.

    Returns (product, window).  Inside the returned window the entries of
    the product agree with the product of the corresponding semi-infinite
    matrices: rows below the window may be polluted by the truncation.
    Only the left factor's reach above the diagonal consumes certified
    rows; its last certified row would need one row of the right factor
    that lies outside the right factor's certified region, and the last
    row of the truncated product is missing one term for the same reason.

    At most one factor may reach above the diagonal, otherwise the result
    would carry a second superdiagonal and leave the shape family.
    """
    if a.n != b.n:
        raise ShapeError(f"size mismatch: {a.n} vs {b.n}")
    n = a.n
    up_a = _upper_reach(a)
    up = up_a + _upper_reach(b)
    if up > 1:
        raise ShapeError("cannot multiply two factors that both reach above the diagonal")
    low = _lower_reach(a) + _lower_reach(b)
    low_c = min(low, n - 1)

    out = {d: np.zeros(n, dtype=np.complex128) for d in range(-up, low_c + 1)}
    for da in _offsets(a):
        ba = a.band(da)
        for db in _offsets(b):
            d = da + db
            if d not in out:
                continue
            bb = b.band(db)
            lo = max(0, da, d)
            hi = n + min(0, da, d)
            if hi <= lo:
                continue
            out[d][lo:hi] += ba[lo:hi] * bb[lo - da : hi - da]

    wa = n if window_a is None else window_a.rows
    wb = n if window_b is None else window_b.rows
    window = ValidWindow(max(0, min(wa, wb - up_a, n - up_a)))

    if up == 1:
        sup = out.pop(-1)
        if not np.array_equal(sup[: n - 1], np.ones(n - 1)):
            raise ShapeError("product superdiagonal is not unit")
        if low_c == 0:
            return Bidiagonal("upper", n, out[0]), window
        return BandedHessenberg(low_c, n, tuple(out[d] for d in range(low_c + 1))), window

    diag = out.pop(0)
    if not np.array_equal(diag, np.ones(n)):
        raise ShapeError("product diagonal is not unit")
    pl = max(1, low_c)
    bands = tuple(out.get(d, np.zeros(n, dtype=np.complex128)) for d in range(1, pl + 1))
    return UnitLowerBanded(pl, n, bands), window


def multiply_chain(factors: Sequence[Matrix], windows: Sequence[ValidWindow] = None):
    """Product of a list of factors, folded right to left.

    Folding from the right keeps unit lower factors on the left of every
    intermediate multiplication, so a single upper bidiagonal factor in
    the chain costs one certified row exactly once.
    """
    if not factors:
        raise ShapeError("empty factor chain")
    if windows is None:
        windows = [full_window(f) for f in factors]
    acc = factors[-1]
    acc_w = windows[-1]
    for f, w in zip(reversed(factors[:-1]), reversed(list(windows[:-1]))):
        acc, acc_w = multiply(f, acc, w, acc_w)
    return acc, acc_w


def residual(a: Matrix, b: Matrix, window: ValidWindow = None) -> float:
    """Largest entry modulus of a - b over the leading window square."""
    if a.n != b.n:
        raise ShapeError(f"size mismatch: {a.n} vs {b.n}")
    w = a.n if window is None else min(window.rows, a.n)
    if w <= 0:
        return 0.0
    diff = a.to_dense()[:w, :w] - b.to_dense()[:w, :w]
    return float(np.max(np.abs(diff)))


def random_hessenberg(p: int, n: int, seed, mode: str = "real") -> BandedHessenberg:
    """Random regular instance with band moduli uniform in [1, 2].

    Every represented band entry gets modulus in [1, 2], a random sign in
    real mode and a random phase in complex mode, so the deepest band is
    nonzero by construction and the instance is regular.  Passing the same
    seed reproduces the same matrix bit for bit.
    """
    rng = np.random.default_rng(seed)
    bands = []
    for d in range(p + 1):
        k = max(n - d, 0)
        mod = rng.uniform(1.0, 2.0, k)
        if mode == "real":
            phase = rng.integers(0, 2, k) * 2.0 - 1.0
        elif mode == "complex":
            phase = np.exp(2j * np.pi * rng.uniform(0.0, 1.0, k))
        else:
            raise ValueError(f"mode must be 'real' or 'complex', got {mode!r}")
        bands.append(mod * phase)
    return BandedHessenberg(p, n, tuple(bands))


def graded_scale(m: BandedHessenberg, factor) -> BandedHessenberg:
    """Scale band offset d by factor**(d + 1).

    This is the grading that commutes with the unit superdiagonal: the
    rescaled matrix runs the same flow with time slowed by the factor, so
    it tames derivative magnitudes without leaving the shape family.
    """
    bands = tuple(np.asarray(b) * factor ** (d + 1) for d, b in enumerate(m.bands))
    return BandedHessenberg(m.p, m.n, bands)


# ---------------------------------------------------------------------------
# JSON encoding: {"p": int, "n": int, "bands": {offset: [[re, im], ...]}}


def _encode_band(arr: np.ndarray, n: int, d: int) -> list:
    vals = arr[max(d, 0) :] if d >= 0 else arr[: n - 1]
    return [[float(z.real), float(z.imag)] for z in vals]


def to_json_dict(m: Matrix) -> dict:
    """Encode a matrix; structural unit bands are written out explicitly."""
    bands = {str(d): _encode_band(m.band(d), m.n, d) for d in _offsets(m)}
    return {"p": _lower_reach(m), "n": m.n, "bands": bands}


def _decode_band(values, n: int, d: int) -> np.ndarray:
    k = max(n - abs(d), 0)
    if not isinstance(values, list) or len(values) != k:
        raise ShapeError(f"band {d} needs {k} [re, im] pairs")
    out = np.zeros(k, dtype=np.complex128)
    for idx, pair in enumerate(values):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ShapeError(f"band {d} entry {idx} is not an [re, im] pair")
        out[idx] = complex(float(pair[0]), float(pair[1]))
    return out


def from_json_dict(payload: Mapping) -> Matrix:
    """Decode a matrix payload, inferring the shape class from its bands.

    A payload with only the offsets 0 and 1 and a unit diagonal decodes as
    a lower Bidiagonal even if it was written from a one-band
    UnitLowerBanded; the entries are identical either way.
    """
    try:
        p = int(payload["p"])
        n = int(payload["n"])
        raw = payload["bands"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed matrix payload: {exc}") from None
    if n < 1:
        raise ShapeError(f"size n={n} must be at least 1")
    bands = {}
    for key, values in raw.items():
        try:
            d = int(key)
        except ValueError:
            raise ShapeError(f"band key {key!r} is not an integer offset") from None
        bands[d] = _decode_band(values, n, d)
    low = max([d for d in bands if d > 0], default=0)
    if p != low:
        raise ShapeError(f"p={p} does not match deepest band offset {low}")

    def _is_unit(d):
        return d in bands and np.array_equal(bands[d], np.ones(max(n - abs(d), 0)))

    if -1 in bands:
        if not _is_unit(-1):
            raise ShapeError("superdiagonal present but not unit")
        if low == 0:
            return Bidiagonal("upper", n, bands.get(0, np.zeros(n)))
        full = {d: bands.get(d, np.zeros(max(n - d, 0))) for d in range(low + 1)}
        return BandedHessenberg(low, n, tuple(full[d] for d in range(low + 1)))
    if not _is_unit(0):
        raise ShapeError("lower triangular payload needs a unit diagonal")
    if low <= 1:
        return Bidiagonal("lower", n, bands.get(1, np.zeros(max(n - 1, 0))))
    full = {d: bands.get(d, np.zeros(max(n - d, 0))) for d in range(1, low + 1)}
    return UnitLowerBanded(low, n, tuple(full[d] for d in range(1, low + 1)))
