"""Band storage, windowed products, and the truncation-soundness oracle."""

import json

import numpy as np
import pytest

from toda_darboux.banded import (
    BandedHessenberg,
    Bidiagonal,
    ShapeError,
    UnitLowerBanded,
    ValidWindow,
    from_json_dict,
    full_window,
    graded_scale,
    multiply,
    multiply_chain,
    random_hessenberg,
    residual,
    to_json_dict,
    truncate,
)


def dense_product(A, B):
    # independent oracle: plain triple loop on dense arrays
    n = A.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            acc = 0j
            for k in range(n):
                acc += A[i, k] * B[k, j]
            out[i, j] = acc
    return out


def random_unit_lower(p, n, rng):
    bands = tuple(rng.uniform(1.0, 2.0, n) * (rng.integers(0, 2, n) * 2 - 1)
                  for _ in range(p))
    return UnitLowerBanded(p, n, bands)


def random_upper(n, rng):
    return Bidiagonal("upper", n, rng.uniform(1.0, 2.0, n) * (rng.integers(0, 2, n) * 2 - 1))


def random_lower_bidiagonal(n, rng):
    return Bidiagonal("lower", n, rng.uniform(1.0, 2.0, n) * (rng.integers(0, 2, n) * 2 - 1))


# ---------------------------------------------------------------------------
# truncation


def test_truncate_identity_block():
    eye4 = UnitLowerBanded(1, 4, (np.zeros(4),))
    out = truncate(eye4, 2)
    assert out.n == 2
    assert np.array_equal(out.to_dense(), np.eye(2))


def test_truncate_full_size_is_identity_operation():
    J = random_hessenberg(2, 6, seed=0)
    out = truncate(J, 6)
    assert np.array_equal(out.to_dense(), J.to_dense())


def test_truncate_index_formula():
    n, p = 5, 2
    bands = tuple(np.array([i + (i - d) if i >= d else 0 for i in range(n)], dtype=float)
                  for d in range(p + 1))
    J = BandedHessenberg(p, n, bands)
    out = truncate(J, 3)
    for i in range(3):
        for j in range(max(0, i - p), i + 1):
            assert out.entry(i, j) == i + j


def test_truncate_size_errors():
    J = random_hessenberg(1, 4, seed=1)
    with pytest.raises(ShapeError):
        truncate(J, 0)
    with pytest.raises(ShapeError):
        truncate(J, 5)


# ---------------------------------------------------------------------------
# multiplication and windows


def test_multiply_identity_keeps_window():
    B = random_hessenberg(2, 6, seed=2)
    eye = UnitLowerBanded(1, 6, (np.zeros(6),))
    out, w = multiply(eye, B, full_window(eye), ValidWindow(4))
    assert w.rows == 4
    assert np.allclose(out.to_dense(), B.to_dense(), atol=0, rtol=0)


def test_multiply_bidiagonal_2x2_closed_form():
    beta, u0, u1 = 0.7, 2.0, 3.0
    low = Bidiagonal("lower", 2, np.array([0.0, beta]))
    up = Bidiagonal("upper", 2, np.array([u0, u1]))
    out, w = multiply(low, up)
    expect = np.array([[u0, 1.0], [beta * u0, beta + u1]])
    assert np.array_equal(out.to_dense(), expect)
    assert w.rows == 2


@pytest.mark.parametrize("p,n", [(1, 6), (2, 8), (3, 10), (4, 12)])
@pytest.mark.parametrize("seed", [0, 1])
def test_band_closure_unit_lower_times_upper(p, n, seed):
    rng = np.random.default_rng(seed)
    L = random_unit_lower(p, n, rng)
    U = random_upper(n, rng)
    out, w = multiply(L, U)
    assert isinstance(out, BandedHessenberg)
    assert out.p == p
    assert np.array_equal(out.band(-1)[: n - 1], np.ones(n - 1))
    oracle = dense_product(L.to_dense(), U.to_dense())
    assert np.abs(out.to_dense() - oracle).max() <= 1e-13 * np.abs(oracle).max()


@pytest.mark.parametrize("seed", range(4))
def test_mixed_products_match_dense(seed):
    rng = np.random.default_rng(10 + seed)
    n = 7
    J = random_hessenberg(2, n, seed=seed)
    D = random_lower_bidiagonal(n, rng)
    out, _ = multiply(D, J)
    assert np.abs(out.to_dense() - dense_product(D.to_dense(), J.to_dense())).max() <= 1e-13
    out2, _ = multiply(D, random_unit_lower(3, n, rng))
    assert isinstance(out2, UnitLowerBanded)


def test_multiply_rejects_two_upper_reaches():
    up = Bidiagonal("upper", 4, np.ones(4))
    with pytest.raises(ShapeError):
        multiply(up, up)


def test_multiply_rejects_size_mismatch():
    a = Bidiagonal("upper", 4, np.ones(4))
    b = Bidiagonal("lower", 5, np.ones(5))
    with pytest.raises(ShapeError):
        multiply(a, b)


def _padded_chain(builders, n, pad):
    big = [b(n + pad) for b in builders]
    small = [truncate(m, n) for m in big]
    return small, big


@pytest.mark.parametrize("seed", range(5))
def test_window_soundness_vs_padded_truth(seed):
    # entries inside the claimed window must match the same chain computed
    # at a larger truncation, which is the ground truth for these rows
    rng = np.random.default_rng(30 + seed)
    n, p = 9, 2
    pad = p + 2
    fixed = [rng.uniform(1.0, 2.0, n + pad) * (rng.integers(0, 2, n + pad) * 2 - 1)
             for _ in range(p + 3)]
    # one upward-reaching factor at most per chain; vary its position
    builders = [
        lambda m: UnitLowerBanded(p, m, tuple(f[:m] for f in fixed[:p])),
        lambda m: Bidiagonal("lower", m, fixed[p][:m]),
        lambda m: Bidiagonal("upper", m, fixed[p + 1][:m]),
        lambda m: Bidiagonal("lower", m, fixed[p + 2][:m]),
    ]
    small, big = _padded_chain(builders, n, pad)
    got, w = multiply_chain(small)
    truth, _ = multiply_chain(big)
    k = w.rows
    assert k >= n - 1  # a single upper-reach factor costs at most one row
    diff = np.abs(got.to_dense()[:k, :k] - truth.to_dense()[:k, :k])
    scale = max(1.0, np.abs(truth.to_dense()[:k, :k]).max())
    assert diff.max() <= 1e-12 * scale


@pytest.mark.parametrize("p", [1, 2, 3])
def test_bidiagonal_chain_window_bound(p):
    rng = np.random.default_rng(50 + p)
    n = 10
    factors = [random_lower_bidiagonal(n, rng) for _ in range(p)] + [random_upper(n, rng)]
    _, w = multiply_chain(factors)
    assert w.rows >= n - (p + 1)


def test_truncate_multiply_commutes_inside_window():
    rng = np.random.default_rng(60)
    n, m = 9, 6
    L = random_unit_lower(2, n, rng)
    U = random_upper(n, rng)
    whole, w = multiply(L, U)
    part, wp = multiply(truncate(L, m), truncate(U, m))
    k = min(w.rows, wp.rows, m)
    assert np.array_equal(truncate(whole, m).to_dense()[:k, :k], part.to_dense()[:k, :k])


# ---------------------------------------------------------------------------
# residual


def test_residual_of_equal_matrices_is_zero():
    J = random_hessenberg(2, 5, seed=3)
    assert residual(J, J, full_window(J)) == 0.0


def test_residual_unit_difference():
    ones = BandedHessenberg(1, 2, (np.ones(2), np.zeros(2)))
    zeros = BandedHessenberg(1, 2, (np.zeros(2), np.zeros(2)))
    assert residual(ones, zeros, full_window(ones)) == 1.0


def test_residual_ignores_rows_outside_window():
    diag = np.zeros(5)
    bumped = diag.copy()
    bumped[4] = 7.0
    a = BandedHessenberg(1, 5, (diag, np.zeros(5)))
    b = BandedHessenberg(1, 5, (bumped, np.zeros(5)))
    assert residual(a, b, ValidWindow(3)) == 0.0
    assert residual(a, b, full_window(a)) == 7.0


# ---------------------------------------------------------------------------
# fixture generator and scaling


def test_random_hessenberg_is_deterministic():
    a = random_hessenberg(3, 9, seed=42)
    b = random_hessenberg(3, 9, seed=42)
    assert np.array_equal(a.to_dense(), b.to_dense())
    c = random_hessenberg(3, 9, seed=43)
    assert not np.array_equal(a.to_dense(), c.to_dense())


@pytest.mark.parametrize("mode", ["real", "complex"])
def test_random_hessenberg_moduli_and_regularity(mode):
    J = random_hessenberg(2, 8, seed=5, mode=mode)
    for d in range(3):
        vals = np.abs(J.band(d)[d:])
        assert np.all(vals >= 1.0) and np.all(vals <= 2.0)
    assert J.regular
    if mode == "real":
        assert np.all(J.to_dense().imag == 0)
    else:
        assert np.abs(J.to_dense().imag).max() > 0


def test_graded_scale_bands_and_superdiagonal():
    J = random_hessenberg(2, 6, seed=6)
    lam = 0.3
    S = graded_scale(J, lam)
    for d in range(3):
        assert np.allclose(S.band(d), lam ** (d + 1) * J.band(d), atol=0, rtol=1e-15)
    assert np.array_equal(S.band(-1)[:5], np.ones(5))


# ---------------------------------------------------------------------------
# JSON interchange


@pytest.mark.parametrize("make", [
    lambda rng: random_hessenberg(2, 5, seed=7, mode="complex"),
    lambda rng: random_upper(5, rng),
    lambda rng: random_lower_bidiagonal(5, rng),
    lambda rng: random_unit_lower(3, 5, rng),
])
def test_json_round_trip(make):
    rng = np.random.default_rng(70)
    m = make(rng)
    payload = to_json_dict(m)
    again = from_json_dict(payload)
    assert np.array_equal(m.to_dense(), again.to_dense())
    assert json.dumps(payload, sort_keys=True) == json.dumps(to_json_dict(again), sort_keys=True)


def test_json_band_keys_are_signed_offsets():
    J = random_hessenberg(1, 3, seed=8)
    payload = to_json_dict(J)
    assert set(payload["bands"]) == {"-1", "0", "1"}
    assert payload["bands"]["-1"] == [[1.0, 0.0], [1.0, 0.0]]


def test_json_rejects_inconsistent_p():
    payload = to_json_dict(random_hessenberg(2, 4, seed=9))
    payload["p"] = 3
    with pytest.raises(ShapeError):
        from_json_dict(payload)


def test_json_rejects_wrong_band_length():
    payload = to_json_dict(random_hessenberg(1, 4, seed=10))
    payload["bands"]["1"] = payload["bands"]["1"][:-1]
    with pytest.raises(ShapeError):
        from_json_dict(payload)


# ---------------------------------------------------------------------------
# construction guards


def test_constructor_shape_errors():
    with pytest.raises(ShapeError):
        BandedHessenberg(1, 4, (np.zeros(4),))  # missing subdiagonal band
    with pytest.raises(ShapeError):
        BandedHessenberg(1, 4, (np.zeros(4), np.zeros(2)))
    with pytest.raises(ShapeError):
        Bidiagonal("sideways", 4, np.zeros(4))


def test_regular_flag_tracks_deepest_band():
    band1 = np.array([0.0, 1.0, 2.0, 0.0])
    J = BandedHessenberg(1, 4, (np.ones(4), band1))
    assert not J.regular
    J2 = BandedHessenberg(1, 4, (np.ones(4), np.array([0.0, 1.0, 2.0, 3.0])))
    assert J2.regular


def test_entry_reads_outside_band_are_zero_and_superdiagonal_one():
    J = random_hessenberg(1, 4, seed=11)
    assert J.entry(0, 2) == 0
    assert J.entry(3, 0) == 0
    assert J.entry(1, 2) == 1.0
