import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavehead.errors import ConfigError, ShapeError
from wavehead.wavelet import (
    Subbands1D,
    Subbands2D,
    analysis_operators,
    dwt1d,
    dwt2d,
    idwt1d,
    idwt2d,
    make_filter_bank,
)

SQRT2 = math.sqrt(2.0)


class TestFilterBank:
    def test_haar_coefficients(self):
        fb = make_filter_bank("haar")
        np.testing.assert_allclose(fb.lowpass, [1 / SQRT2, 1 / SQRT2], atol=1e-15)
        np.testing.assert_allclose(fb.highpass, [1 / SQRT2, -1 / SQRT2], atol=1e-15)

    def test_haar_orthogonality(self):
        # termwise: l0*h0 + l1*h1 = l0*l1 - l1*l0, exactly zero
        fb = make_filter_bank("haar")
        terms = fb.lowpass * fb.highpass
        assert terms.sum() == 0.0

    def test_db1_is_haar(self):
        assert np.array_equal(
            make_filter_bank("db1").lowpass, make_filter_bank("haar").lowpass
        )

    def test_db2_against_closed_form(self):
        # published closed form: ((1+s3), (3+s3), (3-s3), (1-s3)) / (4*sqrt(2))
        s3 = math.sqrt(3.0)
        expect = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * SQRT2)
        fb = make_filter_bank("db2")
        np.testing.assert_allclose(fb.lowpass, expect, atol=1e-15)

    @pytest.mark.parametrize("family", ["haar", "db1", "db2"])
    def test_bank_invariants(self, family):
        fb = make_filter_bank(family)
        lo, hi = fb.lowpass, fb.highpass
        assert len(lo) == len(hi)
        assert len(lo) >= 2 and len(lo) % 2 == 0
        assert abs((lo**2).sum() - 1.0) <= 1e-12
        assert abs((hi**2).sum() - 1.0) <= 1e-12
        assert abs((lo * hi).sum()) <= 1e-12

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_quadrature_relation(self, family):
        fb = make_filter_bank(family)
        flen = len(fb)
        for j in range(flen):
            assert fb.highpass[j] == (-1.0) ** j * fb.lowpass[flen - 1 - j]

    def test_unknown_family(self):
        with pytest.raises(ConfigError, match="unknown wavelet family"):
            make_filter_bank("sym4")


class TestAnalysisOperators:
    def test_single_row_case(self):
        ops = analysis_operators(make_filter_bank("haar"), 2)
        np.testing.assert_allclose(ops.low, [[1 / SQRT2, 1 / SQRT2]], atol=1e-15)
        np.testing.assert_allclose(ops.high, [[1 / SQRT2, -1 / SQRT2]], atol=1e-15)

    def test_orthonormal_rows_n4(self):
        ops = analysis_operators(make_filter_bank("haar"), 4)
        np.testing.assert_allclose(ops.low @ ops.low.T, np.eye(2), atol=1e-12)

    def test_completeness_n8(self):
        ops = analysis_operators(make_filter_bank("haar"), 8)
        ident = ops.low.T @ ops.low + ops.high.T @ ops.high
        np.testing.assert_allclose(ident, np.eye(8), atol=1e-10)

    @pytest.mark.parametrize("family", ["haar", "db2"])
    @pytest.mark.parametrize("n", [4, 8, 768])
    def test_operator_identities(self, family, n):
        ops = analysis_operators(make_filter_bank(family), n)
        half = n // 2
        assert np.abs(ops.low @ ops.low.T - np.eye(half)).max() <= 1e-10
        assert np.abs(ops.high @ ops.high.T - np.eye(half)).max() <= 1e-10
        assert np.abs(ops.low @ ops.high.T).max() <= 1e-10
        ident = ops.low.T @ ops.low + ops.high.T @ ops.high
        assert np.abs(ident - np.eye(n)).max() <= 1e-10

    def test_row_placement(self):
        # row k of the low matrix holds the taps at circular offset 2k
        fb = make_filter_bank("db2")
        ops = analysis_operators(fb, 8)
        for k in range(4):
            expect = np.zeros(8)
            for m in range(4):
                expect[(2 * k + m) % 8] += fb.lowpass[m]
            np.testing.assert_array_equal(ops.low[k], expect)

    def test_odd_length_rejected(self):
        with pytest.raises(ShapeError, match="even"):
            analysis_operators(make_filter_bank("haar"), 5)

    def test_too_short_rejected(self):
        with pytest.raises(ShapeError, match="shorter"):
            analysis_operators(make_filter_bank("db2"), 2)


class TestDwt1d:
    def test_constant_signal_zero_detail(self):
        sb = dwt1d(make_filter_bank("haar"), np.ones(4))
        np.testing.assert_allclose(sb.low, [SQRT2, SQRT2], atol=1e-15)
        np.testing.assert_allclose(sb.high, [0.0, 0.0], atol=1e-15)

    def test_length_two_hand_sum(self):
        sb = dwt1d(make_filter_bank("haar"), np.array([2.0, 0.0]))
        np.testing.assert_allclose(sb.low, [SQRT2], atol=1e-15)
        np.testing.assert_allclose(sb.high, [SQRT2], atol=1e-15)

    def test_ramp_hand_evaluated(self):
        # direct evaluation of the analysis sums for [3, 1, -1, -3]
        sb = dwt1d(make_filter_bank("haar"), np.array([3.0, 1.0, -1.0, -3.0]))
        np.testing.assert_allclose(sb.low, [2 * SQRT2, -2 * SQRT2], atol=1e-14)
        np.testing.assert_allclose(sb.high, [SQRT2, SQRT2], atol=1e-14)

    def test_odd_length_rejected(self):
        with pytest.raises(ShapeError, match="even"):
            dwt1d(make_filter_bank("haar"), np.zeros(7))

    def test_matches_operator_oracle(self):
        rng = np.random.default_rng(42)
        for family in ("haar", "db2"):
            fb = make_filter_bank(family)
            for n in (4, 8, 64):
                ops = analysis_operators(fb, n)
                x = rng.normal(size=n)
                sb = dwt1d(fb, x)
                np.testing.assert_allclose(sb.low, ops.low @ x, atol=1e-12)
                np.testing.assert_allclose(sb.high, ops.high @ x, atol=1e-12)

    def test_batch_matches_per_row(self):
        fb = make_filter_bank("db2")
        X = np.random.default_rng(7).normal(size=(5, 16))
        sb = dwt1d(fb, X)
        for i in range(5):
            row = dwt1d(fb, X[i])
            np.testing.assert_array_equal(sb.low[i], row.low)
            np.testing.assert_array_equal(sb.high[i], row.high)

    def test_linearity(self):
        fb = make_filter_bank("haar")
        rng = np.random.default_rng(3)
        x, y = rng.normal(size=(2, 32))
        a, b = 2.5, -1.25
        sb = dwt1d(fb, a * x + b * y)
        sx, sy = dwt1d(fb, x), dwt1d(fb, y)
        np.testing.assert_allclose(sb.low, a * sx.low + b * sy.low, atol=1e-10)
        np.testing.assert_allclose(sb.high, a * sx.high + b * sy.high, atol=1e-10)


class TestIdwt1d:
    def test_inverse_of_constant_case(self):
        fb = make_filter_bank("haar")
        x = idwt1d(fb, Subbands1D(low=np.array([SQRT2, SQRT2]), high=np.zeros(2)))
        np.testing.assert_allclose(x, np.ones(4), atol=1e-15)

    def test_zero_case(self):
        fb = make_filter_bank("haar")
        x = idwt1d(fb, Subbands1D(low=np.zeros(1), high=np.zeros(1)))
        np.testing.assert_array_equal(x, np.zeros(2))

    def test_mismatched_bands_rejected(self):
        fb = make_filter_bank("haar")
        with pytest.raises(ShapeError, match="band shapes differ"):
            idwt1d(fb, Subbands1D(low=np.zeros(2), high=np.zeros(3)))

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_perfect_reconstruction_768(self, family):
        fb = make_filter_bank(family)
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = rng.normal(size=768)
            r = idwt1d(fb, dwt1d(fb, x))
            assert np.abs(r - x).max() <= 1e-10

    def test_equals_transpose_synthesis(self):
        fb = make_filter_bank("db2")
        ops = analysis_operators(fb, 16)
        rng = np.random.default_rng(13)
        low, high = rng.normal(size=(2, 8))
        x = idwt1d(fb, Subbands1D(low=low, high=high))
        np.testing.assert_allclose(x, ops.low.T @ low + ops.high.T @ high, atol=1e-12)


class TestDwt2d:
    def test_constant_image(self):
        sb = dwt2d(make_filter_bank("haar"), np.ones((2, 2)))
        np.testing.assert_allclose(sb.ll, [[2.0]], atol=1e-15)
        for band in (sb.lh, sb.hl, sb.hh):
            np.testing.assert_allclose(band, [[0.0]], atol=1e-15)

    def test_column_alternating_image(self):
        # hand evaluation: [[1,-1],[1,-1]] concentrates in the hl band
        sb = dwt2d(make_filter_bank("haar"), np.array([[1.0, -1.0], [1.0, -1.0]]))
        np.testing.assert_allclose(sb.hl, [[2.0]], atol=1e-14)
        for band in (sb.ll, sb.lh, sb.hh):
            np.testing.assert_allclose(band, [[0.0]], atol=1e-14)

    def test_zero_image(self):
        sb = dwt2d(make_filter_bank("haar"), np.zeros((4, 4)))
        for band in (sb.ll, sb.lh, sb.hl, sb.hh):
            np.testing.assert_array_equal(band, np.zeros((2, 2)))

    def test_odd_dims_rejected(self):
        with pytest.raises(ShapeError, match="even"):
            dwt2d(make_filter_bank("haar"), np.zeros((3, 4)))

    def test_matches_operator_oracle(self):
        fb = make_filter_bank("db2")
        rng = np.random.default_rng(5)
        X = rng.normal(size=(8, 12))
        rows = analysis_operators(fb, 8)
        cols = analysis_operators(fb, 12)
        sb = dwt2d(fb, X)
        np.testing.assert_allclose(sb.ll, rows.low @ X @ cols.low.T, atol=1e-12)
        np.testing.assert_allclose(sb.lh, rows.high @ X @ cols.low.T, atol=1e-12)
        np.testing.assert_allclose(sb.hl, rows.low @ X @ cols.high.T, atol=1e-12)
        np.testing.assert_allclose(sb.hh, rows.high @ X @ cols.high.T, atol=1e-12)


class TestIdwt2d:
    def test_inverse_of_constant_case(self):
        fb = make_filter_bank("haar")
        z = np.zeros((1, 1))
        x = idwt2d(fb, Subbands2D(ll=np.array([[2.0]]), lh=z, hl=z, hh=z))
        np.testing.assert_allclose(x, np.ones((2, 2)), atol=1e-15)

    def test_zero_subbands(self):
        fb = make_filter_bank("haar")
        z = np.zeros((2, 2))
        np.testing.assert_array_equal(
            idwt2d(fb, Subbands2D(ll=z, lh=z, hl=z, hh=z)), np.zeros((4, 4))
        )

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_perfect_reconstruction_8x8(self, family):
        fb = make_filter_bank(family)
        rng = np.random.default_rng(17)
        for _ in range(10):
            X = rng.normal(size=(8, 8))
            R = idwt2d(fb, dwt2d(fb, X))
            assert np.abs(R - X).max() <= 1e-10

    def test_mismatched_shapes_rejected(self):
        fb = make_filter_bank("haar")
        with pytest.raises(ShapeError, match="subband shapes differ"):
            idwt2d(
                fb,
                Subbands2D(
                    ll=np.zeros((2, 2)), lh=np.zeros((2, 2)),
                    hl=np.zeros((2, 2)), hh=np.zeros((2, 3)),
                ),
            )


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=2,
            max_size=256,
        ).filter(lambda xs: len(xs) % 2 == 0)
    )
    def test_perfect_reconstruction_arbitrary_even(self, xs):
        fb = make_filter_bank("haar")
        x = np.asarray(xs)
        r = idwt1d(fb, dwt1d(fb, x))
        scale = max(1.0, np.abs(x).max())
        assert np.abs(r - x).max() <= 1e-10 * scale

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_reconstruction_sweep(self, family):
        fb = make_filter_bank(family)
        rng = np.random.default_rng(23)
        for n in (4, 6, 8, 10, 64, 256, 768, 1024):
            x = rng.normal(size=n)
            assert np.abs(idwt1d(fb, dwt1d(fb, x)) - x).max() <= 1e-10

    def test_reconstruction_single_precision(self):
        fb = make_filter_bank("haar")
        rng = np.random.default_rng(29)
        x = rng.normal(size=768).astype(np.float32)
        r = idwt1d(fb, dwt1d(fb, x))
        assert r.dtype == np.float32
        assert np.abs(r - x).max() <= 1e-5

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_energy_conservation(self, family):
        fb = make_filter_bank(family)
        rng = np.random.default_rng(31)
        for n in (8, 768):
            x = rng.normal(size=n)
            sb = dwt1d(fb, x)
            total = (x**2).sum()
            band = (sb.low**2).sum() + (sb.high**2).sum()
            assert abs(band - total) / total <= 1e-10

    def test_energy_conservation_2d(self):
        fb = make_filter_bank("haar")
        X = np.random.default_rng(37).normal(size=(16, 16))
        sb = dwt2d(fb, X)
        band = sum((b**2).sum() for b in (sb.ll, sb.lh, sb.hl, sb.hh))
        assert abs(band - (X**2).sum()) / (X**2).sum() <= 1e-10
