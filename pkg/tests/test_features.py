import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from texsim import curvelet as cv
from texsim import features as ft
from texsim.errors import NumericError, ZeroSpectrumError

# exp(0.75 ln(4/3) + 0.25 ln 4), evaluated with mpmath at 40 digits
ERANK_3_1 = 1.7547653506033232811


def svd_oracle(m):
    """Singular values via eigenvalues of the Gram matrix."""
    m = np.asarray(m)
    gram = m.conj().T @ m if m.shape[0] >= m.shape[1] else m @ m.conj().T
    ev = np.linalg.eigvalsh(gram)
    return np.sqrt(np.clip(ev, 0, None))[::-1]


class TestSingularValues:
    def test_identity(self):
        assert np.allclose(ft.singular_values(np.eye(2)), [1, 1])

    def test_diagonal(self):
        assert np.allclose(ft.singular_values(np.diag([1.0, 3.0])), [3, 1])

    def test_against_gram_oracle(self, rng):
        for _ in range(20):
            m = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
            assert np.max(np.abs(ft.singular_values(m) - svd_oracle(m))) < 1e-10

    def test_non_finite(self):
        with pytest.raises(NumericError):
            ft.singular_values(np.array([[1.0, np.nan]]))

    def test_empty(self):
        with pytest.raises(NumericError):
            ft.singular_values(np.zeros((0, 3)))


class TestDistribution:
    @pytest.mark.parametrize(
        "sigma, p",
        [([3, 1], [0.75, 0.25]), ([2, 2, 2, 2], [0.25] * 4), ([1, 0, 0], [1, 0, 0])],
    )
    def test_values(self, sigma, p):
        assert np.allclose(ft.sv_distribution(sigma), p)

    def test_zero(self):
        with pytest.raises(ZeroSpectrumError):
            ft.sv_distribution([0.0, 0.0])


class TestEffectiveRank:
    def test_oracle(self):
        assert abs(ft.effective_rank([3, 1]) - ERANK_3_1) < 1e-9

    @pytest.mark.parametrize("L", [1, 2, 3, 7, 64, 128])
    def test_equal_values(self, L):
        assert abs(ft.effective_rank([0.37] * L) - L) < 1e-12

    def test_single_nonzero(self):
        assert ft.effective_rank([1, 0, 0, 0]) == 1.0

    def test_zero(self):
        assert ft.effective_rank([0, 0, 0]) == 0.0

    def test_roundoff_clamped(self):
        assert ft.effective_rank([1.0, 1e-14, 1e-15]) == 1.0

    @settings(max_examples=200)
    @given(st.lists(st.floats(0, 1e6), min_size=1, max_size=40))
    def test_bounds(self, values):
        sigma = sorted(values, reverse=True)
        q = ft.effective_rank(sigma)
        if sigma[0] == 0:
            assert q == 0
        else:
            assert 1 - 1e-12 <= q <= len(sigma) + 1e-9


class TestTruncate:
    def test_examples(self):
        assert np.array_equal(ft.truncate([3, 1], ERANK_3_1), [3, 0])
        assert np.array_equal(ft.truncate([2, 2, 2], 3.0), [2, 2, 2])
        assert np.array_equal(ft.truncate([0, 0], 0.0), [0, 0])

    def test_rounding_guard(self):
        # exp(log 3) may land one ulp below 3
        assert np.array_equal(ft.truncate([2, 2, 2], np.nextafter(3.0, 0)), [2, 2, 2])

    @settings(max_examples=200)
    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=30))
    def test_nonzero_count(self, values):
        sigma = np.sort(values)[::-1]
        q = ft.effective_rank(sigma)
        out = ft.truncate(sigma, q)
        assert np.count_nonzero(out) == int(np.floor(q + 1e-9))
        assert out.size == sigma.size


class TestWedgeSpectrum:
    def test_permutation_invariance(self, rng):
        m = rng.standard_normal((9, 6)) + 1j * rng.standard_normal((9, 6))
        a = ft.wedge_spectrum(m)
        b = ft.wedge_spectrum(m[rng.permutation(9)][:, rng.permutation(6)])
        assert np.allclose(a.singular_values, b.singular_values, atol=1e-12)
        assert a.effective_rank == pytest.approx(b.effective_rank, abs=1e-12)
        assert np.allclose(a.effective_values, b.effective_values, atol=1e-12)

    def test_invariants(self, rng):
        s = ft.wedge_spectrum(rng.standard_normal((12, 8)))
        assert s.length == 8
        assert np.all(np.diff(s.singular_values) <= 0) and s.singular_values[-1] >= 0
        assert 1 <= s.effective_rank <= 8
        assert np.count_nonzero(s.effective_values) <= int(s.effective_rank)


class TestExtract:
    def test_layout_128(self, rng):
        fv = ft.image_features(rng.random((128, 128)))
        keys = [(j, k) for j, k, _ in fv.layout]
        assert len(keys) == 1 + 8 + 16 + 1 == 26
        assert keys == [(1, 1)] + [(2, k) for k in range(1, 9)] + [(3, k) for k in range(1, 17)] + [(4, 1)]
        assert len(fv) == sum(L for _, _, L in fv.layout)
        assert np.all(fv.values >= 0)

    def test_block_lengths_match_wedges(self, rng):
        d = cv.forward(rng.random((64, 64)))
        fv = ft.extract_features(d)
        for j, k, L in fv.layout:
            assert L == min(d[(j, k)].shape)

    def test_constant_image(self):
        fv = ft.image_features(np.full((64, 64), 0.4))
        for j, k, q, block in fv.blocks():
            if j == 1:
                assert block.max() > 0
            else:
                assert np.all(block < 1e-10 * fv.values.max())

    def test_deterministic(self, rng):
        img = rng.random((64, 64))
        a, b = ft.image_features(img), ft.image_features(img.copy())
        assert np.array_equal(a.values, b.values)
        assert a.layout == b.layout and a.params_digest == b.params_digest

    def test_scale_equivariance(self, rng):
        img = rng.random((64, 64))
        base = ft.image_features(img)
        for alpha in (0.5, 3.0, 1e3):
            scaled = ft.image_features(alpha * img)
            assert np.allclose(scaled.values, alpha * base.values, rtol=1e-10, atol=0)

    def test_second_half_orientations(self, rng):
        d = cv.forward(rng.random((128, 128)))
        a = ft.extract_features(d)
        b = ft.extract_features(d, second_half=True)
        assert np.max(np.abs(a.values - b.values)) < 1e-8

    def test_digest_depends_on_params(self):
        p1, p2 = cv.make_params(64, 64), cv.make_params(64, 64, orientations_coarse=8)
        assert ft.params_digest(p1) != ft.params_digest(p2)
        assert ft.params_digest(p1) == ft.params_digest(cv.make_params(64, 64))
