import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chi2

from elspec import (
    DegenerateInputError,
    InputError,
    corrected_threshold,
    estimate_bartlett,
    supplied_bartlett,
)
from elspec.el import MAX_HALF_LOG, PsiMatrix, adjust


class TestEstimateBartlett:
    def test_symmetric_two_point(self):
        # psi in {-1, +1} equally: mu3 = 0, mu4 = mu2^2 = 1 => b = 1/2
        rows = np.array([[-1.0], [1.0]] * 10)
        fac = estimate_bartlett(PsiMatrix(rows))
        assert fac.b == pytest.approx(0.5, rel=1e-12)
        assert fac.source == "estimated"

    def test_constant_psi_degenerate(self):
        with pytest.raises(DegenerateInputError):
            estimate_bartlett(PsiMatrix(np.full((20, 1), 3.0)))

    def test_standard_normal_limit(self):
        # normal moments mu4 = 3 mu2^2, mu3 = 0 => b -> 3/2
        rows = np.random.default_rng(0).standard_normal((100_000, 1))
        fac = estimate_bartlett(PsiMatrix(rows))
        assert fac.b == pytest.approx(1.5, abs=0.1)

    def test_rejects_adjusted_or_multivariate(self):
        with pytest.raises(InputError):
            estimate_bartlett(adjust(PsiMatrix(np.random.randn(10, 1)), MAX_HALF_LOG))
        with pytest.raises(InputError):
            estimate_bartlett(PsiMatrix(np.random.randn(10, 2)))

    @given(c=st.floats(-50.0, 50.0).filter(lambda x: abs(x) > 1e-3), seed=st.integers(0, 2**16))
    @settings(max_examples=25, deadline=None)
    def test_scale_invariance(self, c, seed):
        rows = np.random.default_rng(seed).standard_normal((200, 1))
        b0 = estimate_bartlett(PsiMatrix(rows)).b
        b1 = estimate_bartlett(PsiMatrix(c * rows)).b
        assert b1 == pytest.approx(b0, rel=1e-9)


class TestCorrectedThreshold:
    def test_plain_chi2_quantile_df2(self):
        # chi2_{2,0.9} = -2 ln(0.1), exact for two degrees of freedom
        thr = corrected_threshold(supplied_bartlett(0.0), k=2, alpha=0.1, n=50)
        assert thr == pytest.approx(-2.0 * math.log(0.1), rel=1e-12)
        assert thr == pytest.approx(4.60517, abs=1e-5)

    def test_scaled_threshold(self):
        thr = corrected_threshold(supplied_bartlett(1.5), k=1, alpha=0.1, n=30)
        assert thr == pytest.approx(chi2.ppf(0.9, 1) * 1.05, rel=1e-12)
        assert thr == pytest.approx(2.84082, abs=1e-5)

    def test_pathological_scale_rejected(self):
        with pytest.raises(InputError):
            corrected_threshold(supplied_bartlett(-30.0), k=1, alpha=0.1, n=30)

    def test_bad_alpha_rejected(self):
        for alpha in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(InputError):
                corrected_threshold(supplied_bartlett(0.0), k=1, alpha=alpha, n=30)

    @given(bs=st.lists(st.integers(0, 400), min_size=2, max_size=6, unique=True))
    @settings(max_examples=25, deadline=None)
    def test_monotone_increasing_in_b(self, bs):
        thrs = [corrected_threshold(supplied_bartlett(b / 20.0), 1, 0.1, 40) for b in sorted(bs)]
        assert all(a < b for a, b in zip(thrs, thrs[1:]))

    def test_continuous_at_zero(self):
        base = corrected_threshold(supplied_bartlett(0.0), 1, 0.1, 40)
        near = corrected_threshold(supplied_bartlett(1e-12), 1, 0.1, 40)
        assert near == pytest.approx(base, rel=1e-10)
