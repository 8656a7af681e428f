import math

import numpy as np
import pytest

from hermlab.core import (
    DomainError,
    ExpWindow,
    GridSpec,
    IndicatorBox,
    LimitScenario,
    Tabulated,
    UnsupportedError,
)
from hermlab.quadrature import (
    QuadratureConfig,
    contraction_norm_sq,
    effective_exponents,
    fbm_time_kernel_integral,
    hbar_norm,
    inner_product_HH,
    limit_constant,
    limit_covariance_bifractional,
    lp_admissibility,
    q_alpha,
    sigma_limit,
)

CFG = QuadratureConfig(panels=128)
UNIT = IndicatorBox(0, 1)
EXP = ExpWindow(1.0, 1.0)


class TestInnerProduct:
    def test_indicator_gives_t_pow_2h(self):
        # <1_[0,t], 1_[0,t]> = t^2H exactly
        for t, H in ((1.0, 0.7), (0.5, 0.6), (2.0, 0.9)):
            f = IndicatorBox(0, t)
            assert inner_product_HH(f, f, H, CFG) == pytest.approx(t ** (2 * H), rel=1e-10)

    def test_indicator_exact_any_panels(self):
        f = IndicatorBox(0, 1)
        vals = [
            inner_product_HH(f, f, 0.7, QuadratureConfig(panels=p)) for p in (8, 32, 256)
        ]
        assert max(abs(v - 1.0) for v in vals) < 1e-9

    def test_tensor_product_2d(self):
        f = IndicatorBox([0, 0], [1, 1])
        assert inner_product_HH(f, f, (0.6, 0.8), CFG) == pytest.approx(1.0, rel=1e-9)

    def test_covariance_of_fbm(self):
        # <1_[0,1], 1_[0,0.5]> = R_H(1, 0.5)
        v = inner_product_HH(IndicatorBox(0, 1), IndicatorBox(0, 0.5), 0.7, CFG)
        assert v == pytest.approx(0.5 * (1 + 0.5**1.4 - 0.5**1.4), rel=1e-9)

    def test_symmetry(self):
        a = inner_product_HH(UNIT, EXP, 0.7, CFG)
        b = inner_product_HH(EXP, UNIT, 0.7, CFG)
        assert a == pytest.approx(b, rel=1e-12)

    def test_bilinear_in_tabulated_scaling(self):
        g = GridSpec(0, 1, 64)
        nodes = g.axis_nodes(0)
        t1 = Tabulated(g, np.exp(-nodes))
        t2 = Tabulated(g, 3.0 * np.exp(-nodes))
        a = inner_product_HH(t1, t1, 0.7, CFG)
        b = inner_product_HH(t2, t1, 0.7, CFG)
        assert b == pytest.approx(3.0 * a, rel=1e-12)

    def test_cauchy_schwarz_and_psd(self):
        ff = inner_product_HH(EXP, EXP, 0.7, CFG)
        gg = inner_product_HH(UNIT, UNIT, 0.7, CFG)
        fg = inner_product_HH(EXP, UNIT, 0.7, CFG)
        assert ff > 0 and gg > 0
        assert abs(fg) <= math.sqrt(ff * gg) * (1 + 1e-9)

    def test_panel_refinement_converges(self):
        v1 = inner_product_HH(EXP, EXP, 0.7, QuadratureConfig(panels=256))
        v2 = inner_product_HH(EXP, EXP, 0.7, QuadratureConfig(panels=512))
        assert abs(v2 - v1) < 1e-6

    def test_midpoint_mode_agrees(self):
        a = inner_product_HH(EXP, EXP, 0.7, QuadratureConfig(panels=256))
        b = inner_product_HH(EXP, EXP, 0.7, QuadratureConfig(panels=256, mode="midpoint"))
        assert b == pytest.approx(a, rel=1e-3)

    def test_hurst_out_of_range(self):
        with pytest.raises(DomainError):
            inner_product_HH(UNIT, UNIT, 0.5, CFG)
        with pytest.raises(DomainError):
            inner_product_HH(UNIT, UNIT, 1.0, CFG)


class TestHbarNorm:
    def test_indicator_2d_value(self):
        f = IndicatorBox([0, 0], [1, 1])
        sc = LimitScenario(a_axes=(0,), fixed={1: 0.75})
        v = hbar_norm(f, (0.75, 0.75), sc, CFG)
        assert v == pytest.approx((1 / (0.75 * 0.5)) ** 0.5, rel=1e-9)

    def test_zero_integrand(self):
        g = GridSpec([0, 0], [1, 1], [8, 8])
        z = Tabulated(g, np.zeros((9, 9)))
        sc = LimitScenario(a_axes=(0,), fixed={1: 0.75})
        assert hbar_norm(z, (0.75, 0.75), sc, CFG) == 0.0

    def test_k_equals_d_adds_l1(self):
        f = IndicatorBox([0, 0], [1, 1])
        sc = LimitScenario(a_axes=(0, 1))
        v = hbar_norm(f, (0.75, 0.75), sc, CFG)
        # L1 norm (=1) plus the single j=1 prefix term
        assert v == pytest.approx(1.0 + (1 / (0.75 * 0.5)) ** 0.5, rel=1e-9)

    def test_unsupported_sizes(self):
        f = IndicatorBox([0] * 4, [1] * 4)
        with pytest.raises(UnsupportedError):
            hbar_norm(f, (0.7,) * 4, LimitScenario(a_axes=(0,), fixed={1: 0.7, 2: 0.7, 3: 0.7}), CFG)

    def test_heat_window_finite_and_stable(self):
        # the mild-solution window has a finite prefix norm whenever the
        # existence condition holds; the value stabilizes under refinement
        from hermlab.core import HeatWindow

        w = HeatWindow(1.0, (0.0,), 6.0)
        sc = LimitScenario(a_axes=(0,), fixed={1: 0.7})
        v1 = hbar_norm(w, (0.7, 0.7), sc, QuadratureConfig(panels=64))
        v2 = hbar_norm(w, (0.7, 0.7), sc, QuadratureConfig(panels=128))
        assert np.isfinite(v1) and v1 > 0
        assert v2 == pytest.approx(v1, rel=0.05)


class TestLp:
    def test_indicator_all_ones(self):
        rep = lp_admissibility(UNIT, 0.7, CFG)
        assert rep.l1 == pytest.approx(1.0, rel=1e-9)
        assert rep.l2 == pytest.approx(1.0, rel=1e-9)
        assert rep.l_1_over_h == pytest.approx(1.0, rel=1e-9)
        assert rep.admissible

    def test_exp_window_l1(self):
        rep = lp_admissibility(EXP, 0.7, QuadratureConfig(panels=2048))
        assert rep.l1 == pytest.approx(1 - math.exp(-1), rel=1e-5)

    def test_zero(self):
        g = GridSpec(0, 1, 8)
        z = Tabulated(g, np.zeros(9))
        rep = lp_admissibility(z, 0.7, CFG)
        assert rep.l1 == 0.0 and rep.l2 == 0.0 and rep.admissible


class TestConstants:
    def test_q_alpha_half(self):
        assert q_alpha(0.5) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)

    def test_q_alpha_white_noise_limit(self):
        h = 0.51
        v = h * (2 * h - 1) * q_alpha(2 * h - 1)
        assert v == pytest.approx(1 / (2 * math.pi), rel=0.02)

    def test_q_alpha_vanishes_at_one(self):
        assert q_alpha(0.999) < 1e-2

    def test_q_alpha_domain(self):
        for bad in (0.0, 1.0, -0.3, 2.0):
            with pytest.raises(DomainError):
                q_alpha(bad)

    def test_effective_exponents_case3(self):
        sc = LimitScenario(a_axes=(0,))
        ee = effective_exponents(None, (0.7,), sc)
        assert ee.gamma == pytest.approx(0.5)
        assert ee.gamma0 == pytest.approx(0.5)

    def test_effective_exponents_fixed_axis(self):
        sc = LimitScenario(a_axes=(0,), fixed={1: 0.7})
        ee = effective_exponents(None, (0.7, 0.7), sc)
        assert ee.gamma0 == pytest.approx(2 - 0.5 - 0.7)

    def test_limit_constant_values(self):
        assert limit_constant([], 1) == pytest.approx((2 * math.pi) ** -0.5, rel=1e-12)
        from scipy.special import gamma as G
        v = limit_constant([0.75], 1)
        assert v == pytest.approx((2 * math.pi) ** -0.5 * q_alpha(0.5) * G(0.25), rel=1e-12)

    def test_bifractional(self):
        assert limit_covariance_bifractional(1, 1, 0.5, 1.0) == pytest.approx(math.sqrt(2))
        assert limit_covariance_bifractional(0, 0, 0.5, 1.0) == 0.0
        v1 = limit_covariance_bifractional(1, 1, 0.3, 2.0)
        v2 = limit_covariance_bifractional(2, 2, 0.3, 2.0)
        assert v2 > v1  # monotone on the diagonal
        with pytest.raises(DomainError):
            limit_covariance_bifractional(1, 1, 1.2, 1.0)

    def test_case3_white_noise_value(self):
        v = limit_covariance_bifractional(1, 1, 0.5, limit_constant([], 1))
        assert v == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)


class TestSigmaLimit:
    def test_exp_window(self):
        sc = LimitScenario(a_axes=(0,))
        v = sigma_limit(EXP, sc, QuadratureConfig(panels=2048))
        assert v == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-5)

    def test_indicator(self):
        sc = LimitScenario(a_axes=(0,))
        assert sigma_limit(UNIT, sc, CFG) == pytest.approx(1.0, rel=1e-12)

    def test_zero(self):
        g = GridSpec(0, 1, 8)
        z = Tabulated(g, np.zeros(9))
        assert sigma_limit(z, LimitScenario(a_axes=(0,)), CFG) == 0.0

    def test_k_zero_rejected(self):
        with pytest.raises(DomainError):
            sigma_limit(EXP, LimitScenario(fixed={0: 0.7}), CFG)

    def test_matches_H_extrapolation(self):
        # quadrature values along H -> 1/2 approach the collapsed-diagonal value
        sc = LimitScenario(a_axes=(0,))
        cfg = QuadratureConfig(panels=1024)
        target = sigma_limit(EXP, sc, cfg)
        vals = [inner_product_HH(EXP, EXP, h, cfg) for h in (0.75, 0.65, 0.55, 0.51)]
        dists = [abs(v - target) for v in vals]
        assert all(dists[i + 1] < dists[i] for i in range(3))
        assert dists[-1] / target < 0.02

    def test_b_axis_factorizes(self):
        # with one axis driven to 1, the kernel on that axis integrates to
        # (int f)^2 per axis: for the unit square the result is int f^2 along
        # the collapsed axis times 1
        f = IndicatorBox([0, 0], [1, 1])
        sc = LimitScenario(a_axes=(0,), b_axes=(1,))
        assert sigma_limit(f, sc, CFG) == pytest.approx(1.0, rel=1e-12)


class TestContraction:
    def test_zero_f(self):
        g = GridSpec(0, 1, 8)
        z = Tabulated(g, np.zeros(9))
        assert contraction_norm_sq(z, 0.7, 2, 1, CFG) == 0.0

    def test_formal_endpoint(self):
        assert contraction_norm_sq(UNIT, 1.0, 2, 1, CFG) == pytest.approx(0.25, rel=1e-9)

    def test_shrinks_toward_half(self):
        vals = [contraction_norm_sq(UNIT, h, 2, 1, CFG) for h in (0.51, 0.6, 0.75)]
        assert vals[0] < vals[1] < vals[2]

    def test_r_range_checked(self):
        with pytest.raises(DomainError):
            contraction_norm_sq(UNIT, 0.7, 2, 2, CFG)

    def test_d1_only(self):
        f = IndicatorBox([0, 0], [1, 1])
        with pytest.raises(UnsupportedError):
            contraction_norm_sq(f, 0.7, 2, 1, CFG)


class TestTimeKernelIntegral:
    def test_symmetry(self):
        a = fbm_time_kernel_integral(1.0, 0.6, 0.7, -0.3)
        b = fbm_time_kernel_integral(0.6, 1.0, 0.7, -0.3)
        assert a == pytest.approx(b, rel=1e-12)

    def test_zero_time(self):
        assert fbm_time_kernel_integral(0.0, 1.0, 0.7, -0.3) == 0.0

    def test_against_brute_force(self):
        # plain 2-D midpoint quadrature with exact |u-v| panel masses
        h0, g = 0.7, -0.3
        n = 800
        edges = np.linspace(0, 1, n + 1)
        from hermlab.quadrature import abs_pow_cell_masses

        W = abs_pow_cell_masses(edges, edges, 2 * h0 - 2)
        mids = 0.5 * (edges[:-1] + edges[1:])
        K = (2.0 - mids[:, None] - mids[None, :]) ** g
        ref = float(np.sum(W * K))
        val = fbm_time_kernel_integral(1.0, 1.0, h0, g)
        assert val == pytest.approx(ref, rel=2e-3)
