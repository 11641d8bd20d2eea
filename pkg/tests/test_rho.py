import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellshot.errors import CalibrationError
from cellshot.rho import (RhoSpec, asymptotic_efficiency, biweight,
                          expected_rho_normal, hard_rejection_weight,
                          irls_weight, rho_eval, rho_prime, skipped_huber,
                          make_spec, tune_for_bdp, tune_for_efficiency)

BI = biweight(3.420)
SKH = skipped_huber(2.177)
LQQ = make_spec("lqq", 0.9823)
ALL_SPECS = [BI, SKH, LQQ]


class TestRhoEval:
    def test_biweight_at_zero(self):
        assert rho_eval(BI, 0.0) == 0.0

    def test_biweight_constant_region(self):
        assert rho_eval(BI, 5.0) == pytest.approx(3.420 ** 2 / 6, abs=1e-12)

    def test_skipped_huber_quadratic_region(self):
        assert rho_eval(SKH, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_biweight_interior_value(self):
        # frozen from an independent 40-digit evaluation of the closed form
        assert rho_eval(BI, 1.0) == pytest.approx(0.45847007614953113,
                                                  abs=1e-14)

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_even_and_bounded(self, spec):
        z = np.linspace(-30, 30, 1001)
        vals = rho_eval(spec, z)
        assert np.allclose(vals, rho_eval(spec, -z))
        assert np.all(vals >= 0)
        assert np.all(vals <= spec.rho_sup + 1e-12)

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_nondecreasing_and_saturates(self, spec):
        z = np.linspace(0, 3 * spec.support_breaks()[-1], 500)
        vals = rho_eval(spec, z)
        assert np.all(np.diff(vals) >= -1e-12)
        assert rho_eval(spec, spec.support_breaks()[-1] + 1.0) == \
            pytest.approx(spec.rho_sup, rel=1e-12)


class TestRhoPrime:
    def test_skipped_huber_identity_inside(self):
        assert rho_prime(SKH, 1.0) == 1.0

    def test_biweight_zero_outside(self):
        assert rho_prime(BI, 4.0) == 0.0

    def test_biweight_half_k(self):
        # symbolic oracle: z (1 - (z/k)^2)^2 at z = k/2 is 0.28125 k
        assert rho_prime(BI, 3.420 / 2) == pytest.approx(0.961875, abs=1e-14)

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_odd(self, spec):
        z = np.linspace(0.1, 10, 100)
        assert np.allclose(rho_prime(spec, z), -rho_prime(spec, -z))

    @pytest.mark.parametrize("spec", ALL_SPECS)
    def test_matches_finite_difference(self, spec):
        # centered differences away from the kinks
        rng = np.random.default_rng(7)
        breaks = np.array((0.0,) + spec.support_breaks())
        k_max = breaks[-1]
        pts = rng.uniform(-2 * k_max, 2 * k_max, 300)
        pts = pts[np.min(np.abs(pts[:, None] - breaks[None, :]), axis=1) > 1e-3]
        pts = pts[np.min(np.abs(-pts[:, None] - breaks[None, :]), axis=1) > 1e-3]
        assert len(pts) >= 100
        h = 1e-6
        fd = (rho_eval(spec, pts + h) - rho_eval(spec, pts - h)) / (2 * h)
        assert np.max(np.abs(fd - rho_prime(spec, pts))) < 1e-6


class TestIrlsWeight:
    def test_skipped_huber_inside(self):
        assert irls_weight(SKH, 0.5) == 1.0

    def test_biweight_limit_at_zero(self):
        assert irls_weight(BI, 0.0) == 1.0
        assert irls_weight(BI, 1e-12) == pytest.approx(1.0, abs=1e-9)

    def test_biweight_redescended(self):
        assert irls_weight(BI, 4.0) == 0.0

    @given(st.floats(-50, 50))
    @settings(max_examples=200, deadline=None)
    def test_within_unit_interval(self, z):
        for spec in (BI, SKH):
            w = irls_weight(spec, z)
            assert 0.0 <= w <= 1.0


class TestHardRejection:
    def test_below_cutoff(self):
        assert hard_rejection_weight(2.9, 3.0) == 1.0

    def test_above_cutoff(self):
        assert hard_rejection_weight(3.1, 3.0) == 0.0

    def test_zero_residual(self):
        assert hard_rejection_weight(0.0, 0.7) == 1.0

    def test_rejects_negative_input(self):
        with pytest.raises(ValueError):
            hard_rejection_weight(-1.0, 3.0)


class TestExpectedRhoNormal:
    def test_biweight_paper_constant(self):
        # independent 40-digit quadrature oracle: delta(3.420) = 0.389998728...
        assert expected_rho_normal(BI) == pytest.approx(0.38999872858028625,
                                                        abs=1e-10)
        assert BI.delta / BI.rho_sup == pytest.approx(0.20, abs=0.005)

    def test_skipped_huber_paper_constant(self):
        assert expected_rho_normal(SKH) == pytest.approx(0.47390376479081503,
                                                         abs=1e-10)
        assert SKH.delta / SKH.rho_sup == pytest.approx(0.20, abs=0.005)

    def test_skipped_huber_large_k_limit(self):
        # rho -> z^2/2, so delta -> 1/2
        spec = skipped_huber(40.0)
        assert spec.delta == pytest.approx(0.5, abs=1e-10)


class TestTuning:
    def test_biweight_bdp_20(self):
        spec = tune_for_bdp("biweight", 0.20)
        assert 3.415 <= spec.constants[0] <= 3.425

    def test_skipped_huber_bdp_20(self):
        spec = tune_for_bdp("skipped_huber", 0.20)
        assert 2.172 <= spec.constants[0] <= 2.182

    def test_biweight_bdp_50(self):
        # widely tabulated 50%-bdp constant, re-derived by bisection against
        # the quadrature oracle: 1.5476449809
        spec = tune_for_bdp("biweight", 0.50)
        assert spec.constants[0] == pytest.approx(1.5476449809, abs=1e-4)

    @pytest.mark.parametrize("kind,bdp", [("biweight", 0.2),
                                          ("biweight", 0.5),
                                          ("skipped_huber", 0.35),
                                          ("lqq", 0.5)])
    def test_bdp_round_trip(self, kind, bdp):
        spec = tune_for_bdp(kind, bdp)
        assert expected_rho_normal(spec) / spec.rho_sup == \
            pytest.approx(bdp, abs=1e-6)

    def test_biweight_efficiency_95(self):
        # quadrature + bisection oracle: the tabulated constant 4.685
        spec = tune_for_efficiency("biweight", 0.95)
        assert spec.constants[0] == pytest.approx(4.685064948, abs=1e-3)

    def test_efficiency_monotone_in_k(self):
        e1 = asymptotic_efficiency(biweight(4.0))
        e2 = asymptotic_efficiency(biweight(6.0))
        e3 = asymptotic_efficiency(biweight(12.0))
        assert e1 < e2 < e3 < 1.0

    def test_lqq_joint_calibration(self):
        spec = tune_for_efficiency("lqq", 0.95)
        assert asymptotic_efficiency(spec) == pytest.approx(0.95, abs=1e-4)
        chi = tune_for_bdp("lqq", 0.5)
        assert chi.breakdown_point == pytest.approx(0.5, abs=1e-6)

    def test_infeasible_targets_rejected(self):
        with pytest.raises(ValueError):
            tune_for_bdp("biweight", 0.7)
        with pytest.raises(ValueError):
            tune_for_efficiency("biweight", 1.5)
        with pytest.raises(CalibrationError):
            # needs k far beyond the search interval
            tune_for_bdp("biweight", 1e-4)


class TestRhoSpecInvariants:
    def test_sup_formulas(self):
        assert BI.rho_sup == pytest.approx(3.420 ** 2 / 6)
        assert SKH.rho_sup == pytest.approx(2.177 ** 2 / 2)

    def test_delta_between_zero_and_sup(self):
        for spec in ALL_SPECS:
            assert 0 < spec.delta < spec.rho_sup
            assert 0 < spec.breakdown_point < 1

    def test_rejects_bad_constants(self):
        with pytest.raises(ValueError):
            RhoSpec("biweight", (-1.0,), 0.1, 0.5)
        with pytest.raises(ValueError):
            RhoSpec("nope", (1.0,), 0.1, 0.5)
        with pytest.raises(ValueError):
            RhoSpec("biweight", (3.0,), 2.0, 1.5)
