"""Analytic outage and rate evaluators.

Checked against independent midpoint-grid oracles, fixed-grid Simpson forms
of the ergodic-rate threshold integral, the Monte Carlo engine, and their
own dual evaluation paths (series vs pre-series integral).
"""

import math

import numpy as np
import pytest

import oracles
from fdcell import analytic as an
from fdcell import montecarlo as mc
from fdcell.errors import DomainError
from fdcell.model import HdCondition, ScenarioConfig
from fdcell.specfun import EvalPath, FLAG_NONMONOTONE

DEFAULTS = ScenarioConfig()
IL = ScenarioConfig(noise=0.0)                    # interference-limited, stock cell
IL_A4 = ScenarioConfig(noise=0.0, alpha=4.0)
SMALL_R = math.sqrt(2.0 / (1e-3 * math.pi))       # lam*pi*R^2 = 2: series-friendly
IL_SMALL = ScenarioConfig(noise=0.0, r_cell=SMALL_R, d_pair=5.0)


def ul_oracle(z, s, **kw):
    return oracles.ul_cdf_grid(z, s.lambda_d, s.r_cell, s.d_pair, s.alpha,
                               s.p_ap, s.p_ul, s.sigma_li, s.noise, **kw)


def dl_oracle(z, s, **kw):
    return oracles.dl_cdf_grid(z, s.lambda_d, s.r_cell, s.d_pair, s.alpha,
                               s.p_ap, s.p_ul, s.noise, **kw)


# ---------------------------------------------------------------------------
# parameter bundles
# ---------------------------------------------------------------------------

class TestAlpha2SeriesParams:
    def test_hand_computed_point(self):
        # M = p_ul / (p_ap * z * sigma) = 1 / (2 * 0.1) = 5 at z = 2
        s = ScenarioConfig(noise=0.0, d_pair=3.0)
        p = an.alpha2_series_params(2.0, s)
        assert math.isclose(p.b_param, 5.0 - 9.0, rel_tol=1e-12)
        assert math.isclose(p.c_param, (5.0 + 9.0) ** 2, rel_tol=1e-12)
        r2 = s.r_cell ** 2
        direct = (math.sqrt(r2 * r2 + 2.0 * p.b_param * r2 + p.c_param)
                  - math.sqrt(p.c_param)) / r2
        assert math.isclose(p.varrho, direct, rel_tol=1e-9)

    def test_ranges_across_grid(self):
        # b < sqrt(c) always, so the substitution endpoint lives in (-1, 1];
        # it goes negative once the pair distance dominates the M scale
        for z in (1e-2, 1.0, 1e2):
            for d in (0.0, 5.0, 25.0, 150.0):
                p = an.alpha2_series_params(z, ScenarioConfig(noise=0.0, d_pair=d))
                assert p.c_param > 0.0
                assert -1.0 < p.varrho <= 1.0 + 1e-12
                # c - b^2 = 4 M d^2 must stay >= 0 for the kernel root
                assert p.c_param - p.b_param ** 2 >= -1e-9 * p.c_param

    def test_varrho_is_one_at_zero_pair_distance(self):
        p = an.alpha2_series_params(0.7, ScenarioConfig(noise=0.0, d_pair=0.0))
        assert math.isclose(p.varrho, 1.0, rel_tol=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            an.alpha2_series_params(0.0, IL)
        with pytest.raises(DomainError):
            an.alpha2_series_params(-1.0, IL)
        with pytest.raises(DomainError):
            an.alpha2_series_params(1.0, ScenarioConfig(noise=0.0, sigma_li=0.0))


class TestAsymptoticParams:
    def test_hand_computed(self):
        p = an.asymptotic_params(DEFAULTS)
        lp = 1e-3 * math.pi
        assert math.isclose(p.psi_u, 10.0 ** 2.5 * lp, rel_tol=1e-12)
        assert math.isclose(p.psi_d, 10.0 ** 2.5 * lp * lp, rel_tol=1e-12)

    def test_rejects_interference_limited(self):
        with pytest.raises(DomainError):
            an.asymptotic_params(IL)


# ---------------------------------------------------------------------------
# uplink cdfs
# ---------------------------------------------------------------------------

class TestCdfUlGeneral:
    def test_zero_threshold(self):
        assert an.cdf_ul_general(0.0, DEFAULTS).value == 0.0

    def test_huge_threshold_saturates(self):
        assert an.cdf_ul_general(1e12, DEFAULTS).value >= 0.999

    def test_matches_grid_oracle(self):
        for s in (DEFAULTS, ScenarioConfig(alpha=3.5, d_pair=60.0),
                  ScenarioConfig(noise=0.0, alpha=4.0)):
            for z in (0.1, 1.0, 10.0):
                got = an.cdf_ul_general(z, s)
                assert got.converged
                assert abs(got.value - ul_oracle(z, s)) < 2e-6

    def test_matches_montecarlo(self):
        zs = [0.1, 1.0, 10.0]
        curve = mc.estimate_cdf_curve(DEFAULTS, zs, mc.Link.UL, 200_000, 11)
        for z, est in curve:
            ana = an.cdf_ul_general(z, DEFAULTS).value
            assert abs(ana - est.mean) <= 3.0 * est.std_err + 1e-6

    def test_monotone_and_bounded(self):
        zs = np.geomspace(1e-3, 1e3, 40)
        vals = np.array([an.cdf_ul_general(z, DEFAULTS).value for z in zs])
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        assert np.all(np.diff(vals) >= -1e-9)

    def test_no_loopback_reduces_to_snr_form(self):
        # sigma_li = 0 with an untruncated-density-negligible cell: the general
        # integral must land on the closed asymptotic SNR cdf
        s = ScenarioConfig(sigma_li=0.0)
        for z in (0.3, 1.0, 5.0):
            a = an.cdf_ul_general(z, s).value
            b = an.asymptotic_cdf_ul(z, s).value
            assert abs(a - b) < 1e-8

    def test_zero_power_is_certain_outage(self):
        s = ScenarioConfig(p_ul_db=-4000.0)   # underflows to exactly zero watts
        assert s.p_ul == 0.0
        assert an.cdf_ul_general(1.0, s).value == 1.0

    def test_agrees_with_il_closed_form(self):
        for z in (0.1, 1.0, 10.0):
            a = an.cdf_ul_general(z, IL).value
            b = an.cdf_ul_alpha2_il(z, IL).value
            assert abs(a - b) < 1e-7

    def test_rejects_negative_threshold(self):
        with pytest.raises(DomainError):
            an.cdf_ul_general(-0.5, DEFAULTS)


class TestCdfUlAlpha2Il:
    def test_structural_rejects(self):
        with pytest.raises(DomainError):
            an.cdf_ul_alpha2_il(1.0, ScenarioConfig(noise=0.0, alpha=4.0))
        with pytest.raises(DomainError):
            an.cdf_ul_alpha2_il(1.0, DEFAULTS)          # noise > 0
        with pytest.raises(DomainError):
            an.cdf_ul_alpha2_il(1.0, ScenarioConfig(noise=0.0, sigma_li=0.0))
        with pytest.raises(DomainError):                 # series degenerate at d = 0
            an.cdf_ul_alpha2_il(1.0, ScenarioConfig(noise=0.0, d_pair=0.0),
                                path=EvalPath.SERIES)

    def test_zero_threshold_both_paths(self):
        assert an.cdf_ul_alpha2_il(0.0, IL).value == 0.0
        assert an.cdf_ul_alpha2_il(0.0, IL, path=EvalPath.SERIES).value == 0.0

    def test_integral_matches_grid_oracle(self):
        for z in (0.1, 1.0, 10.0):
            got = an.cdf_ul_alpha2_il(z, IL)
            assert got.converged
            assert abs(got.value - ul_oracle(z, IL)) < 2e-6

    def test_series_equals_integral_in_small_cells(self):
        # d = 150 puts the substitution endpoint below zero; still exact
        for d in (5.0, 17.0, 150.0):
            for z in (0.3, 1.0, 4.5):
                s = ScenarioConfig(noise=0.0, r_cell=SMALL_R, d_pair=d)
                ser = an.cdf_ul_alpha2_il(z, s, path=EvalPath.SERIES)
                itg = an.cdf_ul_alpha2_il(z, s, path=EvalPath.INTEGRAL)
                assert ser.flag is None and ser.path is EvalPath.SERIES
                assert abs(ser.value - itg.value) < 1e-9

    def test_series_flags_degeneracy_at_stock_density(self):
        # lam*pi*R^2 ~ 126: the hypergeometric series cancels catastrophically
        ser = an.cdf_ul_alpha2_il(1.0, IL, path=EvalPath.SERIES)
        itg = an.cdf_ul_alpha2_il(1.0, IL, path=EvalPath.INTEGRAL)
        assert ser.flag == FLAG_NONMONOTONE
        assert itg.flag is None


class TestCdfUlAlpha4IlLb:
    def test_structural_rejects(self):
        with pytest.raises(DomainError):
            an.cdf_ul_alpha4_il_lb(1.0, IL)              # alpha = 2 scenario
        with pytest.raises(DomainError):
            an.cdf_ul_alpha4_il_lb(1.0, ScenarioConfig(alpha=4.0))   # noise > 0

    def test_exact_at_zero_pair_distance(self):
        s = ScenarioConfig(noise=0.0, alpha=4.0, d_pair=0.0)
        for z in (0.3, 1.0, 10.0):
            lb = an.cdf_ul_alpha4_il_lb(z, s).value
            full = an.cdf_ul_general(z, s).value
            assert abs(lb - full) < 1e-7

    def test_lower_bounds_montecarlo(self):
        zs = [0.3, 1.0, 3.0, 10.0]
        curve = mc.estimate_cdf_curve(IL_A4, zs, mc.Link.UL, 150_000, 23)
        for z, est in curve:
            lb = an.cdf_ul_alpha4_il_lb(z, IL_A4).value
            assert lb <= est.mean + 3.0 * est.std_err

    def test_series_equals_integral_in_small_cells(self):
        s = ScenarioConfig(noise=0.0, alpha=4.0, r_cell=SMALL_R, d_pair=5.0)
        for z in (0.3, 1.0, 10.0):
            ser = an.cdf_ul_alpha4_il_lb(z, s, path=EvalPath.SERIES)
            itg = an.cdf_ul_alpha4_il_lb(z, s, path=EvalPath.INTEGRAL)
            assert ser.flag is None
            assert abs(ser.value - itg.value) < 1e-8


# ---------------------------------------------------------------------------
# downlink cdfs
# ---------------------------------------------------------------------------

class TestCdfDlGeneral:
    def test_zero_threshold(self):
        assert an.cdf_dl_general(0.0, DEFAULTS).value == 0.0

    def test_matches_grid_oracle(self):
        for s in (DEFAULTS, ScenarioConfig(alpha=4.0, d_pair=60.0),
                  ScenarioConfig(noise=0.0, alpha=3.0)):
            for z in (0.1, 1.0, 10.0):
                got = an.cdf_dl_general(z, s)
                assert got.converged
                assert abs(got.value - dl_oracle(z, s)) < 1e-7

    def test_matches_montecarlo(self):
        zs = [0.1, 1.0, 10.0]
        curve = mc.estimate_cdf_curve(DEFAULTS, zs, mc.Link.DL, 200_000, 17)
        for z, est in curve:
            ana = an.cdf_dl_general(z, DEFAULTS).value
            assert abs(ana - est.mean) <= 3.0 * est.std_err + 1e-6

    def test_monotone_and_bounded(self):
        zs = np.geomspace(1e-3, 1e3, 40)
        vals = np.array([an.cdf_dl_general(z, DEFAULTS).value for z in zs])
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        assert np.all(np.diff(vals) >= -1e-9)

    def test_silent_uplink_reduces_to_snr_form(self):
        s = ScenarioConfig(p_ul_db=-4000.0)
        for z in (0.3, 1.0, 5.0):
            a = an.cdf_dl_general(z, s).value
            b = an.asymptotic_cdf_dl(z, s).value
            assert abs(a - b) < 1e-8

    def test_rejects_colocated_pair(self):
        with pytest.raises(DomainError):
            an.cdf_dl_general(1.0, ScenarioConfig(d_pair=0.0))

    def test_zero_ap_power_is_certain_outage(self):
        s = ScenarioConfig(p_ap_db=-4000.0)
        assert an.cdf_dl_general(1.0, s).value == 1.0


class TestCdfDlIl:
    def test_structural_rejects(self):
        with pytest.raises(DomainError):
            an.cdf_dl_il(1.0, DEFAULTS)                  # noise > 0
        with pytest.raises(DomainError):
            an.cdf_dl_il(1.0, ScenarioConfig(noise=0.0, d_pair=0.0))

    def test_equals_general_route(self):
        for s in (IL, ScenarioConfig(noise=0.0, alpha=4.0, d_pair=60.0)):
            for z in (0.1, 1.0, 10.0):
                a = an.cdf_dl_il(z, s).value
                b = an.cdf_dl_general(z, s).value
                assert abs(a - b) < 1e-8

    def test_series_equals_integral_in_small_cells(self):
        for alpha in (2.0, 3.0, 4.0):
            s = ScenarioConfig(noise=0.0, alpha=alpha, r_cell=SMALL_R, d_pair=5.0)
            for z in (0.3, 1.0, 10.0):
                ser = an.cdf_dl_il(z, s, path=EvalPath.SERIES)
                itg = an.cdf_dl_il(z, s, path=EvalPath.INTEGRAL)
                assert ser.flag is None
                assert abs(ser.value - itg.value) < 1e-8

    def test_silent_uplink_leaves_only_empty_mass(self):
        # p_ul = 0 and noise = 0: outage iff the cell is empty
        s = ScenarioConfig(noise=0.0, r_cell=SMALL_R, d_pair=5.0,
                           p_ul_db=-4000.0)
        mu = s.lambda_d * math.pi * s.r_cell ** 2
        for path in (EvalPath.INTEGRAL, EvalPath.SERIES):
            got = an.cdf_dl_il(7.0, s, path=path).value
            assert abs(got - math.exp(-mu)) < 1e-10


class TestOutageDispatch:
    def test_uplink_routes(self):
        res = an.outage(mc.Link.UL, IL)
        assert res.method == "cdf_ul_alpha2_il"
        assert res.estimate.value == an.cdf_ul_alpha2_il(IL.gamma_th, IL).value
        res = an.outage(mc.Link.UL, DEFAULTS)
        assert res.method == "cdf_ul_general"
        res = an.outage(mc.Link.UL, ScenarioConfig(noise=0.0, alpha=4.0))
        assert res.method == "cdf_ul_general"

    def test_downlink_routes(self):
        res = an.outage(mc.Link.DL, IL)
        assert res.method == "cdf_dl_il"
        assert res.estimate.value == an.cdf_dl_il(IL.gamma_th, IL).value
        res = an.outage(mc.Link.DL, DEFAULTS)
        assert res.method == "cdf_dl_general"

    def test_explicit_threshold_overrides_scenario(self):
        a = an.outage(mc.Link.DL, DEFAULTS, gamma_th=2.5).estimate.value
        b = an.cdf_dl_general(2.5, DEFAULTS).value
        assert a == b
        # default threshold comes from the config (0 dB -> z = 1)
        c = an.outage(mc.Link.DL, DEFAULTS).estimate.value
        assert c == an.cdf_dl_general(DEFAULTS.gamma_th, DEFAULTS).value


# ---------------------------------------------------------------------------
# ergodic rates: t-form consistency, dual paths, bounds
# ---------------------------------------------------------------------------

class TestRateConsistency:
    # The general/IL cdfs pack most of their rise within a few percent of
    # z = 0 (the loopback interferer sits at distance zero), so the rate
    # oracle must resolve that region: the log-threshold Simpson form does,
    # a uniform grid in t = log2(1+z) does not.

    def test_ul_general_matches_logform_of_grid_cdf(self):
        got = an.rate_ul_general(DEFAULTS).value
        ref = oracles.rate_from_cdf_logform(
            lambda y: ul_oracle(y, DEFAULTS, n_r=1_500, n_th=384), n=1_000)
        assert abs(got - ref) < 2e-5

    def test_dl_general_matches_logform_of_grid_cdf(self):
        got = an.rate_dl_general(DEFAULTS).value
        ref = oracles.rate_from_cdf_logform(
            lambda y: dl_oracle(y, DEFAULTS, n_r=100_000), n=3_000)
        assert abs(got - ref) < 1e-6 * max(1.0, abs(ref))

    def test_ul_il_rate_matches_logform_of_grid_cdf(self):
        got = an.rate_ul_alpha2_il(IL).value
        ref = oracles.rate_from_cdf_logform(
            lambda y: ul_oracle(y, IL, n_r=1_500, n_th=384), n=1_000)
        assert abs(got - ref) < 2e-5

    def test_dl_il_rate_matches_logform_of_grid_cdf(self):
        got = an.rate_dl_il(IL).value
        ref = oracles.rate_from_cdf_logform(
            lambda y: dl_oracle(y, IL, n_r=100_000), n=3_000)
        assert abs(got - ref) < 1e-6 * max(1.0, abs(ref))

    def test_ul_alpha4_bound_matches_its_own_cdf(self):
        got = an.rate_ul_alpha4_il_ub(IL_A4).value
        ref = oracles.rate_from_cdf_logform(
            lambda y: an.cdf_ul_alpha4_il_lb(y, IL_A4).value)
        assert abs(got - ref) < 1e-6 * max(1.0, abs(ref))

    def test_il_rates_are_scale_invariant(self):
        # noise = 0 leaves only power ratios: +30 dB on both links is a no-op
        hot = ScenarioConfig(noise=0.0, p_ap_db=55.0, p_ul_db=55.0)
        assert math.isclose(an.rate_ul_alpha2_il(IL).value,
                            an.rate_ul_alpha2_il(hot).value, rel_tol=1e-9)
        assert math.isclose(an.rate_dl_il(IL).value,
                            an.rate_dl_il(hot).value, rel_tol=1e-9)
        assert math.isclose(an.cdf_ul_alpha2_il(1.0, IL).value,
                            an.cdf_ul_alpha2_il(1.0, hot).value, rel_tol=1e-10)
        assert math.isclose(an.cdf_dl_il(1.0, IL).value,
                            an.cdf_dl_il(1.0, hot).value, rel_tol=1e-10)

    def test_rate_series_equal_integral_in_small_cells(self):
        s4 = ScenarioConfig(noise=0.0, alpha=4.0, r_cell=SMALL_R, d_pair=5.0)
        ser = an.rate_ul_alpha4_il_ub(s4, path=EvalPath.SERIES)
        itg = an.rate_ul_alpha4_il_ub(s4, path=EvalPath.INTEGRAL)
        assert ser.flag is None
        assert math.isclose(ser.value, itg.value, rel_tol=1e-6)
        for alpha in (2.0, 4.0):
            s = ScenarioConfig(noise=0.0, alpha=alpha, r_cell=SMALL_R, d_pair=5.0)
            ser = an.rate_dl_il(s, path=EvalPath.SERIES)
            itg = an.rate_dl_il(s, path=EvalPath.INTEGRAL)
            assert ser.flag is None
            assert math.isclose(ser.value, itg.value, rel_tol=1e-6)

    def test_ul_il_rate_general_route_agrees(self):
        got = an.rate_ul_alpha2_il(IL).value
        gen = an.rate_ul_general(IL, tol=1e-6).value
        assert math.isclose(got, gen, rel_tol=1e-4)

    def test_dl_il_rate_general_route_agrees(self):
        got = an.rate_dl_il(IL).value
        gen = an.rate_dl_general(IL, tol=1e-6).value
        assert math.isclose(got, gen, rel_tol=1e-4)

    def test_ul_alpha4_bound_is_exact_at_zero_distance(self):
        s = ScenarioConfig(noise=0.0, alpha=4.0, d_pair=0.0)
        ub = an.rate_ul_alpha4_il_ub(s).value
        gen = an.rate_ul_general(s, tol=1e-6).value
        assert math.isclose(ub, gen, rel_tol=1e-4)

    def test_ul_alpha4_bound_upper_bounds_montecarlo(self):
        ub = an.rate_ul_alpha4_il_ub(IL_A4).value
        _, ul, _ = mc.estimate_rates(IL_A4, mc.RateMode.FD, 150_000, 31)
        assert ub >= ul.mean - 3.0 * ul.std_err

    def test_divergent_rates_are_rejected(self):
        with pytest.raises(DomainError):
            an.rate_ul_general(ScenarioConfig(noise=0.0, sigma_li=0.0))
        with pytest.raises(DomainError):
            an.rate_dl_general(ScenarioConfig(noise=0.0, p_ul_db=-4000.0))


# ---------------------------------------------------------------------------
# large-cell asymptotics
# ---------------------------------------------------------------------------

class TestAsymptotics:
    def test_ul_rate_matches_threshold_integral_at_defaults(self):
        # psi_u ~ 0.9935: two lines below the removable point, closed Ei form
        got = an.asymptotic_rate_ul(DEFAULTS).value
        ref = oracles.rate_from_cdf_logform(
            lambda y: an.asymptotic_cdf_ul(y, DEFAULTS).value)
        assert abs(got - ref) < 1e-4 * max(1.0, abs(ref))

    def test_ul_rate_matches_threshold_integral_above_unity_budget(self):
        s = ScenarioConfig(p_ul_db=30.0)   # psi_u ~ 3.14
        got = an.asymptotic_rate_ul(s).value
        ref = oracles.rate_from_cdf_logform(
            lambda y: an.asymptotic_cdf_ul(y, s).value)
        assert abs(got - ref) < 1e-4 * max(1.0, abs(ref))

    def test_ul_rate_removable_point_fallback(self):
        # p_ul = 1/(lam*pi) makes psi_u = 1 to machine precision
        s = ScenarioConfig(p_ul_db=10.0 * math.log10(1.0 / (1e-3 * math.pi)),
                           d_pair=0.0)
        assert abs(an.asymptotic_params(s).psi_u - 1.0) < 1e-12
        got = an.asymptotic_rate_ul(s)
        assert got.path is EvalPath.INTEGRAL       # quadrature fallback engaged
        # limit of (psi/(1-psi)) ln(1/psi) at psi -> 1 is 1
        assert abs(got.value - 1.0 / math.log(2.0)) < 1e-6

    def test_ul_rate_closed_form_at_zero_distance(self):
        s = ScenarioConfig(p_ul_db=20.0, d_pair=0.0)
        psi = an.asymptotic_params(s).psi_u
        expect = (psi / (1.0 - psi)) * math.log(1.0 / psi) / math.log(2.0)
        assert math.isclose(an.asymptotic_rate_ul(s).value, expect, rel_tol=1e-12)

    def test_ul_asymptote_matches_general_engine(self):
        # sigma_li = 0 turns the general uplink machinery into the asymptote
        s = ScenarioConfig(sigma_li=0.0)
        a = an.asymptotic_rate_ul(s).value
        b = an.rate_ul_general(s, tol=1e-6).value
        assert math.isclose(a, b, rel_tol=1e-4)

    def test_ul_cdf_matches_montecarlo(self):
        s = ScenarioConfig(sigma_li=0.0)
        zs = [0.3, 1.0, 3.0]
        curve = mc.estimate_cdf_curve(s, zs, mc.Link.UL, 200_000, 41)
        for z, est in curve:
            ana = an.asymptotic_cdf_ul(z, s).value
            assert abs(ana - est.mean) <= 3.0 * est.std_err + 1e-6

    def test_dl_rate_matches_threshold_integral_both_exponents(self):
        # alpha = 4 puts the whole SINR scale at psi_d ~ 3e-3: the survival
        # collapses within z < 0.01 and only the log-threshold grid sees it
        for alpha in (2.0, 4.0):
            s = ScenarioConfig(alpha=alpha)
            got = an.asymptotic_rate_dl(s).value
            ref = oracles.rate_from_cdf_logform(
                lambda y: an.asymptotic_cdf_dl(y, s).value)
            assert abs(got - ref) < 1e-4 * max(1.0, abs(ref))

    def test_dl_rate_removable_point_fallback(self):
        s = ScenarioConfig(p_ap_db=10.0 * math.log10(1.0 / (1e-3 * math.pi)))
        got = an.asymptotic_rate_dl(s)
        assert got.path is EvalPath.INTEGRAL
        assert abs(got.value - 1.0 / math.log(2.0)) < 1e-6

    def test_dl_cdf_matches_montecarlo(self):
        s = ScenarioConfig(p_ul_db=-4000.0)   # silenced uplink interferer
        zs = [0.3, 1.0, 3.0]
        curve = mc.estimate_cdf_curve(s, zs, mc.Link.DL, 200_000, 43)
        for z, est in curve:
            ana = an.asymptotic_cdf_dl(z, s).value
            assert abs(ana - est.mean) <= 3.0 * est.std_err + 1e-6

    def test_dl_alpha4_form_is_stable_at_extremes(self):
        s = ScenarioConfig(alpha=4.0)
        lo = an.asymptotic_cdf_dl(1e-12, s).value
        hi = an.asymptotic_cdf_dl(1e12, s).value
        assert 0.0 <= lo < 1e-5
        assert 1.0 - 1e-5 < hi <= 1.0

    def test_rejects_unsupported_exponent(self):
        with pytest.raises(DomainError):
            an.asymptotic_cdf_dl(1.0, ScenarioConfig(alpha=3.0))
        with pytest.raises(DomainError):
            an.asymptotic_rate_ul(ScenarioConfig(alpha=4.0))


# ---------------------------------------------------------------------------
# operating points: FD, HD reference, gain
# ---------------------------------------------------------------------------

class TestRateFd:
    def test_matches_montecarlo_at_defaults(self):
        ana = an.rate_fd(DEFAULTS)
        dl, ul, tot = mc.estimate_rates(DEFAULTS, mc.RateMode.FD, 200_000, 7)
        assert abs(ana.dl.value - dl.mean) <= 3.0 * dl.std_err
        assert abs(ana.ul.value - ul.mean) <= 3.0 * ul.std_err
        assert abs(ana.total.value - tot.mean) <= 3.0 * tot.std_err

    def test_total_is_componentwise_sum(self):
        ana = an.rate_fd(DEFAULTS)
        assert math.isclose(ana.total.value, ana.dl.value + ana.ul.value,
                            rel_tol=1e-12)

    def test_il_dispatch_uses_closed_forms(self):
        ana = an.rate_fd(IL)
        assert math.isclose(ana.ul.value, an.rate_ul_alpha2_il(IL).value,
                            rel_tol=1e-12)
        assert math.isclose(ana.dl.value, an.rate_dl_il(IL).value, rel_tol=1e-12)

    def test_zero_both_powers_is_zero_rate(self):
        s = ScenarioConfig(p_ap_db=-4000.0, p_ul_db=-4000.0)
        ana = an.rate_fd(s)
        assert ana.total.value == 0.0


class TestRateHdSemianalytic:
    def test_matches_montecarlo_rc(self):
        ana = an.rate_hd_semianalytic(DEFAULTS, HdCondition.RC)
        dl, ul, tot = mc.estimate_rates(DEFAULTS, mc.RateMode.HD_RC, 150_000, 19)
        assert abs(ana.dl.value - dl.mean) <= 3.0 * dl.std_err
        assert abs(ana.ul.value - ul.mean) <= 3.0 * ul.std_err
        assert abs(ana.total.value - tot.mean) <= 3.0 * tot.std_err

    def test_matches_montecarlo_ac(self):
        ana = an.rate_hd_semianalytic(DEFAULTS, HdCondition.AC)
        dl, ul, tot = mc.estimate_rates(DEFAULTS, mc.RateMode.HD_AC, 150_000, 29)
        assert abs(ana.dl.value - dl.mean) <= 3.0 * dl.std_err
        assert abs(ana.ul.value - ul.mean) <= 3.0 * ul.std_err
        assert abs(ana.total.value - tot.mean) <= 3.0 * tot.std_err

    def test_fading_means_match_quadrature(self):
        for c in (1e-8, 1e-3, 0.5, 1.0, 7.0, 1e3):
            got = float(an._exp_log_mean(np.array([c]))[0])
            assert math.isclose(got, oracles.exp_log_mean_quad(c),
                                rel_tol=1e-8, abs_tol=1e-14)
            got = float(an._gamma2_log_mean(np.array([c]))[0])
            assert math.isclose(got, oracles.gamma2_log_mean_quad(c),
                                rel_tol=1e-7, abs_tol=1e-14)

    def test_slot_fractions_scale_linearly_under_fixed_power(self):
        # POWER policy keeps slot powers fixed, so dl ~ delta and ul ~ 1-delta
        a = an.rate_hd_semianalytic(
            ScenarioConfig(hd_power_policy="power", delta=0.5))
        b = an.rate_hd_semianalytic(
            ScenarioConfig(hd_power_policy="power", delta=0.25))
        assert math.isclose(b.dl.value, 0.5 * a.dl.value, rel_tol=1e-8)
        assert math.isclose(b.ul.value, 1.5 * a.ul.value, rel_tol=1e-8)

    def test_unconditional_montecarlo_recovers_empty_mass(self):
        # sparse cell: MC keeps empty-cell zeros, the reference conditions
        # them away, so the two differ by exactly the non-empty probability
        s = ScenarioConfig(lambda_d=1e-5)
        nonempty = -math.expm1(-s.lambda_d * math.pi * s.r_cell ** 2)
        ana = an.rate_hd_semianalytic(s, HdCondition.RC)
        _, _, tot = mc.estimate_rates(s, mc.RateMode.HD_RC, 200_000, 37)
        assert abs(nonempty * ana.total.value - tot.mean) <= 3.0 * tot.std_err

    def test_rejects_interference_limited(self):
        with pytest.raises(DomainError):
            an.rate_hd_semianalytic(IL)


class TestGain:
    def test_consistent_with_components(self):
        g = an.gain(DEFAULTS, HdCondition.RC)
        f = an.rate_fd(DEFAULTS).total.value
        h = an.rate_hd_semianalytic(DEFAULTS, HdCondition.RC).total.value
        assert math.isclose(g.value, (f - h) / f, rel_tol=1e-12)

    def test_sign_tracks_loopback_suppression(self):
        # fixed-power baseline: full duplex wins at -20 dB residual loopback
        # and loses at +5 dB
        low = ScenarioConfig(sigma_li=1e-2, hd_power_policy="power")
        high = ScenarioConfig(sigma_li=10.0 ** 0.5, hd_power_policy="power")
        assert an.gain(low, HdCondition.AC).value > 0.0
        assert an.gain(high, HdCondition.AC).value < 0.0

    def test_matches_montecarlo(self):
        est = mc.estimate_gain(DEFAULTS, HdCondition.AC, 150_000, 6)
        g = an.gain(DEFAULTS, HdCondition.AC)
        assert abs(g.value - est.mean) <= 3.0 * est.std_err

    def test_rejects_zero_fd_rate(self):
        with pytest.raises(DomainError):
            an.gain(ScenarioConfig(p_ap_db=-4000.0, p_ul_db=-4000.0))
