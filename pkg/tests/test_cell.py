import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nomacell import cell
from nomacell.cell import CellParams, InfeasibleError, UnsupportedFormError
from nomacell.numerics import DomainError, Tolerance, integrate

K, ETA = 2.66e-4, 3.57
N_TH = 5.857928548862453e-13


def params(**kw):
    base = dict(R_c=50.0, eta=ETA, K=K, N_th=N_TH, rho=cell.density_from_users_per_cell(8, 50.0), gamma_star=31.0)
    base.update(kw)
    return CellParams(**base)


def test_cellparams_invariants():
    with pytest.raises(ValueError, match="R_0"):
        params(R_0=50.0)
    with pytest.raises(ValueError, match="eta"):
        params(eta=1.9)
    with pytest.raises(ValueError, match="K"):
        params(K=0.0)
    with pytest.raises(ValueError, match="N_th"):
        params(N_th=-1.0)
    with pytest.raises(ValueError, match="rho"):
        params(rho=-1e-3)
    with pytest.raises(ValueError, match="gamma_star"):
        params(gamma_star=0.0)


def test_coefficients_examples():
    assert cell.derive_coefficients(params(gamma_star=1.0)).zeta == 2.0
    assert cell.derive_coefficients(params(gamma_star=31.0)).zeta == pytest.approx(32 / 31, rel=1e-15)
    co = cell.derive_coefficients(params())
    assert co.beta == pytest.approx(7.75, rel=1e-14)
    assert co.beta2 == pytest.approx(8.0, rel=1e-14)
    assert co.beta == pytest.approx(co.beta2 / co.zeta, rel=1e-15)
    assert co.a == pytest.approx(2 * math.pi * params().rho / co.zeta)
    assert co.b == pytest.approx(N_TH * ETA / (K * co.zeta))
    assert co.c == pytest.approx(N_TH / K)


@given(g=st.floats(1e-6, 1e9))
def test_zeta_above_one(g):
    assert cell.derive_coefficients(params(gamma_star=g)).zeta > 1


def test_per_user_power_zero_at_inner_radius():
    assert cell.per_user_power(params(), 0.0) == 0.0
    assert cell.per_user_power(params(R_0=5.0), 5.0) == 0.0


def test_per_user_power_domain():
    with pytest.raises(DomainError):
        cell.per_user_power(params(), 50.1)
    with pytest.raises(DomainError):
        cell.per_user_power(params(R_0=5.0), 4.0)


@pytest.mark.parametrize("R_0", [0.0, 7.0])
@pytest.mark.parametrize("r", [10.0, 25.0, 50.0])
def test_per_user_power_eta2_closed_form(R_0, r):
    p = params(eta=2.0, R_0=R_0)
    co = cell.derive_coefficients(p)
    # eta = 2 integrand s e^{-a s^2/2} has an elementary antiderivative
    expected = co.b / co.a * math.expm1(co.a * (r * r - R_0 * R_0) / 2.0)
    assert cell.per_user_power(p, r) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("R_0", [0.0, 3.0])
def test_per_user_power_without_density(R_0):
    p = params(rho=0.0, R_0=R_0)
    co = cell.derive_coefficients(p)
    r = 40.0
    got = cell.per_user_power(p, r)
    assert got == pytest.approx(co.c / co.zeta * (r**ETA - R_0**ETA), rel=1e-10)


def test_isolated_continuum_user_sinr():
    # In the continuum the user's own power sits inside the cumulative sum, so
    # with no other users the noise-limited SINR is gamma*/(1+gamma*).
    p = params(rho=0.0)
    r = 30.0
    power = cell.per_user_power(p, r)
    sinr = power * K * r**-ETA / (0 * K * r**-ETA + N_TH)
    assert sinr == pytest.approx(p.gamma_star / (1 + p.gamma_star), rel=1e-10)


def test_per_user_power_increasing():
    p = params()
    values = [cell.per_user_power(p, r) for r in [0.5 * k for k in range(1, 101)]]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_bs_power_sic_no_users():
    assert cell.bs_power_sic(params(rho=0.0)) == 0.0


@pytest.mark.parametrize("R_0", [0.0, 2.0, 20.0])
@pytest.mark.parametrize("g", [0.05, 1.0, 31.0, 1e4])
def test_bs_power_sic_matches_per_user_identity(R_0, g):
    p = params(R_0=R_0, gamma_star=g)
    co = cell.derive_coefficients(p)
    # the boundary term c R_0^eta appears because P(R_0) = 0
    expected = co.zeta * cell.per_user_power(p, p.R_c) - co.c * p.R_c**ETA + co.c * R_0**ETA
    assert cell.bs_power_sic(p) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("R_0", [2.0, 20.0, 45.0])
def test_bs_power_sic_annulus_direct_integral(R_0):
    p = params(R_0=R_0, gamma_star=0.5)
    tight = Tolerance(rel=1e-12, abs=0.0, max_iter=200)
    direct = 2 * math.pi * p.rho * integrate(lambda s: cell.per_user_power(p, s, tight) * s, R_0, 50.0, tight)
    assert cell.bs_power_sic(p) == pytest.approx(direct, rel=1e-9)
    assert cell.bs_power_sic(p) > 0


def test_bs_power_sic_positive():
    for n in (0.01, 1.0, 8.0, 50.0):
        assert cell.bs_power_sic(params(rho=cell.density_from_users_per_cell(n, 50.0))) > 0


def test_bs_power_sic_calibration_anchor():
    # 8 users over 50 m at SE 5 needs 24 dBm once the noise is calibrated
    assert cell.watts_to_dbm(cell.bs_power_sic(params())) == pytest.approx(24.0, abs=0.01)


@pytest.mark.parametrize("eta", [2.0, 3.0, 3.57, 4.0])
@pytest.mark.parametrize("beta", [0.1, 1.0, 7.75, 20.0])
def test_gamma_form_matches_quadrature(eta, beta):
    zeta = 32 / 31
    p = params(eta=eta, rho=beta * zeta / (math.pi * 50.0**2))
    assert cell.derive_coefficients(p).beta == pytest.approx(beta, rel=1e-14)
    assert cell.bs_power_sic_gamma_form(p) == pytest.approx(cell.bs_power_sic(p), rel=1e-8)


@pytest.mark.parametrize("beta", [0.1, 1.0, 7.75, 20.0])
def test_gamma_form_eta2_analytic(beta):
    zeta = 32 / 31
    p = params(eta=2.0, rho=beta * zeta / (math.pi * 50.0**2))
    c = N_TH / K
    expected = c * 50.0**2 * (math.expm1(beta) - beta) / beta
    assert cell.bs_power_sic_gamma_form(p) == pytest.approx(expected, rel=1e-12)
    assert cell.bs_power_sic(p) == pytest.approx(expected, rel=1e-9)


def test_gamma_form_limits_and_errors():
    assert cell.bs_power_sic_gamma_form(params(rho=0.0)) == 0.0
    small = params(rho=1e-15)
    beta = cell.derive_coefficients(small).beta
    # leading order as beta -> 0: (N_th/K) R_c^eta * 2 beta / (eta + 2)
    expected = N_TH / K * 50.0**ETA * 2 * beta / (ETA + 2)
    assert cell.bs_power_sic_gamma_form(small) == pytest.approx(expected, rel=1e-9)
    assert cell.bs_power_sic(small) == pytest.approx(expected, rel=1e-9)
    with pytest.raises(UnsupportedFormError):
        cell.bs_power_sic_gamma_form(params(R_0=1.0))


def test_uncorrected_gamma_form_is_negative():
    p = params()
    assert cell.bs_power_sic_uncorrected_gamma_form(p) < 0 < cell.bs_power_sic_gamma_form(p)


def test_asymptote_no_users():
    assert cell.bs_power_sic_asymptotic(params(rho=0.0)) == 0.0


def test_asymptote_is_limit_from_below():
    limit = cell.bs_power_sic_asymptotic(params())
    values = [cell.bs_power_sic(params(gamma_star=g)) for g in (10.0, 1e2, 1e4, 1e6)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert all(v < limit for v in values)
    assert values[-1] == pytest.approx(limit, rel=1e-5)


def test_asymptote_uses_unscaled_beta():
    p = params()
    assert cell.derive_coefficients(p).beta2 == pytest.approx(8.0)
    same = params(gamma_star=1e300)
    assert cell.bs_power_sic_asymptotic(p) == pytest.approx(cell.bs_power_sic(same), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    n=st.floats(0.1, 30),
    g=st.floats(1e-3, 1e6),
    eta=st.floats(2.0, 5.0),
    R_c=st.floats(5.0, 500.0),
)
def test_asymptote_upper_bounds_sic(n, g, eta, R_c):
    p = params(R_c=R_c, eta=eta, gamma_star=g, rho=cell.density_from_users_per_cell(n, R_c))
    assert cell.bs_power_sic(p) <= cell.bs_power_sic_asymptotic(p) * (1 + 1e-12)


@pytest.mark.parametrize(
    "field, values",
    [
        ("rho", [1e-4, 5e-4, 1e-3, 2e-3, 4e-3]),
        ("R_c", [20.0, 35.0, 50.0, 70.0, 100.0]),
        ("gamma_star", [0.1, 1.0, 3.0, 31.0, 1000.0]),
        ("N_th", [1e-14, 1e-13, 1e-12, 1e-11]),
    ],
)
def test_sic_power_monotone(field, values):
    powers = [cell.bs_power_sic(replace(params(), **{field: v})) for v in values]
    assert all(b > a for a, b in zip(powers, powers[1:]))


@pytest.mark.parametrize("alpha", [1e-3, 0.5, 7.0, 1e4])
def test_unit_coherence(alpha):
    p = params(gamma_star=0.05, rho=cell.density_from_users_per_cell(5, 50.0))
    q = replace(p, K=alpha * p.K, N_th=alpha * p.N_th)
    for fn in (cell.bs_power_sic, cell.bs_power_sic_gamma_form, cell.bs_power_sic_asymptotic, cell.bs_power_no_sic):
        assert fn(q) == pytest.approx(fn(p), rel=1e-12)
    assert cell.per_user_power(q, 33.0) == pytest.approx(cell.per_user_power(p, 33.0), rel=1e-12)


def test_no_sic_zero_density():
    assert cell.bs_power_no_sic(params(rho=0.0)) == 0.0


def test_no_sic_simplified_form():
    # with R_0 = 0: 2 (N_th/K) R_c^eta / (eta+2) / (zeta / (pi rho R_c^2) - 1)
    p = params(gamma_star=0.05, rho=cell.density_from_users_per_cell(10, 50.0))
    co = cell.derive_coefficients(p)
    expected = 2 * co.c * 50.0**ETA / (ETA + 2) / (co.zeta / (math.pi * p.rho * 50.0**2) - 1)
    assert cell.bs_power_no_sic(p) == pytest.approx(expected, rel=1e-13)


def test_no_sic_annulus():
    p = params(R_0=10.0, gamma_star=0.05, rho=1e-3)
    t0 = 10.0 / 50.0
    c = N_TH / K
    zeta = 21.0
    num = 2 * math.pi * 1e-3 * c * 50.0 ** (ETA + 2) * (1 - t0 ** (ETA + 2)) / (ETA + 2)
    den = zeta - math.pi * 1e-3 * 50.0**2 * (1 - t0**2)
    assert cell.bs_power_no_sic(p) == pytest.approx(num / den, rel=1e-13)


def test_no_sic_infeasible_reports_critical_values():
    p = params()  # 8 users, zeta ~ 1.032
    with pytest.raises(InfeasibleError) as info:
        cell.bs_power_no_sic(p)
    err = info.value
    assert err.critical_density == pytest.approx((32 / 31) / (math.pi * 2500))
    assert err.critical_gamma == pytest.approx(1 / 7)


def test_no_sic_diverges_at_wall():
    g = 0.1  # zeta = 11
    wall = 11.0 / (math.pi * 2500)
    fractions = [0.5, 0.9, 0.99, 0.999, 0.9999]
    powers = [cell.bs_power_no_sic(params(gamma_star=g, rho=f * wall)) for f in fractions]
    assert all(b > a for a, b in zip(powers, powers[1:]))
    assert powers[-1] > 1e3 * powers[0]
    with pytest.raises(InfeasibleError):
        cell.bs_power_no_sic(params(gamma_star=g, rho=wall))
    with pytest.raises(InfeasibleError):
        cell.bs_power_no_sic(params(gamma_star=g, rho=1.01 * wall))


def test_se_and_throughput():
    assert cell.spectral_efficiency(1.0) == 1.0
    assert cell.sinr_for_se(5.0) == pytest.approx(31.0, rel=1e-15)
    assert cell.sinr_for_se(15.0) == pytest.approx(32767.0, rel=1e-15)
    assert cell.throughput(31.0, 10e6) == pytest.approx(50e6, rel=1e-15)
    qos = cell.LinkQoS.from_sinr(31.0, 10e6)
    assert qos.se == pytest.approx(5.0) and qos.throughput == pytest.approx(50e6)
    with pytest.raises(DomainError):
        cell.spectral_efficiency(-1.0)
    with pytest.raises(DomainError):
        cell.throughput(1.0, 0.0)


@given(se=st.floats(0, 60))
def test_se_inversion(se):
    assert cell.spectral_efficiency(cell.sinr_for_se(se)) == pytest.approx(se, rel=1e-12, abs=1e-14)


def test_unit_conversions():
    assert cell.watts_to_dbm(1.0) == 30.0
    assert cell.dbm_to_watts(24.0) == pytest.approx(0.2512, rel=1e-3)
    assert cell.density_from_users_per_cell(8, 50.0, 0.0) == pytest.approx(1.0186e-3, rel=1e-4)
    assert cell.density_from_users_per_cell(8, 50.0, 10.0) == pytest.approx(8 / (math.pi * 2400))
    with pytest.raises(DomainError):
        cell.watts_to_dbm(0.0)
    with pytest.raises(DomainError):
        cell.density_from_users_per_cell(-1, 50.0)


@given(x=st.floats(-150, 80))
def test_dbm_round_trip(x):
    assert cell.watts_to_dbm(cell.dbm_to_watts(x)) == pytest.approx(x, abs=1e-10)
