"""Continuum model of a single NOMA cell.

Users are a uniform density ``rho`` over the annulus ``R_0 <= r <= R_c``
around the base station, the pathloss is ``K r^-eta`` and every user must
reach the same linear SINR target ``gamma_star``. All powers are in watts and
all SINRs are linear; decibel units only appear in the conversion helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import DEFAULT_TOL, DomainError, Tolerance, integrate, lower_incomplete_gamma


class InfeasibleError(ValueError):
    """No finite transmit power meets the SINR target without SIC."""

    def __init__(self, message: str, critical_density: float, critical_gamma: float):
        self.critical_density = critical_density
        self.critical_gamma = critical_gamma
        super().__init__(message)


class UnsupportedFormError(ValueError):
    """Closed form requested outside the parameter range it was derived for."""


@dataclass(frozen=True)
class CellParams:
    """Physical description of one cell.

    Attributes:
        R_c: cell radius, m.
        R_0: minimum BS-user distance, m.
        eta: pathloss exponent.
        K: pathloss gain at 1 m.
        N_th: thermal noise power, W.
        rho: user density, users/m^2.
        gamma_star: SINR target (linear).
    """

    R_c: float
    eta: float
    K: float
    N_th: float
    rho: float
    gamma_star: float
    R_0: float = 0.0

    def __post_init__(self):
        problems = []
        if not 0 <= self.R_0 < self.R_c:
            problems.append(f"need 0 <= R_0 < R_c, got R_0={self.R_0}, R_c={self.R_c}")
        if not self.eta >= 2:
            problems.append(f"eta must be >= 2, got {self.eta}")
        if not self.K > 0:
            problems.append(f"K must be > 0, got {self.K}")
        if not self.N_th > 0:
            problems.append(f"N_th must be > 0, got {self.N_th}")
        if not self.rho >= 0:
            problems.append(f"rho must be >= 0, got {self.rho}")
        if not self.gamma_star > 0:
            problems.append(f"gamma_star must be > 0, got {self.gamma_star}")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def area(self) -> float:
        return math.pi * (self.R_c**2 - self.R_0**2)

    @property
    def users_per_cell(self) -> float:
        return self.rho * self.area


@dataclass(frozen=True)
class Coefficients:
    zeta: float
    a: float
    b: float
    beta: float
    beta2: float
    c: float


@dataclass(frozen=True)
class LinkQoS:
    sinr: float
    se: float
    bandwidth: float
    throughput: float

    @classmethod
    def from_sinr(cls, sinr: float, bandwidth: float) -> LinkQoS:
        se = spectral_efficiency(sinr)
        return cls(sinr=sinr, se=se, bandwidth=bandwidth, throughput=bandwidth * se)


def zeta_of(gamma_star: float) -> float:
    return (gamma_star + 1.0) / gamma_star


def derive_coefficients(p: CellParams) -> Coefficients:
    zeta = zeta_of(p.gamma_star)
    beta2 = math.pi * p.rho * p.R_c**2
    return Coefficients(
        zeta=zeta,
        a=2.0 * math.pi * p.rho / zeta,
        b=p.N_th * p.eta / (p.K * zeta),
        beta=beta2 / zeta,
        beta2=beta2,
        c=p.N_th / p.K,
    )


def per_user_power(p: CellParams, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Transmit power towards a user at distance ``r`` under SIC.

    Solution of ``zeta P'(r) = 2 pi rho r P(r) + (N_th/K) eta r^(eta-1)``
    with ``P(R_0) = 0``::

        P(r) = b exp(a r^2 / 2) int_{R_0}^{r} s^(eta-1) exp(-a s^2 / 2) ds

    The two exponentials are merged under the integral so large ``a r^2``
    does not overflow before the product is formed.
    """
    if not p.R_0 <= r <= p.R_c:
        raise DomainError(f"r must lie in [R_0, R_c] = [{p.R_0}, {p.R_c}], got {r}")
    co = derive_coefficients(p)
    half_a = 0.5 * co.a
    eta = p.eta
    r2 = r * r

    def integrand(s: float) -> float:
        return s ** (eta - 1.0) * math.exp(half_a * (r2 - s * s))

    return co.b * integrate(integrand, p.R_0, r, tol)


def _sic_total(c: float, eta: float, R_c: float, R_0: float, beta: float, tol: Tolerance) -> float:
    # 2 pi rho int_{R_0}^{R_c} P(s) s ds. Integrating the ODE for P gives
    # c R_c^eta (eta e^beta int_{t0}^1 t^(eta-1) e^(-beta t^2) dt - 1 + t0^eta),
    # written with expm1 to avoid the cancellation at small beta. The t0^eta
    # term is the boundary value c R_0^eta, since P(R_0) = 0.
    t0 = R_0 / R_c
    scale = c * R_c**eta
    if beta == 0:
        return 0.0
    if beta > 700:
        return math.inf

    def integrand(t: float) -> float:
        return t ** (eta - 1.0) * math.expm1(beta * (1.0 - t * t))

    return scale * eta * integrate(integrand, t0, 1.0, tol)


def bs_power_sic(p: CellParams, tol: Tolerance = DEFAULT_TOL) -> float:
    """Total BS power with SIC, by quadrature of the normalised integral.

    Honours a non-zero ``R_0``. Returns ``inf`` once ``beta`` is beyond the
    range where ``exp(beta)`` is representable.
    """
    co = derive_coefficients(p)
    return _sic_total(co.c, p.eta, p.R_c, p.R_0, co.beta, tol)


def bs_power_sic_gamma_form(p: CellParams) -> float:
    """Total BS power with SIC for ``R_0 = 0`` via the lower incomplete gamma.

    Integrating by parts gives

        P = (N_th/K) R_c^eta exp(beta) beta^(-eta/2) lower_gamma((eta+2)/2, beta)

    which must agree with :func:`bs_power_sic`.
    """
    if p.R_0 != 0:
        raise UnsupportedFormError(
            f"gamma form requires R_0 = 0 (got {p.R_0}); use bs_power_sic for an annulus"
        )
    co = derive_coefficients(p)
    if co.beta == 0:
        return 0.0
    s = 0.5 * (p.eta + 2.0)
    g = lower_incomplete_gamma(s, co.beta)
    log_factor = co.beta - 0.5 * p.eta * math.log(co.beta) + math.log(g)
    if log_factor > 709:
        return math.inf
    return co.c * p.R_c**p.eta * math.exp(log_factor)


def bs_power_sic_uncorrected_gamma_form(p: CellParams) -> float:
    """An uncorrected incomplete-gamma expression for the SIC total.

    ``2 beta e^beta (Gamma(s, beta) - Gamma(s))`` with ``s = (eta+2)/2``.
    Kept only to document that it is negative and disagrees with the
    quadrature form; never use it for planning.
    """
    co = derive_coefficients(p)
    s = 0.5 * (p.eta + 2.0)
    # Gamma(s, beta) - Gamma(s) == -lower_gamma(s, beta)
    return co.c * p.R_c**p.eta * 2.0 * co.beta * math.exp(co.beta) * -lower_incomplete_gamma(s, co.beta)


def bs_power_sic_asymptotic(p: CellParams, tol: Tolerance = DEFAULT_TOL) -> float:
    """Limit of the SIC total power as the SINR target grows without bound.

    Same integral with ``zeta = 1``; ``gamma_star`` is ignored.
    """
    co = derive_coefficients(p)
    return _sic_total(co.c, p.eta, p.R_c, p.R_0, co.beta2, tol)


def no_sic_load(p: CellParams) -> float:
    """``pi rho R_c^2 (1 - (R_0/R_c)^2)``, the number of users in the cell."""
    return p.rho * p.area


def bs_power_no_sic(p: CellParams) -> float:
    """Total BS power when users do not cancel any interference.

    Raises:
        InfeasibleError: the user count reaches ``zeta``; the error carries the
            critical density and critical SINR target.
    """
    co = derive_coefficients(p)
    load = no_sic_load(p)
    denom = co.zeta - load
    if denom <= 0:
        critical_density = co.zeta / p.area
        critical_gamma = 1.0 / (load - 1.0) if load > 1 else math.inf
        raise InfeasibleError(
            f"no-SIC infeasible: {load:.6g} users per cell >= zeta = {co.zeta:.6g}; "
            f"need rho < {critical_density:.6g} users/m^2 or gamma* < {critical_gamma:.6g}",
            critical_density=critical_density,
            critical_gamma=critical_gamma,
        )
    return _no_sic_numerator(p) / denom


def _no_sic_numerator(p: CellParams) -> float:
    t0 = p.R_0 / p.R_c
    eta2 = p.eta + 2.0
    return 2.0 * math.pi * p.rho * (p.N_th / p.K) * p.R_c**eta2 * (1.0 - t0**eta2) / eta2


def bs_power_no_sic_limit(p: CellParams) -> float:
    """No-SIC power as the SINR target grows without bound (``zeta -> 1``).

    Finite only while fewer than one user occupies the cell; ``inf`` otherwise.
    """
    denom = 1.0 - no_sic_load(p)
    if denom <= 0:
        return math.inf
    return _no_sic_numerator(p) / denom


def spectral_efficiency(sinr: float) -> float:
    if not sinr > -1:
        raise DomainError(f"sinr must be > -1, got {sinr}")
    return math.log2(1.0 + sinr)


def throughput(sinr: float, W: float) -> float:
    if not W > 0:
        raise DomainError(f"bandwidth must be > 0, got {W}")
    return W * spectral_efficiency(sinr)


def sinr_for_se(se: float) -> float:
    if not se >= 0:
        raise DomainError(f"spectral efficiency must be >= 0, got {se}")
    return math.expm1(se * math.log(2.0))


def watts_to_dbm(P: float) -> float:
    if not P > 0:
        raise DomainError(f"power must be > 0 for a dBm value, got {P}")
    return 10.0 * math.log10(P * 1000.0)


def dbm_to_watts(x: float) -> float:
    return 10.0 ** (x / 10.0) / 1000.0


def density_from_users_per_cell(n: float, R_c: float, R_0: float = 0.0) -> float:
    if n < 0:
        raise DomainError(f"user count must be >= 0, got {n}")
    if not 0 <= R_0 < R_c:
        raise DomainError(f"need 0 <= R_0 < R_c, got R_0={R_0}, R_c={R_c}")
    return n / (math.pi * (R_c**2 - R_0**2))
