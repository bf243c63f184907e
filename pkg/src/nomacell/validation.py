"""Self-checks of the model: each returns a :class:`Check` with the measured
residual next to its threshold. Used by ``nomacell validate``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, replace

import numpy as np

from . import cell, oracle, planner
from .cell import CellParams
from .numerics import Tolerance, integrate

_TIGHT = Tolerance(rel=1e-13, abs=0.0, max_iter=200)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""
    gate: bool = True

    def line(self) -> str:
        status = ("PASS" if self.passed else "FAIL") if self.gate else "INFO"
        text = f"{status}  {self.name}: measured {self.measured:.3e} (limit {self.threshold:.3e})"
        if self.detail:
            text += f"  {self.detail}"
        return text


def reference_cell(N_th: float, users_per_cell: float = 8.0, R_c: float = 50.0, se: float = 5.0) -> CellParams:
    return CellParams(
        R_c=R_c,
        eta=planner.REFERENCE_ETA,
        K=planner.REFERENCE_K,
        N_th=N_th,
        rho=cell.density_from_users_per_cell(users_per_cell, R_c),
        gamma_star=cell.sinr_for_se(se),
    )


def ode_residuals(
    p: CellParams, n_points: int = 50, power_fn: Callable[[float], float] | None = None
) -> list[float]:
    """Relative residual of ``zeta P' = 2 pi rho r P + (N_th/K) eta r^(eta-1)``.

    ``P'`` comes from central differences with step ``1e-5 R_c``, so the
    check does not reuse the quadrature that produced ``P``.
    """
    if power_fn is None:
        def power_fn(r: float) -> float:
            # P(r) does not depend on R_c; widen it so r + h stays in range
            return cell.per_user_power(replace(p, R_c=max(p.R_c, r)), r, _TIGHT)

    co = cell.derive_coefficients(p)
    h = 1e-5 * p.R_c
    out = []
    for k in range(1, n_points + 1):
        r = p.R_0 + (p.R_c - p.R_0) * k / n_points
        dp = (power_fn(r + h) - power_fn(r - h)) / (2.0 * h)
        lhs = co.zeta * dp
        rhs = 2.0 * math.pi * p.rho * r * power_fn(r) + co.c * p.eta * r ** (p.eta - 1.0)
        out.append(abs(rhs - lhs) / abs(lhs))
    return out


def integral_identity_residuals(
    p: CellParams, fractions: Iterable[float] = (0.25, 0.5, 0.75, 1.0)
) -> list[float]:
    """Relative mismatch of ``2 pi rho int_{R_0}^r P(s) s ds`` against
    ``zeta P(r) - (N_th/K) r^eta``."""
    co = cell.derive_coefficients(p)
    out = []
    for f in fractions:
        r = p.R_0 + f * (p.R_c - p.R_0)
        lhs = 2.0 * math.pi * p.rho * integrate(
            lambda s: cell.per_user_power(p, s, _TIGHT) * s, p.R_0, r, Tolerance(rel=1e-12, abs=0.0, max_iter=200)
        )
        rhs = co.zeta * cell.per_user_power(p, r, _TIGHT) - co.c * r**p.eta
        out.append(abs(lhs - rhs) / abs(rhs))
    return out


GAMMA_GRID_ETA = (2.0, 3.0, 3.57, 4.0)
GAMMA_GRID_BETA = (0.1, 1.0, 7.75, 20.0)


def params_for_beta(eta: float, beta: float, R_c: float = 50.0, K: float = planner.REFERENCE_K,
                    N_th: float = 1e-12, gamma_star: float = 31.0) -> CellParams:
    zeta = cell.zeta_of(gamma_star)
    rho = beta * zeta / (math.pi * R_c**2)
    return CellParams(R_c=R_c, eta=eta, K=K, N_th=N_th, rho=rho, gamma_star=gamma_star)


def gamma_form_residuals() -> list[tuple[float, float, float]]:
    """(eta, beta, relative gap) of the gamma form against the quadrature form."""
    out = []
    for eta in GAMMA_GRID_ETA:
        for beta in GAMMA_GRID_BETA:
            p = params_for_beta(eta, beta)
            quad = cell.bs_power_sic(p, _TIGHT)
            closed = cell.bs_power_sic_gamma_form(p)
            out.append((eta, beta, abs(closed - quad) / quad))
    return out


def no_sic_ring_gap(n: int, N_th: float, R_c: float = 50.0) -> float:
    """Relative gap of the ring-placement no-SIC oracle against the continuum total."""
    gamma = 0.5 / (n - 1)
    users = oracle.place_users_rings(n, 0.0, R_c)
    discrete = oracle.solve_no_sic_allocation(users, gamma, planner.REFERENCE_K, N_th, planner.REFERENCE_ETA)
    p = CellParams(
        R_c=R_c, eta=planner.REFERENCE_ETA, K=planner.REFERENCE_K, N_th=N_th,
        rho=cell.density_from_users_per_cell(n, R_c), gamma_star=gamma,
    )
    continuum = cell.bs_power_no_sic(p)
    return abs(discrete.total_power - continuum) / continuum


SIC_GAP_GAMMAS = (1.0, 0.3, 0.1, 0.03, 0.01)


def sic_ring_gaps(N_th: float, users_per_cell: int = 8, R_c: float = 50.0,
                  gammas: Iterable[float] = SIC_GAP_GAMMAS) -> list[float]:
    """Relative gap of the ring-placement SIC oracle against the continuum total."""
    users = oracle.place_users_rings(users_per_cell, 0.0, R_c)
    rho = cell.density_from_users_per_cell(users_per_cell, R_c)
    out = []
    for g in gammas:
        discrete = oracle.solve_sic_allocation(users, g, planner.REFERENCE_K, N_th, planner.REFERENCE_ETA)
        p = CellParams(R_c=R_c, eta=planner.REFERENCE_ETA, K=planner.REFERENCE_K, N_th=N_th, rho=rho, gamma_star=g)
        continuum = cell.bs_power_sic(p)
        out.append(abs(discrete.total_power - continuum) / continuum)
    return out


def oracle_self_consistency(instances: int = 100, max_users: int = 500, seed: int = 2024) -> tuple[float, bool]:
    """Worst relative SINR error over randomized SIC and no-SIC instances, and
    whether every SIC allocation was nondecreasing in distance."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    monotone = True
    for _ in range(instances):
        n = int(rng.integers(1, max_users + 1))
        R_c = float(rng.uniform(10.0, 500.0))
        R_0 = float(rng.uniform(0.0, 0.2)) * R_c
        eta = float(rng.uniform(2.0, 5.0))
        K = 10.0 ** float(rng.uniform(-6, -2))
        N_th = 10.0 ** float(rng.uniform(-15, -10))
        users = oracle.place_users_uniform(n, R_0, R_c, int(rng.integers(2**31)))

        g_sic = 10.0 ** float(rng.uniform(-2, 0.3))
        sic = oracle.solve_sic_allocation(users, g_sic, K, N_th, eta)
        monotone &= all(b >= a for a, b in zip(sic.powers, sic.powers[1:]))
        for s in oracle.verify_sinr(users, sic, K, N_th, eta):
            worst = max(worst, abs(s - g_sic) / g_sic)

        # feasible no-SIC target: gamma* < 1/(N-1)
        g_nosic = float(rng.uniform(0.01, 0.99)) / max(n - 1, 1)
        nosic = oracle.solve_no_sic_allocation(users, g_nosic, K, N_th, eta)
        for s in oracle.verify_sinr(users, nosic, K, N_th, eta):
            worst = max(worst, abs(s - g_nosic) / g_nosic)
    return worst, monotone


def run_all(N_th: float | None = None) -> list[Check]:
    if N_th is None:
        N_th = planner.calibrate_noise().value
    p = reference_cell(N_th)
    checks = []

    ode = max(ode_residuals(p))
    checks.append(Check("ode residual", ode < 1e-4, ode, 1e-4))

    ident = max(integral_identity_residuals(p))
    checks.append(Check("integral identity", ident < 1e-8, ident, 1e-8))

    gam = max(gap for _, _, gap in gamma_form_residuals())
    checks.append(Check("gamma form vs quadrature", gam < 1e-8, gam, 1e-8))
    uncorrected = cell.bs_power_sic_uncorrected_gamma_form(p)
    corrected = cell.bs_power_sic_gamma_form(p)
    checks.append(Check(
        "uncorrected incomplete-gamma expression", uncorrected < 0, uncorrected, 0.0,
        detail=f"uncorrected form gives {uncorrected:.6g} W, corrected form {corrected:.6g} W",
        gate=False,
    ))

    for n, limit in ((100, 0.02), (1000, 0.002)):
        gap = no_sic_ring_gap(n, N_th)
        checks.append(Check(f"no-SIC rings n={n}", gap < limit, gap, limit))

    gaps = sic_ring_gaps(N_th)
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    checks.append(Check(
        "SIC rings gap", decreasing and gaps[-1] < 0.05, gaps[-1], 0.05,
        detail="gaps " + ", ".join(f"g*={g}: {x:.4%}" for g, x in zip(SIC_GAP_GAMMAS, gaps)),
    ))

    primary = abs(planner.anchor_residual_db(planner.PRIMARY_ANCHOR, N_th))
    checks.append(Check("24 dBm anchor round trip", primary < 0.01, primary, 0.01))

    secondary = planner.anchor_residual_db(planner.SECONDARY_ANCHOR, N_th)
    q = planner.anchor_params(planner.SECONDARY_ANCHOR, planner.REFERENCE_K, planner.REFERENCE_ETA, N_th)
    radius = planner.max_coverage_radius(
        q, cell.dbm_to_watts(planner.SECONDARY_ANCHOR.power_dbm),
        users_per_cell=planner.SECONDARY_ANCHOR.users_per_cell,
    ).value
    checks.append(Check(
        "41 dBm anchor (radius assumed 50 m)", abs(secondary) <= 1.5, abs(secondary), 1.5,
        detail=(f"residual {secondary:+.2f} dB; radius not stated with this point, "
                f"41 dBm is met at R_c = {radius:.2f} m"),
        gate=False,
    ))

    rise = []
    for n in (8, 10, 12):
        for R_c in (50.0, 100.0):
            lo = cell.watts_to_dbm(cell.bs_power_sic(reference_cell(N_th, n, R_c, 5.0)))
            hi = cell.watts_to_dbm(cell.bs_power_sic(reference_cell(N_th, n, R_c, 15.0)))
            rise.append(hi - lo)
    checks.append(Check("plateau SE 5 -> 15", max(rise) < 3.0, max(rise), 3.0))

    worst, monotone = oracle_self_consistency()
    checks.append(Check(
        "oracle SINR self-consistency", worst <= 1e-10 and monotone, worst, 1e-10,
        detail="" if monotone else "SIC powers not monotone",
    ))
    return checks
