"""Planning questions answered by inverting the power formulas.

Each inversion brackets the monotone map from the unknown to total power
and hands it to :func:`nomacell.numerics.find_root`.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from . import cell
from .cell import CellParams, InfeasibleError
from .numerics import DEFAULT_TOL, Tolerance, find_root


class PowerMode(str, enum.Enum):
    SIC = "sic"
    NOSIC = "nosic"
    ASYMPTOTE = "asymptote"


class NoCoverageError(ValueError):
    """The budget cannot serve even the smallest candidate in the search range."""


# Upper limit on spectral efficiency searched before declaring it unbounded.
SE_SEARCH_LIMIT = 1000.0
_ROOT_TOL = Tolerance(rel=1e-12, abs=0.0, max_iter=200)


@dataclass(frozen=True)
class PlanAnswer:
    quantity: str
    value: float
    unit: str
    bracket: tuple[float, float]
    residual: float
    unbounded: bool = False
    note: str = ""


@dataclass(frozen=True)
class CurvePoint:
    se: float
    gamma: float
    power_w: float
    power_dbm: float
    feasible: bool = True


@dataclass(frozen=True)
class PowerCurve:
    points: tuple[CurvePoint, ...]
    params: CellParams
    mode: PowerMode


def total_power(p: CellParams, mode: PowerMode | str = PowerMode.SIC, tol: Tolerance = DEFAULT_TOL) -> float:
    """Total BS power in ``mode``; ``inf`` past the no-SIC feasibility wall."""
    mode = PowerMode(mode)
    if mode is PowerMode.SIC:
        return cell.bs_power_sic(p, tol)
    if mode is PowerMode.ASYMPTOTE:
        return cell.bs_power_sic_asymptotic(p, tol)
    try:
        return cell.bs_power_no_sic(p)
    except InfeasibleError:
        return math.inf


def _dbm_or_inf(watts: float) -> float:
    if watts == 0:
        return -math.inf
    if math.isinf(watts):
        return math.inf
    return cell.watts_to_dbm(watts)


def _expand_upper(g: Callable[[float], float], start: float, limit: float, factor: float = 2.0) -> float | None:
    """Grow ``x`` from ``start`` until ``g(x) > 0``; ``None`` if ``limit`` is passed first."""
    x = start
    while x <= limit:
        if g(x) > 0:
            return x
        x *= factor
    return None


def _solve(g: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    x = find_root(g, lo, hi, _ROOT_TOL)
    return x, abs(g(x))


def max_coverage_radius(
    p: CellParams,
    budget: float,
    mode: PowerMode | str = PowerMode.SIC,
    users_per_cell: float | None = None,
    max_radius: float = 1e6,
) -> PlanAnswer:
    """Largest cell radius served within ``budget`` watts.

    ``p.R_c`` is only a starting point for the search. With ``users_per_cell``
    set, the density is rescaled for every candidate radius; otherwise
    ``p.rho`` stays fixed.
    """
    if not budget > 0:
        raise ValueError(f"budget must be > 0, got {budget}")
    mode = PowerMode(mode)

    def params_at(radius: float) -> CellParams:
        rho = p.rho
        if users_per_cell is not None:
            rho = cell.density_from_users_per_cell(users_per_cell, radius, p.R_0)
        return replace(p, R_c=radius, rho=rho)

    def excess(radius: float) -> float:
        return total_power(params_at(radius), mode) - budget

    lo = max(p.R_0 * (1.0 + 1e-9), 1e-9 * p.R_c)
    at_lo = excess(lo)
    if math.isinf(at_lo):
        raise NoCoverageError("no-SIC target is infeasible at every radius for this user count")
    if at_lo > 0:
        raise NoCoverageError(
            f"budget {budget:.6g} W is below the power needed at the minimal radius {lo:.6g} m"
        )
    hi = _expand_upper(excess, max(p.R_c, 2.0 * lo), max_radius)
    if hi is None:
        raise NoCoverageError(f"power stays under the budget up to {max_radius:.6g} m; no finite answer")
    # largest radius within budget: everything in [lo, root] is served
    radius, residual = _solve(excess, lo, hi)
    return PlanAnswer("coverage_radius_m", radius, "m", (lo, hi), residual)


def max_spectral_efficiency(
    p: CellParams, budget: float, mode: PowerMode | str = PowerMode.SIC
) -> PlanAnswer:
    """Highest common spectral efficiency reachable within ``budget`` watts.

    With SIC the power saturates as the SINR target grows; a budget at or
    above that limit is answered as unbounded rather than as an error.
    """
    if not budget > 0:
        raise ValueError(f"budget must be > 0, got {budget}")
    mode = PowerMode(mode)
    if mode is PowerMode.ASYMPTOTE:
        raise ValueError("the asymptote does not depend on the SINR target")

    def excess(se: float) -> float:
        return total_power(replace(p, gamma_star=cell.sinr_for_se(se)), mode) - budget

    if mode is PowerMode.SIC:
        limit = cell.bs_power_sic_asymptotic(p)
        if budget >= limit:
            return PlanAnswer(
                "max_se", math.inf, "bits/s/Hz", (0.0, math.inf), 0.0, unbounded=True,
                note=f"budget >= asymptotic power {limit:.6g} W",
            )
        note = ""
    else:
        load = cell.no_sic_load(p)
        if load < 1:
            limit = cell.bs_power_no_sic_limit(p)
            if budget >= limit:
                return PlanAnswer(
                    "max_se", math.inf, "bits/s/Hz", (0.0, math.inf), 0.0, unbounded=True,
                    note=f"budget >= no-SIC limit {limit:.6g} W",
                )
            note = ""
        else:
            wall_gamma = 1.0 / (load - 1.0)
            note = f"capped by the no-SIC feasibility wall at SE {cell.spectral_efficiency(wall_gamma):.6g}"

    lo = 1e-12
    if excess(lo) > 0:
        return PlanAnswer("max_se", 0.0, "bits/s/Hz", (0.0, lo), abs(excess(lo)), note="budget below the zero-SE limit")
    hi = _expand_upper(excess, 1.0, SE_SEARCH_LIMIT)
    if hi is None:
        return PlanAnswer(
            "max_se", math.inf, "bits/s/Hz", (lo, SE_SEARCH_LIMIT), 0.0, unbounded=True,
            note="power never reaches the budget in the search range",
        )
    se, residual = _solve(excess, lo, hi)
    return PlanAnswer("max_se", se, "bits/s/Hz", (lo, hi), residual, note=note)


def max_density(p: CellParams, budget: float, mode: PowerMode | str = PowerMode.SIC) -> PlanAnswer:
    """Largest user density (users/m^2) served within ``budget`` watts."""
    if not budget > 0:
        raise ValueError(f"budget must be > 0, got {budget}")
    mode = PowerMode(mode)

    def excess(rho: float) -> float:
        return total_power(replace(p, rho=rho), mode) - budget

    # density at which one user sits in the cell
    unit_density = 1.0 / p.area
    if mode is PowerMode.NOSIC:
        wall = cell.zeta_of(p.gamma_star) / p.area
        hi = wall
    else:
        hi = _expand_upper(excess, unit_density, 1e6 * unit_density)
        if hi is None:
            raise NoCoverageError("power stays under the budget for every density searched")
    rho, residual = _solve(excess, 0.0, hi)
    return PlanAnswer("max_density", rho, "users/m^2", (0.0, hi), residual)


def sweep_power_vs_se(
    p: CellParams,
    se_grid: Sequence[float],
    mode: PowerMode | str = PowerMode.SIC,
    workers: int = 1,
) -> PowerCurve:
    """Total power at ``gamma* = 2^se - 1`` for every grid point, in grid order.

    No-SIC points beyond the feasibility wall are kept and flagged infeasible
    with infinite power.
    """
    se_grid = [float(s) for s in se_grid]
    if not se_grid:
        raise ValueError("empty spectral-efficiency grid")
    if any(s <= 0 for s in se_grid):
        raise ValueError("spectral efficiencies must be positive")
    if any(b <= a for a, b in zip(se_grid, se_grid[1:])):
        raise ValueError("spectral-efficiency grid must be strictly increasing")
    mode = PowerMode(mode)

    def point(se: float) -> CurvePoint:
        gamma = cell.sinr_for_se(se)
        watts = total_power(replace(p, gamma_star=gamma), mode)
        return CurvePoint(se, gamma, watts, _dbm_or_inf(watts), feasible=math.isfinite(watts))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(point, se_grid))
    else:
        points = [point(se) for se in se_grid]
    return PowerCurve(tuple(points), p, mode)


@dataclass(frozen=True)
class Anchor:
    se: float
    users_per_cell: float
    R_c: float
    power_dbm: float


# Published operating points: 24 dBm covers 50 m at 5 bits/s/Hz with 8 users,
# and 41 dBm reaches 15 bits/s/Hz with 10 users (radius not given).
REFERENCE_K = 2.66e-4
REFERENCE_ETA = 3.57
PRIMARY_ANCHOR = Anchor(se=5.0, users_per_cell=8.0, R_c=50.0, power_dbm=24.0)
SECONDARY_ANCHOR = Anchor(se=15.0, users_per_cell=10.0, R_c=50.0, power_dbm=41.0)


def anchor_params(anchor: Anchor, K: float, eta: float, N_th: float, R_0: float = 0.0) -> CellParams:
    return CellParams(
        R_c=anchor.R_c,
        R_0=R_0,
        eta=eta,
        K=K,
        N_th=N_th,
        rho=cell.density_from_users_per_cell(anchor.users_per_cell, anchor.R_c, R_0),
        gamma_star=cell.sinr_for_se(anchor.se),
    )


def calibrate_noise(anchor: Anchor = PRIMARY_ANCHOR, K: float = REFERENCE_K, eta: float = REFERENCE_ETA) -> PlanAnswer:
    """Thermal noise that makes the SIC power hit the anchor exactly.

    Power is proportional to ``N_th`` with everything else fixed, so one
    evaluation at unit noise and a division suffice.
    """
    target = cell.dbm_to_watts(anchor.power_dbm)
    if not target > 0:
        raise ValueError("anchor power must be positive")
    unit = cell.bs_power_sic(anchor_params(anchor, K, eta, N_th=1.0))
    noise = target / unit
    check = cell.bs_power_sic(anchor_params(anchor, K, eta, N_th=noise))
    return PlanAnswer(
        "noise_watts", noise, "W", (noise, noise), abs(check - target),
        note=f"{cell.watts_to_dbm(noise):.6f} dBm",
    )


def anchor_residual_db(anchor: Anchor, N_th: float, K: float = REFERENCE_K, eta: float = REFERENCE_ETA) -> float:
    """Model power at the anchor minus the anchor power, in dB."""
    watts = cell.bs_power_sic(anchor_params(anchor, K, eta, N_th))
    return cell.watts_to_dbm(watts) - anchor.power_dbm
