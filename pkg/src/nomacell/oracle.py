"""Exact discrete-user counterpart of the continuum cell.

Powers are solved user by user from the SINR equations, then the SINRs are
recomputed from the raw powers as an independent check.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .cell import zeta_of


class Mode(str, enum.Enum):
    SIC = "sic"
    NOSIC = "nosic"


class ModeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class UserSet:
    """Users sorted by distance from the BS.

    ``tie_order`` holds the original insertion index of each sorted entry.
    Equal distances keep insertion order, and the earlier user counts as
    nearer for SIC.
    """

    distances: tuple[float, ...]
    tie_order: tuple[int, ...]
    R_c: float
    R_0: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if len(self.distances) != len(self.tie_order):
            raise ValueError("distances and tie_order differ in length")
        for r in self.distances:
            if not self.R_0 <= r <= self.R_c:
                raise ValueError(f"distance {r} outside [R_0, R_c] = [{self.R_0}, {self.R_c}]")
        if any(b < a for a, b in zip(self.distances, self.distances[1:])):
            raise ValueError("distances must be sorted ascending")

    @classmethod
    def from_distances(
        cls, distances: Sequence[float], R_c: float, R_0: float = 0.0, seed: int | None = None
    ) -> UserSet:
        order = sorted(range(len(distances)), key=lambda i: (distances[i], i))
        return cls(
            distances=tuple(float(distances[i]) for i in order),
            tie_order=tuple(order),
            R_c=R_c,
            R_0=R_0,
            seed=seed,
        )

    def __len__(self) -> int:
        return len(self.distances)


@dataclass(frozen=True)
class AllocationResult:
    powers: tuple[float, ...]
    total_power: float
    achieved_sinr: tuple[float, ...]
    mode: Mode
    feasible: bool
    metadata: dict = field(default_factory=dict, compare=False)


def _check_range(n: int, R_0: float, R_c: float) -> None:
    if n < 1:
        raise ValueError(f"need at least one user, got n={n}")
    if not 0 <= R_0 < R_c:
        raise ValueError(f"need 0 <= R_0 < R_c, got R_0={R_0}, R_c={R_c}")


def place_users_uniform(n: int, R_0: float, R_c: float, seed: int) -> UserSet:
    """Draw ``n`` i.i.d. radii, uniform over the annulus area."""
    _check_range(n, R_0, R_c)
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 1.0, size=n)
    radii = np.sqrt(R_0**2 + u * (R_c**2 - R_0**2))
    # guard against rounding just past the outer edge
    radii = np.clip(radii, R_0, R_c)
    return UserSet.from_distances(radii.tolist(), R_c=R_c, R_0=R_0, seed=seed)


def place_users_rings(n: int, R_0: float, R_c: float) -> UserSet:
    """Deterministic radii, each at the area midpoint of an equal-area ring."""
    _check_range(n, R_0, R_c)
    span = R_c**2 - R_0**2
    radii = [math.sqrt(R_0**2 + (k - 0.5) * span / n) for k in range(1, n + 1)]
    return UserSet.from_distances(radii, R_c=R_c, R_0=R_0)


def solve_sic_allocation(
    users: UserSet, gamma_star: float, K: float, N_th: float, eta: float
) -> AllocationResult:
    """Per-user powers with SIC, nearest user first.

    With ``S`` the power already given to nearer users,
    ``P_k = gamma* (S_{k-1} + (N_th/K) r_k^eta)``. Always feasible.
    """
    if len(users) == 0:
        raise ValueError("empty user set")
    c = N_th / K
    powers = []
    running = 0.0
    for r in users.distances:
        pk = gamma_star * (running + c * r**eta)
        powers.append(pk)
        running += pk
    return AllocationResult(
        powers=tuple(powers),
        total_power=running,
        achieved_sinr=tuple([gamma_star] * len(powers)),
        mode=Mode.SIC,
        feasible=True,
        metadata={"tie_break": "insertion order; earlier index is nearer"},
    )


def solve_no_sic_allocation(
    users: UserSet, gamma_star: float, K: float, N_th: float, eta: float
) -> AllocationResult:
    """Per-user powers when every other user's signal is interference.

    The total solves ``(zeta - N) P_total = (N_th/K) sum r_u^eta``; it is only
    positive, hence feasible, when ``N < zeta``.
    """
    n = len(users)
    if n == 0:
        raise ValueError("empty user set")
    c = N_th / K
    zeta = zeta_of(gamma_star)
    if n >= zeta:
        return AllocationResult(
            powers=(),
            total_power=math.inf,
            achieved_sinr=(),
            mode=Mode.NOSIC,
            feasible=False,
            metadata={"reason": f"N={n} >= zeta={zeta:.6g}"},
        )
    path = [c * r**eta for r in users.distances]
    total = math.fsum(path) / (zeta - n)
    powers = tuple((total + x) / zeta for x in path)
    return AllocationResult(
        powers=powers,
        total_power=math.fsum(powers),
        achieved_sinr=tuple([gamma_star] * n),
        mode=Mode.NOSIC,
        feasible=True,
    )


def verify_sinr(
    users: UserSet,
    alloc: AllocationResult,
    K: float,
    N_th: float,
    eta: float,
    mode: Mode | str | None = None,
) -> list[float]:
    """Recompute every user's SINR from the raw powers and pathloss.

    In SIC mode the interference is the power of strictly nearer users (by
    sorted position, so ties resolve by insertion order); without SIC it is
    the power of all other users.
    """
    if mode is not None and Mode(mode) is not alloc.mode:
        raise ModeMismatchError(f"allocation is {alloc.mode.value}, asked to verify {Mode(mode).value}")
    if not alloc.feasible:
        raise ValueError("cannot verify an infeasible allocation")
    if len(alloc.powers) != len(users):
        raise ValueError("allocation and user set differ in length")

    powers = alloc.powers
    total = math.fsum(powers)
    nearer = 0.0
    sinrs = []
    for k, r in enumerate(users.distances):
        gain = K * r ** (-eta)
        if alloc.mode is Mode.SIC:
            interferers = nearer
            nearer += powers[k]
        else:
            interferers = total - powers[k]
        sinrs.append(powers[k] * gain / (interferers * gain + N_th))
    return sinrs
