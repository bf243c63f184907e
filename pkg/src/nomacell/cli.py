"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 bad input, 3 infeasible
planning request.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from . import cell, config, oracle, planner, validation
from .cell import InfeasibleError, UnsupportedFormError
from .config import ConfigError, ScenarioConfig
from .planner import NoCoverageError, PowerMode

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3

SWEEP_COLUMNS = ("se_bits_s_hz", "gamma_linear", "p_sic_w", "p_sic_dbm", "p_asymptote_dbm", "p_nosic_dbm_or_inf")
SIMULATE_COLUMNS = ("index", "distance_m", "power_w", "sinr_achieved")
UNBOUNDED = "UNBOUNDED"


class UsageError(ValueError):
    pass


def fmt(x: float) -> str:
    """Six significant digits for tables."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def full(x: float) -> str:
    """Shortest representation that round-trips, for CSV."""
    return repr(float(x))


def dbm(watts: float) -> float:
    if watts == 0:
        return -math.inf
    if math.isinf(watts):
        return math.inf
    return cell.watts_to_dbm(watts)


def _write_csv(rows: Sequence[Sequence[str]], header: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _table(rows: Sequence[Sequence[str]], header: Sequence[str] | None = None) -> str:
    allrows = ([list(header)] if header else []) + [list(r) for r in rows]
    if not allrows:
        return ""
    widths = [max(len(r[i]) for r in allrows) for i in range(len(allrows[0]))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in allrows)


@contextlib.contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _format(args: argparse.Namespace, cfg: ScenarioConfig, default: str) -> str:
    return args.format or cfg.output_format or default


def _out_path(args: argparse.Namespace, cfg: ScenarioConfig) -> str | None:
    return args.out or cfg.output_path


def _emit(args, cfg, text: str) -> None:
    with _sink(_out_path(args, cfg)) as fh:
        fh.write(text)


# -- commands ---------------------------------------------------------------


def cmd_power(args, cfg: ScenarioConfig) -> int:
    p = cfg.to_params()
    rows = []
    sic = cell.bs_power_sic(p)
    rows.append(("sic_quadrature", sic, ""))
    try:
        rows.append(("sic_gamma_form", cell.bs_power_sic_gamma_form(p), ""))
    except UnsupportedFormError:
        rows.append(("sic_gamma_form", math.nan, "n/a for min_distance_m > 0"))
    rows.append(("sic_asymptote", cell.bs_power_sic_asymptotic(p), ""))
    try:
        rows.append(("nosic", cell.bs_power_no_sic(p), ""))
    except InfeasibleError as exc:
        rows.append(("nosic", math.inf, str(exc)))

    if _format(args, cfg, "table") == "csv":
        text = _write_csv(
            [(name, full(w), full(dbm(w)) if not math.isnan(w) else "nan", note) for name, w, note in rows],
            ("quantity", "power_w", "power_dbm", "note"),
        )
    else:
        body = []
        for name, w, note in rows:
            if math.isnan(w):
                body.append((name, "n/a", "n/a", note))
            elif math.isinf(w):
                body.append((name, "infeasible", "infeasible", note))
            else:
                body.append((name, fmt(w) + " W", fmt(dbm(w)) + " dBm", note))
        text = _table(body, ("quantity", "watts", "dBm", "note"))
    _emit(args, cfg, text)
    return EXIT_OK


def sweep_rows(p: cell.CellParams, se_grid: Sequence[float]) -> list[list[str]]:
    sic = planner.sweep_power_vs_se(p, se_grid, PowerMode.SIC)
    nosic = planner.sweep_power_vs_se(p, se_grid, PowerMode.NOSIC)
    asym = dbm(cell.bs_power_sic_asymptotic(p))
    rows = []
    for a, b in zip(sic.points, nosic.points):
        rows.append([full(a.se), full(a.gamma), full(a.power_w), full(a.power_dbm), full(asym), full(b.power_dbm)])
    return rows


def _se_grid(se_min: float, se_max: float, steps: int) -> list[float]:
    if not 0 < se_min < se_max:
        raise UsageError(f"need 0 < se-min < se-max, got {se_min}, {se_max}")
    if steps < 2:
        raise UsageError(f"steps must be >= 2, got {steps}")
    return [se_min + (se_max - se_min) * i / (steps - 1) for i in range(steps)]


GRID_USERS = (8, 10, 12)
GRID_RADII = (50.0, 100.0)


def cmd_sweep(args, cfg: ScenarioConfig) -> int:
    grid = _se_grid(args.se_min, args.se_max, args.steps)
    if args.grid_dir:
        out = Path(args.grid_dir)
        out.mkdir(parents=True, exist_ok=True)
        for n in GRID_USERS:
            for radius in GRID_RADII:
                c = replace(cfg, radius_m=radius, users_per_cell=float(n), density_per_m2=None)
                (out / f"curve_users{n}_radius{int(radius)}m.csv").write_text(
                    _write_csv(sweep_rows(c.to_params(), grid), SWEEP_COLUMNS)
                )
        return EXIT_OK
    rows = sweep_rows(cfg.to_params(), grid)
    if _format(args, cfg, "csv") == "table":
        text = _table([[fmt(float(x)) for x in r] for r in rows], SWEEP_COLUMNS)
    else:
        text = _write_csv(rows, SWEEP_COLUMNS)
    _emit(args, cfg, text)
    return EXIT_OK


def _budget(args) -> float:
    if args.budget_dbm is None or not math.isfinite(args.budget_dbm):
        raise UsageError("--budget-dbm is required and must be finite")
    return cell.dbm_to_watts(args.budget_dbm)


def _report_answer(args, cfg, ans: planner.PlanAnswer, extra: Sequence[tuple[str, str]] = ()) -> None:
    value = UNBOUNDED if ans.unbounded else (full(ans.value) if _format(args, cfg, "table") == "csv" else fmt(ans.value))
    rows = [
        ("quantity", ans.quantity),
        ("value", value),
        ("unit", ans.unit),
        ("bracket", f"[{fmt(ans.bracket[0])}, {fmt(ans.bracket[1])}]"),
        ("residual_w", fmt(ans.residual)),
        *extra,
    ]
    if ans.note:
        rows.append(("note", ans.note))
    if _format(args, cfg, "table") == "csv":
        text = _write_csv(rows, ("field", "value"))
    else:
        text = _table(rows)
    _emit(args, cfg, text)


def cmd_coverage(args, cfg: ScenarioConfig) -> int:
    budget = _budget(args)
    p = cfg.to_params()
    ans = planner.max_coverage_radius(p, budget, args.mode, users_per_cell=cfg.users_per_cell)
    convention = "users_per_cell" if cfg.users_per_cell is not None else "fixed density"
    _report_answer(args, cfg, ans, [("density_convention", convention)])
    return EXIT_OK


def cmd_qos(args, cfg: ScenarioConfig) -> int:
    budget = _budget(args)
    ans = planner.max_spectral_efficiency(cfg.to_params(), budget, args.mode)
    extra = []
    if not ans.unbounded:
        extra.append(("sinr_linear", fmt(cell.sinr_for_se(ans.value))))
    _report_answer(args, cfg, ans, extra)
    return EXIT_OK


def cmd_density(args, cfg: ScenarioConfig) -> int:
    budget = _budget(args)
    p = cfg.to_params()
    ans = planner.max_density(p, budget, args.mode)
    _report_answer(args, cfg, ans, [("users_per_cell", fmt(ans.value * p.area))])
    return EXIT_OK


def cmd_simulate(args, cfg: ScenarioConfig) -> int:
    n = cfg.n_users
    if cfg.placement == "rings":
        users = oracle.place_users_rings(n, cfg.min_distance_m, cfg.radius_m)
    else:
        users = oracle.place_users_uniform(n, cfg.min_distance_m, cfg.radius_m, cfg.seed)
    g = cfg.gamma_star
    K, N_th, eta = cfg.pathloss_constant, cfg.noise_watts, cfg.pathloss_exponent
    mode = oracle.Mode(args.mode)
    solve = oracle.solve_sic_allocation if mode is oracle.Mode.SIC else oracle.solve_no_sic_allocation
    alloc = solve(users, g, K, N_th, eta)

    rows = []
    if alloc.feasible:
        sinrs = oracle.verify_sinr(users, alloc, K, N_th, eta, mode)
        for idx, r, pw, s in zip(users.tie_order, users.distances, alloc.powers, sinrs):
            rows.append([str(idx), full(r), full(pw), full(s)])

    # continuum counterpart: the same users spread as a density
    p = replace(cfg.to_params(), rho=cell.density_from_users_per_cell(n, cfg.radius_m, cfg.min_distance_m))
    if mode is oracle.Mode.SIC:
        continuum = cell.bs_power_sic(p)
    else:
        try:
            continuum = cell.bs_power_no_sic(p)
        except InfeasibleError:
            continuum = math.inf

    summary = [
        f"mode: {mode.value}",
        f"placement: {cfg.placement}" + (f" (seed {cfg.seed})" if cfg.placement == "uniform" else ""),
        f"users: {n}",
        f"sinr_target_linear: {fmt(g)}",
    ]
    if alloc.feasible:
        gap = (alloc.total_power - continuum) / continuum if continuum > 0 else math.nan
        summary += [
            f"discrete_total_w: {fmt(alloc.total_power)} ({fmt(dbm(alloc.total_power))} dBm)",
            f"continuum_total_w: {fmt(continuum)} ({fmt(dbm(continuum))} dBm)",
            f"relative_gap: {fmt(gap)}",
        ]
    else:
        summary.append(f"discrete: infeasible ({alloc.metadata.get('reason', '')})")
        summary.append("continuum: " + ("infeasible" if math.isinf(continuum) else fmt(continuum) + " W"))
    if mode is oracle.Mode.SIC:
        summary.append("tie_break: equal distances ordered by insertion index, earlier is nearer")

    if _format(args, cfg, "csv") == "table":
        text = _table([[r[0], fmt(float(r[1])), fmt(float(r[2])), fmt(float(r[3]))] for r in rows], SIMULATE_COLUMNS)
    else:
        text = _write_csv(rows, SIMULATE_COLUMNS)
    out = _out_path(args, cfg)
    _emit(args, cfg, text)
    # keep stdout pure CSV when the data goes there
    (sys.stderr if out is None else sys.stdout).write("\n".join(summary) + "\n")
    return EXIT_OK


def cmd_validate(args, cfg: ScenarioConfig) -> int:
    checks = validation.run_all(cfg.noise_watts)
    lines = [c.line() for c in checks]
    ok = all(c.passed for c in checks if c.gate)
    lines.append(
        "note: the uncorrected incomplete-gamma expression equals minus a positive quantity "
        "and lacks the beta^(-eta/2) factor; the corrected form "
        "(N_th/K) R_c^eta e^beta beta^(-eta/2) lower_gamma((eta+2)/2, beta) is used"
    )
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    _emit(args, cfg, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {
    "power": cmd_power,
    "sweep": cmd_sweep,
    "coverage": cmd_coverage,
    "qos": cmd_qos,
    "density": cmd_density,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


# -- argument parsing -------------------------------------------------------


def _cell_overrides(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("scenario overrides (win over --config)")
    g.add_argument("--radius-m", type=float)
    g.add_argument("--min-distance-m", type=float)
    g.add_argument("--pathloss-exponent", type=float)
    g.add_argument("--pathloss-constant", type=float)
    g.add_argument("--noise-dbm", type=float)
    dens = g.add_mutually_exclusive_group()
    dens.add_argument("--users-per-cell", type=float)
    dens.add_argument("--density-per-m2", type=float)
    target = g.add_mutually_exclusive_group()
    target.add_argument("--se-target", type=float)
    target.add_argument("--sinr-target-db", type=float)


def _common(suppress: bool) -> argparse.ArgumentParser:
    # Subcommands repeat the global flags; SUPPRESS stops their absent values
    # from overwriting flags given before the subcommand name.
    kw = {"argument_default": argparse.SUPPRESS} if suppress else {}
    common = argparse.ArgumentParser(add_help=False, **kw)
    common.add_argument("--config", help="YAML scenario file")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "table"))
    _cell_overrides(common)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=False)
    sub_common = _common(suppress=True)

    parser = argparse.ArgumentParser(
        prog="nomacell",
        description="Minimum downlink power of a NOMA cell with and without SIC.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[sub_common])

    add("power", "SIC, asymptotic and no-SIC total power")
    sw = add("sweep", "power against spectral efficiency as CSV")
    sw.add_argument("--se-min", type=float, default=1.0)
    sw.add_argument("--se-max", type=float, default=15.0)
    sw.add_argument("--steps", type=int, default=15)
    sw.add_argument("--grid-dir", default=None, help="write the six density/radius curves into this directory")
    for name, help in (
        ("coverage", "largest radius within a power budget"),
        ("qos", "highest spectral efficiency within a power budget"),
        ("density", "highest user density within a power budget"),
    ):
        sp = add(name, help)
        sp.add_argument("--budget-dbm", type=float, required=True)
        sp.add_argument("--mode", choices=("sic", "nosic"), default="sic")
    sim = add("simulate", "discrete users: per-user powers and SINRs")
    sim.add_argument("--n-users", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--placement", choices=("uniform", "rings"), default=None)
    sim.add_argument("--mode", choices=("sic", "nosic"), default="sic")
    add("validate", "run the model self-checks")
    return parser


_OVERRIDE_FIELDS = {
    "radius_m": "radius_m",
    "min_distance_m": "min_distance_m",
    "pathloss_exponent": "pathloss_exponent",
    "pathloss_constant": "pathloss_constant",
    "noise_dbm": "noise_dbm",
    "users_per_cell": "users_per_cell",
    "density_per_m2": "density_per_m2",
    "se_target": "se_target",
    "sinr_target_db": "sinr_target_db",
}


def _overrides(args: argparse.Namespace) -> dict:
    cell_over = {k: getattr(args, a) for a, k in _OVERRIDE_FIELDS.items() if getattr(args, a, None) is not None}
    sim_over = {k: getattr(args, k) for k in ("n_users", "seed", "placement") if getattr(args, k, None) is not None}
    out = {}
    if cell_over:
        out["cell"] = cell_over
    if sim_over:
        out["simulation"] = sim_over
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config.load(args.config, _overrides(args))
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoCoverageError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
