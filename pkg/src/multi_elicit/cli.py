"""
Command-line front end.

Subcommands: verify, witness, frontier, voronoi, regress, catalog.
JSON and CSV payloads go to stdout (or --out); progress and errors go to
stderr through the session log.

Exit codes: 0 success / pass, 1 semantic failure (verification failed, no
witness in the samples), 2 usage or domain error.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import yaml
from rich.table import Table

from .catalog import default_space, get_loss, list_losses, list_properties, named_property
from .config import RunConfig
from .core import OutcomeSpace
from .errors import ConfigurationError
from .regression import SimConfig, run_simulation
from .session_log import configure_session_log, get_session_log, render_plain
from .verifier import frontier_csv, frontier_scan, verify_elicits
from .voronoi import SiteSet, band_sites, cell_map, diagonal_statistic, variance_statistic
from .witness import Witness, sample_level_set, verify_witness, witness_search

Payload = Tuple[int, str]


# =============================================================================
# HELPERS
# =============================================================================

def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _space(cfg: RunConfig, name: Optional[str] = None) -> OutcomeSpace:
    if cfg.outcomes:
        return OutcomeSpace.from_values(cfg.outcomes)
    if name:
        return default_space(name)
    raise ConfigurationError(f"'{cfg.command}' needs --outcomes")


def _json(document) -> str:
    """UTF-8 JSON without NaN/Inf (raises ValueError instead)."""
    return json.dumps(document, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]):
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        get_session_log().success(f"Wrote {path}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


# =============================================================================
# COMMANDS
# =============================================================================

def cmd_verify(cfg: RunConfig) -> Payload:
    cfg.require("loss", "property")
    space = _space(cfg, cfg.property)
    prop = named_property(cfg.property, space)
    loss = get_loss(cfg.loss, space)
    report = verify_elicits(loss, prop, space, cfg.resolution, cfg.tol, jobs=cfg.jobs, settings=cfg.settings)
    return (0 if report.passed else 1), _json(report.model_dump())


def cmd_witness(cfg: RunConfig) -> Payload:
    cfg.require("property", "r1", "r2")
    space = _space(cfg, cfg.property)
    prop = named_property(cfg.property, space)
    kwargs = dict(scan_resolution=cfg.scan, level_tol=cfg.level_tol, support=cfg.support, settings=cfg.settings)
    first = sample_level_set(prop, cfg.r1, space, **kwargs)
    second = sample_level_set(prop, cfg.r2, space, **kwargs)
    result = witness_search(first, second, cfg.m, settings=cfg.settings)
    if isinstance(result, Witness):
        residual = verify_witness(result)
        get_session_log().success(f"Witness re-checked: residual {residual:.3g}")
        return 0, _json(result.to_json())
    return 1, _json(result.to_json())


def cmd_frontier(cfg: RunConfig) -> Payload:
    cfg.require("property")
    space = _space(cfg, cfg.property)
    cells = frontier_scan(cfg.property, cfg.max_d, cfg.max_m, space, cfg.resolution, cfg.tol,
                          jobs=cfg.jobs, settings=cfg.settings)
    table = Table(title=f"Elicitation frontier: {cfg.property}")
    table.add_column("d", justify="right")
    table.add_column("m", justify="right")
    table.add_column("status")
    table.add_column("evidence")
    for cell in cells:
        table.add_row(str(cell.d), str(cell.m), cell.status, cell.evidence)
    get_session_log().show(table)
    return 0, frontier_csv(cells)


def cmd_voronoi(cfg: RunConfig) -> Payload:
    if cfg.sites:
        sites = SiteSet.from_json_file(cfg.sites)
        space = _space(cfg) if cfg.outcomes else OutcomeSpace.categorical(sites.outcome_count())
    elif cfg.bands:
        cfg.require("thresholds")
        space = _space(cfg) if cfg.outcomes else OutcomeSpace.categorical(3)
        if cfg.bands == "norm":
            statistic = diagonal_statistic(space, cfg.site_m)
            m = cfg.site_m
        else:
            statistic = variance_statistic(space)
            m = 2
        sites = band_sites(statistic, cfg.thresholds, m)
    else:
        raise ConfigurationError("'voronoi' needs --sites FILE or --bands {norm,variance}")
    return 0, cell_map(sites, space, cfg.resolution, settings=cfg.settings)


def cmd_regress(cfg: RunConfig) -> Payload:
    overrides = {k: v for k, v in dict(a=cfg.a, n=cfg.n, trials=cfg.trials).items() if v is not None}
    sim = SimConfig(seed=cfg.seed, mode=cfg.mode, **overrides)
    result = run_simulation(sim, settings=cfg.settings, jobs=cfg.jobs)
    table = Table(title="Variance regression")
    for column in ("method", "mse_mean", "mse_median"):
        table.add_column(column)
    for row in result.summary():
        table.add_row(row["method"], f"{row['mse_mean']:.4g}", f"{row['mse_median']:.4g}")
    get_session_log().show(table)
    return 0, result.to_csv()


def cmd_catalog(cfg: RunConfig) -> Payload:
    table = Table(title="Catalog")
    table.add_column("kind", no_wrap=True)
    table.add_column("name", no_wrap=True)
    table.add_column("description")
    for info in list_properties():
        table.add_row("property", f"{info.name}(k)" if info.parametric else info.name, info.description)
    for info in list_losses():
        name = f"{info.name}<k>" if info.parametric else info.name
        table.add_row("loss", name, f"{info.description} → {info.target}")
    return 0, render_plain(table)


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig], Payload]] = {
    "verify": cmd_verify,
    "witness": cmd_witness,
    "frontier": cmd_frontier,
    "voronoi": cmd_voronoi,
    "regress": cmd_regress,
    "catalog": cmd_catalog,
}


# =============================================================================
# PARSER
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", dest="config_file", help="JSON/YAML run file (flags win)")
    common.add_argument("--out", help="Write the payload here instead of stdout")
    common.add_argument("--jobs", type=int, help="Worker threads")
    common.add_argument("--verbose", action="store_true", default=None, help="Progress on stderr")
    common.add_argument("--log-file", dest="log_file", help="Append a plain-text session log")

    parser = argparse.ArgumentParser(
        prog="multi-elicit",
        description="Multi-observation property elicitation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="Check that a loss elicits a property on a grid")
    verify.add_argument("--loss")
    verify.add_argument("--property")
    verify.add_argument("--outcomes", type=_float_list)
    verify.add_argument("--grid", dest="resolution", type=int)
    verify.add_argument("--tol", type=float)

    witness = sub.add_parser("witness", parents=[common], help="Search a non-elicitability witness")
    witness.add_argument("--property")
    witness.add_argument("--m", type=int)
    witness.add_argument("--r1", type=float)
    witness.add_argument("--r2", type=float)
    witness.add_argument("--outcomes", type=_float_list)
    witness.add_argument("--scan", type=int)
    witness.add_argument("--support", type=_int_list)
    witness.add_argument("--level-tol", dest="level_tol", type=float)

    frontier = sub.add_parser("frontier", parents=[common], help="Frontier table as CSV")
    frontier.add_argument("--property")
    frontier.add_argument("--max-d", dest="max_d", type=int)
    frontier.add_argument("--max-m", dest="max_m", type=int)
    frontier.add_argument("--outcomes", type=_float_list)
    frontier.add_argument("--grid", dest="resolution", type=int)
    frontier.add_argument("--tol", type=float)

    voronoi = sub.add_parser("voronoi", parents=[common], help="Voronoi cell map as CSV")
    voronoi.add_argument("--sites")
    voronoi.add_argument("--bands", choices=["norm", "variance"])
    voronoi.add_argument("--thresholds", type=_float_list)
    voronoi.add_argument("--m", dest="site_m", type=int)
    voronoi.add_argument("--outcomes", type=_float_list)
    voronoi.add_argument("--grid", dest="resolution", type=int)

    regress = sub.add_parser("regress", parents=[common], help="Variance regression simulation")
    regress.add_argument("--a", type=float)
    regress.add_argument("--n", type=int)
    regress.add_argument("--trials", type=int)
    regress.add_argument("--seed", type=int)
    regress.add_argument("--mode", choices=["sliding", "disjoint"])

    sub.add_parser("catalog", parents=[common], help="List catalog properties and losses")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Runs one subcommand and returns its exit code.

    argparse usage errors exit with status 2 on their own.
    """
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config_file")}
    log = get_session_log()
    try:
        cfg = RunConfig.from_sources(args.command, flags, config_file=args.config_file)
        log = configure_session_log(verbose=cfg.verbose, log_file=cfg.log_file)
        log.section(f"multi-elicit {cfg.command}")
        code, text = COMMAND_HANDLERS[cfg.command](cfg)
        _emit(text, cfg.out)
        return code
    except (ValueError, FileNotFoundError, yaml.YAMLError) as e:
        log.error(str(e))
        return 2
    finally:
        log.close()


if __name__ == "__main__":
    sys.exit(main())
