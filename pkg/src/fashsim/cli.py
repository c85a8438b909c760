"""Command line frontend.

Subcommands: run, ensemble, sweep-adv, sweep-beta, optimize. Settings come
from (lowest to highest precedence) built-in defaults, a flat key=value
config file (--config; '#' starts a comment), and command line flags.
--config also accepts a previously written manifest.json, which makes any
past invocation reproducible from its manifest alone.

Every command writes three files into the output directory (--out, else
the FASHSIM_OUT environment variable, else "out"):
  trace.csv     per-round, per-item trajectories
  summary.json  final shares, inequality, quality/share correlation, peaks
  manifest.json the fully resolved configuration, seed, version, timestamp

trace.csv for run/ensemble carries the columns
  round,item_id,advertisement,intro_round,share_mean,share_std,consumption_rate_mean
and sweep/optimize prepend a grid_value column. Floats are serialized with
17 significant digits, so identical invocations produce identical bytes.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime
failure (e.g. unwritable output directory).
"""

import argparse
import datetime
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, kernel
from .engine import (
    DEFAULT_SEED,
    EnsembleResult,
    SimulationConfig,
    Trace,
    run,
    run_ensemble,
)
from .graph import TopologySpec
from .metrics import (
    gini,
    peak_stats,
    quality_share_correlation,
    rate_series,
    share_series,
)
from .model import BLENDS, MODES, NEW_ITEM_LIKINGS, MarketParams
from .sweep import (
    OBJECTIVES,
    SweepSpec,
    optimize_advertisement,
    sweep,
    tracked_item_id,
)

__all__ = ["main", "parse_config", "ConfigError", "RunSettings"]

TRACE_HEADER = ("round", "item_id", "advertisement", "intro_round",
                "share_mean", "share_std", "consumption_rate_mean")

_TOPOLOGY_ALIASES = {
    "ring": "ring",
    "random": "random",
    "small-world": "small_world",
    "small_world": "small_world",
}


class ConfigError(ValueError):
    """Bad key, bad value, or malformed config input."""


@dataclass(frozen=True)
class RunSettings:
    """Fully resolved invocation: simulation config plus CLI-level knobs."""

    config: SimulationConfig
    runs: int = 100
    grid: Optional[Tuple[float, ...]] = None
    objective: str = "final_share"
    jobs: int = 1
    out: str = "out"


_DEFAULT_GRID_ADV = tuple(round(v * 0.1, 10) for v in range(11))
_DEFAULT_GRID_BETA = (1.0, 5.0, 10.0)


def _parse_int(key: str, raw) -> int:
    try:
        if isinstance(raw, bool):
            raise ValueError
        if isinstance(raw, int):
            return raw
        if isinstance(raw, float):
            if raw != int(raw):
                raise ValueError
            return int(raw)
        return int(str(raw).strip(), 10)
    except (TypeError, ValueError):
        raise ConfigError("%s: expected an integer (got %r)" % (key, raw)) from None


def _parse_float(key: str, raw) -> float:
    try:
        v = float(raw if not isinstance(raw, str) else raw.strip())
    except (TypeError, ValueError):
        raise ConfigError("%s: expected a number (got %r)" % (key, raw)) from None
    if not math.isfinite(v):
        raise ConfigError("%s: must be finite (got %r)" % (key, raw))
    return v


def _parse_float_list(key: str, raw) -> Tuple[float, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(_parse_float(key, v) for v in raw)
    parts = [p.strip() for p in str(raw).split(",") if p.strip() != ""]
    if not parts:
        raise ConfigError("%s: expected a comma separated list of numbers" % key)
    return tuple(_parse_float(key, p) for p in parts)


def _parse_choice(key: str, raw, choices: Sequence[str]) -> str:
    v = str(raw).strip()
    if v not in choices:
        raise ConfigError(
            "%s: expected one of %s (got %r)" % (key, ", ".join(choices), raw)
        )
    return v


def _parse_optional_float(key: str, raw) -> Optional[float]:
    if raw is None:
        return None
    if isinstance(raw, str) and raw.strip().lower() in ("none", ""):
        return None
    return _parse_float(key, raw)


_CONFIG_KEYS = (
    "agents", "items", "rounds", "mode", "topology", "k", "p",
    "gamma", "beta", "sigmoid_center", "intro_period", "intro_batch",
    "intro_ads", "catalog_ads", "new_item_liking", "utility_social_blend",
    "min_utility", "runs", "seed", "grid", "objective", "jobs", "out",
)


def _read_kv_file(path: str) -> Dict[str, object]:
    """Parse a flat key=value file; '#' comments and blank lines ignored."""
    values: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(
                    "%s:%d: expected key=value (got %r)" % (path, lineno, line.rstrip())
                )
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError("%s:%d: unknown key %r" % (path, lineno, key))
            values[key] = value
    return values


def _read_config_file(path: str) -> Dict[str, object]:
    """Read either a flat key=value file or a manifest.json."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            head = fh.read(64)
    except OSError as exc:
        raise ConfigError("config: cannot read %s (%s)" % (path, exc)) from None
    if head.lstrip().startswith("{"):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("config: %s is not valid JSON (%s)" % (path, exc)) from None
        cfg = doc.get("config")
        if not isinstance(cfg, dict):
            raise ConfigError("config: %s has no 'config' object" % path)
        unknown = sorted(set(cfg) - set(_CONFIG_KEYS))
        if unknown:
            raise ConfigError("config: unknown key %r in %s" % (unknown[0], path))
        return dict(cfg)
    return _read_kv_file(path)


def parse_config(path: Optional[str],
                 overrides: Optional[Dict[str, object]] = None) -> RunSettings:
    """Resolve defaults, config file, and flag overrides into RunSettings.

    overrides maps config keys to already-typed or raw string values;
    None entries are ignored. Raises ConfigError (a ValueError) on any
    unknown key or out-of-domain value.
    """
    values: Dict[str, object] = {}
    if path is not None:
        values.update(_read_config_file(path))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _CONFIG_KEYS:
            raise ConfigError("config: unknown key %r" % (key,))
        values[key] = val

    n_agents = _parse_int("agents", values.get("agents", 100))
    m_initial = _parse_int("items", values.get("items", 50))
    rounds = _parse_int("rounds", values.get("rounds", 30))
    mode = _parse_choice("mode", values.get("mode", "fashion"), MODES)
    topo_raw = str(values.get("topology", "ring")).strip()
    if topo_raw not in _TOPOLOGY_ALIASES:
        raise ConfigError(
            "topology: expected ring, random, or small-world (got %r)" % (topo_raw,)
        )
    kind = _TOPOLOGY_ALIASES[topo_raw]
    k = _parse_int("k", values.get("k", 4))
    p = _parse_float("p", values.get("p", 0.1))
    gamma = _parse_float("gamma", values.get("gamma", 0.95))
    beta = _parse_float("beta", values.get("beta", 1.0))
    center = _parse_float("sigmoid_center", values.get("sigmoid_center", 0.5))
    intro_period = _parse_int("intro_period", values.get("intro_period", 6))
    intro_batch = _parse_int("intro_batch", values.get("intro_batch", 1))
    intro_ads = _parse_float_list("intro_ads", values.get("intro_ads", (0.7,)))
    catalog_ads = _parse_float("catalog_ads", values.get("catalog_ads", 0.0))
    new_liking = _parse_choice("new_item_liking",
                               values.get("new_item_liking", "zero"),
                               NEW_ITEM_LIKINGS)
    blend = _parse_choice("utility_social_blend",
                          values.get("utility_social_blend", "liking"), BLENDS)
    min_utility = _parse_optional_float("min_utility", values.get("min_utility"))
    runs = _parse_int("runs", values.get("runs", 100))
    seed = _parse_int("seed", values.get("seed", DEFAULT_SEED))
    raw_grid = values.get("grid")
    grid = _parse_float_list("grid", raw_grid) if raw_grid is not None else None
    objective = _parse_choice("objective",
                              values.get("objective", "final_share"), OBJECTIVES)
    jobs = _parse_int("jobs", values.get("jobs", 1))
    out = str(values.get("out", "out"))

    if runs < 1:
        raise ConfigError("runs: need at least 1 (got %d)" % runs)
    if jobs < 1:
        raise ConfigError("jobs: need at least 1 (got %d)" % jobs)

    try:
        params = MarketParams(
            gamma=gamma, beta=beta, sigmoid_center=center,
            intro_period=intro_period, intro_batch=intro_batch,
            intro_ads=intro_ads, catalog_ads=catalog_ads,
            new_item_liking=new_liking, utility_social_blend=blend,
            min_utility=min_utility,
        )
        topology = TopologySpec(kind=kind, k=k, p=p)
        config = SimulationConfig(
            n_agents=n_agents, m_initial=m_initial, rounds=rounds,
            topology=topology, params=params, mode=mode, seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return RunSettings(config=config, runs=runs, grid=grid,
                       objective=objective, jobs=jobs, out=out)


def _settings_as_dict(settings: RunSettings, grid: Optional[Tuple[float, ...]]) -> Dict:
    cfg = settings.config
    par = cfg.params
    return {
        "agents": cfg.n_agents,
        "items": cfg.m_initial,
        "rounds": cfg.rounds,
        "mode": cfg.mode,
        "topology": cfg.topology.kind,
        "k": cfg.topology.k,
        "p": cfg.topology.p,
        "gamma": par.gamma,
        "beta": par.beta,
        "sigmoid_center": par.sigmoid_center,
        "intro_period": par.intro_period,
        "intro_batch": par.intro_batch,
        "intro_ads": list(par.intro_ads),
        "catalog_ads": par.catalog_ads,
        "new_item_liking": par.new_item_liking,
        "utility_social_blend": par.utility_social_blend,
        "min_utility": par.min_utility,
        "runs": settings.runs,
        "seed": cfg.seed,
        "grid": list(grid) if grid is not None else None,
        "objective": settings.objective,
        "jobs": settings.jobs,
        "out": settings.out,
    }


def _fmt(x: float) -> str:
    """CSV float format: 17 significant digits round-trips float64 exactly."""
    return format(float(x), ".17g")


def _trace_rows(rounds, item_ids, ads, intros, mean, std,
                prefix: Tuple[str, ...] = ()) -> List[Tuple[str, ...]]:
    rates = np.diff(mean, axis=0, prepend=0.0)
    rows = []
    for ri, r in enumerate(rounds):
        for ci, a in enumerate(item_ids):
            if int(intros[ci]) >= int(r):
                continue  # item not yet on the market in this round
            rows.append(prefix + (
                str(int(r)), str(int(a)), _fmt(ads[ci]), str(int(intros[ci])),
                _fmt(mean[ri, ci]), _fmt(std[ri, ci]), _fmt(rates[ri, ci]),
            ))
    return rows


def _write_csv(path: str, header: Sequence[str], rows: List[Tuple[str, ...]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_json(path: str, payload: Dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _peak_block(obj) -> Dict[str, Dict[str, object]]:
    block: Dict[str, Dict[str, object]] = {}
    for a in obj.item_ids:
        a = int(a)
        try:
            ss = share_series(obj, a)
            rr, rates = rate_series(obj, a)
        except ValueError:
            continue  # entered after the recorded window
        ps = peak_stats(ss)
        pr = peak_stats(rates, rounds=rr)
        block[str(a)] = {
            "peak_share": ps.peak,
            "peak_share_round": ps.peak_round,
            "final_share": ps.final,
            "peak_rate": pr.peak,
            "peak_rate_round": pr.peak_round,
        }
    return block


def _final_share_map(item_ids, finals) -> Dict[str, float]:
    return {str(int(a)): float(v) for a, v in zip(item_ids, finals)}


def _safe_gini(finals) -> Optional[float]:
    try:
        return gini(np.asarray(finals, dtype=np.float64))
    except ValueError:
        return None


def _trace_summary(trace: Trace) -> Dict:
    try:
        corr = quality_share_correlation(trace)
    except ValueError:
        corr = None
    return {
        "runs": 1,
        "final_shares": _final_share_map(trace.item_ids, trace.final_shares),
        "gini": _safe_gini(trace.final_shares),
        "quality_share_correlation": corr,
        "peak_stats": _peak_block(trace),
    }


def _ensemble_summary(ens: EnsembleResult) -> Dict:
    corrs = []
    for r in range(ens.runs):
        try:
            corrs.append(quality_share_correlation(
                ens.per_run_quality[r], ens.per_run_final_share[r]))
        except ValueError:
            continue
    corr_mean = float(np.mean(corrs)) if corrs else None
    corr_std = float(np.std(corrs)) if corrs else None
    return {
        "runs": ens.runs,
        "final_shares": _final_share_map(ens.item_ids, ens.mean_final_share),
        "gini": _safe_gini(ens.mean_final_share),
        "quality_share_correlation": corr_mean,
        "quality_share_correlation_std": corr_std,
        "quality_share_correlation_runs": len(corrs),
        "peak_stats": _peak_block(ens),
    }


def _write_outputs(out_dir: str, trace_header, trace_rows, summary: Dict,
                   manifest: Dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(os.path.join(out_dir, "trace.csv"), trace_header, trace_rows)
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)


def _manifest(command: str, settings: RunSettings,
              grid: Optional[Tuple[float, ...]]) -> Dict:
    return {
        "tool": "fashsim",
        "version": __version__,
        "command": command,
        "backend": kernel.BACKEND,
        "seed": settings.config.seed,
        "seed_derivation": (
            "splitmix64: child(i) = finalize(master + (i+1)*0x9E3779B97F4A7C15); "
            "ensembles seed run i by child(i); sweeps seed grid point j by "
            "child(j), then that point's runs by its own children"
        ),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": _settings_as_dict(settings, grid),
    }


def cmd_run(settings: RunSettings) -> None:
    trace = run(settings.config)
    rows = _trace_rows(trace.rounds, trace.item_ids, trace.advertisements,
                       trace.intro_rounds, trace.shares,
                       np.zeros_like(trace.shares))
    summary = {"command": "run", **_trace_summary(trace)}
    _write_outputs(settings.out, TRACE_HEADER, rows, summary,
                   _manifest("run", settings, None))


def cmd_ensemble(settings: RunSettings) -> None:
    ens = run_ensemble(settings.config, settings.runs, jobs=settings.jobs)
    rows = _trace_rows(ens.rounds, ens.item_ids, ens.advertisements,
                       ens.intro_rounds, ens.mean_share, ens.std_share)
    summary = {"command": "ensemble", **_ensemble_summary(ens)}
    _write_outputs(settings.out, TRACE_HEADER, rows, summary,
                   _manifest("ensemble", settings, None))


def _sweep_outputs(command: str, parameter: str, settings: RunSettings,
                   grid: Tuple[float, ...]) -> None:
    spec = SweepSpec(base=settings.config, parameter=parameter, grid=grid,
                     runs=settings.runs)
    result = sweep(spec, jobs=settings.jobs)
    rows: List[Tuple[str, ...]] = []
    points = []
    for pt in result.points:
        ens = pt.ensemble
        rows.extend(_trace_rows(ens.rounds, ens.item_ids, ens.advertisements,
                                ens.intro_rounds, ens.mean_share, ens.std_share,
                                prefix=(_fmt(pt.value),)))
        points.append({
            "value": pt.value,
            "seed": pt.seed,
            **_ensemble_summary(ens),
        })
    summary = {"command": command, "parameter": parameter, "points": points}
    _write_outputs(settings.out, ("grid_value",) + TRACE_HEADER, rows, summary,
                   _manifest(command, settings, grid))


def cmd_sweep_adv(settings: RunSettings) -> None:
    grid = settings.grid if settings.grid is not None else _DEFAULT_GRID_ADV
    tracked_item_id(settings.config)  # validates the tracked item will exist
    _sweep_outputs("sweep-adv", "advertisement", settings, grid)


def cmd_sweep_beta(settings: RunSettings) -> None:
    grid = settings.grid if settings.grid is not None else _DEFAULT_GRID_BETA
    _sweep_outputs("sweep-beta", "beta", settings, grid)


def cmd_optimize(settings: RunSettings) -> None:
    grid = settings.grid if settings.grid is not None else _DEFAULT_GRID_ADV
    result = optimize_advertisement(settings.config, grid,
                                    objective=settings.objective,
                                    runs=settings.runs, jobs=settings.jobs)
    rows: List[Tuple[str, ...]] = []
    points = []
    for pt in result.sweep_result.points:
        ens = pt.ensemble
        rows.extend(_trace_rows(ens.rounds, ens.item_ids, ens.advertisements,
                                ens.intro_rounds, ens.mean_share, ens.std_share,
                                prefix=(_fmt(pt.value),)))
        points.append({
            "value": pt.value,
            "seed": pt.seed,
            **_ensemble_summary(ens),
        })
    summary = {
        "command": "optimize",
        "objective": result.objective,
        "a_star": result.a_star,
        "tracked_item": result.tracked_item,
        "objective_table": [
            {"advertisement": row.advertisement, "mean": row.mean, "se": row.se}
            for row in result.table
        ],
        "points": points,
    }
    _write_outputs(settings.out, ("grid_value",) + TRACE_HEADER, rows, summary,
                   _manifest("optimize", settings, grid))


_COMMANDS = {
    "run": cmd_run,
    "ensemble": cmd_ensemble,
    "sweep-adv": cmd_sweep_adv,
    "sweep-beta": cmd_sweep_beta,
    "optimize": cmd_optimize,
}


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so config errors exit 1."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fashsim",
                     description="agent-based fashion market simulator")
    parser.add_argument("--version", action="version",
                        version="fashsim %s" % __version__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, help_text in (
        ("run", "single simulation"),
        ("ensemble", "many independent runs, aggregated"),
        ("sweep-adv", "sweep the tracked item's advertisement level"),
        ("sweep-beta", "sweep the penalty sigmoid steepness"),
        ("optimize", "grid-search the tracked item's advertisement"),
    ):
        cmd = sub.add_parser(name, help=help_text, add_help=True)
        cmd.add_argument("--config", help="key=value config file or manifest.json")
        cmd.add_argument("--seed", type=int, help="master seed (64-bit)")
        cmd.add_argument("--rounds", type=int, help="rounds per run")
        cmd.add_argument("--agents", type=int, help="number of agents")
        cmd.add_argument("--items", type=int, help="initial catalog size")
        cmd.add_argument("--gamma", type=float, help="social pressure weight")
        cmd.add_argument("--beta", type=float, help="penalty sigmoid steepness")
        cmd.add_argument("--mode", help="cultural or fashion")
        cmd.add_argument("--topology", help="ring, random, or small-world")
        cmd.add_argument("--k", type=int, help="ring/small-world degree (even)")
        cmd.add_argument("--p", type=float, help="edge or rewiring probability")
        cmd.add_argument("--runs", type=int, help="runs per ensemble")
        cmd.add_argument("--grid", help="comma separated grid values")
        cmd.add_argument("--objective",
                         help="optimize target: final_share or integrated_share")
        cmd.add_argument("--out", help="output directory (env FASHSIM_OUT as fallback)")
        cmd.add_argument("--jobs", type=int, help="worker thread cap")
    return parser


def _overrides_from_args(args: argparse.Namespace) -> Dict[str, object]:
    return {
        "seed": args.seed,
        "rounds": args.rounds,
        "agents": args.agents,
        "items": args.items,
        "gamma": args.gamma,
        "beta": args.beta,
        "mode": args.mode,
        "topology": args.topology,
        "k": args.k,
        "p": args.p,
        "runs": args.runs,
        "grid": args.grid,
        "objective": args.objective,
        "jobs": args.jobs,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("missing command (try: fashsim run --help)")
        settings = parse_config(args.config, _overrides_from_args(args))
        out = args.out or os.environ.get("FASHSIM_OUT") or settings.out
        settings = RunSettings(config=settings.config, runs=settings.runs,
                               grid=settings.grid, objective=settings.objective,
                               jobs=settings.jobs, out=out)
    except ConfigError as exc:
        print("fashsim: error: %s" % exc, file=sys.stderr)
        return 1
    try:
        _COMMANDS[args.command](settings)
    except (ConfigError, ValueError) as exc:
        print("fashsim: error: %s" % exc, file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surface as runtime failure
        print("fashsim: runtime failure: %s" % exc, file=sys.stderr)
        return 2
    print("fashsim: wrote %s" % os.path.abspath(settings.out))
    return 0
