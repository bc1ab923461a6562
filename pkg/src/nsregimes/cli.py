"""Command line front end.

Subcommands cover the full pipeline on CSV files:

    simulate   draw a synthetic panel from a bundled or user design
    grow       search for a regime tree on a yield/macro pair
    fit        run the full sampler under a fixed tree
    report     fit tables, regime contrasts, and impulse responses
    stats      descriptive statistics of a yield panel

Every command writes a ``manifest.json`` capturing the inputs (by content
hash), the settings, and the outputs, so a run can be replayed exactly.
Manifests carry no timestamps and all JSON is key-sorted: re-running a
command with the same inputs reproduces every output byte for byte.

Exit codes: 0 on success, 2 for bad inputs or options, 3 when a fit fails
numerically.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from . import __version__
from .basis import MaturityGrid
from .diagnostics import (
    fitted_frame,
    girf_table,
    plot_decay,
    plot_fitted,
    plot_girf,
    residual_report,
    ttest_report,
)
from .gibbs import ChainConfig, load_draws, run_chain, save_draws
from .panels import (
    PanelFormatError,
    align_yields,
    build_macro_panel,
    descriptive_stats,
    load_macro_table,
    load_yield_panel,
    write_macro_table,
    write_yield_panel,
)
from .select import SearchConfig, grow_tree, stack_observations
from .simulate import SimulationDesign, bundled_design, simulate_panel
from .statespace import NumericalError
from .tree import RegimeTree, assign_labels

logger = logging.getLogger(__name__)

_CSV_KW = {"index": False, "lineterminator": "\n"}


class InputError(Exception):
    """Bad file contents or incoherent options (exit code 2)."""


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(outdir: Path, command: str, inputs: dict, settings: dict, outputs) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "settings": settings,
        "outputs": sorted(str(o) for o in outputs),
    }
    _write_json(outdir / "manifest.json", manifest)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_json_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError(f"config file {path} must hold a JSON object")
    return obj


def _pick(cfg: dict, keys) -> dict:
    unknown = set(cfg) - set(keys)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return cfg


def _chain_config(cfg: dict, defaults: ChainConfig) -> ChainConfig:
    cfg = _pick(cfg, ("n_burn", "n_draws", "thin", "keep_factors"))
    try:
        return ChainConfig(
            n_burn=int(cfg.get("n_burn", defaults.n_burn)),
            n_draws=int(cfg.get("n_draws", defaults.n_draws)),
            thin=int(cfg.get("thin", defaults.thin)),
            keep_factors=str(cfg.get("keep_factors", defaults.keep_factors)),
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _macro_panel(args):
    table = load_macro_table(args.macro)
    factor_names = tuple(n for n in args.factors.split(",") if n) if args.factors else ()
    if args.candidates:
        candidate_names = tuple(n for n in args.candidates.split(",") if n)
    else:
        candidate_names = tuple(c for c in table.columns if c not in factor_names)
    for name in (*candidate_names, *factor_names):
        if name not in table.columns:
            raise InputError(f"macro table has no column {name!r}")
    try:
        return build_macro_panel(
            table, candidate_names=candidate_names, factor_names=factor_names,
            window=args.window,
        )
    except PanelFormatError as exc:
        raise InputError(str(exc)) from exc


def _load_tree(path: str) -> RegimeTree:
    try:
        return RegimeTree.from_json(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"tree file not found: {path}") from None
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed tree file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    out = _outdir(args)
    if args.design.endswith(".json"):
        path = Path(args.design)
        if not path.exists():
            raise InputError(f"design file not found: {args.design}")
        design = SimulationDesign.from_json(path.read_text())
    else:
        try:
            design = bundled_design(args.design)
        except ValueError as exc:
            raise InputError(str(exc)) from exc

    sim = simulate_panel(design, seed=args.seed)
    write_yield_panel(sim.yields, out / "yields.csv")
    write_macro_table(sim.macro_table, out / "macro.csv")

    truth = pd.DataFrame({
        "date": [str(d) for d in sim.yields.dates],
        "regime": sim.labels.labels,
    })
    truth.to_csv(out / "regimes.csv", **_CSV_KW)
    factors = pd.DataFrame(sim.factors, columns=["f1", "f2", "f3"])
    factors.insert(0, "date", [str(d) for d in sim.yields.dates])
    factors.to_csv(out / "factors.csv", **_CSV_KW)
    _write_json(out / "design.json", {
        "decay": design.decay,
        "drivers": list(design.drivers),
        "driver_ar": design.driver_ar,
        "maturities": list(design.grid.maturities),
        "meas_var": design.meas_var.tolist(),
        "n_sample": design.n_sample,
        "name": design.name,
        "regimes": [
            {
                "transition": design.transition[g].tolist(),
                "innovation_cov": design.innovation_cov[g].tolist(),
                "mean": design.regime_means[g].tolist(),
            }
            for g in range(design.n_regimes)
        ],
        "start": design.start,
        "tree": design.tree.to_dict(),
        "window": design.window,
    })
    _write_manifest(
        out, "simulate",
        inputs={"design": args.design},
        settings={"seed": args.seed},
        outputs=["yields.csv", "macro.csv", "regimes.csv", "factors.csv", "design.json"],
    )
    return 0


def cmd_grow(args) -> int:
    out = _outdir(args)
    yields = load_yield_panel(args.yields)
    macro = _macro_panel(args)
    data, n_macro = stack_observations(yields, macro, with_factors=bool(args.factors))

    cfg = _pick(_load_json_config(args.config), (
        "n_burn", "n_draws", "thin", "min_months", "max_regimes", "thresholds",
        "ml_mode", "require_improvement", "near_tie_margin",
    ))
    base = SearchConfig()
    try:
        config = SearchConfig(
            chain=ChainConfig(
                n_burn=int(cfg.get("n_burn", base.chain.n_burn)),
                n_draws=int(cfg.get("n_draws", base.chain.n_draws)),
                thin=int(cfg.get("thin", base.chain.thin)),
                keep_factors="none",
            ),
            min_months=int(cfg.get("min_months", base.min_months)),
            max_regimes=int(cfg.get("max_regimes", base.max_regimes)),
            thresholds=tuple(cfg.get("thresholds", base.thresholds)),
            ml_mode=str(cfg.get("ml_mode", base.ml_mode)),
            require_improvement=bool(cfg.get("require_improvement", base.require_improvement)),
            near_tie_margin=float(cfg.get("near_tie_margin", base.near_tie_margin)),
            workers=args.threads,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    result = grow_tree(data, macro, yields.grid, n_macro=n_macro, config=config,
                       root_seed=args.seed)

    (out / "tree.json").write_text(result.tree.to_json() + "\n")
    labels = pd.DataFrame({
        "date": [str(d) for d in macro.dates],
        "regime": result.labels.labels,
    })
    labels.to_csv(out / "labels.csv", **_CSV_KW)
    evals = pd.DataFrame([
        {
            "level": e.level,
            "leaf": "" if e.leaf is None else e.leaf,
            "var": "" if e.var is None else e.var,
            "threshold": "" if e.threshold is None else e.threshold,
            "n_regimes": e.n_regimes,
            "log_ml": e.log_ml,
            "accept_rate": e.accept_rate,
            "status": e.status,
            "chosen": int(e.chosen),
            "message": e.message,
        }
        for e in result.evaluations
    ])
    evals.to_csv(out / "evaluations.csv", **_CSV_KW)
    _write_manifest(
        out, "grow",
        inputs={
            "yields": _sha256_file(Path(args.yields)),
            "macro": _sha256_file(Path(args.macro)),
            "config": _sha256_file(Path(args.config)) if args.config else None,
        },
        settings={
            "seed": args.seed,
            "threads": args.threads,
            "window": args.window,
            "candidates": args.candidates,
            "factors": args.factors,
            "log_ml": result.log_ml,
            "n_regimes": result.tree.n_regimes,
        },
        outputs=["tree.json", "labels.csv", "evaluations.csv"],
    )
    return 0


def cmd_fit(args) -> int:
    out = _outdir(args)
    yields = load_yield_panel(args.yields)
    macro = _macro_panel(args)
    tree = _load_tree(args.tree)
    data, n_macro = stack_observations(yields, macro, with_factors=bool(args.factors))
    labels = assign_labels(tree, macro)
    chain = _chain_config(_load_json_config(args.config), ChainConfig())
    try:
        draws = run_chain(
            data, labels, yields.grid, n_macro=n_macro, chain=chain, seed=args.seed
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    save_draws(draws, out / "draws")

    pd.DataFrame({
        "date": [str(d) for d in macro.dates],
        "regime": labels.labels,
    }).to_csv(out / "labels.csv", **_CSV_KW)
    _write_manifest(
        out, "fit",
        inputs={
            "yields": _sha256_file(Path(args.yields)),
            "macro": _sha256_file(Path(args.macro)),
            "tree": _sha256_file(Path(args.tree)),
            "config": _sha256_file(Path(args.config)) if args.config else None,
        },
        settings={
            "seed": args.seed,
            "window": args.window,
            "candidates": args.candidates,
            "factors": args.factors,
            "n_burn": chain.n_burn,
            "n_draws": chain.n_draws,
            "thin": chain.thin,
            "accept_rate": draws.accept_rate,
        },
        outputs=["draws", "labels.csv"],
    )
    return 0


def cmd_report(args) -> int:
    out = _outdir(args)
    fit_dir = Path(args.fit)
    if not (fit_dir / "draws" / "manifest.json").exists():
        raise InputError(f"{args.fit} does not look like a fit directory (no draws/)")
    draws = load_draws(fit_dir / "draws")
    yields = load_yield_panel(args.yields)
    macro = _macro_panel(args)
    tree = _load_tree(args.tree)
    labels = assign_labels(tree, macro)
    if labels.n_regimes != draws.n_regimes:
        raise InputError(
            f"tree has {labels.n_regimes} regimes but the fit stored {draws.n_regimes}"
        )
    aligned = align_yields(yields, macro)
    if aligned.n_periods != draws.factor_mean.shape[0]:
        raise InputError("panel length does not match the stored factor path")

    residual_report(draws, labels, aligned).to_csv(out / "residuals.csv", **_CSV_KW)
    ttest_report(draws).to_csv(out / "contrasts.csv", **_CSV_KW)
    girfs = girf_table(draws, horizon=args.horizon)
    girfs.to_csv(out / "girf.csv", **_CSV_KW)
    fits = fitted_frame(draws, labels, aligned)
    fits.to_csv(out / "fitted.csv", **_CSV_KW)
    outputs = ["residuals.csv", "contrasts.csv", "girf.csv", "fitted.csv"]
    if args.plots:
        plot_fitted(fits, out / "fitted.svg")
        plot_girf(girfs, out / "girf.svg")
        plot_decay(draws, out / "decay.svg")
        outputs += ["fitted.svg", "girf.svg", "decay.svg"]
    _write_manifest(
        out, "report",
        inputs={
            "fit": _sha256_file(fit_dir / "draws" / "manifest.json"),
            "yields": _sha256_file(Path(args.yields)),
            "macro": _sha256_file(Path(args.macro)),
            "tree": _sha256_file(Path(args.tree)),
        },
        settings={"horizon": args.horizon, "plots": bool(args.plots),
                  "window": args.window, "candidates": args.candidates,
                  "factors": args.factors},
        outputs=outputs,
    )
    return 0


def cmd_stats(args) -> int:
    out = _outdir(args)
    panel = load_yield_panel(args.yields)
    try:
        table = descriptive_stats(panel)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    table.reset_index().to_csv(out / "descriptive.csv", **_CSV_KW)
    _write_manifest(
        out, "stats",
        inputs={"yields": _sha256_file(Path(args.yields))},
        settings={},
        outputs=["descriptive.csv"],
    )
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_macro_options(sub) -> None:
    sub.add_argument("--macro", required=True, help="raw macro CSV (date + series)")
    sub.add_argument("--candidates", default="",
                     help="comma list of split candidates (default: all macro columns)")
    sub.add_argument("--factors", default="",
                     help="comma list of macro columns observed alongside yields")
    sub.add_argument("--window", type=int, default=120,
                     help="months in the rolling standardization window")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsregimes",
        description="Regime-switching Nelson-Siegel yield curve models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="draw a synthetic panel")
    sim.add_argument("--design", default="threeregime",
                     help="bundled design name or a design JSON path")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    grow = commands.add_parser("grow", help="search for a regime tree")
    grow.add_argument("--yields", required=True)
    _add_macro_options(grow)
    grow.add_argument("--config", help="JSON with search settings")
    grow.add_argument("--seed", type=int, default=0)
    grow.add_argument("--threads", type=int, default=1,
                      help="worker processes for candidate fits")
    grow.add_argument("--out", required=True)
    grow.set_defaults(func=cmd_grow)

    fit = commands.add_parser("fit", help="run the sampler under a fixed tree")
    fit.add_argument("--yields", required=True)
    _add_macro_options(fit)
    fit.add_argument("--tree", required=True, help="tree JSON from grow")
    fit.add_argument("--config", help="JSON with chain settings")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    rep = commands.add_parser("report", help="tables and figures for a fit")
    rep.add_argument("--fit", required=True, help="output directory of a fit run")
    rep.add_argument("--yields", required=True)
    _add_macro_options(rep)
    rep.add_argument("--tree", required=True)
    rep.add_argument("--horizon", type=int, default=24)
    rep.add_argument("--plots", action="store_true", help="also write SVG figures")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)

    st = commands.add_parser("stats", help="descriptive statistics of a yield panel")
    st.add_argument("--yields", required=True)
    st.add_argument("--out", required=True)
    st.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (InputError, PanelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
