"""Command-line entry point.

    firegrid synth     --task prevention --seed 42 --out runs/
    firegrid train     --task prevention --data labeled.csv --out runs/
    firegrid tune      --task prevention --data labeled.csv --seed 42 --out runs/
    firegrid evaluate  --task prevention --data labeled.csv --out runs/
    firegrid ingest    --config run.json
    firegrid classify  --config run.json
    firegrid dispatch  --config run.json
    firegrid simulate  --config run.json --fleet-size 3
    firegrid pipeline  --config run.json

Settings come from built-in defaults, then the ``--config`` file (JSON or
TOML; keys mirror the flag names), then flags. Relative paths in a config
file are resolved against the file's directory. Exit status is 0 on success,
1 for invalid input or configuration and 2 when a stage fails at run time.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from . import dispatch as dsp
from . import evaluation as ev
from . import geodata as geo
from . import learners as lrn
from . import pipeline as pl

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COMMANDS = ("synth", "train", "tune", "evaluate", "ingest", "classify", "dispatch", "simulate", "pipeline")
HYPER_MIN, HYPER_MAX = 1, 15


class ConfigError(ValueError):
    """Invalid configuration; exit status 1."""


@dataclass
class RunConfig:
    task: str = "prevention"
    data: str | None = None
    model: str | None = None
    out: str = "out"
    seed: int = 42
    n_estimators: int = 7
    max_depth: int = 5
    k: int = 5
    n_per_class: int = 189
    train_fraction: float = 0.8
    cell_size_m: float = geo.DEFAULT_CELL_SIZE_M
    band_width_m: float = dsp.DEFAULT_BAND_WIDTH_M
    fleet_size: int = 2
    base: list[float] | None = None
    allow_extended: bool = False
    layers: dict[str, str] = field(default_factory=dict)
    no_spray: str | None = None
    excluded_landcover: list[int] = field(default_factory=lambda: sorted(geo.DEFAULT_LANDCOVER_REASONS))
    rainfall_threshold: float = geo.DEFAULT_RAINFALL_THRESHOLD
    drone: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k.replace("_", "-"): v for k, v in asdict(self).items()}


CONFIG_KEYS = {f.name for f in fields(RunConfig)}
PATH_KEYS = ("data", "model", "out", "no_spray")


def _flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def read_config_file(path: str | Path) -> dict:
    """Parse a JSON or TOML config into RunConfig field names (dashes -> underscores)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config: file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"config: cannot parse {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    out = {}
    for key, value in raw.items():
        name = key.replace("-", "_")
        if name not in CONFIG_KEYS:
            raise ConfigError(f"config: unknown key {key!r}")
        out[name] = value
    base_dir = path.parent
    for name in PATH_KEYS:
        if out.get(name) is not None:
            out[name] = str(base_dir / out[name])
    if "layers" in out:
        if not isinstance(out["layers"], dict):
            raise ConfigError("config: 'layers' must map parameter names to files")
        out["layers"] = {k: str(base_dir / v) for k, v in out["layers"].items()}
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in CONFIG_KEYS:
        flag_value = getattr(args, name, None)
        if flag_value is not None and flag_value is not False:
            values[name] = flag_value
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"config: {exc}") from None
    return _coerce(cfg)


def _coerce(cfg: RunConfig) -> RunConfig:
    def as_type(name, kind):
        value = getattr(cfg, name)
        if kind is int and isinstance(value, float) and value != int(value):
            raise ConfigError(f"{_flag_name(name)}: expected an integer, got {value!r}")
        try:
            return kind(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{_flag_name(name)}: expected {kind.__name__}, got {value!r}") from None

    updates = {}
    for name in ("seed", "n_estimators", "max_depth", "k", "n_per_class", "fleet_size"):
        updates[name] = as_type(name, int)
    for name in ("cell_size_m", "band_width_m", "rainfall_threshold", "train_fraction"):
        updates[name] = as_type(name, float)
    return replace(cfg, **updates)


def validate(cfg: RunConfig, command: str) -> None:
    if cfg.task not in geo.SCHEMAS:
        raise ConfigError(f"--task: must be one of {sorted(geo.SCHEMAS)}, got {cfg.task!r}")
    hi = None if cfg.allow_extended else HYPER_MAX
    for name in ("n_estimators", "max_depth"):
        value = getattr(cfg, name)
        if value < HYPER_MIN or (hi is not None and value > hi):
            bound = f"[{HYPER_MIN}, {HYPER_MAX}]" if hi else f">= {HYPER_MIN}"
            raise ConfigError(f"{_flag_name(name)}: must be {bound} (use --allow-extended past {HYPER_MAX}), got {value}")
    if cfg.k < 2:
        raise ConfigError(f"--k: must be >= 2, got {cfg.k}")
    if cfg.n_per_class < 1:
        raise ConfigError(f"--n-per-class: must be >= 1, got {cfg.n_per_class}")
    if cfg.fleet_size < 1:
        raise ConfigError(f"--fleet-size: must be >= 1, got {cfg.fleet_size}")
    if not cfg.cell_size_m > 0:
        raise ConfigError(f"--cell-size-m: must be positive, got {cfg.cell_size_m}")
    if not 0 <= cfg.band_width_m <= cfg.cell_size_m / 2:
        raise ConfigError(f"--band-width-m: must be in [0, cell-size-m / 2], got {cfg.band_width_m}")
    if not 0 < cfg.train_fraction < 1:
        raise ConfigError(f"--train-fraction: must be in (0, 1), got {cfg.train_fraction}")
    if cfg.rainfall_threshold < 0:
        raise ConfigError("rainfall-threshold: must be >= 0")
    if cfg.base is not None and len(cfg.base) != 2:
        raise ConfigError("base: expected [lat, lon]")
    unknown = {k.replace("-", "_") for k in cfg.drone} - {f.name for f in fields(dsp.DroneSpec)}
    if unknown:
        raise ConfigError(f"drone: unknown key {sorted(unknown)[0]!r}")
    try:
        drone_spec(cfg)
        mask_spec(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    needs_data = command in ("train", "tune", "evaluate")
    if needs_data and not cfg.data:
        raise ConfigError(f"--data: required for {command}")
    if cfg.data and needs_data or (command == "pipeline" and cfg.data):
        _require_file("--data", cfg.data)
    if command in ("ingest", "classify", "pipeline"):
        schema = geo.schema_for(cfg.task)
        for name in cfg.layers:
            if name not in geo.RAW_PARAMETERS:
                raise ConfigError(f"layers: unknown parameter {name!r}")
        for name in schema.required_layers():
            if name not in cfg.layers:
                raise ConfigError(f"layers: missing required layer {name!r} for {cfg.task}")
            _require_file(f"layers.{name}", cfg.layers[name])
        if cfg.no_spray:
            _require_file("--no-spray", cfg.no_spray)
    if command == "classify" or (command == "pipeline" and not cfg.data):
        if not cfg.model:
            raise ConfigError(f"--model: required for {command}")
        _require_file("--model", cfg.model)


def _require_file(key: str, path: str) -> None:
    if not Path(path).is_file():
        raise ConfigError(f"{key}: file not found: {path}")


def drone_spec(cfg: RunConfig) -> dsp.DroneSpec:
    return dsp.DroneSpec(**{k.replace("-", "_"): float(v) for k, v in cfg.drone.items()})


def mask_spec(cfg: RunConfig) -> geo.MaskSpec:
    return geo.MaskSpec(frozenset(cfg.excluded_landcover), cfg.rainfall_threshold)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dataset(cfg: RunConfig) -> geo.LabeledDataset:
    return geo.load_labeled_dataset(cfg.data, geo.schema_for(cfg.task))


def cmd_synth(cfg: RunConfig) -> str:
    ds = geo.synth_generate(cfg.task, cfg.n_per_class, cfg.seed)
    path = _out(cfg) / "labeled.csv"
    geo.write_labeled_dataset(ds, path)
    return f"synth: wrote {len(ds)} {cfg.task} samples (seed {cfg.seed}) to {path}"


def _train(cfg: RunConfig) -> tuple[lrn.RandomForestModel, Path]:
    model = lrn.fit_forest(_dataset(cfg), cfg.n_estimators, cfg.max_depth, cfg.seed)
    path = _out(cfg) / "model.json"
    lrn.save_model(model, path)
    return model, path


def cmd_train(cfg: RunConfig) -> str:
    model, path = _train(cfg)
    return (f"train: {cfg.task} forest n_estimators={model.n_estimators} max_depth={model.max_depth} "
            f"seed={model.seed} id={lrn.model_id(model)} -> {path}")


def cmd_tune(cfg: RunConfig) -> str:
    train, test = ev.stratified_split(_dataset(cfg), cfg.train_fraction, cfg.seed)
    result = ev.tune_sweep(train, test, cfg.seed)
    out = _out(cfg)
    ev.write_sweep_csv(result, out / "sweep.csv")
    n, d = result.best
    summary = {
        "seed": cfg.seed,
        "task": cfg.task,
        "train_size": len(train),
        "test_size": len(test),
        "best": {"n_estimators": n, "max_depth": d,
                 "train_accuracy": result.grid[result.best][0], "test_accuracy": result.grid[result.best][1]},
    }
    (out / "tuning.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return (f"tune: {len(result.grid)} cells, best n_estimators={n} max_depth={d} "
            f"test_accuracy={result.grid[result.best][1]:.4f} -> {out / 'sweep.csv'}")


def cmd_evaluate(cfg: RunConfig) -> str:
    ds = _dataset(cfg)
    train, test = ev.stratified_split(ds, cfg.train_fraction, cfg.seed)
    if cfg.model:
        model = lrn.load_model(cfg.model)
    else:
        model = lrn.fit_forest(train, cfg.n_estimators, cfg.max_depth, cfg.seed)
    report = ev.evaluate_model(model, test)
    cv = ev.cross_validate(ds, model.n_estimators, model.max_depth, cfg.k, cfg.seed)
    report.cv_fold_accuracies = cv.fold_accuracies
    report.metadata = {
        "seed": cfg.seed, "task": cfg.task, "k": cfg.k, "model_id": lrn.model_id(model),
        "train_size": len(train), "test_size": len(test),
        "train_accuracy": ev.evaluate_model(model, train).accuracy,
    }
    path = _out(cfg) / "report.json"
    ev.save_report(report, path)
    return (f"evaluate: test accuracy={report.accuracy:.4f} precision={report.precision_macro:.4f} "
            f"recall={report.recall_macro:.4f} cv_mean={cv.mean:.4f} -> {path}")


def _pipeline_config(cfg: RunConfig) -> pl.PipelineConfig:
    return pl.PipelineConfig(
        task=cfg.task,
        layers=dict(cfg.layers),
        model_path=cfg.model or "",
        out_dir=cfg.out,
        mask=mask_spec(cfg),
        no_spray_path=cfg.no_spray,
        cell_size_m=cfg.cell_size_m,
    )


def cmd_ingest(cfg: RunConfig) -> str:
    grid = pl.build_grid(_pipeline_config(cfg))
    path = _out(cfg) / "grid.json"
    geo.save_grid(grid, path)
    masked = sum(c.masked for c in grid.cells)
    return f"ingest: {len(grid.cells)} cells, {masked} masked -> {path}"


def cmd_classify(cfg: RunConfig) -> str:
    pcfg = _pipeline_config(cfg)
    report = pl.run_prevention(pcfg) if cfg.task == "prevention" else pl.run_detection(pcfg)
    return (f"classify: {report.total_cells} cells, {report.masked_cells} masked, "
            f"{len(report.targets)} targets ({report.suppressed_cells} no-spray) -> {Path(cfg.out) / 'targets.json'}")


def cmd_dispatch(cfg: RunConfig) -> str:
    out = _out(cfg)
    try:
        report = pl.load_report(out / "targets.json")
    except (OSError, ValueError, KeyError) as exc:
        raise pl.StageError("dispatch", exc) from exc
    plan = dsp.plan_dispatch(report, drone_spec(cfg), cfg.cell_size_m, cfg.band_width_m)
    plan = replace(plan, metadata={"seed": cfg.seed, "model_id": report.model_id,
                                   "config_hash": report.metadata.get("config_hash")})
    dsp.save_plan(plan, out / "plan.json", out / "plan.csv")
    t = plan.totals
    return f"dispatch: {t['targets']} targets, {t['acres']:.2f} acres, {t['drones_parallel']} drone flights -> {out / 'plan.json'}"


def _default_base(plan: dsp.DispatchPlan) -> tuple[float, float]:
    if not plan.entries:
        return (0.0, 0.0)
    lat = sum(e.lat for e in plan.entries) / len(plan.entries)
    lon = sum(e.lon for e in plan.entries) / len(plan.entries)
    return (round(lat, 6), round(lon, 6))


def cmd_simulate(cfg: RunConfig) -> str:
    out = _out(cfg)
    try:
        plan = dsp.load_plan(out / "plan.json")
    except (OSError, ValueError, KeyError) as exc:
        raise pl.StageError("simulate", exc) from exc
    base = tuple(cfg.base) if cfg.base else _default_base(plan)
    events = dsp.simulate_fleet(plan, cfg.fleet_size, base)
    dsp.write_event_log(events, out / "events.csv")
    end = events[-1].t_seconds if events else 0.0
    return f"simulate: {len(events)} events, fleet {cfg.fleet_size}, done at t={end:.1f}s -> {out / 'events.csv'}"


def cmd_pipeline(cfg: RunConfig) -> str:
    lines = []
    if cfg.data:
        _, model_path = _train(cfg)
        cfg = replace(cfg, model=str(model_path))
        lines.append(f"pipeline: trained {model_path}")
    lines.append(cmd_classify(cfg))
    lines.append(cmd_dispatch(cfg))
    lines.append(cmd_simulate(cfg))
    return "\n".join(lines)


HANDLERS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "ingest": cmd_ingest,
    "classify": cmd_classify,
    "dispatch": cmd_dispatch,
    "simulate": cmd_simulate,
    "pipeline": cmd_pipeline,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--task", choices=sorted(geo.SCHEMAS))
    common.add_argument("--data")
    common.add_argument("--model")
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--n-estimators", dest="n_estimators", type=int)
    common.add_argument("--max-depth", dest="max_depth", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--n-per-class", dest="n_per_class", type=int)
    common.add_argument("--train-fraction", dest="train_fraction", type=float)
    common.add_argument("--cell-size-m", dest="cell_size_m", type=float)
    common.add_argument("--band-width-m", dest="band_width_m", type=float)
    common.add_argument("--fleet-size", dest="fleet_size", type=int)
    common.add_argument("--no-spray", dest="no_spray")
    common.add_argument("--base", nargs=2, type=float, metavar=("LAT", "LON"))
    common.add_argument("--allow-extended", dest="allow_extended", action="store_true")
    common.add_argument("--print-config", dest="print_config", action="store_true")

    parser = _Parser(prog="firegrid", description="Wildfire hotspot/fire classification and drone dispatch.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError("missing command; expected one of " + ", ".join(COMMANDS))
        cfg = resolve_config(args)
        if args.print_config:
            print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
            return 0
        validate(cfg, args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        print(HANDLERS[args.command](cfg))
    except pl.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
