"""Command-line driver: ingest raw files, run the backtest grid, report results.

Exit codes: 0 success, 1 input or processing error, 2 bad flags. Runs are
reproducible: (dataset bytes, resolved config, seed) determine every output
byte, and the resolved config embedded in a results file can be written back
out as a config file to reproduce the run.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path
from typing import Sequence

from popcast.charts import svg_chart
from popcast.core import SplitSpec
from popcast.eval import build_leaderboard, leaderboard_to_csv, leaderboard_to_json, win_rate
from popcast.experiment import RunConfig, results_from_json, results_to_json, run_experiment
from popcast.forecasters import ArimaConfig, MODEL_NAMES, PatchDecoderConfig, RecurrentConfig
from popcast.ingest import build_dataset, dataset_from_json, dataset_to_json

__all__ = ["main"]

_DEFAULT_FLAT = RunConfig().to_flat()
_VALIDATION_SPLIT = {"split.train_end": "2013", "split.test_start": "2014", "split.test_end": "2016"}


def _parse_config_file(path: str) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8")
    flat: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ValueError(f"{path} line {lineno}: expected 'section.key = value'")
        key, value = key.strip(), value.strip()
        if key not in _DEFAULT_FLAT:
            raise ValueError(f"{path} line {lineno}: unknown config key {key!r}")
        flat[key] = value
    return flat


def _section_config(cls, defaults, flat: dict[str, str], section: str):
    kwargs = {}
    for f in fields(cls):
        raw = flat[f"{section}.{f.name}"]
        kind = type(getattr(defaults, f.name))
        try:
            kwargs[f.name] = kind(raw)
        except ValueError:
            raise ValueError(f"config {section}.{f.name}: cannot parse {raw!r}") from None
    return cls(**kwargs)


def _config_from_flat(flat: dict[str, str]) -> RunConfig:
    models = tuple(m.strip() for m in flat["run.models"].split(",") if m.strip())
    split = SplitSpec(
        int(flat["split.train_end"]), int(flat["split.test_start"]), int(flat["split.test_end"])
    )
    return RunConfig(
        dataset_path=flat["run.dataset"],
        models=models,
        split=split,
        seed=int(flat["run.seed"]),
        arima=_section_config(ArimaConfig, ArimaConfig(), flat, "arima"),
        recurrent=_section_config(RecurrentConfig, RecurrentConfig(), flat, "rnn"),
        patch=_section_config(PatchDecoderConfig, PatchDecoderConfig(), flat, "patchtf"),
    )


def _resolve_run_config(args) -> RunConfig:
    flat = dict(_DEFAULT_FLAT)
    if args.config:
        flat.update(_parse_config_file(args.config))
    for pair in args.set or []:
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or key not in _DEFAULT_FLAT:
            raise ValueError(f"--set expects a known 'section.key=value', got {pair!r}")
        flat[key] = value.strip()
    if args.validation:
        flat.update(_VALIDATION_SPLIT)
    if args.models:
        flat["run.models"] = args.models
    if args.seed is not None:
        flat["run.seed"] = str(args.seed)
    if args.dataset:
        flat["run.dataset"] = args.dataset
    config = _config_from_flat(flat)
    if not config.dataset_path:
        raise ValueError("no dataset given: pass --dataset or set run.dataset in the config")
    return config


def _cmd_ingest(args) -> int:
    dataset = build_dataset(args.fred_dir, args.census_file)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dataset_to_json(dataset), encoding="utf-8")
    for key in dataset.sorted_keys():
        print(f"{key}: {len(dataset.series[key])} points")
    for warning in dataset.warnings:
        print(f"warning: {warning}")
    print(f"wrote {len(dataset.series)} series to {out}")
    return 0


def _cmd_run(args) -> int:
    config = _resolve_run_config(args)
    dataset = dataset_from_json(Path(config.dataset_path).read_text(encoding="utf-8"))
    results, failures = run_experiment(dataset, config)
    for failure in failures:
        print(
            f"warning: {failure['state']}/{failure['race']} {failure['model']} "
            f"failed: {failure['error']}",
            file=sys.stderr,
        )
    if not results:
        print("error: every cell failed", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "results.json"
    path.write_text(results_to_json(config, results, failures), encoding="utf-8")
    print(f"wrote {len(results)} results ({len(failures)} failures) to {path}")
    return 0


def _cmd_report(args) -> int:
    config_flat, results, failures = results_from_json(
        Path(args.results).read_text(encoding="utf-8")
    )
    models = [m for m in config_flat["run.models"].split(",") if m]
    by_key: dict = {}
    for r in results:
        by_key.setdefault(r.key, {})[r.model_name] = r
    complete = [k for k in sorted(by_key, key=str) if set(models) <= set(by_key[k])]
    omitted = [k for k in sorted(by_key, key=str) if k not in complete]
    failed_keys = {f"{f['state']}/{f['race']}" for f in failures}

    board = build_leaderboard(
        [by_key[k][m] for k in complete for m in models], models
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format in ("both", "csv"):
        (out_dir / "leaderboard.csv").write_text(leaderboard_to_csv(board), encoding="utf-8")
    if args.format in ("both", "json"):
        (out_dir / "leaderboard.json").write_text(leaderboard_to_json(board), encoding="utf-8")

    for key, cells in sorted(by_key.items(), key=lambda kv: str(kv[0])):
        first = next(iter(cells.values()))
        chart = svg_chart(
            str(key),
            first.years,
            first.actual,
            {m: cells[m].predicted for m in models if m in cells},
        )
        name = f"{key.state.value}_{key.race.value}.svg"
        (out_dir / name).write_text(chart, encoding="utf-8")

    for model in models:
        wins, total, fraction = win_rate(board, model)
        print(f"{model}: wins {wins}/{total} ({100 * fraction:.2f}%)")
    for key in omitted:
        print(f"omitted from leaderboard (incomplete row): {key}")
    for text in sorted(failed_keys):
        print(f"had failures: {text}")
    print(f"wrote report for {len(complete)} series to {out_dir}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="popcast",
        description="Annual population forecasting benchmark runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse raw FRED/census files into a dataset")
    p_ingest.add_argument("--fred-dir", required=True, help="directory of STATE_RACE.csv files")
    p_ingest.add_argument("--census-file", required=True, help="census estimates CSV")
    p_ingest.add_argument("--out", required=True, help="output dataset JSON path")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_run = sub.add_parser("run", help="fit every (series, model) cell and record forecasts")
    p_run.add_argument("--dataset", help="dataset JSON from ingest")
    p_run.add_argument("--models", help=f"comma list from {','.join(MODEL_NAMES)}")
    p_run.add_argument("--seed", type=int, help="64-bit unsigned run seed")
    p_run.add_argument("--config", help="flat 'section.key = value' config file")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p_run.add_argument(
        "--validation",
        action="store_true",
        help="evaluate on the 2014-2016 validation window instead of the test years",
    )
    p_run.add_argument("--out", required=True, help="output directory for results.json")
    p_run.set_defaults(func=_cmd_run)

    p_report = sub.add_parser("report", help="leaderboard, win rates and charts from results")
    p_report.add_argument("--results", required=True, help="results.json from run")
    p_report.add_argument("--format", choices=("both", "csv", "json"), default="both")
    p_report.add_argument("--out", required=True, help="output directory")
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
