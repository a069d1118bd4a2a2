"""Command-line experiment runner with CSV/JSON emission.

Usage: hedgebandits --config cfg.json [--mode NAME] [--seeds 0,1,2]
                    [--out DIR] [--audit-only]

The config file is a flat JSON object whose keys are ExperimentConfig
fields. Outputs land in the chosen directory: runs.csv (one row per run),
summary.json (means, stds, improvement ratios), audit.json (bound checks),
and hedge_trace.csv when an audit produced a sample trajectory. Exit code
is 0 only if every enabled bound audit passed. The worker-pool size comes
from the HEDGEBANDITS_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .experiments import (
    MODES,
    ExperimentConfig,
    ExperimentResult,
    _MODE_DEFAULTS,
    audit_benchmark_monotonicity,
    audit_hedge_sweep,
    config_hash,
    run,
)

_COLUMNS = [
    "mode",
    "arm",
    "seed",
    "config_hash",
    "h",
    "T",
    "M",
    "el_per",
    "el_fpr",
    "el_fnr",
    "best_ll_per",
    "avg_ll_per",
    "worst_ll_per",
    "explore_fraction",
    "explore_per",
    "exploit_per",
]


def load_config(path: str | None, mode_override: str | None, seeds: str | None) -> ExperimentConfig:
    fields: dict = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            fields = json.load(fh)
        if not isinstance(fields, dict):
            raise SystemExit(f"config {path} must hold a JSON object")
    mode = mode_override or fields.pop("mode", "table1")
    if mode not in MODES:
        raise SystemExit(f"unknown mode {mode!r}; choose one of {', '.join(MODES)}")
    merged = dict(_MODE_DEFAULTS.get(mode, {}))
    merged.update(fields)
    if seeds:
        try:
            merged["seeds"] = tuple(int(s) for s in seeds.split(",") if s.strip())
        except ValueError:
            raise SystemExit(f"--seeds must be a comma-separated integer list, got {seeds!r}")
    try:
        return ExperimentConfig(mode=mode, **merged)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"invalid config: {exc}")


def _jsonable(value):
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_outputs(result: ExperimentResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if result.rows:
        extra = sorted({k for row in result.rows for k in row} - set(_COLUMNS))
        with open(out_dir / "runs.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=_COLUMNS + extra, restval="")
            writer.writeheader()
            for row in result.rows:
                writer.writerow({k: "" if isinstance(v, float) and math.isnan(v) else v for k, v in row.items()})
    summary = {
        "mode": result.config.mode,
        "config": result.config.__dict__,
        "config_hash": config_hash(result.config),
        **result.summary,
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    audits = [{k: v for k, v in a.items() if k != "sample_trace"} for a in result.audits]
    with open(out_dir / "audit.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable({"all_ok": result.all_audits_pass, "audits": audits}), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for audit in result.audits:
        trace = audit.get("sample_trace")
        if trace:
            _write_hedge_trace(out_dir / "hedge_trace.csv", trace)


def _write_hedge_trace(path: Path, trace: dict) -> None:
    losses = trace["losses"]
    qs = trace["q"]
    m = len(qs[0])
    cumulative = [0] * m
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"q_{i+1}" for i in range(m)] + [f"L_{i+1}" for i in range(m)])
        for t, (q, l) in enumerate(zip(qs, losses), start=1):
            cumulative = [c + int(v) for c, v in zip(cumulative, l)]
            writer.writerow([t] + [repr(float(v)) for v in q] + cumulative)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hedgebandits", description=__doc__)
    parser.add_argument("--config", help="JSON config file (ExperimentConfig fields)")
    parser.add_argument("--mode", help=f"override the mode ({', '.join(MODES)})")
    parser.add_argument("--seeds", help="comma-separated seed list overriding runs")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument(
        "--audit-only",
        action="store_true",
        help="run only the bound audits, skipping dataset experiments",
    )
    args = parser.parse_args(argv)

    cfg = load_config(args.config, args.mode, args.seeds)
    if args.audit_only and cfg.mode != "synthetic-audit":
        # lightweight generic audits so any config can be sanity-checked
        result = ExperimentResult(config=cfg)
        result.audits = [audit_hedge_sweep(n_matrices=100), audit_benchmark_monotonicity(max_T=6)]
        result.summary = {"audit_only": True}
    else:
        result = run(cfg)

    out_dir = Path(args.out)
    write_outputs(result, out_dir)
    print(f"wrote {out_dir}/summary.json (config {config_hash(cfg)})")
    for audit in result.audits:
        status = "ok" if audit.get("ok") else "VIOLATED"
        print(f"audit {audit['name']}: {status}")
    if not result.all_audits_pass:
        failed = [a["name"] for a in result.audits if not a.get("ok")]
        print(f"bound audit failed: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
