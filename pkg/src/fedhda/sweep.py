"""Sweep execution and CSV emission.

One run directory per (scheme, snr, budget, seed) cell holding its raw
records, plus a single aggregate CSV with per-round means and standard
deviations over seeds. Output is byte-deterministic for a given config.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import federation, models
from .config import ExperimentConfig

AGGREGATE_FIELDS = (
    "scheme",
    "snr_db",
    "budget",
    "round",
    "n_seeds",
    "acc_global_mean",
    "acc_global_std",
    "acc_local_mean",
    "acc_local_std",
    "success_rate",
    "mse_mean",
    "symbols_total_mean",
)


def output_dir(cfg: ExperimentConfig) -> str:
    """Config out_dir, overridable via the FEDHDA_OUT_DIR environment variable."""
    return os.environ.get("FEDHDA_OUT_DIR", cfg.out_dir)


def run_cell(
    cfg: ExperimentConfig,
    kind: str,
    snr_db: float,
    budget: int,
    seed: int,
    train_set: models.DataShard,
    test_set: models.DataShard,
) -> list[federation.RoundRecord]:
    point = federation.ExperimentPoint(
        scheme_cfg=cfg.scheme_config(kind, budget),
        snr_db=snr_db,
        seed=seed,
        arch=cfg.model_arch(),
        train_set=train_set,
        test_set=test_set,
        n_learners=cfg.n_learners,
        rounds=cfg.rounds,
        epochs=cfg.local_epochs,
        train_cfg=cfg.train_config(),
        agg_lr=cfg.agg_lr,
        fading_std_db=cfg.fading_std_db,
    )
    return federation.run_experiment(point)


def write_records(records: list[federation.RoundRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(federation.RoundRecord.CSV_FIELDS)
        for rec in records:
            writer.writerow(rec.csv_row())


def _round_summary(records: list[federation.RoundRecord]):
    """Per (scheme, snr, budget, seed, round): end-of-round accuracy and usage."""
    out = {}
    symbols_cum = {}
    for rec in records:
        run_key = (rec.scheme, rec.snr_db, rec.budget, rec.seed)
        symbols_cum[run_key] = symbols_cum.get(run_key, 0) + rec.symbols_used
        key = run_key + (rec.round,)
        cur = out.setdefault(
            key, {"acc_global": rec.acc_global, "acc_local": rec.acc_local_mean,
                  "n_tx": 0, "n_ok": 0, "mse": [], "symbols": 0}
        )
        cur["acc_global"] = rec.acc_global
        cur["acc_local"] = rec.acc_local_mean
        cur["symbols"] = symbols_cum[run_key]
        if rec.direction in ("down", "up"):
            cur["n_tx"] += 1
            cur["n_ok"] += int(rec.success)
            if rec.success and np.isfinite(rec.mse):
                cur["mse"].append(rec.mse)
    return out


def aggregate_csv(all_records: list[federation.RoundRecord], path: str) -> None:
    """Mean/std over seeds per (scheme, snr, budget, round)."""
    summary = _round_summary(all_records)
    groups: dict[tuple, dict[int, dict]] = {}
    for (scheme, snr, budget, seed, rnd), vals in summary.items():
        groups.setdefault((scheme, snr, budget, rnd), {})[seed] = vals

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_FIELDS)
        for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
            scheme, snr, budget, rnd = key
            cells = groups[key]
            accs = np.array([cells[s]["acc_global"] for s in sorted(cells)])
            locs = np.array([cells[s]["acc_local"] for s in sorted(cells)])
            n_tx = sum(cells[s]["n_tx"] for s in cells)
            n_ok = sum(cells[s]["n_ok"] for s in cells)
            mses = [m for s in cells for m in cells[s]["mse"]]
            syms = np.array([cells[s]["symbols"] for s in sorted(cells)])
            writer.writerow(
                [
                    scheme,
                    f"{snr:.10g}",
                    str(budget),
                    str(rnd),
                    str(len(cells)),
                    f"{accs.mean():.10g}",
                    f"{accs.std():.10g}",
                    f"{locs.mean():.10g}",
                    f"{locs.std():.10g}",
                    f"{(n_ok / n_tx if n_tx else 1.0):.10g}",
                    f"{(float(np.mean(mses)) if mses else float('nan')):.10g}",
                    f"{syms.mean():.10g}",
                ]
            )


def run_sweep(cfg: ExperimentConfig) -> tuple[str, list[str]]:
    """Execute every sweep cell; returns (aggregate csv path, run dirs)."""
    cfg.validate()
    train_set, test_set = cfg.datasets()
    out = output_dir(cfg)
    runs_root = os.path.join(out, "runs")
    os.makedirs(runs_root, exist_ok=True)

    all_records: list[federation.RoundRecord] = []
    run_dirs = []
    for kind in cfg.schemes:
        for snr in cfg.snr_db:
            for budget in cfg.symbol_budgets:
                for seed in cfg.seeds:
                    records = run_cell(cfg, kind, snr, budget, seed, train_set, test_set)
                    run_dir = os.path.join(
                        runs_root, f"{kind}_snr{snr:g}_b{budget}_seed{seed}"
                    )
                    os.makedirs(run_dir, exist_ok=True)
                    write_records(records, os.path.join(run_dir, "records.csv"))
                    run_dirs.append(run_dir)
                    all_records.extend(records)

    agg_path = os.path.join(out, "aggregate.csv")
    aggregate_csv(all_records, agg_path)
    return agg_path, run_dirs
