"""Static plots from aggregate CSVs: accuracy vs SNR, rounds, or budget.

Plots are derived views; the CSVs remain the source of truth.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

PLOT_KINDS = ("snr_curve", "rounds_curve", "budget_curve")

_STYLE = {
    "hybrid": dict(color="tab:red", marker="o"),
    "digital": dict(color="tab:blue", marker="s"),
    "analog": dict(color="tab:green", marker="^"),
    "perfect": dict(color="gray", marker="x"),
}


def _load_aggregate(paths: list[str]) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ValueError(f"{path}: empty CSV")
            needed = {"scheme", "snr_db", "budget", "round", "acc_global_mean", "acc_global_std"}
            missing = needed - set(reader.fieldnames)
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                rows.append(
                    dict(
                        scheme=row["scheme"],
                        snr_db=float(row["snr_db"]),
                        budget=int(row["budget"]),
                        round=int(row["round"]),
                        acc=float(row["acc_global_mean"]),
                        std=float(row["acc_global_std"]),
                    )
                )
    if not rows:
        raise ValueError("no data rows in the given CSVs")
    return rows


def _final_round(rows: list[dict]) -> int:
    return max(r["round"] for r in rows)


def _curves(rows, x_key, fixed):
    """scheme -> sorted (x, acc, std) filtered by the fixed dict."""
    out: dict[str, list] = {}
    for r in rows:
        if any(r[k] != v for k, v in fixed.items()):
            continue
        out.setdefault(r["scheme"], []).append((r[x_key], r["acc"], r["std"]))
    return {s: sorted(v) for s, v in out.items()}


def _draw(curves, xlabel, title, path):
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    for scheme in sorted(curves):
        pts = curves[scheme]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        sd = [p[2] for p in pts]
        style = _STYLE.get(scheme, {})
        ax.plot(xs, ys, label=scheme, **style)
        ax.fill_between(
            xs,
            [y - s for y, s in zip(ys, sd)],
            [y + s for y, s in zip(ys, sd)],
            alpha=0.2,
            color=style.get("color"),
        )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("global top-1 accuracy")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot(csv_paths: list[str], kind: str, out_dir: str, snr_db: float | None = None) -> str:
    """Render one plot kind from aggregate CSVs; returns the image path."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    rows = _load_aggregate(csv_paths)
    os.makedirs(out_dir, exist_ok=True)
    final = _final_round(rows)

    if kind == "snr_curve":
        budget = min(r["budget"] for r in rows)
        curves = _curves(rows, "snr_db", {"round": final, "budget": budget})
        path = os.path.join(out_dir, "accuracy_vs_snr.png")
        _draw(curves, "channel SNR (dB)", f"final accuracy vs SNR (round {final})", path)
    elif kind == "rounds_curve":
        snrs = sorted({r["snr_db"] for r in rows})
        pick = snr_db if snr_db is not None else snrs[-1]
        if pick not in snrs:
            raise ValueError(f"snr {pick} not present (have {snrs})")
        budget = min(r["budget"] for r in rows)
        data = [r for r in rows if r["round"] >= 1]
        curves = _curves(data, "round", {"snr_db": pick, "budget": budget})
        path = os.path.join(out_dir, f"accuracy_vs_rounds_snr{pick:g}.png")
        _draw(curves, "round-robin round", f"accuracy vs rounds at {pick:g} dB", path)
    else:
        snrs = sorted({r["snr_db"] for r in rows})
        pick = snr_db if snr_db is not None else snrs[-1]
        curves = _curves(rows, "budget", {"round": final, "snr_db": pick})
        path = os.path.join(out_dir, f"accuracy_vs_budget_snr{pick:g}.png")
        _draw(curves, "symbol budget", f"final accuracy vs symbol budget at {pick:g} dB", path)
    return path
