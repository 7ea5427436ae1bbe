"""Optional SVG line charts rendered from result CSVs (cosmetic; the CSV is the contract)."""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path


def _read(path: Path) -> list[dict]:
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def plot_results(cfg, out: Path) -> Path | None:
    """Render ``results.csv`` as ``results.svg``; returns ``None`` when matplotlib is unavailable."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("daqc: matplotlib not installed; skipping plot")
        return None
    path = Path(out) / "results.csv"
    if not path.exists():
        return None
    rows = _read(path)
    column = "total_analog_time" if cfg.experiment == "totals" else "mean_fidelity"
    series = defaultdict(list)
    for r in rows:
        if r["status"] == "ok":
            series[r["mode"]].append((float(r["sweep_var"]), float(r[column])))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for mode, pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=mode)
    ax.set_xlabel(cfg.sweep if cfg.experiment == "fidelity" else "n_qubits")
    ax.set_ylabel(column)
    ax.legend()
    fig.tight_layout()
    svg = Path(out) / "results.svg"
    fig.savefig(svg, format="svg")
    plt.close(fig)
    return svg
