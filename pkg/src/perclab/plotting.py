"""SVG line charts drawn from the CSV files a run has already written."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "perclab"


def _num(text: str) -> float | None:
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def line_chart(csv_path, x: str, ys: list[str], group: str | None, out_path, title: str = "") -> Path:
    with open(csv_path, newline="") as fh:
        records = list(csv.DictReader(fh))
    series: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for rec in records:
        xv = _num(rec.get(x))
        if xv is None:
            continue
        for y in ys:
            yv = _num(rec.get(y))
            if yv is None:
                continue
            key = (rec.get(group, "") if group else "", y)
            series.setdefault(key, []).append((xv, yv))
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for (grp, y), pts in series.items():
        pts.sort()
        label = f"{grp} {y}".strip() if len(ys) > 1 or not grp else grp
        ax.plot([a for a, _ in pts], [b for _, b in pts], marker="o", ms=3, lw=1.2, label=label)
    ax.set_xlabel(x)
    ax.set_ylabel(ys[0] if len(ys) == 1 else "value")
    if title:
        ax.set_title(title)
    if series:
        ax.legend(fontsize=7)
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
