"""Write scenario reports as JSON, CSV and SVG."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .scenario import ScenarioReport  # noqa: E402

FORMATS = ("json", "csv", "svg")
CSV_FIELDS = ["seed", "scale", "resolution", "shift", "lhs", "rhs", "ratio", "ok", "degenerate", "error"]


def to_json(report: ScenarioReport) -> str:
    return json.dumps(report.to_dict(), indent=1, sort_keys=True)


def from_json(text: str) -> ScenarioReport:
    return ScenarioReport.from_dict(json.loads(text))


def _plot(report: ScenarioReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    by_res: dict[int, dict[float, float]] = {}
    for r in report.rows:
        if r.ratio is None or r.ratio <= 0 or r.ratio == float("inf"):
            continue
        cur = by_res.setdefault(r.resolution, {})
        cur[r.scale] = max(cur.get(r.scale, 0.0), r.ratio)
    for res in sorted(by_res):
        xs = sorted(by_res[res])
        ax.plot(xs, [by_res[res][x] for x in xs], marker="o", label=f"resolution {res}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("scale")
    ax.set_ylabel("max ratio")
    ax.set_title(report.name)
    if by_res:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit(report: ScenarioReport, formats, out_dir: str | Path) -> list[Path]:
    """Write the requested formats into ``out_dir`` and return the file paths."""
    formats = [f.strip() for f in (formats.split(",") if isinstance(formats, str) else formats) if f.strip()]
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown format(s) {bad}; choose from {FORMATS}")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = []
    stem = out_dir / report.name
    if "json" in formats:
        p = stem.with_suffix(".json")
        p.write_text(to_json(report))
        written.append(p)
    if "csv" in formats:
        p = stem.with_suffix(".csv")
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for r in report.rows:
                w.writerow([getattr(r, k) for k in CSV_FIELDS])
        written.append(p)
    if "svg" in formats:
        p = stem.with_suffix(".svg")
        _plot(report, p)
        written.append(p)
    return written
