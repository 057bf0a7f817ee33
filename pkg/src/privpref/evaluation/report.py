"""Plot-data tables for the model comparison, scale curve and reward curve."""

from __future__ import annotations

import csv
import glob
import json
import os

from ..errors import DataError, ParseError
from ..provenance import read_sidecar, write_sidecar

COMPARISON_SIZE = 10000


def load_reports(paths: list[str]) -> list[dict]:
    reports = []
    for p in paths:
        try:
            with open(p, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{p}: cannot read report: {exc}") from None
        for key in ("model", "size", "aggregate", "config_digest"):
            if key not in doc:
                raise ParseError(f"{p}: report lacks {key!r}")
        doc["_path"] = p
        reports.append(doc)
    if not reports:
        raise DataError("no reports given")
    return reports


def common_digest(reports: list[dict]) -> str:
    digests = sorted({r["config_digest"] for r in reports})
    if len(digests) != 1:
        raise DataError(f"refusing to mix reports from different configs: {', '.join(digests)}")
    return digests[0]


def load_episode_log(path: str) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "reward" not in rows[0]:
        raise ParseError(f"{path}: not an episode log")
    return rows


def fig3_rows(reports: list[dict], size: int | None = None) -> list[tuple]:
    """Model comparison at one dataset size (10,000 when present, else the largest)."""
    sizes = {r["size"] for r in reports}
    if size is None:
        size = COMPARISON_SIZE if COMPARISON_SIZE in sizes else max(sizes)
    return [(r["model"], r["size"], r["aggregate"]["accuracy"], r["aggregate"]["macro_recall"],
             r["aggregate"]["macro_f1"])
            for r in sorted(reports, key=lambda r: r["model"]) if r["size"] == size]


def fig4_rows(reports: list[dict]) -> list[tuple]:
    return [(r["model"], r["size"], r["aggregate"]["accuracy"])
            for r in sorted(reports, key=lambda r: (r["model"], r["size"]))]


def _write(path: str, header: list[str], rows, digest: str) -> str:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.6f}" if isinstance(v, float) else str(v) for v in row) + "\n")
    write_sidecar(path, {"config_digest": digest})
    return path


def write_plot_data(report_paths: list[str], outdir: str, episode_log: str | None = None) -> dict[str, str]:
    reports = load_reports(report_paths)
    digest = common_digest(reports)
    os.makedirs(outdir, exist_ok=True)
    out = {
        "fig3": _write(os.path.join(outdir, "fig3_model_comparison.csv"),
                       ["model", "size", "accuracy", "macro_recall", "macro_f1"],
                       fig3_rows(reports), digest),
        "fig4": _write(os.path.join(outdir, "fig4_scale.csv"), ["model", "size", "accuracy"],
                       fig4_rows(reports), digest),
    }
    if episode_log is not None:
        side = read_sidecar(episode_log)
        if side is not None and side.get("config_digest") != digest:
            raise DataError(f"episode log digest {side.get('config_digest')} differs from reports {digest}")
        rows = load_episode_log(episode_log)
        out["fig5"] = _write(os.path.join(outdir, "fig5_cumulative_reward.csv"),
                             ["episode", "reward", "cumulative_reward"],
                             [(r["episode"], r["reward"], r["cumulative_reward"]) for r in rows], digest)
    return out


def reports_in(directory: str) -> list[str]:
    return sorted(glob.glob(os.path.join(directory, "reports", "*.json"))
                  or glob.glob(os.path.join(directory, "*.json")))
