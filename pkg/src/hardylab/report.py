"""Report output: line-delimited records, flat CSV tables, and figures.

Report files contain no timestamps or machine identifiers, so a config plus
seed reproduces them byte for byte; wall-clock timing goes to the logger
instead.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import yaml

log = logging.getLogger("hardylab")

__all__ = ["ReportWriter", "log"]


def _plain(value):
    """Coerce numpy scalars and fractions into JSON/YAML-friendly values."""
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


class ReportWriter:
    """Writes the artifacts of one experiment under a single directory."""

    def __init__(self, outdir: str | Path, name: str, figures: bool = True):
        self.outdir = Path(outdir)
        self.name = name
        self.figures = figures
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.paths: list[Path] = []

    def _register(self, path: Path) -> Path:
        self.paths.append(path)
        log.info("wrote %s", path)
        return path

    def echo_config(self, config: Mapping) -> Path:
        path = self.outdir / f"{self.name}.config.yaml"
        with path.open("w", encoding="utf-8") as fh:
            yaml.safe_dump(_plain(dict(config)), fh, sort_keys=True)
        return self._register(path)

    def write_jsonl(self, records: Iterable[Mapping]) -> Path:
        path = self.outdir / f"{self.name}.jsonl"
        with path.open("w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(_plain(dict(rec)), sort_keys=True))
                fh.write("\n")
        return self._register(path)

    def write_csv(self, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = self.outdir / f"{self.name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_plain(v) for v in row])
        return self._register(path)

    def write_text(self, text: str, suffix: str = "txt") -> Path:
        path = self.outdir / f"{self.name}.{suffix}"
        path.write_text(text, encoding="utf-8")
        return self._register(path)

    def figure(
        self,
        xs: Sequence[float],
        series: Mapping[str, Sequence[float]],
        xlabel: str,
        ylabel: str,
        title: str = "",
        logx: bool = False,
        logy: bool = False,
        hline: Optional[float] = None,
    ) -> Optional[Path]:
        if not self.figures:
            return None
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for label, ys in series.items():
            ax.plot(xs, ys, marker="o", label=label)
        if hline is not None:
            ax.axhline(hline, color="grey", linestyle="--", linewidth=1)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = self.outdir / f"{self.name}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        return self._register(path)
