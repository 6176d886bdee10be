"""CSV and metadata writers."""

from __future__ import annotations

import math
import subprocess
from pathlib import Path
from typing import Iterable, Sequence

from ..scenarios.engine import SerCurve

SER_COLUMNS = ("detector", "trials", "errors", "ser", "ci_low", "ci_high", "overhead",
               "mean_snr_db", "seed", "config_hash")


def fmt_float(x: float) -> str:
    """Full-precision scientific notation (round-trips through float())."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def ser_rows(curve: SerCurve, config_hash: str, label: str = "") -> list[list[str]]:
    rows = []
    for p in curve.points:
        lo, hi = p.ci
        name = f"{p.detector}[{label}]" if label else p.detector
        rows.append([fmt_float(p.value), name, str(p.trials), str(p.errors), fmt_float(p.ser),
                     fmt_float(lo), fmt_float(hi), fmt_float(p.overhead),
                     fmt_float(p.mean_snr_db), str(curve.seed), config_hash])
    return rows


def render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def git_describe() -> str:
    here = Path(__file__).resolve().parent
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    out = res.stdout.strip()
    return out if res.returncode == 0 and out else "unknown"


def render_meta(config_text: str, *, name: str, seed: int, config_hash: str,
                wall_time: float, notes: Sequence[str] = ()) -> str:
    lines = ["[run]", f"name = {name}", f"seed = {seed}", f"config_hash = {config_hash}",
             f"git_describe = {git_describe()}", f"wall_time_s = {wall_time:.3f}"]
    for k, note in enumerate(notes):
        lines.append(f"note{k} = {note}")
    return "\n".join(lines) + "\n\n" + config_text
