"""Text formats: flat config files, deterministic CSV, measurement archives.

All floats are printed with 17 significant digits, which round-trips IEEE
binary64 exactly; given the same seed, every writer here produces
byte-identical output.

Config files are flat ``key = value`` text (UTF-8), ``#`` starts a comment.

A measurement archive is a self-describing text container::

    format = ensamp-measurement/1
    variant = demodulator
    M = 32
    W = 128
    omega = 40
    op_seed = 7
    sigma = 0
    delta = 0
    noise_seed = 11            # only when noise was added
    truth.kind = lowrank-gaussian   # optional ground-truth descriptor
    truth.R = 2
    truth.seed = 3
    y =
    <L lines, one float each>

Everything above ``y =`` is key/value; the operator (and, when ``truth.*``
is present, the measured ensemble) is regenerated from the recorded seeds,
so a recovery run can replay the acquisition bit-exactly.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .operators import MeasurementRecord

__all__ = [
    "format_float",
    "parse_config_text",
    "load_config",
    "write_csv",
    "write_measurement_archive",
    "read_measurement_archive",
    "emit_plot_script",
]

ARCHIVE_FORMAT = "ensamp-measurement/1"


def format_float(x: float) -> str:
    """17 significant digits: enough to reproduce the exact binary64 value."""
    return f"{float(x):.17g}"


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; '#' comments; later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def load_config(path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Write rows with a fixed header; floats at 17 significant digits."""
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}")
        buf.write(",".join(format_value(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def write_measurement_archive(path, rec: MeasurementRecord) -> None:
    lines = [
        f"format = {ARCHIVE_FORMAT}",
        f"variant = {rec.variant}",
        f"M = {rec.M}",
        f"W = {rec.W}",
        f"omega = {rec.omega}",
        f"op_seed = {rec.op_seed}",
        f"sigma = {format_float(rec.sigma)}",
        f"delta = {format_float(rec.delta)}",
    ]
    if rec.noise_seed is not None:
        lines.append(f"noise_seed = {rec.noise_seed}")
    if rec.truth:
        for k in sorted(rec.truth):
            lines.append(f"truth.{k} = {format_value(rec.truth[k])}")
    lines.append("y =")
    lines.extend(format_float(v) for v in rec.y)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_measurement_archive(path) -> MeasurementRecord:
    text = Path(path).read_text(encoding="utf-8")
    head, sep, tail = text.partition("\ny =")
    if not sep:
        raise ValueError(f"{path}: not a measurement archive (missing 'y =' section)")
    kv = parse_config_text(head)
    if kv.get("format") != ARCHIVE_FORMAT:
        raise ValueError(f"{path}: unsupported archive format {kv.get('format')!r}")
    y = np.array([float(s) for s in tail.split()], dtype=float)
    truth = {k.removeprefix("truth."): v for k, v in kv.items() if k.startswith("truth.")}
    rec = MeasurementRecord(
        y=y,
        M=int(kv["M"]),
        W=int(kv["W"]),
        omega=int(kv["omega"]),
        variant=kv["variant"],
        op_seed=int(kv["op_seed"]),
        sigma=float(kv.get("sigma", "0")),
        delta=float(kv.get("delta", "0")),
        noise_seed=int(kv["noise_seed"]) if "noise_seed" in kv else None,
        truth=truth or None,
    )
    if rec.y.size != rec.M * rec.omega:
        raise ValueError(f"{path}: y has {rec.y.size} entries, expected {rec.M * rec.omega}")
    return rec


_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Plot {kind} results from {csv_name} (auto-generated; edit freely)."""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
rows = list(csv.DictReader(open(HERE / {csv_name!r})))

fig, ax = plt.subplots(figsize=(6, 4))
x = [float(r[{xcol!r}]) for r in rows]
y = [float(r[{ycol!r}]) for r in rows]
ax.plot(x, y, "o-")
ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.set_title({title!r})
ax.grid(True, alpha=0.3)
fig.tight_layout()
out = HERE / {png_name!r}
fig.savefig(out, dpi=150)
print(f"wrote {{out}}")
'''

_PLOT_AXES = {
    "phase_rank": ("R", "omega", "rank R", "minimal Omega", "Minimal sampling rate vs rank"),
    "phase_channels": ("M", "omega", "channels M", "minimal Omega", "Minimal sampling rate vs channel count"),
    "stability": ("snr_db", "median_rel_error_db", "SNR (dB)", "median relative error (dB)", "Recovery error vs noise level"),
    "arch_compare": ("row", "success_fraction", "configuration row", "success fraction", "Architecture comparison"),
    "array_demo": ("index", "log10_normalized", "eigenvalue index", "log10 normalized eigenvalue", "Band-integrated steering covariance spectrum"),
}


def emit_plot_script(csv_path, kind: str) -> Path:
    """Write a ready-to-run matplotlib script next to a results CSV."""
    csv_path = Path(csv_path)
    xcol, ycol, xlabel, ylabel, title = _PLOT_AXES.get(
        kind, ("row", "success_fraction", "row", "value", kind)
    )
    script = _PLOT_TEMPLATE.format(
        kind=kind, csv_name=csv_path.name, xcol=xcol, ycol=ycol,
        xlabel=xlabel, ylabel=ylabel, title=title,
        png_name=csv_path.with_suffix(".png").name,
    )
    out = csv_path.with_suffix(".plot.py")
    out.write_text(script, encoding="utf-8")
    return out
