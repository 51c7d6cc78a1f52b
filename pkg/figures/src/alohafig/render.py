"""Mean lines with +/-1 standard-deviation bands from experiment CSVs.

The input format is the flat record CSV written by the experiment harness:
``experiment,method,sweep_value,rep,frame,normalized_throughput,seed,wall_ms``.
Sweep figures plot, per method, the mean over repetitions of the
final-frame normalized throughput against the sweep value; the trajectory
figure plots the per-frame mean at a fixed sweep value.  The shaded band is
plus/minus one sample standard deviation across repetitions.

Rendering never modifies the inputs, and a fixed style plus pinned default
fonts make re-renders byte-stable.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

CSV_FIELDS = ("experiment", "method", "sweep_value", "rep", "frame",
              "normalized_throughput", "seed", "wall_ms")

FIGURE_KINDS = {
    "throughput-vs-epsilon": "corruption probability of the activity estimate",
    "vs-p_flip": "symmetric flip probability",
    "trajectory": "frame",
    "vs-p_miss": "miss probability",
    "vs-SNR": "transmit SNR [dB]",
}

DEFAULT_STYLES = {
    "psga-perfect": {"color": "tab:pink", "linestyle": "-"},
    "psga-naive": {"color": "tab:blue", "linestyle": "-"},
    "psga-weighted": {"color": "tab:orange", "linestyle": "-"},
    "psga-weighted-s0.05": {"color": "tab:green", "linestyle": "-"},
    "psga-weighted-s0.1": {"color": "tab:red", "linestyle": "-"},
    "psga-weighted-s0.2": {"color": "tab:purple", "linestyle": "-"},
    "greedy": {"color": "tab:blue", "linestyle": "--"},
    "aloha": {"color": "tab:gray", "linestyle": "-"},
    "initial": {"color": "tab:brown", "linestyle": ":"},
}

_FALLBACK_CYCLE = ("tab:olive", "tab:cyan", "black", "gold", "navy")


class RenderError(ValueError):
    """Unusable input: wrong columns, unknown kind, or no data."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    styles: dict = field(default_factory=dict)
    dpi: int = 200


def _read_rows(paths):
    rows = []
    for path in paths:
        if not Path(path).is_file():
            raise RenderError(f"{path}: no such file")
        with Path(path).open(newline="") as fh:
            reader = csv.DictReader(fh)
            got = tuple(reader.fieldnames or ())
            missing = [c for c in CSV_FIELDS if c not in got]
            if missing:
                raise RenderError(
                    f"{path}: missing required columns: {', '.join(missing)}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    rows.append((row["method"], float(row["sweep_value"]),
                                 int(row["rep"]), int(row["frame"]),
                                 float(row["normalized_throughput"])))
                except (TypeError, ValueError) as exc:
                    raise RenderError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise RenderError(f"no data rows in: {', '.join(map(str, paths))}")
    return rows


def _final_frame_values(rows):
    """(method, sweep) -> list over reps of the last-frame value."""
    last: dict[tuple, tuple[int, float]] = {}
    for method, sweep, rep, frame, value in rows:
        key = (method, sweep, rep)
        if key not in last or frame > last[key][0]:
            last[key] = (frame, value)
    groups = defaultdict(list)
    for (method, sweep, _rep), (_frame, value) in sorted(last.items()):
        groups[(method, sweep)].append(value)
    return groups


def _mean_std(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def _style_for(method, styles, fallback_index):
    style = dict(DEFAULT_STYLES.get(method, {}))
    if not style:
        style = {"color": _FALLBACK_CYCLE[fallback_index % len(_FALLBACK_CYCLE)],
                 "linestyle": "-"}
    style.update(styles.get(method, {}))
    return style


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure for a spec; raises RenderError early."""
    if spec.kind not in FIGURE_KINDS:
        raise RenderError(
            f"unknown figure kind {spec.kind!r}; expected one of "
            f"{', '.join(FIGURE_KINDS)}")
    rows = _read_rows(spec.inputs)
    plt.rcParams["svg.hashsalt"] = "alohafig"
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    methods = sorted({r[0] for r in rows})

    if spec.kind == "trajectory":
        sweeps = sorted({r[1] for r in rows})
        series = defaultdict(lambda: defaultdict(list))
        for method, sweep, _rep, frame, value in rows:
            if sweep == sweeps[0]:
                series[method][frame].append(value)
        for i, method in enumerate(methods):
            frames = np.array(sorted(series[method]))
            stats = [_mean_std(series[method][f]) for f in frames]
            mean = np.array([m for m, _ in stats])
            std = np.array([s for _, s in stats])
            style = _style_for(method, spec.styles, i)
            ax.plot(frames, mean, label=method, **style)
            ax.fill_between(frames, mean - std, mean + std,
                            color=style["color"], alpha=0.2, linewidth=0)
        ax.set_xlabel("frame")
        ax.set_title(f"sweep value {sweeps[0]:g}")
    else:
        groups = _final_frame_values(rows)
        for i, method in enumerate(methods):
            sweeps = sorted(s for m, s in groups if m == method)
            stats = [_mean_std(groups[(method, s)]) for s in sweeps]
            mean = np.array([m for m, _ in stats])
            std = np.array([s for _, s in stats])
            style = _style_for(method, spec.styles, i)
            ax.plot(sweeps, mean, label=method, marker=".", **style)
            ax.fill_between(sweeps, mean - std, mean + std,
                            color=style["color"], alpha=0.2, linewidth=0)
        ax.set_xlabel(FIGURE_KINDS[spec.kind])
    ax.set_ylabel("normalized throughput")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render the figure to ``spec.output`` and return the path."""
    fig = build_figure(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"CreationDate": None} if out.suffix == ".pdf" else None
    try:
        fig.savefig(out, dpi=spec.dpi, metadata=metadata)
    finally:
        plt.close(fig)
    return out


def load_style_file(path) -> dict:
    """Parse ``method.property = value`` lines plus an optional ``dpi``."""
    styles: dict[str, dict] = {}
    dpi = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RenderError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "dpi":
            dpi = int(value)
            continue
        method, _, prop = key.rpartition(".")
        if not method or prop not in ("color", "linestyle"):
            raise RenderError(
                f"{path}:{lineno}: expected '<method>.color' or "
                f"'<method>.linestyle', got {key!r}")
        styles.setdefault(method, {})[prop] = value
    return {"styles": styles, "dpi": dpi}
