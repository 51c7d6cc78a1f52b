"""Secondary acceptance: all five figure analogues render from harness CSVs.

The mixture-corruption experiment runs at its reference scale (it is cheap)
so the rendered curve genuinely shows the degradation trend; the other four
experiments run at reduced scale, which exercises the same CSV surface.
Requires the primary package.
"""

import csv
import subprocess
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest

from alohafig import FigureSpec, render

pytestmark = pytest.mark.integration

alohaopt = pytest.importorskip("alohaopt")

TINY = ["--frames", "150", "--reps", "2", "--restarts", "2"]


def _run_cli(tmp_path, command, *extra):
    out_dir = tmp_path / command
    cmd = [sys.executable, "-m", "alohaopt.harness.cli", command,
           "--out", str(out_dir), *extra]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    csvs = list(out_dir.glob("*.csv"))
    assert len(csvs) == 1
    return csvs[0]


@pytest.fixture(scope="module")
def harness_csvs(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("runs")
    gamp_cfg = tmp_path / "gamp.cfg"
    gamp_cfg.write_text("estimation_frames = 300\n")
    return {
        "throughput-vs-epsilon": _run_cli(tmp_path, "example1"),
        "vs-p_flip": _run_cli(tmp_path, "sweep-symmetric", *TINY),
        "vs-p_miss": _run_cli(tmp_path, "sweep-asymmetric", *TINY),
        "vs-SNR": _run_cli(tmp_path, "sweep-gamp", *TINY,
                           "--config", str(gamp_cfg)),
        "trajectory": _run_cli(tmp_path, "trajectory", *TINY),
    }


def test_renders_all_five_figure_analogues(harness_csvs, tmp_path):
    for kind, csv_path in harness_csvs.items():
        out = render(FigureSpec(kind=kind, inputs=(str(csv_path),),
                                output=str(tmp_path / f"{kind}.png")))
        assert out.exists() and out.stat().st_size > 5000
        print(f"\nSECONDARY render {kind}: PASS ({out.name})")


def test_example1_figure_shows_monotone_degradation(harness_csvs):
    # the corrupted-estimate curve of the reference-scale run decreases in
    # the corruption probability (within per-point noise)
    finals: dict[tuple, tuple[int, float]] = {}
    with harness_csvs["throughput-vs-epsilon"].open(newline="") as fh:
        for row in csv.DictReader(fh):
            if row["method"] != "psga-naive":
                continue
            key = (float(row["sweep_value"]), int(row["rep"]))
            frame = int(row["frame"])
            if key not in finals or frame > finals[key][0]:
                finals[key] = (frame, float(row["normalized_throughput"]))
    curve = defaultdict(list)
    for (sweep, _rep), (_frame, value) in finals.items():
        curve[sweep].append(value)
    sweeps = sorted(curve)
    means = np.array([np.mean(curve[s]) for s in sweeps])
    assert len(sweeps) >= 4
    assert np.all(np.diff(means) <= 0.01), means  # monotone up to noise
    assert means[-1] < means[0] * 0.8             # large net degradation
    print(f"\nSECONDARY example1 degradation: PASS "
          f"({means[0]:.3f} -> {means[-1]:.3f} over eps {sweeps[0]}..{sweeps[-1]})")
