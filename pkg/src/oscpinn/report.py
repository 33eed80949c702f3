"""Pointwise comparison of a network solution against a reference trace."""
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svg
from .training import TrainRecord, write_history


@dataclass
class ComparisonReport:
    grid: np.ndarray
    dnn_values: np.ndarray
    ref_values: np.ndarray
    errors: np.ndarray
    max_abs_error: float
    mean_abs_error: float
    rms_error: float


def compare(dnn, ref):
    """Signed error ``dnn - ref`` on a shared time grid, with absolute summaries."""
    if len(dnn) != len(ref):
        raise ValueError(f"grid length mismatch: {len(dnn)} vs {len(ref)} points")
    if len(dnn) == 0:
        raise ValueError("cannot compare empty traces")
    diff = np.flatnonzero(dnn.times != ref.times)
    if diff.size:
        i = diff[0]
        raise ValueError(f"time grids differ first at index {i}: "
                         f"{float(dnn.times[i])!r} vs {float(ref.times[i])!r}")
    err = dnn.values - ref.values
    a = np.abs(err)
    return ComparisonReport(dnn.times.copy(), dnn.values.copy(), ref.values.copy(), err,
                            float(a.max()), float(a.mean()), float(np.sqrt(np.mean(err * err))))


def emit_plot_data(obj, path):
    """Write ``path`` (CSV) and a ``.svg`` chart with the same stem next to it.

    ``obj`` is a :class:`ComparisonReport` (solution overlay plus error
    curve) or a :class:`TrainRecord` (log-scale loss histories).
    Returns the pair of written paths.
    """
    path = Path(path)
    svg_path = path.with_suffix(".svg")
    if isinstance(obj, ComparisonReport):
        if obj.grid.size == 0:
            raise ValueError("refusing to write an empty comparison report")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "u_dnn", "u_ref", "error"])
            for row in zip(obj.grid, obj.dnn_values, obj.ref_values, obj.errors):
                w.writerow([f"{x:.17g}" for x in row])
        t = obj.grid.tolist()
        doc = svg.line_chart([
            {"title": "Solution", "xlabel": "t", "ylabel": "u",
             "series": [("network", t, obj.dnn_values.tolist()),
                        ("reference", t, obj.ref_values.tolist())]},
            {"title": f"Error (max |e| = {obj.max_abs_error:.3g})", "xlabel": "t",
             "ylabel": "u_dnn - u_ref", "series": [("error", t, obj.errors.tolist())]},
        ])
    elif isinstance(obj, TrainRecord):
        if not obj.train_loss_history:
            raise ValueError("refusing to write an empty loss history")
        write_history(obj, path)
        epochs = [e for e, _ in obj.train_loss_history]
        doc = svg.line_chart([
            {"title": "Loss history", "xlabel": "epoch", "ylabel": "loss", "log_y": True,
             "series": [("train", epochs, [l for _, l in obj.train_loss_history]),
                        ("validation", epochs, [l for _, l in obj.valid_loss_history])]},
        ])
    else:
        raise TypeError(f"cannot plot object of type {type(obj).__name__}")
    svg_path.write_text(doc)
    return path, svg_path
