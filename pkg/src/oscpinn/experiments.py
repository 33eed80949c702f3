"""Orchestration behind the ``train``, ``integrate`` and ``bench`` commands."""
import csv
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

from . import svg
from .activations import ActivationKind
from .errors import NonFiniteError
from .integrators import reference_solution, write_trace_csv
from .report import compare, emit_plot_data
from .training import evaluate_on_grid, save_run, train

log = logging.getLogger(__name__)

BENCH_ORDER = (ActivationKind.ASU, ActivationKind.GCU, ActivationKind.SINE,
               ActivationKind.MISH, ActivationKind.TANH)
BENCH_HEADER = ["activation", "epochs_to_threshold", "wall_time_seconds",
                "final_train_loss", "max_abs_error_vs_ref"]
NOT_REACHED = "not reached"


@dataclass
class BenchRow:
    activation: str
    epochs_to_threshold: object  # int, or None when the threshold was not reached
    wall_time_seconds: float
    final_train_loss: float
    max_abs_error_vs_ref: float

    def csv_row(self):
        epochs = NOT_REACHED if self.epochs_to_threshold is None else str(self.epochs_to_threshold)
        return [self.activation, epochs, f"{self.wall_time_seconds:.6f}",
                f"{self.final_train_loss:.17g}", f"{self.max_abs_error_vs_ref:.17g}"]


def reference_trace(run_config, grid=None):
    ref = run_config.reference
    return reference_solution(run_config.problem, ref.method, grid=grid,
                              rtol=ref.rtol, atol=ref.atol, h=ref.h)


def run_train(run_config, directory=None, callback=None):
    """Train, then write history, checkpoint, meta, solution trace and comparison."""
    directory = Path(directory or run_config.directory)
    cfg = run_config.train
    record = train(cfg, callback=callback)
    save_run(record, cfg, directory)
    emit_plot_data(record, directory / "history.csv")
    dnn = evaluate_on_grid(record.final_params, cfg.problem, cfg.transform, run_config.n_grid)
    write_trace_csv(dnn, directory / "solution.csv")
    ref = reference_trace(run_config, grid=dnn.times)
    report = compare(dnn, ref)
    emit_plot_data(report, directory / "comparison.csv")
    return record, report


def run_integrate(run_config, path=None):
    """Reference-only run; writes the trace CSV and returns its path."""
    path = Path(path) if path else Path(run_config.directory) / f"reference_{run_config.reference.method}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    trace = reference_trace(run_config)
    write_trace_csv(trace, path)
    return path


def _bench_one(run_config, kind, directory):
    cfg = replace(run_config, train=run_config.train.with_activation(kind))
    try:
        record, report = run_train(cfg, directory)
    except NonFiniteError as exc:
        log.warning("bench run %s failed: %s", kind.label, exc)
        return BenchRow(kind.label, None, math.nan, math.nan, math.nan)
    return BenchRow(kind.label, record.epochs_to_threshold, record.wall_time_seconds,
                    record.final_train_loss, report.max_abs_error)


def _sort_key(row):
    e = row.epochs_to_threshold
    return (e is None, e if e is not None else 0)


def run_bench(run_config, directory=None):
    """Train every activation with identical settings; write ``bench.csv``.

    Rows are sorted by epochs to threshold (stable in the fixed activation
    order, unreached runs last).
    """
    directory = Path(directory or run_config.directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = [_bench_one(run_config, kind, directory / kind.label) for kind in BENCH_ORDER]
    rows = sorted(rows, key=_sort_key)
    write_bench_csv(rows, directory / "bench.csv")
    doc = svg.bar_chart("Training wall time by activation", [r.activation for r in rows],
                        [r.wall_time_seconds for r in rows], ylabel="seconds")
    (directory / "bench_wall_time.svg").write_text(doc)
    return rows


def write_bench_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for row in rows:
            w.writerow(row.csv_row())


def read_bench_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != BENCH_HEADER:
            raise ValueError(f"unexpected bench header {reader.fieldnames}")
        return [BenchRow(r["activation"],
                         None if r["epochs_to_threshold"] == NOT_REACHED else int(r["epochs_to_threshold"]),
                         float(r["wall_time_seconds"]), float(r["final_train_loss"]),
                         float(r["max_abs_error_vs_ref"]))
                for r in reader]
