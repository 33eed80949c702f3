"""Command line entry point: ``oscpinn {train,integrate,bench} CONFIG``.

On failure the last line on stderr has the form ``error: <kind>: <message>``
and the exit code is 2 for configuration errors, 1 for anything else.
"""
import argparse
import logging
import sys

from ._jit import backend
from .config import load_config
from .errors import ConfigError, OscPinnError
from .experiments import run_bench, run_integrate, run_train


def cmd_train(args):
    cfg = load_config(args.config)
    directory = args.out_dir or cfg.directory
    record, report = run_train(cfg, directory)
    status = "converged" if record.converged else "not converged"
    print(f"{cfg.train.activation.label}: {status} after {record.epochs_run} epochs, "
          f"loss {record.final_train_loss:.3e}, max |error| {report.max_abs_error:.3e}, "
          f"{record.wall_time_seconds:.1f}s -> {directory}")


def cmd_integrate(args):
    cfg = load_config(args.config)
    path = None
    if args.out_dir is not None:
        path = args.out_dir / f"reference_{cfg.reference.method}.csv"
    print(run_integrate(cfg, path))


def cmd_bench(args):
    cfg = load_config(args.config)
    directory = args.out_dir or cfg.directory
    rows = run_bench(cfg, directory)
    for r in rows:
        epochs = "not reached" if r.epochs_to_threshold is None else r.epochs_to_threshold
        print(f"{r.activation:>5}  epochs={epochs}  time={r.wall_time_seconds:.1f}s  "
              f"loss={r.final_train_loss:.3e}  max|err|={r.max_abs_error_vs_ref:.3e}")
    print(directory / "bench.csv")


def build_parser():
    from pathlib import Path

    parser = argparse.ArgumentParser(prog="oscpinn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (("train", cmd_train, "train one network and compare to the reference"),
                              ("integrate", cmd_integrate, "reference integrator only"),
                              ("bench", cmd_bench, "train all five activations")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path, help="TOML run configuration")
        p.add_argument("--out-dir", type=Path, default=None,
                       help="override output.directory from the config")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).info("kernel backend: %s", backend())
    try:
        args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        print(f"error: config: {'; '.join(exc.problems)}", file=sys.stderr)
        return 2
    except (OscPinnError, ValueError, OSError) as exc:
        kind = "io" if isinstance(exc, OSError) else type(exc).__name__
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
