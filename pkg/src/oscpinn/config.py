"""Run configuration files (TOML).

Every section and key is optional; missing values take the defaults in
:data:`DEFAULTS`. Unknown sections or keys are rejected so a typo never
silently falls back to a default. Validation reports every problem at once.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .activations import ActivationKind
from .errors import ConfigError
from .problem import DEFAULT_COEFFS, OscillatorProblem, TrialTransformKind, validate_problem
from .training import AdamHyper, TrainConfig

DEFAULTS = {
    "problem": {
        "a": list(DEFAULT_COEFFS),
        "u0": math.pi / 3,
        "du0": 0.0,
        "t0": 0.0,
        "t_end": 10.0,
    },
    "network": {
        "widths": [1, 128, 128, 128, 1],
        "activation": "asu",
    },
    "training": {
        "epochs_max": 50_000,
        "loss_threshold": 1e-3,
        "lr": 1e-3,
        "beta1": 0.9,
        "beta2": 0.999,
        "eps": 1e-8,
        "seed": 1,
        "n_train": 200,
        "n_valid": 100,
        "sampling": "equispaced",
        "transform": "second_order",
        "record_every": 100,
        "ic_penalty_lambda": 0.0,
    },
    "reference": {
        "method": "dopri45",
        "rtol": 1e-10,
        "atol": 1e-12,
        "h": 1e-3,
    },
    "output": {
        "directory": "runs",
        "n_grid": 1001,
    },
}

REFERENCE_METHODS = ("dopri45", "rk4", "ab4")
SAMPLING_MODES = ("equispaced", "uniform_random")


@dataclass(frozen=True)
class ReferenceConfig:
    method: str = "dopri45"
    rtol: float = 1e-10
    atol: float = 1e-12
    h: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    train: TrainConfig
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    directory: Path = Path("runs")
    n_grid: int = 1001

    @property
    def problem(self):
        return self.train.problem


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _merge(raw, problems):
    merged = {}
    for section, keys in raw.items():
        if section not in DEFAULTS:
            problems.append(f"unknown section [{section}]")
            continue
        if not isinstance(keys, dict):
            problems.append(f"[{section}] must be a table")
            continue
        for key in keys:
            if key not in DEFAULTS[section]:
                problems.append(f"unknown key {section}.{key}")
    for section, defaults in DEFAULTS.items():
        given = raw.get(section, {}) if isinstance(raw.get(section, {}), dict) else {}
        merged[section] = {k: given.get(k, v) for k, v in defaults.items()}
    return merged


def _check_types(cfg, problems):
    p, n, t, r, o = (cfg[s] for s in ("problem", "network", "training", "reference", "output"))
    if not (isinstance(p["a"], list) and len(p["a"]) == 7 and all(_is_number(x) for x in p["a"])):
        problems.append("problem.a must be a list of 7 numbers [A0..A6]")
    for key in ("u0", "du0", "t0", "t_end"):
        if not _is_number(p[key]):
            problems.append(f"problem.{key} must be a number")
    if not (isinstance(n["widths"], list) and len(n["widths"]) >= 2
            and all(_is_int(w) and w > 0 for w in n["widths"])):
        problems.append("network.widths must be a list of at least 2 positive integers")
    elif n["widths"][0] != 1 or n["widths"][-1] != 1:
        problems.append("network.widths must start and end with 1")
    try:
        ActivationKind.parse(n["activation"])
    except ValueError as exc:
        problems.append(f"network.activation: {exc}")
    for key in ("epochs_max", "n_train", "n_valid", "record_every", "seed"):
        if not _is_int(t[key]):
            problems.append(f"training.{key} must be an integer")
    if _is_int(t["epochs_max"]) and t["epochs_max"] < 1:
        problems.append("training.epochs_max must be >= 1")
    for key in ("n_train", "n_valid"):
        if _is_int(t[key]) and t[key] < 2:
            problems.append(f"training.{key} must be >= 2")
    if _is_int(t["record_every"]) and t["record_every"] < 1:
        problems.append("training.record_every must be >= 1")
    if _is_int(t["seed"]) and not 0 <= t["seed"] < 2**64:
        problems.append("training.seed must be a 64-bit unsigned integer")
    thr = t["loss_threshold"]
    if not (thr is False or (isinstance(thr, str) and thr.lower() == "none")
            or (_is_number(thr) and thr > 0)):
        problems.append('training.loss_threshold must be a positive number, false, or "none"')
    for key in ("lr", "eps"):
        if not (_is_number(t[key]) and t[key] > 0):
            problems.append(f"training.{key} must be a positive number")
    for key in ("beta1", "beta2"):
        if not (_is_number(t[key]) and 0 <= t[key] < 1):
            problems.append(f"training.{key} must be in [0, 1)")
    if not (_is_number(t["ic_penalty_lambda"]) and t["ic_penalty_lambda"] >= 0):
        problems.append("training.ic_penalty_lambda must be a non-negative number")
    if t["sampling"] not in SAMPLING_MODES:
        problems.append(f"training.sampling must be one of {', '.join(SAMPLING_MODES)}")
    try:
        TrialTransformKind.parse(t["transform"])
    except ValueError as exc:
        problems.append(f"training.transform: {exc}")
    if r["method"] not in REFERENCE_METHODS:
        problems.append(f"reference.method must be one of {', '.join(REFERENCE_METHODS)}")
    for key in ("rtol", "atol", "h"):
        if not (_is_number(r[key]) and r[key] > 0):
            problems.append(f"reference.{key} must be a positive number")
    if not isinstance(o["directory"], str) or not o["directory"]:
        problems.append("output.directory must be a non-empty string")
    if not (_is_int(o["n_grid"]) and o["n_grid"] >= 2):
        problems.append("output.n_grid must be an integer >= 2")


def build_config(raw, base_dir=None):
    """Validate a parsed TOML mapping and build a :class:`RunConfig`."""
    problems = []
    cfg = _merge(raw, problems)
    _check_types(cfg, problems)
    p = cfg["problem"]
    if not any(msg.startswith("problem.") for msg in problems):
        problems.extend(f"problem: {msg}" for msg in
                        validate_problem(p["a"], p["u0"], p["du0"], p["t0"], p["t_end"]))
    if problems:
        raise ConfigError(problems)

    t, r, o = cfg["training"], cfg["reference"], cfg["output"]
    thr = t["loss_threshold"]
    if thr is False or isinstance(thr, str):
        thr = None
    train = TrainConfig(
        activation=cfg["network"]["activation"],
        widths=tuple(cfg["network"]["widths"]),
        seed=t["seed"],
        epochs_max=t["epochs_max"],
        loss_threshold=None if thr is None else float(thr),
        problem=OscillatorProblem(tuple(p["a"]), float(p["u0"]), float(p["du0"]),
                                  float(p["t0"]), float(p["t_end"])),
        transform=t["transform"],
        n_train=t["n_train"],
        n_valid=t["n_valid"],
        sampling=t["sampling"],
        adam=AdamHyper(float(t["lr"]), float(t["beta1"]), float(t["beta2"]), float(t["eps"])),
        record_every=t["record_every"],
        ic_penalty_lambda=float(t["ic_penalty_lambda"]),
    )
    directory = Path(o["directory"])
    if base_dir is not None and not directory.is_absolute():
        directory = Path(base_dir) / directory
    return RunConfig(train, ReferenceConfig(r["method"], float(r["rtol"]), float(r["atol"]),
                                            float(r["h"])), directory, o["n_grid"])


def load_config(path):
    """Read and validate a TOML run configuration.

    A relative ``output.directory`` is resolved against the current working
    directory.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    return build_config(raw)


def default_config():
    return build_config({})
