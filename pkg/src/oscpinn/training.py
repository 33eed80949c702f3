"""Full-batch Adam training of the trial solution."""
import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .activations import ActivationKind
from .autodiff import loss_and_grad
from .errors import NonFiniteError
from .integrators import SolutionTrace
from .network import DEFAULT_WIDTHS, MlpParams, forward_batch, init_params, save_params
from .problem import (OscillatorProblem, TrialTransformKind, collocation_loss,
                      collocation_points, trial_coeffs, _apply_trial)

log = logging.getLogger(__name__)

# validation points are drawn from their own stream so they never coincide
# with a random training sample drawn from the same seed
VALID_SEED_OFFSET = 1_000_003


@dataclass(frozen=True)
class AdamHyper:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamState:
    m: list
    v: list
    step_count: int = 0
    hyper: AdamHyper = field(default_factory=AdamHyper)

    @classmethod
    def zeros_like(cls, params, hyper=None):
        arrays = params.arrays()
        return cls([np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays],
                   0, hyper or AdamHyper())


def adam_step(params, grads, state):
    """One bias-corrected Adam update. Inputs are not modified."""
    h = state.hyper
    k = state.step_count + 1
    c1 = 1.0 - h.beta1 ** k
    c2 = 1.0 - h.beta2 ** k
    new_p, new_m, new_v = [], [], []
    for p, g, m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        m = h.beta1 * m + (1.0 - h.beta1) * g
        v = h.beta2 * v + (1.0 - h.beta2) * (g * g)
        new_p.append(p - h.lr * (m / c1) / (np.sqrt(v / c2) + h.eps))
        new_m.append(m)
        new_v.append(v)
    return (MlpParams.from_arrays(new_p, params.activation),
            AdamState(new_m, new_v, k, h))


@dataclass(frozen=True)
class TrainConfig:
    activation: ActivationKind = ActivationKind.ASU
    widths: tuple = DEFAULT_WIDTHS
    seed: int = 1
    epochs_max: int = 50_000
    loss_threshold: float = 1e-3
    problem: OscillatorProblem = field(default_factory=OscillatorProblem)
    transform: TrialTransformKind = TrialTransformKind.SECOND_ORDER
    n_train: int = 200
    n_valid: int = 100
    sampling: str = "equispaced"
    adam: AdamHyper = field(default_factory=AdamHyper)
    record_every: int = 100
    ic_penalty_lambda: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "activation", ActivationKind.parse(self.activation))
        object.__setattr__(self, "transform", TrialTransformKind.parse(self.transform))
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.epochs_max < 1:
            raise ValueError(f"epochs_max must be >= 1, got {self.epochs_max}")
        if self.n_train < 2:
            raise ValueError(f"n_train must be >= 2, got {self.n_train}")
        if self.n_valid < 2:
            raise ValueError(f"n_valid must be >= 2, got {self.n_valid}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")

    def with_activation(self, activation):
        return replace(self, activation=ActivationKind.parse(activation))

    def to_dict(self):
        d = asdict(self)
        d["activation"] = self.activation.label
        d["transform"] = self.transform.value
        d["widths"] = list(self.widths)
        d["problem"]["a"] = list(self.problem.a)
        return d


@dataclass
class TrainRecord:
    train_loss_history: list
    valid_loss_history: list
    epochs_run: int
    wall_time_seconds: float
    final_params: MlpParams
    converged: bool
    final_train_loss: float
    best_train_loss: float

    @property
    def epochs_to_threshold(self):
        return self.epochs_run if self.converged else None


def training_points(config):
    p = config.problem
    train_pts = collocation_points(config.n_train, p.t0, p.t_end, config.sampling, config.seed)
    valid_pts = collocation_points(config.n_valid, p.t0, p.t_end, "uniform_random",
                                   config.seed + VALID_SEED_OFFSET)
    return train_pts, valid_pts


def train(config, params=None, callback=None):
    """Run full-batch Adam until ``loss_threshold`` or ``epochs_max``.

    The loss recorded at epoch ``k`` belongs to the parameters after ``k``
    updates. A run that meets the threshold at epoch ``k`` stops there with
    ``epochs_run = k``.
    """
    if params is None:
        params = init_params(config.widths, config.activation, config.seed)
    state = AdamState.zeros_like(params, config.adam)
    train_pts, valid_pts = training_points(config)
    problem, transform, lam = config.problem, config.transform, config.ic_penalty_lambda
    threshold = config.loss_threshold
    train_hist, valid_hist = [], []
    converged = False
    epochs_run = 0
    loss = best = math.inf

    start = time.perf_counter()
    for epoch in range(config.epochs_max):
        try:
            loss, grads = loss_and_grad(params, problem, transform, train_pts, lam)
        except NonFiniteError as exc:
            raise NonFiniteError(f"training diverged at epoch {epoch} "
                                 f"(activation {config.activation.label}): {exc}") from exc
        best = min(best, loss)
        hit = threshold is not None and loss <= threshold
        if hit or epoch % config.record_every == 0 or epoch == config.epochs_max - 1:
            train_hist.append((epoch, loss))
            valid_hist.append((epoch, collocation_loss(params, problem, transform, valid_pts, lam)))
            if callback is not None:
                callback(epoch, loss, valid_hist[-1][1])
        if hit:
            converged = True
            break
        params, state = adam_step(params, grads, state)
        epochs_run = epoch + 1
    wall = time.perf_counter() - start
    log.info("%s: %d epochs, loss %.3e, converged=%s, %.1fs",
             config.activation.label, epochs_run, loss, converged, wall)
    return TrainRecord(train_hist, valid_hist, epochs_run, wall, params, converged, loss, best)


def evaluate_on_grid(params, problem, transform, n_grid):
    """Trial solution on an equispaced grid over the problem's time domain."""
    if n_grid < 2:
        raise ValueError(f"n_grid must be >= 2, got {n_grid}")
    transform = TrialTransformKind.parse(transform)
    t = np.linspace(problem.t0, problem.t_end, int(n_grid))
    net = forward_batch(params, t, check=True)
    u = _apply_trial(trial_coeffs(transform, problem, t), net[0], net[1], net[2])
    return SolutionTrace(t, np.asarray(u[0], dtype=np.float64), np.asarray(u[1], dtype=np.float64))


def write_history(record, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "valid_loss"])
        for (epoch, tl), (_, vl) in zip(record.train_loss_history, record.valid_loss_history):
            w.writerow([epoch, repr(float(tl)), repr(float(vl))])


def read_history(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["epoch"]), float(r["train_loss"]), float(r["valid_loss"])) for r in rows]


def save_run(record, config, directory):
    """Write ``history.csv``, ``checkpoint.bin`` and ``meta.json`` into ``directory``."""
    directory.mkdir(parents=True, exist_ok=True)
    write_history(record, directory / "history.csv")
    save_params(record.final_params, directory / "checkpoint.bin")
    meta = {
        "config": config.to_dict(),
        "epochs_run": record.epochs_run,
        "wall_time_seconds": record.wall_time_seconds,
        "converged": record.converged,
        "final_train_loss": record.final_train_loss,
        "best_train_loss": record.best_train_loss,
    }
    with open(directory / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
