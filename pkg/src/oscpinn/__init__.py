"""Collocation networks with oscillatory activations for a nonlinear beam oscillator."""
from .activations import ActivationKind, act_eval, act_jet
from .autodiff import GradientSet, loss_and_grad
from .integrators import (SolutionTrace, integrate_ab4, integrate_dopri45, integrate_rk4,
                          resample, rhs)
from .jets import Jet2
from .network import LayerParams, MlpParams, forward_jet, init_params, load_params, save_params
from .problem import (OscillatorProblem, TrialTransformKind, collocation_loss,
                      collocation_points, residual, trial_jet)
from .report import ComparisonReport, compare, emit_plot_data
from .training import AdamState, TrainConfig, TrainRecord, adam_step, evaluate_on_grid, train

__version__ = "0.1.0"

__all__ = [
    "ActivationKind",
    "act_eval",
    "act_jet",
    "GradientSet",
    "loss_and_grad",
    "SolutionTrace",
    "integrate_ab4",
    "integrate_dopri45",
    "integrate_rk4",
    "resample",
    "rhs",
    "Jet2",
    "LayerParams",
    "MlpParams",
    "forward_jet",
    "init_params",
    "load_params",
    "save_params",
    "OscillatorProblem",
    "TrialTransformKind",
    "collocation_loss",
    "collocation_points",
    "residual",
    "trial_jet",
    "ComparisonReport",
    "compare",
    "emit_plot_data",
    "AdamState",
    "TrainConfig",
    "TrainRecord",
    "adam_step",
    "evaluate_on_grid",
    "train",
]
