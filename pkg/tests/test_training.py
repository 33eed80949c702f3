import json
import math

import numpy as np
import pytest

from oscpinn.autodiff import GradientSet
from oscpinn.network import LayerParams, MlpParams, init_params, load_params
from oscpinn.problem import OscillatorProblem, collocation_loss
from oscpinn.training import (AdamHyper, AdamState, TrainConfig, adam_step, evaluate_on_grid,
                              read_history, save_run, train, training_points)

SMALL = dict(widths=(1, 12, 12, 1), n_train=24, n_valid=10, record_every=5)


def one_param(value):
    return MlpParams([LayerParams(np.array([[value]]), np.array([0.0]))], "asu")


def grads_of(value, bias=0.0):
    return GradientSet([LayerParams(np.array([[value]]), np.array([bias]))])


def test_adam_zero_gradient_is_noop():
    p = init_params([1, 4, 1], "asu", 0)
    state = AdamState.zeros_like(p)
    zero = GradientSet([LayerParams(np.zeros_like(l.weights), np.zeros_like(l.biases)) for l in p.layers])
    q, s = adam_step(p, zero, state)
    for a, b in zip(p.arrays(), q.arrays()):
        np.testing.assert_array_equal(a, b)
    assert s.step_count == 1


@pytest.mark.parametrize("g", [1e-6, 0.5, 3e4])
def test_adam_first_step_is_scale_free(g):
    p = one_param(0.0)
    q, _ = adam_step(p, grads_of(g), AdamState.zeros_like(p))
    assert q.layers[0].weights[0, 0] == pytest.approx(-1e-3 * g / (g + 1e-8), rel=1e-12)
    assert abs(q.layers[0].weights[0, 0]) == pytest.approx(1e-3, rel=1e-2)


def test_adam_two_steps_closed_form():
    # constant gradient g: m1 = 0.1 g, v1 = 0.001 g^2 -> m_hat = g, v_hat = g^2;
    # m2 = 0.19 g, v2 = 0.001999 g^2 -> again m_hat = g, v_hat = g^2
    g, lr, eps = 0.5, 1e-3, 1e-8
    p = one_param(1.0)
    s = AdamState.zeros_like(p, AdamHyper(lr=lr, eps=eps))
    p, s = adam_step(p, grads_of(g), s)
    assert s.m[0][0, 0] == pytest.approx(0.1 * g, rel=1e-15)
    assert s.v[0][0, 0] == pytest.approx(0.001 * g * g, rel=1e-15)
    p, s = adam_step(p, grads_of(g), s)
    assert s.m[0][0, 0] == pytest.approx(0.19 * g, rel=1e-15)
    assert s.v[0][0, 0] == pytest.approx(0.001999 * g * g, rel=1e-14)
    assert p.layers[0].weights[0, 0] == pytest.approx(1.0 - 2 * lr * g / (g + eps), rel=1e-14)
    assert s.step_count == 2


def test_adam_shape_mismatch():
    p = one_param(1.0)
    bad = GradientSet([LayerParams(np.zeros((2, 1)), np.zeros(1))])
    with pytest.raises(ValueError):
        adam_step(p, bad, AdamState.zeros_like(p))


def test_single_epoch():
    rec = train(TrainConfig(epochs_max=1, loss_threshold=None, **SMALL))
    assert rec.epochs_run == 1
    assert len(rec.train_loss_history) == len(rec.valid_loss_history) == 1
    assert not rec.converged


def test_epoch_zero_loss_is_initial_loss():
    cfg = TrainConfig(activation="gcu", epochs_max=3, loss_threshold=None, **SMALL)
    rec = train(cfg)
    p0 = init_params(cfg.widths, cfg.activation, cfg.seed)
    pts, _ = training_points(cfg)
    assert rec.train_loss_history[0] == (0, collocation_loss(p0, cfg.problem, cfg.transform, pts))


def test_runs_full_budget_without_threshold():
    rec = train(TrainConfig(epochs_max=17, loss_threshold=None, **SMALL))
    assert rec.epochs_run == 17
    assert [e for e, _ in rec.train_loss_history] == [0, 5, 10, 15, 16]
    assert all(l >= 0 for _, l in rec.train_loss_history + rec.valid_loss_history)


def test_threshold_stops_early():
    rec = train(TrainConfig(epochs_max=500, loss_threshold=1e12, **SMALL))
    assert rec.converged and rec.epochs_run == 0 and rec.epochs_to_threshold == 0
    first = train(TrainConfig(activation="sine", epochs_max=1, loss_threshold=None, **SMALL))
    target = 0.5 * first.final_train_loss
    rec = train(TrainConfig(activation="sine", epochs_max=3000, loss_threshold=target, **SMALL))
    assert rec.converged and rec.epochs_run > 0
    assert rec.train_loss_history[-1][1] <= target < rec.train_loss_history[-2][1]
    assert rec.epochs_to_threshold == rec.epochs_run == rec.train_loss_history[-1][0]


def test_training_is_deterministic():
    cfg = TrainConfig(activation="mish", epochs_max=40, loss_threshold=None, sampling="uniform_random",
                      **SMALL)
    a, b = train(cfg), train(cfg)
    assert a.train_loss_history == b.train_loss_history
    assert a.valid_loss_history == b.valid_loss_history
    for x, y in zip(a.final_params.arrays(), b.final_params.arrays()):
        assert x.tobytes() == y.tobytes()


def test_loss_decreases():
    rec = train(TrainConfig(activation="sine", epochs_max=300, loss_threshold=None, **SMALL))
    assert rec.train_loss_history[-1][1] < 0.1 * rec.train_loss_history[0][1]
    assert rec.best_train_loss <= rec.final_train_loss


def test_validation_points_are_separate():
    cfg = TrainConfig(sampling="uniform_random", **SMALL)
    tr, va = training_points(cfg)
    assert not np.intersect1d(tr, va).size


def test_evaluate_on_grid():
    p = init_params([1, 4, 1], "asu", 0)
    for a in p.arrays():
        a[...] = 0.0
    prob = OscillatorProblem()
    tr = evaluate_on_grid(p, prob, "first_order", 7)
    np.testing.assert_array_equal(tr.values, prob.u0)
    ends = evaluate_on_grid(init_params([1, 4, 1], "asu", 0), prob, "second_order", 2)
    np.testing.assert_array_equal(ends.times, [prob.t0, prob.t_end])
    with pytest.raises(ValueError):
        evaluate_on_grid(p, prob, "first_order", 1)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs_max=0)
    with pytest.raises(ValueError):
        TrainConfig(n_train=1)


def test_save_run(tmp_path):
    cfg = TrainConfig(epochs_max=6, loss_threshold=None, **SMALL)
    rec = train(cfg)
    save_run(rec, cfg, tmp_path / "run")
    hist = read_history(tmp_path / "run" / "history.csv")
    assert [(e, t) for e, t, _ in hist] == rec.train_loss_history
    params = load_params(tmp_path / "run" / "checkpoint.bin")
    for x, y in zip(params.arrays(), rec.final_params.arrays()):
        assert x.tobytes() == y.tobytes()
    meta = json.loads((tmp_path / "run" / "meta.json").read_text())
    assert meta["epochs_run"] == 6 and meta["converged"] is False
    assert meta["config"]["activation"] == "asu"
    assert math.isclose(meta["config"]["problem"]["u0"], math.pi / 3)
