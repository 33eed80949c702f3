import numpy as np
import pytest

from oscpinn.activations import ActivationKind
from oscpinn.autodiff import loss_and_grad
from oscpinn.errors import NonFiniteError
from oscpinn.network import init_params
from oscpinn.problem import OscillatorProblem, TrialTransformKind, collocation_loss, collocation_points

MEMS = OscillatorProblem()
TRANSFORMS = list(TrialTransformKind)
PTS = collocation_points(16, 0, 10)


def fd_gradient_check(params, problem, transform, points, n_checks=50, seed=0, h=1e-5,
                      ic_penalty=0.0):
    """Worst relative disagreement between analytic and centred-difference gradients
    over ``n_checks`` randomly chosen parameter entries."""
    _, grads = loss_and_grad(params, problem, transform, points, ic_penalty)
    arrays, garrays = params.arrays(), grads.arrays()
    sizes = np.array([a.size for a in arrays])
    rng = np.random.default_rng(seed)
    flat_ids = rng.choice(sizes.sum(), size=min(n_checks, sizes.sum()), replace=False)
    worst = 0.0
    for fid in flat_ids:
        k = int(np.searchsorted(np.cumsum(sizes), fid, side="right"))
        idx = np.unravel_index(fid - (np.cumsum(sizes)[k - 1] if k else 0), arrays[k].shape)
        old = arrays[k][idx]
        arrays[k][idx] = old + h
        lp = collocation_loss(params, problem, transform, points, ic_penalty)
        arrays[k][idx] = old - h
        lm = collocation_loss(params, problem, transform, points, ic_penalty)
        arrays[k][idx] = old
        fd = (lp - lm) / (2 * h)
        an = garrays[k][idx]
        # relative error, with differences below the 1e-6 absolute floor counted as exact
        err = abs(fd - an)
        worst = max(worst, 0.0 if err <= 1e-6 else err / abs(an))
    return worst


@pytest.mark.parametrize("kind", list(ActivationKind))
@pytest.mark.parametrize("transform", TRANSFORMS)
def test_gradient_matches_finite_differences(kind, transform):
    params = init_params([1, 8, 8, 1], kind, seed=21)
    assert fd_gradient_check(params, MEMS, transform, PTS) < 1e-4


def test_gradient_with_ic_penalty():
    params = init_params([1, 8, 8, 1], "gcu", seed=2)
    assert fd_gradient_check(params, MEMS, "first_order", PTS, ic_penalty=0.7) < 1e-4


def test_loss_matches_forward_only_path_bitwise():
    for kind in ActivationKind:
        params = init_params([1, 16, 16, 1], kind, seed=8)
        for transform in TRANSFORMS:
            loss, _ = loss_and_grad(params, MEMS, transform, PTS)
            assert loss == collocation_loss(params, MEMS, transform, PTS)


def test_zero_network():
    params = init_params([1, 8, 8, 1], "asu", 0)
    for a in params.arrays():
        a[...] = 0.0
    loss, grads = loss_and_grad(params, MEMS, "first_order", PTS)
    assert loss == pytest.approx(4.302824373626669, rel=1e-14)
    assert [g.weights.shape for g in grads.layers] == [l.weights.shape for l in params.layers]


def test_duplicate_points():
    params = init_params([1, 8, 8, 1], "mish", seed=5)
    l1, g1 = loss_and_grad(params, MEMS, "second_order", [2.5])
    l2, g2 = loss_and_grad(params, MEMS, "second_order", [2.5, 2.5])
    assert l1 == l2
    for a, b in zip(g1.arrays(), g2.arrays()):
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)


def test_mean_of_singletons():
    params = init_params([1, 8, 8, 1], "sine", seed=6)
    pts = [0.3, 1.7, 4.4, 9.0]
    loss, grads = loss_and_grad(params, MEMS, "second_order", pts)
    singles = [loss_and_grad(params, MEMS, "second_order", [t]) for t in pts]
    assert loss == pytest.approx(np.mean([s[0] for s in singles]), rel=1e-13)
    mean_flat = np.mean([s[1].flat() for s in singles], axis=0)
    np.testing.assert_allclose(grads.flat(), mean_flat, rtol=1e-11, atol=1e-13)


def test_coefficient_scaling():
    params = init_params([1, 8, 8, 1], "asu", seed=6)
    c = 3.0
    scaled = OscillatorProblem(tuple(c * x for x in MEMS.a))
    l0, g0 = loss_and_grad(params, MEMS, "second_order", PTS)
    l1, g1 = loss_and_grad(params, scaled, "second_order", PTS)
    assert l1 == pytest.approx(c * c * l0, rel=1e-12)
    np.testing.assert_allclose(g1.flat(), c * c * g0.flat(), rtol=1e-10, atol=1e-12)


def test_non_finite_loss_reports_point():
    params = init_params([1, 4, 1], "asu", seed=0)
    params.layers[-1].weights[...] = 1e200
    with np.errstate(over="ignore", invalid="ignore"), \
            pytest.raises(NonFiniteError, match="collocation point t="):
        loss_and_grad(params, MEMS, "second_order", [1.0, 2.0])


def test_default_width_gradient_spot_check():
    params = init_params([1, 128, 128, 128, 1], "asu", seed=1)
    pts = collocation_points(20, 0, 10)
    assert fd_gradient_check(params, MEMS, "second_order", pts, n_checks=20, seed=3) < 1e-4
