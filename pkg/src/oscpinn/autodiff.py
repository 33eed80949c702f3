"""Reverse accumulation of the collocation loss through the jet forward pass.

The forward pass records, per hidden layer, the incoming jet, the
pre-activation jet and the activation derivative cache. The backward sweep
walks that record in reverse:

* loss -> residual -> trial jet (u~, u~', u~''),
* trial jet -> network output jet (the trial map is linear in N),
* through each affine map (shared weights act on all three jet slots),
* through each activation jet, whose adjoint needs f', f'' and f'''.

Summation order is fixed (one BLAS product per weight matrix, numpy
pairwise sums for biases), so repeated calls are bit-identical.
"""
import math
from dataclasses import dataclass

import numpy as np

from .activations import jet_backward
from .errors import NonFiniteError
from .network import ForwardTape, LayerParams
from .problem import evaluate_loss, first_nonfinite_point, residual_partials


@dataclass
class GradientSet:
    """Loss gradients, one :class:`LayerParams` per network layer."""

    layers: list

    def arrays(self):
        out = []
        for layer in self.layers:
            out.extend((layer.weights, layer.biases))
        return out

    def flat(self):
        return np.concatenate([a.ravel() for a in self.arrays()])


def _trial_adjoint(coeffs, du):
    (m0, m1, m2) = coeffs.mix
    g0, g1, g2 = du
    return np.stack((m0[0] * g0 + m1[0] * g1 + m2[0] * g2,
                     m1[1] * g1 + m2[1] * g2,
                     m2[2] * g2))


def backward_batch(params, tape, dout):
    """Gradient of a scalar with respect to all parameters, given its
    cotangent ``dout`` (shape ``(3, n)``) on the network output jet."""
    three, n = dout.shape
    grads = [None] * len(params.layers)
    dz = dout[:, :, None]
    for k in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[k]
        x = tape.inputs[k]
        if k < len(params.layers) - 1:
            dz = jet_backward(dz, tape.preacts[k], tape.caches[k])
        width_out, width_in = layer.weights.shape
        dz2 = dz.reshape(three * n, width_out)
        dw = dz2.T @ x.reshape(three * n, width_in)
        db = dz[0].sum(axis=0)
        grads[k] = LayerParams(dw, db)
        if k:
            dz = (dz2 @ layer.weights).reshape(three, n, width_in)
    return GradientSet(grads)


def loss_and_grad(params, problem, transform, points, ic_penalty=0.0):
    """Collocation loss and its exact gradient with respect to every parameter."""
    tape = ForwardTape()
    ev = evaluate_loss(params, problem, transform, points, ic_penalty, tape=tape)
    if not math.isfinite(ev.loss):
        where = first_nonfinite_point(ev.residuals, points)
        raise NonFiniteError(f"non-finite residual at collocation point t={where}")
    n = ev.residuals.size
    v, d1, d2 = ev.trial
    _, dr_dv, dr_dd2 = residual_partials(problem, v, d2)
    scale = 2.0 * ev.residuals / n
    du0 = scale * dr_dv[:n]
    du2 = scale * dr_dd2[:n]
    du1 = np.zeros_like(du0)
    if ic_penalty:
        du0 = np.append(du0, 0.0)
        du1 = np.append(du1, 2.0 * float(ic_penalty) * d1[n])
        du2 = np.append(du2, 0.0)
    dout = _trial_adjoint(ev.coeffs, (du0, du1, du2))
    grads = backward_batch(params, tape, dout)
    for k, g in enumerate(grads.layers):
        if not (np.all(np.isfinite(g.weights)) and np.all(np.isfinite(g.biases))):
            bad = ~np.isfinite(dout).all(axis=0)
            where = first_nonfinite_point(np.where(bad, np.nan, 0.0)[:n], points)
            raise NonFiniteError(f"non-finite gradient in layer {k}"
                                 + (f" from collocation point t={where}" if where is not None else ""))
    return ev.loss, grads
