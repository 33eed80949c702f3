"""Electrostatically actuated beam oscillator and the collocation loss.

The model equation is

    (A0 + A1 u^2 + A2 u^4) u'' + A3 u + A4 u^3 + A5 u^5 + A6 u^7 = 0,
    u(t0) = u0,  u'(t0) = du0.

The network output N(t) is wrapped in a trial function that meets the
initial data by construction, and the loss is the mean squared residual of
the trial function over a set of collocation times.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NonFiniteError
from .jets import Jet2
from .network import forward_batch

DEFAULT_COEFFS = (1.0, 0.5, 0.25, 1.0, 0.5, 0.25, 0.1)
HARMONIC_COEFFS = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class OscillatorProblem:
    a: tuple = DEFAULT_COEFFS
    u0: float = math.pi / 3
    du0: float = 0.0
    t0: float = 0.0
    t_end: float = 10.0

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        object.__setattr__(self, "a", a)
        problems = validate_problem(a, self.u0, self.du0, self.t0, self.t_end)
        if problems:
            raise ValueError("; ".join(problems))

    @classmethod
    def harmonic(cls, u0=1.0, du0=0.0, t0=0.0, t_end=2 * math.pi):
        """u'' + u = 0; with u0 = 1, du0 = 0 the solution is cos t."""
        return cls(HARMONIC_COEFFS, u0, du0, t0, t_end)

    def inertia(self, u):
        a0, a1, a2 = self.a[:3]
        u2 = u * u
        return a0 + u2 * (a1 + u2 * a2)

    def restoring(self, u):
        a3, a4, a5, a6 = self.a[3:]
        u2 = u * u
        return u * (a3 + u2 * (a4 + u2 * (a5 + u2 * a6)))


def validate_problem(a, u0, du0, t0, t_end):
    """Return a list of human-readable violations (empty when valid)."""
    problems = []
    if len(a) != 7:
        return [f"coefficient vector must have 7 entries A0..A6, got {len(a)}"]
    vals = [*a, u0, du0, t0, t_end]
    if not all(math.isfinite(float(x)) for x in vals):
        return ["coefficients, initial conditions and time bounds must be finite"]
    if not t_end > t0:
        problems.append(f"t_end ({t_end}) must be greater than t0 ({t0})")
    if not a[0] > 0:
        problems.append(f"A0 must be positive, got {a[0]}")
    else:
        u = np.linspace(-2 * abs(u0), 2 * abs(u0), 1000)
        g = a[0] + a[1] * u**2 + a[2] * u**4
        if not np.all(g > 0):
            problems.append("inertia polynomial A0 + A1 u^2 + A2 u^4 is not positive "
                            f"for |u| <= {2 * abs(u0):g}")
    return problems


class TrialTransformKind(enum.Enum):
    FIRST_ORDER = "first_order"
    SECOND_ORDER = "second_order"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"firstorder": "first_order", "secondorder": "second_order",
                   "first": "first_order", "second": "second_order"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown transform {name!r} "
                             "(expected 'first_order' or 'second_order')") from None


class TrialCoeffs(NamedTuple):
    """u~_j = base_j + sum_k mix[j][k] * N_k for the jet slots j, k in 0..2."""

    base: tuple
    mix: tuple


def trial_coeffs(kind, problem, t):
    e = np.exp(-(np.asarray(t, dtype=np.float64) - problem.t0))
    s = -np.expm1(-(np.asarray(t, dtype=np.float64) - problem.t0))
    s1, s2 = e, -e
    zero = np.zeros_like(s)
    u0, du0 = problem.u0, problem.du0
    if kind is TrialTransformKind.FIRST_ORDER:
        base = (u0 + zero, zero, zero)
        mix = ((s, zero, zero),
               (s1, s, zero),
               (s2, 2.0 * s1, s))
    else:
        ss = s * s
        base = (u0 + du0 * s, du0 * s1, du0 * s2)
        mix = ((ss, zero, zero),
               (2.0 * s * s1, ss, zero),
               (2.0 * (s1 * s1 + s * s2), 4.0 * s * s1, ss))
    return TrialCoeffs(base, mix)


def _apply_trial(coeffs, n0, n1, n2):
    (b0, b1, b2), (m0, m1, m2) = coeffs
    return (b0 + m0[0] * n0,
            b1 + (m1[0] * n0 + m1[1] * n1),
            b2 + (m2[0] * n0 + m2[1] * n1 + m2[2] * n2))


def trial_jet(kind, problem, net, t):
    """Wrap a network jet ``net`` (evaluated at ``t``) into the trial solution jet.

    First order:  u~ = u0 + s N
    Second order: u~ = u0 + du0 s + s^2 N
    with s = 1 - exp(-(t - t0)). At t = t0, s = 0 and s' = 1, so both forms
    give u~ = u0 exactly; only the second order form also gives u~' = du0.
    """
    kind = TrialTransformKind.parse(kind)
    coeffs = trial_coeffs(kind, problem, t)
    out = _apply_trial(coeffs, net.v, net.d1, net.d2)
    if np.ndim(t) == 0 and np.ndim(net.v) == 0:
        return Jet2(*(float(x) for x in out))
    return Jet2(*out)


def residual(problem, u):
    """Left-hand side of the oscillator equation at the jet ``u``."""
    return problem.inertia(u.v) * u.d2 + problem.restoring(u.v)


def residual_partials(problem, v, d2):
    """Residual and its partials with respect to u and u''."""
    a = problem.a
    v2 = v * v
    g = problem.inertia(v)
    r = g * d2 + problem.restoring(v)
    dg = v * (2.0 * a[1] + 4.0 * a[2] * v2)
    df = a[3] + v2 * (3.0 * a[4] + v2 * (5.0 * a[5] + v2 * 7.0 * a[6]))
    return r, dg * d2 + df, g


def collocation_points(n, t0, t_end, mode="equispaced", seed=0):
    """Collocation times on ``[t0, t_end]``.

    ``equispaced`` includes both endpoints; ``uniform_random`` draws i.i.d.
    uniform samples and returns them sorted.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"need at least 2 collocation points, got {n}")
    if not t_end > t0:
        raise ValueError(f"t_end ({t_end}) must be greater than t0 ({t0})")
    if mode == "equispaced":
        return np.linspace(t0, t_end, int(n))
    if mode == "uniform_random":
        rng = np.random.default_rng(int(seed))
        return np.sort(rng.uniform(t0, t_end, size=int(n)))
    raise ValueError(f"unknown sampling mode {mode!r} (expected 'equispaced' or 'uniform_random')")


@dataclass
class LossEval:
    """Everything the reverse sweep needs from one loss evaluation."""

    loss: float
    residuals: np.ndarray
    trial: tuple          # (u~, u~', u~'') over the evaluated times
    coeffs: TrialCoeffs
    penalty: float = 0.0
    tape: object = field(default=None, repr=False)


def evaluate_loss(params, problem, transform, points, ic_penalty=0.0, tape=None):
    """Mean squared residual over ``points`` plus ``ic_penalty * u~'(t0)^2``.

    When the penalty weight is positive, ``t0`` is evaluated as one extra
    row after the collocation points; it does not enter the residual mean.
    """
    transform = TrialTransformKind.parse(transform)
    points = np.asarray(points, dtype=np.float64).reshape(-1)
    if points.size == 0:
        raise ValueError("need at least one collocation point")
    n = points.size
    times = np.append(points, problem.t0) if ic_penalty else points
    net = forward_batch(params, times, tape=tape)
    coeffs = trial_coeffs(transform, problem, times)
    u = _apply_trial(coeffs, net[0], net[1], net[2])
    r = residual(problem, Jet2(u[0][:n], u[1][:n], u[2][:n]))
    loss = float(np.mean(r * r))
    penalty = 0.0
    if ic_penalty:
        penalty = float(ic_penalty) * float(u[1][n]) ** 2
        loss += penalty
    return LossEval(loss, r, u, coeffs, penalty, tape)


def first_nonfinite_point(values, points):
    bad = np.flatnonzero(~np.isfinite(values))
    return float(np.asarray(points).reshape(-1)[bad[0]]) if bad.size else None


def collocation_loss(params, problem, transform, points, ic_penalty=0.0):
    """Forward-only training loss; matches ``loss_and_grad`` bit for bit."""
    ev = evaluate_loss(params, problem, transform, points, ic_penalty)
    if not math.isfinite(ev.loss):
        where = first_nonfinite_point(ev.residuals, points)
        raise NonFiniteError(f"non-finite residual at collocation point t={where}")
    return ev.loss
