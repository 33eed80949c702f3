"""Classical reference solvers for the scalar oscillator.

The equation is reduced to the first-order system

    u' = w,    w' = -(A3 u + A4 u^3 + A5 u^5 + A6 u^7) / (A0 + A1 u^2 + A2 u^4)

and stepped by one of three schemes: classical RK4, four-step
Adams-Bashforth (RK4 start-up) and the adaptive Dormand-Prince 5(4) pair.
The stepping loops are numba kernels when numba is enabled and run as
plain Python otherwise; both paths execute the same source.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ._jit import njit
from .errors import IntegrationError

INERTIA_FLOOR = 1e-12
MIN_STEP = 1e-12

_OK, _BAD_INERTIA, _UNDERFLOW, _NONFINITE = 0, 1, 2, 3


@dataclass
class SolutionTrace:
    times: np.ndarray
    values: np.ndarray
    velocities: np.ndarray = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.velocities is not None:
            self.velocities = np.asarray(self.velocities, dtype=np.float64)
        n = self.times.shape[0]
        if self.values.shape != (n,) or (self.velocities is not None and self.velocities.shape != (n,)):
            raise ValueError("trace fields must be 1-D and of equal length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("trace times must be strictly ascending")

    def __len__(self):
        return self.times.shape[0]


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if trace.velocities is None:
            w.writerow(["t", "u"])
            for t, u in zip(trace.times, trace.values):
                w.writerow([f"{t:.17g}", f"{u:.17g}"])
        else:
            w.writerow(["t", "u", "v"])
            for t, u, v in zip(trace.times, trace.values, trace.velocities):
                w.writerow([f"{t:.17g}", f"{u:.17g}", f"{v:.17g}"])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(x) for x in row] for row in reader], dtype=np.float64).reshape(-1, len(header))
    return SolutionTrace(rows[:, 0], rows[:, 1], rows[:, 2] if len(header) > 2 else None)


# -- kernels ----------------------------------------------------------------------

@njit
def _accel(a, u):
    u2 = u * u
    g = a[0] + u2 * (a[1] + u2 * a[2])
    f = u * (a[3] + u2 * (a[4] + u2 * (a[5] + u2 * a[6])))
    if not g > INERTIA_FLOOR:
        return math.nan, g
    return -f / g, g


@njit
def _rk4_step(a, u, w, h):
    k1u = w
    k1w, g1 = _accel(a, u)
    k2u = w + 0.5 * h * k1w
    k2w, g2 = _accel(a, u + 0.5 * h * k1u)
    k3u = w + 0.5 * h * k2w
    k3w, g3 = _accel(a, u + 0.5 * h * k2u)
    k4u = w + h * k3w
    k4w, g4 = _accel(a, u + h * k3u)
    gmin = min(min(g1, g2), min(g3, g4))
    un = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    wn = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    return un, wn, gmin


@njit
def _rk4_kernel(a, u0, w0, t0, h, n_steps):
    t = np.empty(n_steps + 1)
    u = np.empty(n_steps + 1)
    w = np.empty(n_steps + 1)
    t[0], u[0], w[0] = t0, u0, w0
    for i in range(n_steps):
        un, wn, g = _rk4_step(a, u[i], w[i], h)
        if not g > INERTIA_FLOOR:
            return t[:i + 1], u[:i + 1], w[:i + 1], _BAD_INERTIA
        t[i + 1] = t0 + (i + 1) * h
        u[i + 1] = un
        w[i + 1] = wn
    return t, u, w, _OK


@njit
def _ab4_kernel(a, u0, w0, t0, h, n_steps):
    t = np.empty(n_steps + 1)
    u = np.empty(n_steps + 1)
    w = np.empty(n_steps + 1)
    fw = np.empty(n_steps + 1)  # w' history; u' history is w itself
    t[0], u[0], w[0] = t0, u0, w0
    for i in range(n_steps + 1):
        t[i] = t0 + i * h
    fw[0], g = _accel(a, u0)
    if not g > INERTIA_FLOOR:
        return t[:1], u[:1], w[:1], _BAD_INERTIA
    for i in range(min(3, n_steps)):
        un, wn, g = _rk4_step(a, u[i], w[i], h)
        if not g > INERTIA_FLOOR:
            return t[:i + 1], u[:i + 1], w[:i + 1], _BAD_INERTIA
        u[i + 1] = un
        w[i + 1] = wn
        fw[i + 1], g = _accel(a, un)
    for i in range(3, n_steps):
        u[i + 1] = u[i] + h / 24.0 * (55.0 * w[i] - 59.0 * w[i - 1] + 37.0 * w[i - 2] - 9.0 * w[i - 3])
        w[i + 1] = w[i] + h / 24.0 * (55.0 * fw[i] - 59.0 * fw[i - 1] + 37.0 * fw[i - 2] - 9.0 * fw[i - 3])
        fw[i + 1], g = _accel(a, u[i + 1])
        if not g > INERTIA_FLOOR:
            return t[:i + 2], u[:i + 2], w[:i + 2], _BAD_INERTIA
    return t, u, w, _OK


# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# 5th-order minus embedded 4th-order weights
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0

_SAFETY, _FAC_MIN, _FAC_MAX = 0.9, 0.2, 5.0


@njit
def _dopri_kernel(a, u0, w0, t0, t_end, rtol, atol):
    cap = 1024
    ts = np.empty(cap)
    us = np.empty(cap)
    ws = np.empty(cap)
    ts[0], us[0], ws[0] = t0, u0, w0
    n = 1

    t, u, w = t0, u0, w0
    k1u = w
    k1w, g = _accel(a, u)
    if not g > INERTIA_FLOOR:
        return ts[:n], us[:n], ws[:n], _BAD_INERTIA

    # starting step (Hairer, Norsett & Wanner, II.4)
    sc_u = atol + rtol * abs(u)
    sc_w = atol + rtol * abs(w)
    d0 = math.sqrt(0.5 * ((u / sc_u) ** 2 + (w / sc_w) ** 2))
    d1 = math.sqrt(0.5 * ((k1u / sc_u) ** 2 + (k1w / sc_w) ** 2))
    h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h = min(h, t_end - t0)
    fu, _ = _accel(a, u + h * k1u)
    d2 = math.sqrt(0.5 * (((w + h * k1w - k1u) / sc_u) ** 2 + ((fu - k1w) / sc_w) ** 2)) / h
    dm = max(d1, d2)
    h1 = max(1e-6, h * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** (1.0 / 5.0)
    h = min(100.0 * h, h1, t_end - t0)

    rejected = False
    while t < t_end:
        if h < MIN_STEP:
            return ts[:n], us[:n], ws[:n], _UNDERFLOW
        last = t + h >= t_end
        if last:
            h = t_end - t

        k2u = w + h * (_A21 * k1w)
        k2w, g2 = _accel(a, u + h * (_A21 * k1u))
        k3u = w + h * (_A31 * k1w + _A32 * k2w)
        k3w, g3 = _accel(a, u + h * (_A31 * k1u + _A32 * k2u))
        k4u = w + h * (_A41 * k1w + _A42 * k2w + _A43 * k3w)
        k4w, g4 = _accel(a, u + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u))
        k5u = w + h * (_A51 * k1w + _A52 * k2w + _A53 * k3w + _A54 * k4w)
        k5w, g5 = _accel(a, u + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u))
        k6u = w + h * (_A61 * k1w + _A62 * k2w + _A63 * k3w + _A64 * k4w + _A65 * k5w)
        k6w, g6 = _accel(a, u + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u))
        un = u + h * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        wn = w + h * (_B1 * k1w + _B3 * k3w + _B4 * k4w + _B5 * k5w + _B6 * k6w)
        k7u = wn
        k7w, g7 = _accel(a, un)
        if not min(min(min(g2, g3), min(g4, g5)), min(g6, g7)) > INERTIA_FLOOR:
            return ts[:n], us[:n], ws[:n], _BAD_INERTIA
        if not (math.isfinite(un) and math.isfinite(wn)):
            return ts[:n], us[:n], ws[:n], _NONFINITE

        eu = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
        ew = h * (_E1 * k1w + _E3 * k3w + _E4 * k4w + _E5 * k5w + _E6 * k6w + _E7 * k7w)
        su = atol + rtol * max(abs(u), abs(un))
        sw = atol + rtol * max(abs(w), abs(wn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ew / sw) ** 2))

        if err <= 1.0:
            t = t_end if last else t + h
            u, w = un, wn
            k1u, k1w = k7u, k7w  # first-same-as-last
            if n == cap:
                cap *= 2
                ts2 = np.empty(cap)
                us2 = np.empty(cap)
                ws2 = np.empty(cap)
                ts2[:n] = ts[:n]
                us2[:n] = us[:n]
                ws2[:n] = ws[:n]
                ts, us, ws = ts2, us2, ws2
            ts[n], us[n], ws[n] = t, u, w
            n += 1
            fac = _FAC_MAX if err == 0.0 else min(_FAC_MAX, max(_FAC_MIN, _SAFETY * err ** -0.2))
            if rejected:
                fac = min(fac, 1.0)
            rejected = False
            h *= fac
        else:
            rejected = True
            h *= max(_FAC_MIN, _SAFETY * err ** -0.2)
    return ts[:n], us[:n], ws[:n], _OK


# -- public surface -----------------------------------------------------------------

def _coeffs(problem):
    return np.asarray(problem.a, dtype=np.float64)


def _raise_for(status, trace_t, method):
    if status == _OK:
        return
    t_fail = float(trace_t[-1])
    if status == _BAD_INERTIA:
        raise IntegrationError(f"{method}: inertia A0 + A1 u^2 + A2 u^4 <= {INERTIA_FLOOR:g} "
                               f"after t={t_fail:.17g}; trajectory left the validated range")
    if status == _UNDERFLOW:
        raise IntegrationError(f"{method}: step size fell below {MIN_STEP:g} at t={t_fail:.17g}")
    raise IntegrationError(f"{method}: non-finite state after t={t_fail:.17g}")


def rhs(problem, u, w):
    """First-order right-hand side ``(u', w')`` at state ``(u, w)``."""
    dw, g = _accel(_coeffs(problem), float(u))
    if not g > INERTIA_FLOOR:
        raise IntegrationError(f"inertia polynomial is {g:g} at u={u:g}")
    return float(w), float(dw)


def integrate_rk4(problem, h, n_steps):
    """Fixed-step classical Runge-Kutta from ``(u0, du0)``; every step is kept."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    t, u, w, status = _rk4_kernel(_coeffs(problem), float(problem.u0), float(problem.du0),
                                  float(problem.t0), float(h), int(n_steps))
    _raise_for(status, t, "rk4")
    return SolutionTrace(t, u, w)


def integrate_ab4(problem, h, n_steps):
    """Four-step Adams-Bashforth; the first three steps come from RK4."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    if n_steps < 4:
        raise ValueError(f"ab4 needs at least 4 steps, got {n_steps}")
    t, u, w, status = _ab4_kernel(_coeffs(problem), float(problem.u0), float(problem.du0),
                                  float(problem.t0), float(h), int(n_steps))
    _raise_for(status, t, "ab4")
    return SolutionTrace(t, u, w)


def integrate_dopri45(problem, rtol=1e-10, atol=1e-12, t_end=None, grid=None):
    """Adaptive Dormand-Prince 5(4).

    Returns the accepted steps, or the solution resampled onto ``grid`` by
    cubic Hermite interpolation of (u, u') between accepted steps. With a
    grid and no ``t_end``, integration runs to the last grid point.
    """
    if not (rtol > 0 and atol > 0):
        raise ValueError("rtol and atol must be positive")
    if t_end is None:
        t_end = problem.t_end if grid is None else float(np.max(grid))
    t_end = float(t_end)
    if not t_end > problem.t0:
        raise ValueError(f"t_end ({t_end}) must be greater than t0 ({problem.t0})")
    t, u, w, status = _dopri_kernel(_coeffs(problem), float(problem.u0), float(problem.du0),
                                    float(problem.t0), t_end, float(rtol), float(atol))
    _raise_for(status, t, "dopri45")
    trace = SolutionTrace(t.copy(), u.copy(), w.copy())
    return trace if grid is None else resample(trace, grid)


def resample(trace, grid):
    """Cubic Hermite interpolation of a trace with velocities onto ``grid``."""
    if trace.velocities is None:
        raise ValueError("resampling needs a trace with velocities")
    grid = np.asarray(grid, dtype=np.float64)
    lo, hi = trace.times[0], trace.times[-1]
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if grid.min() < lo - tol or grid.max() > hi + tol:
        raise ValueError(f"grid [{grid.min()}, {grid.max()}] outside trace range [{lo}, {hi}]")
    grid = np.clip(grid, lo, hi)
    spline = CubicHermiteSpline(trace.times, trace.values, trace.velocities)
    return SolutionTrace(grid, spline(grid), spline(grid, 1))


def reference_solution(problem, method="dopri45", grid=None, rtol=1e-10, atol=1e-12, h=1e-3):
    """Reference trace by name (``dopri45``, ``rk4`` or ``ab4``), optionally on ``grid``."""
    if method == "dopri45":
        return integrate_dopri45(problem, rtol, atol, grid=grid)
    span = problem.t_end - problem.t0
    n_steps = max(4, int(math.ceil(span / h - 1e-9)))
    step = span / n_steps
    if method == "rk4":
        trace = integrate_rk4(problem, step, n_steps)
    elif method == "ab4":
        trace = integrate_ab4(problem, step, n_steps)
    else:
        raise ValueError(f"unknown reference method {method!r} (expected dopri45, rk4 or ab4)")
    return trace if grid is None else resample(trace, grid)
