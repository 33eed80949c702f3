"""Hidden-layer activations and their derivatives up to third order.

Each activation exposes f, f', f'' and f'''. The third derivative is needed
because the training loss contains the network's second time derivative, and
differentiating f''(a) * a'^2 with respect to weights brings in f'''(a).

Two kernel paths compute the same quantities: a fused per-element numba
loop and a vectorised numpy fallback (see ``oscpinn._jit``).
"""
import enum
import math

import numpy as np

from ._jit import USE_NUMBA, njit
from .jets import Jet2

__all__ = ["ActivationKind", "act_eval", "act_derivs", "act_jet",
           "jet_forward", "jet_backward"]


class ActivationKind(enum.IntEnum):
    TANH = 0
    MISH = 1
    SINE = 2
    GCU = 3
    ASU = 4

    @property
    def label(self):
        """Lowercase name used in config files and on the command line."""
        return self.name.lower()

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            choices = ", ".join(k.label for k in cls)
            raise ValueError(f"unknown activation {name!r} (expected one of {choices})") from None

    @property
    def oscillatory(self):
        return self in (ActivationKind.SINE, ActivationKind.GCU, ActivationKind.ASU)


# -- numpy path ---------------------------------------------------------------

def _softplus(z):
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _derivs_numpy(kind, z):
    if kind == ActivationKind.TANH:
        t = np.tanh(z)
        s = 1.0 - t * t
        return t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)
    if kind == ActivationKind.SINE:
        sn, cs = np.sin(z), np.cos(z)
        return sn, cs, -sn, -cs
    if kind == ActivationKind.GCU:
        sn, cs = np.sin(z), np.cos(z)
        return z * cs, cs - z * sn, -2.0 * sn - z * cs, -3.0 * cs + z * sn
    if kind == ActivationKind.ASU:
        sn, cs = np.sin(z), np.cos(z)
        return z * sn, sn + z * cs, 2.0 * cs - z * sn, -3.0 * sn - z * cs
    if kind == ActivationKind.MISH:
        t = np.tanh(_softplus(z))
        sg = _sigmoid(z)
        dsg = sg * (1.0 - sg)
        ddsg = dsg * (1.0 - 2.0 * sg)
        s = 1.0 - t * t
        t1 = s * sg
        s1 = -2.0 * t * t1
        t2 = s1 * sg + s * dsg
        s2 = -2.0 * (t1 * t1 + t * t2)
        t3 = s2 * sg + 2.0 * s1 * dsg + s * ddsg
        return z * t, t + z * t1, 2.0 * t1 + z * t2, 3.0 * t2 + z * t3
    raise ValueError(f"unknown activation kind {kind!r}")


def _jet_forward_numpy(kind, z):
    f0, f1, f2, f3 = _derivs_numpy(kind, z[0])
    h = np.empty_like(z)
    h[0] = f0
    h[1] = f1 * z[1]
    h[2] = f2 * z[1] * z[1] + f1 * z[2]
    return h, np.stack((f1, f2, f3))


def _jet_backward_numpy(dh, z, cache):
    f1, f2, f3 = cache
    z1, z2 = z[1], z[2]
    dz = np.empty_like(dh)
    dz[0] = dh[0] * f1 + dh[1] * f2 * z1 + dh[2] * (f3 * z1 * z1 + f2 * z2)
    dz[1] = dh[1] * f1 + 2.0 * dh[2] * f2 * z1
    dz[2] = dh[2] * f1
    return dz


# -- numba path ---------------------------------------------------------------

@njit
def _derivs_scalar(kind, z):
    if kind == 0:
        t = math.tanh(z)
        s = 1.0 - t * t
        return t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)
    if kind == 2:
        sn = math.sin(z)
        cs = math.cos(z)
        return sn, cs, -sn, -cs
    if kind == 3:
        sn = math.sin(z)
        cs = math.cos(z)
        return z * cs, cs - z * sn, -2.0 * sn - z * cs, -3.0 * cs + z * sn
    if kind == 4:
        sn = math.sin(z)
        cs = math.cos(z)
        return z * sn, sn + z * cs, 2.0 * cs - z * sn, -3.0 * sn - z * cs
    # mish
    e = math.exp(-abs(z))
    sp = max(z, 0.0) + math.log1p(e)
    sg = 1.0 / (1.0 + e) if z >= 0.0 else e / (1.0 + e)
    t = math.tanh(sp)
    dsg = sg * (1.0 - sg)
    ddsg = dsg * (1.0 - 2.0 * sg)
    s = 1.0 - t * t
    t1 = s * sg
    s1 = -2.0 * t * t1
    t2 = s1 * sg + s * dsg
    s2 = -2.0 * (t1 * t1 + t * t2)
    t3 = s2 * sg + 2.0 * s1 * dsg + s * ddsg
    return z * t, t + z * t1, 2.0 * t1 + z * t2, 3.0 * t2 + z * t3


@njit
def _derivs_loop(kind, z):
    flat = z.ravel()
    out = np.empty((4, flat.size))
    for i in range(flat.size):
        f0, f1, f2, f3 = _derivs_scalar(kind, flat[i])
        out[0, i] = f0
        out[1, i] = f1
        out[2, i] = f2
        out[3, i] = f3
    return out


@njit
def _jet_forward_loop(kind, z):
    n = z.shape[1] * z.shape[2]
    zf = z.reshape((3, n))
    h = np.empty((3, n))
    cache = np.empty((3, n))
    for i in range(n):
        f0, f1, f2, f3 = _derivs_scalar(kind, zf[0, i])
        z1 = zf[1, i]
        h[0, i] = f0
        h[1, i] = f1 * z1
        h[2, i] = f2 * z1 * z1 + f1 * zf[2, i]
        cache[0, i] = f1
        cache[1, i] = f2
        cache[2, i] = f3
    return h.reshape(z.shape), cache.reshape(z.shape)


@njit
def _jet_backward_loop(dh, z, cache):
    n = z.shape[1] * z.shape[2]
    dhf = dh.reshape((3, n))
    zf = z.reshape((3, n))
    cf = cache.reshape((3, n))
    dz = np.empty((3, n))
    for i in range(n):
        f1 = cf[0, i]
        f2 = cf[1, i]
        f3 = cf[2, i]
        z1 = zf[1, i]
        g0 = dhf[0, i]
        g1 = dhf[1, i]
        g2 = dhf[2, i]
        dz[0, i] = g0 * f1 + g1 * f2 * z1 + g2 * (f3 * z1 * z1 + f2 * zf[2, i])
        dz[1, i] = g1 * f1 + 2.0 * g2 * f2 * z1
        dz[2, i] = g2 * f1
    return dz.reshape(z.shape)


# -- public surface -----------------------------------------------------------

def act_derivs(kind, z):
    """Return ``(f, f', f'', f''')`` evaluated elementwise at ``z``."""
    kind = ActivationKind.parse(kind)
    z = np.asarray(z, dtype=np.float64)
    if USE_NUMBA:
        out = _derivs_loop(int(kind), np.ascontiguousarray(z))
        return tuple(out[k].reshape(z.shape) for k in range(4))
    return tuple(np.asarray(a, dtype=np.float64) for a in _derivs_numpy(kind, z))


def act_eval(kind, z, order=0):
    """Derivative of the given ``order`` (0 to 3) of an activation at ``z``.

    Scalars in, scalars out; arrays are evaluated elementwise.

    >>> act_eval("asu", 0.0, 2)
    2.0
    """
    if isinstance(order, bool) or int(order) != order or not 0 <= order <= 3:
        raise ValueError(f"derivative order must be 0, 1, 2 or 3, got {order!r}")
    value = act_derivs(kind, z)[int(order)]
    return float(value) if np.ndim(z) == 0 else value


def act_jet(kind, a):
    """Push a :class:`Jet2` through an activation by the order-2 chain rule."""
    f0, f1, f2, _ = act_derivs(kind, a.v)
    if np.ndim(a.v) == 0:
        f0, f1, f2 = float(f0), float(f1), float(f2)
    return Jet2(f0, f1 * a.d1, f2 * a.d1 * a.d1 + f1 * a.d2)


def jet_forward(kind, z):
    """Batched jet activation.

    ``z`` has shape ``(3, n, width)`` with the value, first and second
    derivative slots stacked on axis 0. Returns the activated jet and a
    cache of ``(f', f'', f''')`` for :func:`jet_backward`.
    """
    if USE_NUMBA:
        return _jet_forward_loop(int(kind), np.ascontiguousarray(z))
    return _jet_forward_numpy(ActivationKind(kind), z)


def jet_backward(dh, z, cache):
    """Adjoint of :func:`jet_forward`: map output-jet cotangents to input-jet cotangents."""
    if USE_NUMBA:
        return _jet_backward_loop(np.ascontiguousarray(dh), z, cache)
    return _jet_backward_numpy(dh, z, cache)
