"""Fully connected scalar-to-scalar network evaluated in jet arithmetic.

Every hidden layer is ``act(W x + b)``; the read-out layer is affine only.
Jets are carried as arrays of shape ``(3, n, width)``: slot 0 is the value,
slots 1 and 2 the first and second derivative with respect to the input
time. Affine maps act linearly on all three slots and the bias only enters
slot 0, so one matmul per layer covers the whole jet.
"""
import struct
from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationKind, jet_forward
from .errors import NonFiniteError
from .jets import Jet2

DEFAULT_WIDTHS = (1, 128, 128, 128, 1)

_MAGIC = b"OSCPINN\x01"


@dataclass
class LayerParams:
    weights: np.ndarray  # (out, in)
    biases: np.ndarray   # (out,)

    @property
    def shape(self):
        return self.weights.shape


@dataclass
class MlpParams:
    layers: list
    activation: ActivationKind = ActivationKind.ASU

    def __post_init__(self):
        self.activation = ActivationKind.parse(self.activation)
        widths = self.widths
        if widths[0] != 1 or widths[-1] != 1:
            raise ValueError(f"network must map 1 input to 1 output, got widths {widths}")
        for k, layer in enumerate(self.layers):
            if layer.biases.shape != (layer.weights.shape[0],):
                raise ValueError(f"layer {k}: bias shape {layer.biases.shape} "
                                 f"does not match weights {layer.weights.shape}")
            if k and layer.weights.shape[1] != self.layers[k - 1].weights.shape[0]:
                raise ValueError(f"layer {k}: input width {layer.weights.shape[1]} does not "
                                 f"match previous output width {self.layers[k - 1].weights.shape[0]}")

    @property
    def widths(self):
        return [self.layers[0].weights.shape[1]] + [layer.weights.shape[0] for layer in self.layers]

    @property
    def n_params(self):
        return sum(layer.weights.size + layer.biases.size for layer in self.layers)

    def arrays(self):
        """Parameter arrays in a fixed order: W0, b0, W1, b1, ..."""
        out = []
        for layer in self.layers:
            out.extend((layer.weights, layer.biases))
        return out

    @classmethod
    def from_arrays(cls, arrays, activation):
        it = iter(arrays)
        return cls([LayerParams(w, b) for w, b in zip(it, it)], activation)

    def copy(self):
        return MlpParams.from_arrays([a.copy() for a in self.arrays()], self.activation)


def init_params(widths=DEFAULT_WIDTHS, activation=ActivationKind.ASU, seed=0):
    """Glorot-uniform weights, zero biases, fully determined by ``seed``."""
    widths = [int(w) for w in widths]
    if len(widths) < 2 or any(w <= 0 for w in widths):
        raise ValueError(f"widths must have at least two positive entries, got {widths}")
    if widths[0] != 1 or widths[-1] != 1:
        raise ValueError(f"first and last width must be 1, got {widths}")
    rng = np.random.default_rng(int(seed))
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append(LayerParams(rng.uniform(-bound, bound, size=(fan_out, fan_in)),
                                  np.zeros(fan_out)))
    return MlpParams(layers, activation)


@dataclass
class ForwardTape:
    """Per-layer record kept for the reverse sweep."""

    inputs: list = field(default_factory=list)   # jet entering each layer, (3, n, in)
    preacts: list = field(default_factory=list)  # hidden layers only, (3, n, out)
    caches: list = field(default_factory=list)   # (f', f'', f''') per hidden layer


def _affine(x, layer):
    three, n, width = x.shape
    z = (x.reshape(three * n, width) @ layer.weights.T).reshape(three, n, -1)
    z[0] += layer.biases
    return z


def forward_batch(params, t, *, tape=None, check=False, jet_fn=None):
    """Evaluate the network jet at an array of times.

    Returns an array of shape ``(3, n)``. When ``tape`` is given, the
    intermediates needed by :func:`backward_batch` are appended to it.
    ``jet_fn`` replaces the activation jet (test hook).
    """
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    x = np.stack((t, np.ones_like(t), np.zeros_like(t)))[:, :, None]
    kind = int(params.activation)
    hidden, last = params.layers[:-1], params.layers[-1]
    for k, layer in enumerate(hidden):
        z = _affine(x, layer)
        if jet_fn is None:
            h, cache = jet_forward(kind, z)
        else:
            h, cache = jet_fn(z), None
        if check and not np.all(np.isfinite(h)):
            raise NonFiniteError(f"non-finite activation output in layer {k}")
        if tape is not None:
            tape.inputs.append(x)
            tape.preacts.append(z)
            tape.caches.append(cache)
        x = h
    if tape is not None:
        tape.inputs.append(x)
    out = _affine(x, last)[:, :, 0]
    if check and not np.all(np.isfinite(out)):
        raise NonFiniteError(f"non-finite network output in layer {len(params.layers) - 1}")
    return out


def forward_jet(params, t):
    """Network output and its first two time derivatives at ``t``.

    Scalar ``t`` gives a :class:`Jet2` of floats, array ``t`` a Jet2 of
    arrays with the same shape.
    """
    shape = np.shape(t)
    out = forward_batch(params, t, check=True)
    if not shape:
        return Jet2(float(out[0, 0]), float(out[1, 0]), float(out[2, 0]))
    return Jet2(*(out[k].reshape(shape) for k in range(3)))


# -- checkpoint -----------------------------------------------------------------
#
# Little-endian binary layout:
#   8 bytes   magic b"OSCPINN\x01"
#   u32       activation name length L, then L bytes of UTF-8 ("asu", "tanh", ...)
#   u32       number of widths K, then K x u32 widths
#   per layer, in order:
#     u32 rows, u32 cols, rows*cols x f64 weights (row-major), rows x f64 biases

def dumps_params(params):
    name = params.activation.label.encode("utf-8")
    widths = params.widths
    chunks = [_MAGIC, struct.pack("<I", len(name)), name,
              struct.pack(f"<I{len(widths)}I", len(widths), *widths)]
    for layer in params.layers:
        rows, cols = layer.weights.shape
        chunks.append(struct.pack("<II", rows, cols))
        chunks.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(layer.biases, dtype="<f8").tobytes())
    return b"".join(chunks)


def loads_params(data):
    if data[:8] != _MAGIC:
        raise ValueError("not an oscpinn checkpoint (bad magic)")
    pos = 8

    def take(fmt):
        nonlocal pos
        vals = struct.unpack_from(fmt, data, pos)
        pos += struct.calcsize(fmt)
        return vals

    (name_len,) = take("<I")
    name = data[pos:pos + name_len].decode("utf-8")
    pos += name_len
    (k,) = take("<I")
    widths = list(take(f"<{k}I"))
    layers = []
    for _ in range(k - 1):
        rows, cols = take("<II")
        w = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=pos).reshape(rows, cols)
        pos += 8 * rows * cols
        b = np.frombuffer(data, dtype="<f8", count=rows, offset=pos)
        pos += 8 * rows
        layers.append(LayerParams(w.astype(np.float64), b.astype(np.float64)))
    if pos != len(data):
        raise ValueError(f"checkpoint has {len(data) - pos} trailing bytes")
    params = MlpParams(layers, name)
    if params.widths != widths:
        raise ValueError(f"checkpoint widths header {widths} disagrees with layers {params.widths}")
    return params


def save_params(params, path):
    with open(path, "wb") as fh:
        fh.write(dumps_params(params))


def load_params(path):
    with open(path, "rb") as fh:
        return loads_params(fh.read())
