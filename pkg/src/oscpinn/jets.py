from typing import NamedTuple

import numpy as np


class Jet2(NamedTuple):
    """A value with its first and second derivative in time.

    Fields may be Python floats or equally shaped numpy arrays; every
    jet-level operation in the package is elementwise.
    """

    v: float
    d1: float
    d2: float

    @classmethod
    def variable(cls, t):
        """Seed jet for the independent variable: (t, 1, 0)."""
        t = np.asarray(t, dtype=np.float64) if np.ndim(t) else float(t)
        return cls(t, np.ones_like(t) if np.ndim(t) else 1.0,
                   np.zeros_like(t) if np.ndim(t) else 0.0)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.d1))
                    and np.all(np.isfinite(self.d2)))
