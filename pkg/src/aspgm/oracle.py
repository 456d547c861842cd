"""First-order oracle wrappers and the sample record used by every method."""
import time
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteOracle


@dataclass(frozen=True)
class OracleSample:
    """Function value and gradient at ``x``.

    ``g_raw`` is the Euclidean gradient.  ``g`` is the gradient with respect to
    the working inner product (``B @ g_raw``) and ``gnorm2`` is ``<g_raw, g>``,
    the squared gradient norm in that geometry.
    """

    x: np.ndarray
    f: float
    g_raw: np.ndarray
    g: np.ndarray
    gnorm2: float
    index: int = -1


class CountingOracle:
    """Counts every evaluation of ``fun`` and enforces an optional budget.

    ``fun(x)`` must return ``(f, grad)``.
    """

    def __init__(self, fun, budget=None):
        self.fun = fun
        self.budget = budget
        self.calls = 0
        self.t0 = time.perf_counter()

    @property
    def remaining(self):
        if self.budget is None:
            return np.inf
        return self.budget - self.calls

    def elapsed(self):
        return time.perf_counter() - self.t0

    def __call__(self, x):
        f, g = self.fun(x)
        self.calls += 1
        f = float(f)
        g = np.asarray(g, dtype=float)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise NonFiniteOracle(x, f)
        return f, g

    def sample(self, x, geometry=None):
        f, g_raw = self(x)
        return make_sample(x, f, g_raw, geometry, index=self.calls - 1)


def make_sample(x, f, g_raw, geometry=None, index=-1):
    if geometry is None or geometry.is_identity:
        g = g_raw
    else:
        g = geometry.apply_B(g_raw)
    return OracleSample(x=x, f=f, g_raw=g_raw, g=g, gnorm2=float(g_raw @ g), index=index)


def resample(sample, geometry):
    """Re-express a sample's gradient in a new geometry (no oracle call)."""
    return make_sample(sample.x, sample.f, sample.g_raw, geometry, sample.index)
