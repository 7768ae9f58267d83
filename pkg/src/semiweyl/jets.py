"""Truncated Taylor jets for exact high-order derivatives of closed forms.

A jet of order K at points t0 stores Taylor coefficients c[0..K] (arrays of
the shape of t0) so that f(t0 + s) = sum c[k] s^k + O(s^{K+1}).  The k-th
derivative is k! c[k].
"""

import math

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, c):
        self.c = c

    @classmethod
    def variable(cls, t0, K):
        t0 = np.asarray(t0, dtype=float)
        c = np.zeros((K + 1,) + t0.shape)
        c[0] = t0
        if K >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, v, like):
        c = np.zeros_like(like.c)
        c[0] = v
        return cls(c)

    @property
    def K(self):
        return self.c.shape[0] - 1

    def _wrap(self, o):
        return o if isinstance(o, Jet) else Jet.constant(o, self)

    def __add__(self, o):
        return Jet(self.c + self._wrap(o).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, o):
        return Jet(self.c - self._wrap(o).c)

    def __rsub__(self, o):
        return self._wrap(o) - self

    def __mul__(self, o):
        if not isinstance(o, Jet):
            return Jet(self.c * o)
        out = np.zeros_like(self.c)
        for k in range(self.K + 1):
            for j in range(k + 1):
                out[k] += self.c[j] * o.c[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self):
        out = np.zeros_like(self.c)
        out[0] = 1.0 / self.c[0]
        for k in range(1, self.K + 1):
            acc = np.zeros_like(self.c[0])
            for j in range(1, k + 1):
                acc += self.c[j] * out[k - j]
            out[k] = -acc * out[0]
        return Jet(out)

    def __truediv__(self, o):
        return self * self._wrap(o).reciprocal()

    def __rtruediv__(self, o):
        return self._wrap(o) * self.reciprocal()

    def exp(self):
        out = np.zeros_like(self.c)
        out[0] = np.exp(self.c[0])
        for k in range(1, self.K + 1):
            acc = np.zeros_like(self.c[0])
            for j in range(1, k + 1):
                acc += j * self.c[j] * out[k - j]
            out[k] = acc / k
        return Jet(out)

    def derivatives(self):
        return np.stack([math.factorial(k) * self.c[k] for k in range(self.K + 1)])


def psi_jet(t, K):
    """Jet of exp(-1/t) for t > 0 and 0 elsewhere (clamped away from 0)."""
    t = np.asarray(t, dtype=float)
    pos = t > 1e-3
    safe = np.where(pos, t, 1.0)
    j = (-(1.0 / Jet.variable(safe, K))).exp()
    j.c[:, ~pos] = 0.0
    return j


def smooth_step_derivs(t, K):
    """Derivatives 0..K of the C-infinity step S(t) (0 for t <= 0, 1 for t >= 1)."""
    t = np.asarray(t, dtype=float)
    a = psi_jet(t, K)
    b = psi_jet(1.0 - t, K)
    # d/dt of psi(1 - t): flip odd coefficients
    sign = (-1.0) ** np.arange(K + 1)
    b = Jet(b.c * sign.reshape((-1,) + (1,) * t.ndim))
    return (a / (a + b)).derivatives()
