"""Log-domain scalars and truncated Taylor jets.

A nonnegative quantity is carried as its natural logarithm (a plain float),
with ``-inf`` as the distinguished encoding of exact zero.  Sums of such
quantities always go through :func:`log_sum_exp`, so no intermediate
``exp`` can overflow or underflow.

A :class:`ScaledJet` carries a quantity together with its first ``order``
derivatives in a scalar parameter: the zeroth-order value lives in ``scale``
(as a log), and ``coeffs`` holds the Taylor coefficients normalized so that
``coeffs[0] == 1``.  Jets of positive quantities therefore never overflow
even when the underlying value has log-magnitude in the thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOG_ZERO = -math.inf

DEFAULT_JET_ORDER = 8


def log_sum_exp(values) -> float:
    """Return log(sum(exp(v) for v in values)) without over/underflow.

    The empty sum is the zero state ``-inf``.  NaN entries are rejected.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return LOG_ZERO
    if np.isnan(arr).any():
        raise ValueError("log_sum_exp: NaN is not a valid log-magnitude")
    m = float(np.max(arr))
    if m == LOG_ZERO:
        return LOG_ZERO
    return m + math.log(float(np.sum(np.exp(arr - m))))


def log_mean_exp(values) -> float:
    """log of the arithmetic mean of exp(values); empty input is an error."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("log_mean_exp: empty input")
    return log_sum_exp(arr) - math.log(arr.size)


def _check_log(x: float) -> float:
    if math.isnan(x):
        raise ValueError("NaN is not a valid log-magnitude")
    return float(x)


@dataclass(frozen=True)
class ScaledJet:
    """Truncated Taylor jet with a separate log scale.

    ``scale`` is the log of the zeroth-order value; ``coeffs[k]`` is the
    k-th Taylor coefficient divided by the zeroth-order value, so
    ``coeffs[0] == 1`` whenever the jet is nonzero.  The zero jet has
    ``scale == -inf`` and is the identity for accumulation.
    """

    scale: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        if math.isnan(self.scale) or np.isnan(c).any():
            raise ValueError("ScaledJet: NaN coefficient")
        if self.scale != LOG_ZERO and c[0] != 1.0:
            raise ValueError("ScaledJet: coeffs[0] must be 1 for a nonzero jet")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def value(self) -> float:
        """Log of the zeroth-order value."""
        return self.scale

    def derivative(self, k: int) -> float:
        """k-th derivative of the carried quantity (linear scale)."""
        return math.factorial(k) * self.coeffs[k] * math.exp(self.scale)


def zero_jet(order: int = DEFAULT_JET_ORDER) -> ScaledJet:
    c = np.zeros(order + 1)
    return ScaledJet(LOG_ZERO, c)


def constant_jet(log_value: float, order: int = DEFAULT_JET_ORDER) -> ScaledJet:
    """Jet of a quantity that does not depend on the jet parameter."""
    _check_log(log_value)
    if log_value == LOG_ZERO:
        return zero_jet(order)
    c = np.zeros(order + 1)
    c[0] = 1.0
    return ScaledJet(log_value, c)


def exp_linear_jet(log_const: float, slope: float = 1.0,
                   order: int = DEFAULT_JET_ORDER) -> ScaledJet:
    """Jet of exp(c + slope*x) at x = 0: scale c, coefficients slope^k / k!."""
    _check_log(log_const)
    k = np.arange(order + 1)
    c = slope ** k / np.array([math.factorial(i) for i in k], dtype=float)
    return ScaledJet(log_const, c)


def _require_same_order(a: ScaledJet, b: ScaledJet):
    if a.order != b.order:
        raise ValueError(f"mismatched jet orders {a.order} != {b.order}")


def jet_mul(a: ScaledJet, b: ScaledJet) -> ScaledJet:
    """Product of two jets: truncated coefficient convolution."""
    _require_same_order(a, b)
    if a.scale == LOG_ZERO or b.scale == LOG_ZERO:
        return zero_jet(a.order)
    c = np.convolve(a.coeffs, b.coeffs)[: a.order + 1]
    # a0*b0 == 1 exactly, no renormalization needed
    return ScaledJet(a.scale + b.scale, c)


def jet_mul_acc(acc: ScaledJet, factor: ScaledJet, weight) -> ScaledJet:
    """Return acc + weight*factor.

    ``weight`` is either a log-magnitude float (a constant in the jet
    parameter, contributing only at order 0) or itself a :class:`ScaledJet`
    (e.g. the jet of a Boltzmann factor), in which case the factor is
    convolved with the weight's coefficients before accumulation.
    """
    if isinstance(weight, ScaledJet):
        term = jet_mul(factor, weight)
    else:
        w = _check_log(weight)
        if w == LOG_ZERO or factor.scale == LOG_ZERO:
            term = zero_jet(factor.order)
        else:
            term = ScaledJet(factor.scale + w, factor.coeffs)
    _require_same_order(acc, term)
    if term.scale == LOG_ZERO:
        return acc
    if acc.scale == LOG_ZERO:
        return term
    m = max(acc.scale, term.scale)
    c = np.exp(acc.scale - m) * acc.coeffs + np.exp(term.scale - m) * term.coeffs
    c0 = c[0]
    if not c0 > 0.0:
        raise ValueError("jet accumulation lost positivity at order 0")
    return ScaledJet(m + math.log(c0), c / c0)


def log_of_jet(j: ScaledJet) -> np.ndarray:
    """Taylor coefficients of log(jet), zeroth term included.

    Returns g with g[0] = scale and, for k >= 1, the k-th coefficient of
    log(1 + c1 x + ... + cR x^R) by the power-series recursion
    g_k = c_k - (1/k) sum_{i=1}^{k-1} i g_i c_{k-i}.
    """
    if j.scale == LOG_ZERO:
        raise ValueError("log of the zero jet")
    f = j.coeffs
    g = np.zeros(j.order + 1)
    g[0] = j.scale
    for k in range(1, j.order + 1):
        s = 0.0
        for i in range(1, k):
            s += i * g[i] * f[k - i]
        g[k] = f[k] - s / k
    return g
