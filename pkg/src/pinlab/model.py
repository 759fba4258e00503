"""Inter-arrival laws, disorder laws, and disorder sampling.

An inter-arrival law tabulates p(t) = ell(t) / t^(alpha+1) on 1..n_max,
optionally normalized to a sub-probability (tabulated mass plus an analytic
tail estimate <= 1).  Every law carries the constant xi of the splitting
inequality  p(t+tau) <= xi * min(t, tau)^xi * p(t) * p(tau),  computed on
the tabulated range.

Disorder charges are i.i.d. mean-zero with a finite exponential moment;
each family stores an eta witnessing that moment and its moment-generating
boundary varrho (sup of z with E[exp(z*omega)] finite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .numerics import LOG_ZERO

XI_GRID_RESOLUTION = 1e-3


@dataclass(frozen=True)
class EllSpec:
    """Slowly varying factor: constant(c) or log_power(c, beta) = c*(1+ln t)^beta."""

    form: str
    c: float
    beta: float = 0.0

    def __post_init__(self):
        if self.form not in ("constant", "log_power"):
            raise ValueError(f"unknown ell form {self.form!r}")
        if not self.c > 0.0:
            raise ValueError("ell must be positive: c > 0 required")
        if self.form == "log_power" and not self.beta > -1.0:
            raise ValueError("log_power ell requires beta > -1")

    def log_ell(self, t: np.ndarray) -> np.ndarray:
        if self.form == "constant":
            return np.full_like(np.asarray(t, dtype=float), math.log(self.c))
        return math.log(self.c) + self.beta * np.log1p(np.log(t))


def _analytic_tail(ell: EllSpec, alpha: float, n_max: int) -> float:
    """Integral upper bound on sum_{t > n_max} ell(t) t^{-(alpha+1)}."""
    if ell.form == "constant":
        return ell.c / (alpha * n_max ** alpha)
    # substitute u = ln t: integral becomes an upper incomplete gamma
    a = ell.beta + 1.0
    x = alpha * (1.0 + math.log(n_max))
    return ell.c * math.exp(alpha) * alpha ** (-a) * special.gammaincc(a, x) * special.gamma(a)


@dataclass(frozen=True)
class InterArrivalLaw:
    """Tabulated inter-arrival law.

    ``log_p`` has length n_max + 1; entry t is log p(t) for t = 1..n_max
    and entry 0 is -inf (there is no zero-length excursion).  ``alpha`` and
    ``ell`` are None for raw-table laws, which only promise positivity.
    """

    alpha: float | None
    ell: EllSpec | None
    n_max: int
    log_p: np.ndarray = field(repr=False)
    normalized: bool
    xi: float
    tail_mass: float = 0.0

    @property
    def tabulated_mass(self) -> float:
        m = float(np.max(self.log_p[1:]))
        return float(np.exp(m) * np.sum(np.exp(self.log_p[1:] - m)))

    def p(self, t: int) -> float:
        return float(np.exp(self.log_p[t]))


def compute_xi(log_p: np.ndarray, n_max: int) -> float:
    """Smallest xi on a 1e-3 bisection grid with
    log p(t+tau) <= log xi + xi*log min(t,tau) + log p(t) + log p(tau)
    for all t, tau >= 1 with t + tau <= n_max.
    """
    half = n_max // 2
    if half < 1:
        raise ValueError("need n_max >= 2 to constrain xi")
    # worst ratio for each value of min(t, tau)
    worst = np.full(half + 1, -np.inf)
    for t in range(1, half + 1):
        taus = np.arange(t, n_max - t + 1)
        vals = log_p[t + taus] - log_p[t] - log_p[taus]
        worst[t] = float(np.max(vals))
    m = np.arange(1, half + 1)
    log_m = np.log(m)
    w = worst[1:]

    def feasible(xi: float) -> bool:
        return bool(np.all(math.log(xi) + xi * log_m >= w))

    lo, hi = 1e-6, 1.0
    if feasible(lo):
        return lo
    while not feasible(hi):
        hi *= 2.0
    while hi - lo > XI_GRID_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def build_law(alpha: float, ell: EllSpec | None, n_max: int,
              normalize: bool = True) -> InterArrivalLaw:
    """Tabulate p(t) = ell(t)/t^(alpha+1) on 1..n_max.

    ell defaults to the constant 1.  With normalize, log_p is shifted by a
    constant so that the tabulated mass plus the analytic tail estimate
    equals 1 (so the tabulated part is a strict sub-probability, the
    deficit being the tail share).
    """
    if ell is None:
        ell = EllSpec("constant", 1.0)
    if not alpha >= 1.0:
        raise ValueError("alpha < 1 is not supported")
    if n_max < 2:
        raise ValueError("n_max >= 2 required")
    t = np.arange(1, n_max + 1, dtype=float)
    raw = ell.log_ell(t) - (alpha + 1.0) * np.log(t)
    tail = _analytic_tail(ell, alpha, n_max)
    if normalize:
        m = float(np.max(raw))
        total = math.exp(m) * float(np.sum(np.exp(raw - m))) + tail
        shift = math.log(total)
        raw = raw - shift
        tail = tail / total
    log_p = np.concatenate(([LOG_ZERO], raw))
    xi = compute_xi(log_p, n_max)
    return InterArrivalLaw(alpha, ell, n_max, log_p, normalize, xi, tail)


def law_from_table(p_values, normalized: bool = False) -> InterArrivalLaw:
    """Raw-table law from positive probabilities p(1), p(2), ... (test laws)."""
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("need at least p(1), p(2)")
    if not np.all(p > 0.0) or not np.all(np.isfinite(p)):
        raise ValueError("table entries must be positive and finite")
    if normalized and p.sum() > 1.0 + 1e-12:
        raise ValueError("normalized table must have mass <= 1")
    n_max = p.size
    log_p = np.concatenate(([LOG_ZERO], np.log(p)))
    xi = compute_xi(log_p, n_max)
    return InterArrivalLaw(None, None, n_max, log_p, normalized, xi, 0.0)


def law_from_log_table(log_p_values, normalized: bool = False) -> InterArrivalLaw:
    """Raw-table law given directly as log p(t); avoids linear-domain
    underflow for deep tails (e.g. geometric tables at large horizons)."""
    lp = np.asarray(log_p_values, dtype=float)
    if lp.ndim != 1 or lp.size < 2:
        raise ValueError("need at least p(1), p(2)")
    if not np.all(np.isfinite(lp)):
        raise ValueError("log table entries must be finite (p > 0)")
    n_max = lp.size
    log_p = np.concatenate(([LOG_ZERO], lp))
    xi = compute_xi(log_p, n_max)
    return InterArrivalLaw(None, None, n_max, log_p, normalized, xi, 0.0)


def geometric_test_law(n_max: int = 64) -> InterArrivalLaw:
    """p(t) = 2^-t, the closed-form test law (xi = 1, pure h_c = 0)."""
    t = np.arange(1, n_max + 1, dtype=float)
    return law_from_log_table(-t * math.log(2.0), normalized=True)


def classify_hc(alpha: float, varrho: float) -> str:
    """Classification of the critical point: 'finite', 'minus_infinity' or
    'undecided'.  Finite iff (alpha+1)*varrho > 1; the boundary case is out
    of reach and reported as undecided."""
    if not alpha >= 1.0:
        raise ValueError("alpha < 1 is not supported")
    if not varrho > 0.0:
        raise ValueError("varrho must be positive")
    product = (alpha + 1.0) * varrho
    if product > 1.0:
        return "finite"
    if product < 1.0:
        return "minus_infinity"
    return "undecided"


@dataclass(frozen=True)
class DisorderLaw:
    """Mean-zero i.i.d. charge family.

    eta witnesses the finite exponential moment E[exp(eta*|omega|)] < inf;
    varrho is the boundary sup{z : E[exp(z*omega)] < inf} (inf for bounded
    and gaussian families).
    """

    family: str
    param: float
    eta: float
    varrho: float

    @property
    def variance(self) -> float:
        return {
            "zero": 0.0,
            "gaussian": self.param ** 2,
            "uniform_centered": self.param ** 2 / 3.0,
            "rademacher": self.param ** 2,
            "shifted_exponential": self.param ** 2,
        }[self.family]

    @property
    def is_pure(self) -> bool:
        return self.variance == 0.0

    def exp_abs_moment(self, eta: float | None = None) -> float:
        """Closed-form E[exp(eta*|omega0|)] per family."""
        if eta is None:
            eta = self.eta
        s = self.param
        if self.family == "zero":
            return 1.0
        if self.family == "gaussian":
            return 2.0 * math.exp(eta * eta * s * s / 2.0) * float(special.ndtr(eta * s))
        if self.family == "uniform_centered":
            return math.expm1(eta * s) / (eta * s)
        if self.family == "rademacher":
            return math.exp(eta * s)
        if self.family == "shifted_exponential":
            if eta * s >= 1.0:
                return math.inf
            left = math.exp(eta * s) * (-math.expm1(-(1.0 + eta * s))) / (1.0 + eta * s)
            right = math.exp(-1.0) / (1.0 - eta * s)
            return left + right
        raise ValueError(f"unknown family {self.family!r}")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.family == "zero":
            return np.zeros(n)
        if self.family == "gaussian":
            return self.param * rng.standard_normal(n)
        if self.family == "uniform_centered":
            return rng.uniform(-self.param, self.param, n)
        if self.family == "rademacher":
            return self.param * (2.0 * rng.integers(0, 2, n) - 1.0)
        if self.family == "shifted_exponential":
            return self.param * (rng.standard_exponential(n) - 1.0)
        raise ValueError(f"unknown family {self.family!r}")


def zero_disorder() -> DisorderLaw:
    return DisorderLaw("zero", 0.0, 1.0, math.inf)


def gaussian_disorder(sigma: float) -> DisorderLaw:
    if not sigma > 0.0:
        raise ValueError("sigma > 0 required")
    return DisorderLaw("gaussian", sigma, 1.0, math.inf)


def uniform_disorder(half_width: float) -> DisorderLaw:
    if not half_width > 0.0:
        raise ValueError("half_width > 0 required")
    return DisorderLaw("uniform_centered", half_width, 1.0, math.inf)


def rademacher_disorder(scale: float) -> DisorderLaw:
    if not scale > 0.0:
        raise ValueError("scale > 0 required")
    return DisorderLaw("rademacher", scale, 1.0, math.inf)


def shifted_exponential_disorder(lam: float) -> DisorderLaw:
    """omega = lam*(Exp(1) - 1): one-sided heavy tail, varrho = 1/lam."""
    if not lam > 0.0:
        raise ValueError("lam > 0 required")
    return DisorderLaw("shifted_exponential", lam, 0.5 / lam, 1.0 / lam)


DISORDER_FAMILIES = {
    "zero": lambda p: zero_disorder(),
    "gaussian": gaussian_disorder,
    "uniform_centered": uniform_disorder,
    "rademacher": rademacher_disorder,
    "shifted_exponential": shifted_exponential_disorder,
}


@dataclass(frozen=True)
class DisorderSample:
    """Charges omega_1..omega_n; entry i of ``omega`` is omega_{i+1}."""

    master_seed: int
    sample_index: int
    omega: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.omega.size


def _stream(master_seed: int, sample_index: int) -> np.random.Generator:
    # counter-mode derivation: the (seed, index) pair is the Philox key,
    # so streams for distinct indices never share counters
    if not 0 <= master_seed < 2 ** 64:
        raise ValueError("master_seed must fit in 64 bits")
    if not 0 <= sample_index < 2 ** 64:
        raise ValueError("sample_index must fit in 64 bits")
    key = np.array([master_seed, sample_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_disorder(law: DisorderLaw, n: int, master_seed: int,
                    sample_index: int) -> DisorderSample:
    """Draw omega_1..omega_n from the per-index counter-derived stream."""
    if n < 1:
        raise ValueError("n >= 1 required")
    rng = _stream(master_seed, sample_index)
    return DisorderSample(master_seed, sample_index, law.draw(rng, n))


def sample_disorder_block(law: DisorderLaw, n: int, master_seed: int,
                          first_index: int, count: int) -> np.ndarray:
    """Charges for sample_index = first_index..first_index+count-1, one row
    per sample.  Row i is bit-identical to sample_disorder(law, n, seed,
    first_index + i).omega regardless of blocking."""
    out = np.empty((count, n))
    for i in range(count):
        out[i] = law.draw(_stream(master_seed, first_index + i), n)
    return out
