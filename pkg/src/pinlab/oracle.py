"""Brute-force ground truth for small systems.

A renewal configuration on {0..n} pinned at n is exactly a subset of
{1..n-1} (the interior contacts) plus the forced contacts 0 and n, so a
system of size n has 2^(n-1) configurations.  Everything here enumerates
them directly; the cap n <= 16 keeps that at 32768 configurations.

Also hosts the closed-form route to the pure-model free energy: the root
z* of e^h * sum_t p(t) z^t = 1, with f(h) = -log z*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import log_sum_exp

ORACLE_MAX_N = 16


def _omega_array(omega, n: int) -> np.ndarray:
    om = getattr(omega, "omega", omega)
    om = np.asarray(om, dtype=float)
    if om.size < n:
        raise ValueError(f"omega has length {om.size} < n = {n}")
    return om[:n]


@dataclass(frozen=True)
class PathSet:
    """All 2^(n-1) pinned configurations with their log weights.

    ``log_weights[mask]`` is the log weight of the configuration whose
    interior contacts are the set bits of ``mask`` (bit i <-> site i+1);
    ``counts[mask]`` is its contact number L_n and ``max_gaps[mask]`` its
    maximal excursion length.
    """

    n: int
    log_weights: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    max_gaps: np.ndarray = field(repr=False)

    def log_partition(self) -> float:
        return log_sum_exp(self.log_weights)

    def normalized_weights(self) -> np.ndarray:
        m = float(np.max(self.log_weights))
        w = np.exp(self.log_weights - m)
        return w / w.sum()

    def contact_matrix(self) -> np.ndarray:
        """0/1 matrix, row mask x column a = 0..n; columns 0 and n are 1."""
        masks = np.arange(self.log_weights.size, dtype=np.uint32)
        cols = [np.ones_like(masks, dtype=float)]
        for a in range(1, self.n):
            cols.append(((masks >> (a - 1)) & 1).astype(float))
        cols.append(np.ones_like(masks, dtype=float))
        return np.stack(cols, axis=1)


def build_path_set(law, h: float, omega, n: int) -> PathSet:
    if n < 1 or n > ORACLE_MAX_N:
        raise ValueError(f"oracle handles 1 <= n <= {ORACLE_MAX_N}, got {n}")
    om = _omega_array(omega, n)
    logp = law.log_p
    if n > law.n_max:
        raise ValueError("n exceeds the law's tabulation horizon")
    size = 1 << (n - 1)
    lw = np.empty(size)
    counts = np.empty(size, dtype=np.int64)
    gaps = np.empty(size, dtype=np.int64)
    for mask in range(size):
        prev = 0
        total = 0.0
        cnt = 0
        gmax = 0
        m = mask
        site = 1
        while m:
            if m & 1:
                gap = site - prev
                total += logp[gap] + h + om[site - 1]
                if gap > gmax:
                    gmax = gap
                prev = site
                cnt += 1
            m >>= 1
            site += 1
        gap = n - prev
        total += logp[gap] + h + om[n - 1]
        if gap > gmax:
            gmax = gap
        lw[mask] = total
        counts[mask] = cnt + 1
        gaps[mask] = gmax
    return PathSet(n, lw, counts, gaps)


def enumerate_partition(law, h: float, omega, n: int) -> float:
    """log Z by exhaustive summation (n <= 16)."""
    return build_path_set(law, h, omega, n).log_partition()


def enumerate_expectation(law, h: float, omega, n: int, functional) -> float:
    """Weight-averaged value of functional(x) where x is the 0/1 contact
    indicator sequence (x[0] = x[n] = 1)."""
    ps = build_path_set(law, h, omega, n)
    w = ps.normalized_weights()
    x = np.empty(n + 1)
    total = 0.0
    for mask in range(w.size):
        x[0] = 1.0
        for a in range(1, n):
            x[a] = (mask >> (a - 1)) & 1
        x[n] = 1.0
        total += w[mask] * float(functional(x))
    return total


def enumerate_contact_probabilities(law, h: float, omega, n: int) -> np.ndarray:
    """E[X_a] for a = 0..n in one enumeration pass."""
    ps = build_path_set(law, h, omega, n)
    return ps.contact_matrix().T @ ps.normalized_weights()


def enumerate_contact_pmf(law, h: float, omega, n: int) -> np.ndarray:
    """P[L_n = l] for l = 0..n (entry 0 is always 0)."""
    ps = build_path_set(law, h, omega, n)
    w = ps.normalized_weights()
    return np.bincount(ps.counts, weights=w, minlength=n + 1)


def enumerate_excursion_cdf(law, h: float, omega, n: int) -> np.ndarray:
    """P[M_n <= m] for m = 0..n."""
    ps = build_path_set(law, h, omega, n)
    w = ps.normalized_weights()
    mass = np.bincount(ps.max_gaps, weights=w, minlength=n + 1)
    return np.cumsum(mass)


def enumerate_moment(law, h: float, omega, n: int, sites) -> float:
    """E[prod_a X_a] over the given sites."""
    ps = build_path_set(law, h, omega, n)
    w = ps.normalized_weights()
    x = ps.contact_matrix()
    prod = np.ones_like(w)
    for a in sites:
        prod = prod * x[:, a]
    return float(prod @ w)


def _partitions(items: tuple):
    """All set partitions of items (Bell(len) of them)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1:]
        yield part + [[first]]


def enumerate_joint_cumulant(law, h: float, omega, n: int, sites) -> float:
    """Joint cumulant of (X_a)_{a in sites} by the set-partition formula:
    sum over partitions of (-1)^(l-1) (l-1)! prod over blocks of the block
    moment."""
    sites = tuple(sites)
    total = 0.0
    for part in _partitions(sites):
        l = len(part)
        coef = (-1.0) ** (l - 1) * math.factorial(l - 1)
        prod = 1.0
        for block in part:
            prod *= enumerate_moment(law, h, omega, n, block)
        total += coef * prod
    return total


def enumerate_avoidance(law, h: float, omega, j: int) -> float:
    """a_j = E2[prod_{k=1}^{j-1} (1 - X_k X_k')] by enumeration over pairs
    of paths of a size-j window (same charges in both replicas).

    Uses a subset-sum (zeta) transform so the pair sum is O(j 2^j)."""
    if j < 1:
        raise ValueError("window must be >= 1")
    if j == 1:
        return 1.0
    if j > 12:
        raise ValueError("pair enumeration capped at window 12")
    ps = build_path_set(law, h, omega, j)
    w = ps.normalized_weights()
    size = w.size
    # T[c] = sum of weights over interior masks contained in c
    t = w.copy()
    bit = 1
    while bit < size:
        lower = (np.arange(size) & bit).astype(bool)
        t[lower] += t[np.arange(size)[lower] ^ bit]
        bit <<= 1
    full = size - 1
    masks = np.arange(size)
    return float(np.sum(w * t[full ^ masks]))


def pure_model_free_energy(law, h: float) -> float:
    """Free energy of the model without disorder.

    Solves e^h * sum_t p(t) z^t = 1 for z* in (0,1) by bisection on the
    tabulated series plus a tail bound (p decreasing beyond the horizon);
    f(h) = -log z*, or 0 when no root below 1 exists (delocalized)."""
    logp = law.log_p[1:]
    t = np.arange(1, law.n_max + 1, dtype=float)
    p_last = math.exp(logp[-1])

    def series(z: float) -> float:
        vals = logp + t * math.log(z)
        m = float(np.max(vals))
        s = math.exp(m) * float(np.sum(np.exp(vals - m)))
        geom = p_last * z ** (law.n_max + 1) / (1.0 - z)
        tail = min(geom, law.tail_mass) if law.tail_mass > 0.0 else geom
        return s + tail

    def excess(z: float) -> float:
        return h + math.log(series(z))

    hi = 1.0 - 1e-12
    if excess(hi) < 0.0:
        return 0.0
    lo = 1e-12
    if excess(lo) > 0.0:
        raise ValueError("no bracketing interval for the pure-model root")
    for _ in range(200):
        if hi - lo <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        if excess(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    else:
        raise RuntimeError("pure-model bisection did not converge")
    return max(0.0, -math.log(hi))
