"""Shared generators: small random instances with enumerable horizons."""

import numpy as np

from pinlab.model import (
    gaussian_disorder,
    law_from_table,
    rademacher_disorder,
    shifted_exponential_disorder,
    uniform_disorder,
    zero_disorder,
)


def random_disorder(rng):
    pick = int(rng.integers(0, 5))
    if pick == 0:
        return zero_disorder()
    if pick == 1:
        return gaussian_disorder(float(rng.uniform(0.2, 1.5)))
    if pick == 2:
        return uniform_disorder(float(rng.uniform(0.2, 2.0)))
    if pick == 3:
        return rademacher_disorder(float(rng.uniform(0.2, 1.5)))
    return shifted_exponential_disorder(float(rng.uniform(0.5, 2.0)))


def random_law(rng, size_lo=2, size_hi=15):
    size = int(rng.integers(size_lo, size_hi + 1))
    table = rng.uniform(0.05, 1.0, size)
    if rng.random() < 0.5:
        return law_from_table(table / table.sum(), normalized=True)
    # sub-probability table: positive mass strictly below 1
    table *= float(rng.uniform(0.2, 0.999)) / table.sum()
    return law_from_table(table)


def random_instance(rng, n_lo=1, n_hi=14):
    """(law, h, omega, n): law horizon covers n, h in [-2, 4]."""
    n = int(rng.integers(n_lo, n_hi + 1))
    law = random_law(rng, size_lo=max(2, n), size_hi=n_hi + 2)
    h = float(rng.uniform(-2.0, 4.0))
    omega = random_disorder(rng).draw(rng, n)
    return law, h, omega, n
