"""Shared test utilities."""

from __future__ import annotations

import numpy as np

from oracleid.bitstrings import BitString, ConceptClass


def random_class(rng: np.random.Generator, n: int, size: int) -> ConceptClass:
    values = rng.choice(1 << n, size=size, replace=False)
    return ConceptClass.from_values(n, (int(v) for v in values))


def subsets_of_cube(n: int):
    """Every nonempty subset of {0,1}^n as a list of BitStrings."""
    base = [BitString(n, v) for v in range(1 << n)]
    for mask in range(1, 1 << len(base)):
        yield [base[i] for i in range(len(base)) if (mask >> i) & 1]
