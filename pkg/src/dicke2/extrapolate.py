"""Acceleration of slowly (power-law) convergent series.

The series behind G have terms decaying like ``k**-(e+1)`` with an exponent
``e`` known in closed form, so the partial sums behave as

    S_N = S + d0 N**-e + d1 N**-(e+1) + ...

Sampling ``S_N`` at geometrically doubling ``N`` and eliminating the known
powers one column at a time (generalised Richardson) recovers ``S`` to near
round-off with a few thousand terms even when ``e`` is small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dicke2 import _kernels
from dicke2.errors import NoConvergence

BASE_TERMS = 128
START_TERMS = 1024


@dataclass(frozen=True)
class SeriesSum:
    value: float
    error: float
    terms: int

    def converged(self, tol: float) -> bool:
        return self.error <= tol * max(1.0, abs(self.value))


def marks_for(n_terms: int) -> np.ndarray:
    """Doubling term counts ``BASE_TERMS * 2**i`` up to ``n_terms``."""
    if n_terms < BASE_TERMS:
        raise ValueError(f"need at least {BASE_TERMS} terms, got {n_terms}")
    levels = int(math.floor(math.log2(n_terms / BASE_TERMS))) + 1
    return BASE_TERMS * 2 ** np.arange(levels, dtype=np.int64)


def schedule(max_terms: int) -> list[int]:
    """Truncation orders tried by the adaptive drivers, smallest first."""
    top = int(marks_for(max_terms)[-1])
    out = []
    n = min(START_TERMS, top)
    while n < top:
        out.append(n)
        n *= 2
    out.append(top)
    return out


def richardson(partials, exponent: float) -> tuple[float, float]:
    """Extrapolate partial sums taken at doubling orders.

    Returns ``(value, error)`` where the error is the change between the last
    two diagonal entries of the table.
    """
    partials = np.asarray(partials, dtype=float)
    if exponent <= 0:
        raise ValueError(f"tail exponent must be positive, got {exponent}")
    prev = [partials[0]]
    best = partials[0]
    err = math.inf
    for i in range(1, partials.size):
        row = [partials[i]]
        for k in range(1, i + 1):
            r = 2.0 ** (exponent + k - 1)
            row.append((r * row[k - 1] - prev[k - 1]) / (r - 1.0))
        err = abs(row[-1] - prev[-1])
        best = row[-1]
        prev = row
    return float(best), float(err)


def accelerated_sum(terms: np.ndarray, exponent: float) -> SeriesSum:
    """Sum ``terms`` (length a power-of-two multiple of BASE_TERMS)."""
    marks = marks_for(terms.size)
    partials = _kernels.partial_sums(np.ascontiguousarray(terms, dtype=float), marks)
    value, err = richardson(partials, exponent)
    return SeriesSum(value, err, int(marks[-1]))


def adaptive_sum(make_terms, exponent: float, tol: float, max_terms: int,
                 what: str = "series") -> SeriesSum:
    """Grow the truncation order until the extrapolation error is below tol.

    ``make_terms(n)`` must return the first ``n`` terms.
    """
    result = None
    for n in schedule(max_terms):
        result = accelerated_sum(make_terms(n), exponent)
        if result.converged(tol):
            return result
    raise NoConvergence(max_terms, result.value, result.error, what)


def tail_exponent(terms, window: int = 32) -> float:
    """Decay exponent fitted to the last ``window`` nonzero term magnitudes.

    Pairs of neighbours are summed first so that alternating and
    every-other-zero series are fitted on their smooth envelope.
    """
    t = np.asarray(terms, dtype=float)
    n = t.size - t.size % 2
    pairs = t[0:n:2] + t[1:n:2]
    j = np.arange(1, pairs.size + 1, dtype=float)
    j, y = j[-window:], np.abs(pairs[-window:])
    slope = np.polyfit(np.log(j), np.log(y), 1)[0]
    return float(-slope)
