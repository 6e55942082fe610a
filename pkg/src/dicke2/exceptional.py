"""Exceptional solutions at ``E = m - g^2`` and the singlet poles at ``E = n``.

At ``E = m - g^2`` the displaced pole of G is lifted when ``v_m`` vanishes.
Two independent routes evaluate that condition:

* ``exceptional_condition_series``: the Fock-side sum
  ``sum_n sqrt(n!) b_n D_mn`` with ``D_mn`` built from associated Laguerre
  polynomials (equal to ``sqrt(m!) v_m``);
* ``exceptional_condition_direct``: ``v_m`` from the displaced recurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dicke2 import _kernels
from dicke2.errors import Dicke2Error
from dicke2.extrapolate import SeriesSum, adaptive_sum
from dicke2.oracle import DEFAULT_N_FOCK, oracle_spectrum
from dicke2.params import (DEFAULT_TOL, EPS_POLE, EXCEPTIONAL_MAX_TERMS, ModelParams,
                           Parity, max_terms_default)
from dicke2.series import _check_singlet, displaced_recurrence, seed_sums

DEFAULT_G_STEP = 0.01


class NotApplicable(Dicke2Error):
    """The exceptional condition is identically zero (delta = 0)."""


@dataclass(frozen=True)
class ExceptionalPoint:
    m: int
    parity: Parity
    g_star: float
    energy: float
    condition_residual: float


@dataclass(frozen=True)
class DMatrixElement:
    m: int
    n: int
    g: float
    value: float


def laguerre_assoc(m: int, alpha: float, x: float) -> float:
    """Associated Laguerre polynomial ``L_m^alpha(x)`` by upward recurrence in degree."""
    if m < 0:
        raise ValueError("degree must be >= 0")
    return float(_kernels.laguerre(int(m), float(alpha), float(x)))


def d_element(m: int, n: int, g: float) -> DMatrixElement:
    """Displaced-vacuum overlap ``D_mn = (-g)^(n-m) sqrt(m!/n!) L_m^(n-m)(g^2)``.

    For ``n < m`` the element follows from ``D_mn = (-1)^(n-m) D_nm``. The
    factorial ratio is formed in log space.
    """
    if m < 0 or n < 0:
        raise ValueError("indices must be >= 0")
    if g <= 0:
        raise ValueError("g must be > 0")
    if n < m:
        inner = d_element(n, m, g).value
        return DMatrixElement(m, n, g, (-1.0) ** (n - m) * inner)
    k = n - m
    lag = laguerre_assoc(m, k, g * g)
    mag = math.exp(k * math.log(g) + 0.5 * (math.lgamma(m + 1) - math.lgamma(n + 1)))
    sign = -1.0 if k % 2 else 1.0
    return DMatrixElement(m, n, g, sign * mag * lag)


def _check_energy(params: ModelParams, parity: Parity, m: int):
    if m < 0:
        raise ValueError("m must be >= 0")
    _check_singlet(params, parity, m - params.g2, EPS_POLE)


def condition_series_sum(params: ModelParams, parity: Parity | str, m: int,
                         tol: float = DEFAULT_TOL, max_terms: int | None = None) -> SeriesSum:
    """``sum_n sqrt(n!) b_n D_mn`` at ``E = m - g^2`` with its error estimate.

    Terms fall off like ``n^-2``; the sum is extrapolated like the G series.
    """
    parity = Parity.parse(parity)
    _check_energy(params, parity, m)
    if params.delta == 0.0:
        return SeriesSum(0.0, 0.0, 0)
    E = m - params.g2
    s = float(parity.sign)
    cap = max_terms or max_terms_default(EXCEPTIONAL_MAX_TERMS)

    def terms(n):
        _, tb = _kernels.fock_terms(params.delta, params.g, s, E, n)
        return _kernels.exceptional_terms(tb, params.g, m)

    return adaptive_sum(terms, 1.0, tol, cap, what="exceptional condition")


def exceptional_condition_series(params: ModelParams, parity: Parity | str, m: int,
                                 tol: float = DEFAULT_TOL, max_terms: int | None = None) -> float:
    return condition_series_sum(params, parity, m, tol, max_terms).value


def exceptional_condition_direct(params: ModelParams, parity: Parity | str, m: int,
                                 tol: float = DEFAULT_TOL, max_terms: int | None = None) -> float:
    """``v_m`` at ``E = m - g^2`` from the seeds and the displaced recurrences.

    All ``u_n, w_n`` with ``n < m`` stay finite at this energy, so only the
    pole-free part of the recurrence is needed.
    """
    parity = Parity.parse(parity)
    _check_energy(params, parity, m)
    if params.delta == 0.0:
        return 0.0
    E = m - params.g2
    su, sv, sw = seed_sums(params, parity, E, tol, max_terms, need_u=m > 0)
    if m == 0:
        return sv.value
    co = displaced_recurrence(params, parity, E, m - 1, (su.value, sv.value, sw.value))
    g, g2, c = params.g, params.g2, params.coupling
    v2 = co.v[m - 2] if m >= 2 else 0.0
    n = m
    return float(-((E - g2 - n + 1) * co.v[n - 1] + c * (co.u[n - 1] + co.w[n - 1]) + g * v2) / (g * n))


def condition_poles(parity: Parity | str, m: int) -> list[float]:
    """Couplings where ``m - g^2`` hits a parity-matched integer (g > 0)."""
    parity = Parity.parse(parity)
    return sorted(math.sqrt(m - n) for n in range(m) if parity.matches(n))


def find_exceptional_g(delta: float, parity: Parity | str, m: int,
                       g_range: tuple[float, float] = (0.0, 1.5), tol: float = 1e-12,
                       step: float = DEFAULT_G_STEP, method: str = "series") -> list[ExceptionalPoint]:
    """Couplings ``g_m`` in ``(g_lo, g_hi]`` where the condition changes sign.

    Sign changes across the condition's own poles (``m - g^2`` on a
    parity-matched integer) are excluded by partitioning the scan there.
    """
    parity = Parity.parse(parity)
    if delta == 0.0:
        raise NotApplicable("delta = 0: the exceptional condition vanishes identically")
    condition = {"series": exceptional_condition_series,
                 "direct": exceptional_condition_direct}[method]
    g_lo, g_hi = g_range
    if g_hi <= max(g_lo, 0.0):
        raise ValueError("g_range must contain positive couplings")

    def F(g):
        return condition(ModelParams(delta, g), parity, m)

    grid = [g_lo + k * step for k in range(1, int(math.floor((g_hi - g_lo) / step + 1e-9)) + 1)]
    grid = [g for g in grid if g > 0]
    poles = [p for p in condition_poles(parity, m) if g_lo < p <= g_hi]
    cuts = [g_lo] + poles + [g_hi]
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        a_in = a + 2 * EPS_POLE / a if a in poles else a
        b_in = b - 2 * EPS_POLE / b if b in poles else b
        xs = ([a_in] if a in poles else []) + [g for g in grid if a_in < g < b_in] \
            + ([b_in] if b in poles else [])
        samples = []
        for x in xs:
            try:
                samples.append((x, F(x)))
            except Dicke2Error:
                continue
        for (x0, f0), (x1, f1) in zip(samples[:-1], samples[1:]):
            if f0 == 0.0 or (f0 > 0) != (f1 > 0):
                if f0 == 0.0:
                    gs = x0
                else:
                    lo, flo, hi = x0, f0, x1
                    while hi - lo > tol:
                        mid = 0.5 * (lo + hi)
                        if mid <= lo or mid >= hi:
                            break
                        fm = F(mid)
                        if fm == 0.0:
                            lo = hi = mid
                            break
                        if (fm > 0) == (flo > 0):
                            lo, flo = mid, fm
                        else:
                            hi = mid
                    gs = 0.5 * (lo + hi)
                out.append(ExceptionalPoint(m, parity, gs, m - gs * gs, F(gs)))
    return out


def type2_g2(delta: float) -> float | None:
    """Coupling where the numerator of ``b_2`` at ``E = 2`` can vanish (needs delta >= 2)."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if delta < 2.0:
        return None
    return math.sqrt((delta * delta - 4.0) / 2.0)


@dataclass(frozen=True)
class SingletPoleReport:
    delta: float
    n: int
    g_probe: float
    parity: Parity
    min_distance: float
    nearest_level: float | None
    n_fock: int


def verify_singlet_pole_not_exceptional(delta: float, n: int, g_probe: float,
                                        n_fock: int = DEFAULT_N_FOCK) -> SingletPoleReport:
    """Distance from ``E = n`` to the nearest parity-matched j=1 oracle level."""
    if g_probe <= 0:
        raise ValueError("g_probe must be > 0")
    parity = Parity.EVEN if n % 2 == 0 else Parity.ODD
    hi = min(n + 5.0, n_fock / 2)
    spec = oracle_spectrum((delta, g_probe), n_fock, (-math.inf, hi), check_convergence=False)
    levels = spec.energies(parity)
    if levels.size == 0:
        return SingletPoleReport(delta, n, g_probe, parity, math.inf, None, n_fock)
    k = int(np.argmin(np.abs(levels - n)))
    return SingletPoleReport(delta, n, g_probe, parity, float(abs(levels[k] - n)),
                             float(levels[k]), n_fock)
