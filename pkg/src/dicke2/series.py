"""Coefficient recurrences and the single-variable G-function.

Two expansions of the same j=1 eigenvector are involved:

* the Fock-state expansion with coefficients ``a_m`` (three-term recurrence)
  and ``b_m`` (algebraic in ``a_m``), fixed by parity;
* the displaced-oscillator expansion around ``A = d + g`` with coefficients
  ``u_n, v_n, w_n`` seeded from the Fock side at ``n = 0``.

``G_(+/-)(E) = sum_n (u_n - s w_n) g^n`` vanishes at the eigenvalues of the
sector with parity sign ``s``. Overall constants that do not move the zeros
are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dicke2 import _kernels
from dicke2.errors import DisplacedPole, NoConvergence, SingletPole
from dicke2.extrapolate import SeriesSum, accelerated_sum, schedule
from dicke2.params import (DEFAULT_TOL, EPS_POLE, ModelParams, Parity,
                           max_terms_default)

EPS = np.finfo(float).eps
ROUNDOFF_FACTOR = 16.0


@dataclass(frozen=True)
class FockCoeffs:
    a: np.ndarray
    b: np.ndarray
    energy: float
    truncation: int
    parity: Parity


@dataclass(frozen=True)
class DisplacedCoeffs:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    energy: float


@dataclass(frozen=True)
class NearestPole:
    kind: str
    index: int
    distance: float


@dataclass(frozen=True)
class GEvaluation:
    value: float
    terms_used: int
    tail_estimate: float
    nearest_pole: NearestPole


# --- pole bookkeeping -----------------------------------------------------

def nearest_singlet(E: float, parity: Parity) -> tuple[int, float]:
    """Closest parity-matched integer n >= 0 to E, and its distance."""
    n = max(0, round(E))
    if not parity.matches(n):
        below, above = n - 1, n + 1
        n = above if below < 0 or abs(E - above) < abs(E - below) else below
    return n, abs(E - n)


def nearest_displaced(E: float, g2: float) -> tuple[int, float]:
    n = max(0, round(E + g2))
    return n, abs(E - (n - g2))


def nearest_pole(params: ModelParams, parity: Parity, E: float) -> NearestPole:
    ns, ds = nearest_singlet(E, parity)
    nd, dd = nearest_displaced(E, params.g2)
    if dd <= ds:
        return NearestPole("displaced", nd, dd)
    return NearestPole("singlet", ns, ds)


def _check_singlet(params: ModelParams, parity: Parity, E: float, eps: float):
    if params.delta == 0.0:
        return
    n, dist = nearest_singlet(E, parity)
    if dist < eps:
        raise SingletPole(n, float(n), E)


def _check_displaced(params: ModelParams, E: float, eps: float, n_max: int | None = None):
    n, dist = nearest_displaced(E, params.g2)
    if dist < eps and (n_max is None or n <= n_max):
        raise DisplacedPole(n, n - params.g2, E)


# --- Fock side ---------------------------------------------------------------

def fock_recurrence(params: ModelParams, parity: Parity | str, E: float, K: int,
                    eps_pole: float = EPS_POLE) -> FockCoeffs:
    """Coefficients ``a_0..a_K`` and ``b_0..b_K`` with ``a_0 = 1``.

    Unscaled, so only meant for moderate K; the series sums use the scaled
    kernels instead.
    """
    parity = Parity.parse(parity)
    if K < 1:
        raise ValueError("K must be >= 1")
    d, g, c = params.delta, params.g, params.coupling
    if d != 0.0:
        for n in range(K + 1):
            if parity.matches(n) and abs(E - n) < eps_pole:
                raise SingletPole(n, float(n), E)
    a = np.zeros(K + 1)
    b = np.zeros(K + 1)
    a[0] = 1.0
    for m in range(K + 1):
        br = parity.bracket(m)
        if br and d != 0.0:
            b[m] = -c * br / (E - m) * a[m]
            shift = d * d / (2.0 * (E - m)) * br
        else:
            shift = 0.0
        if m < K:
            prev = a[m - 1] if m > 0 else 0.0
            a[m + 1] = ((E - m - shift) * a[m] - g * prev) / (g * (m + 1))
    return FockCoeffs(a, b, float(E), K, parity)


def fock_eigenvector(params: ModelParams, parity: Parity | str, E: float, n_max: int,
                     extra: int = 80) -> np.ndarray:
    """Normalised Fock-basis vector ``(sqrt(n!) a_n, sqrt(n!) b_n, s (-1)^n sqrt(n!) a_n)``.

    The forward recurrence follows the dominant solution and is useless for
    building a state, so the decaying solution is generated backwards
    (Miller's method) from ``n_max + extra`` and normalised afterwards.
    Rows are ordered as in :func:`dicke2.oracle.build_hamiltonian`, each of
    length ``n_max + 1``.
    """
    parity = Parity.parse(parity)
    g, c = params.g, params.coupling
    top = n_max + extra
    alpha = np.zeros(top + 2)
    alpha[top] = 1.0
    for m in range(top, 0, -1):
        br = parity.bracket(m)
        shift = c * c * br / (E - m) if br else 0.0
        alpha[m - 1] = ((E - m - shift) * alpha[m] - g * math.sqrt(m + 1) * alpha[m + 1]) / (g * math.sqrt(m))
        if abs(alpha[m - 1]) > 1e100:
            alpha /= 1e100
    n = np.arange(n_max + 1)
    a = alpha[: n_max + 1]
    br = np.array([parity.bracket(k) for k in n], dtype=float)
    beta = np.where(br > 0, -c * br / np.where(br > 0, E - n, 1.0) * a, 0.0)
    third = parity.sign * (-1.0) ** n * a
    psi = np.concatenate([a, beta, third])
    return psi / np.linalg.norm(psi)


# --- displaced side ------------------------------------------------------------

def _alternating(n: int) -> np.ndarray:
    out = np.ones(n)
    out[1::2] = -1.0
    return out


def _seed_terms(params: ModelParams, parity: Parity, E: float, n: int):
    ta, tb = _kernels.fock_terms(params.delta, params.g, float(parity.sign), float(E), n)
    alt = _alternating(n)
    return alt * ta, alt * tb, ta


def seed_sums(params: ModelParams, parity: Parity | str, E: float, tol: float = DEFAULT_TOL,
              max_terms: int | None = None, need_u: bool = True) -> tuple[SeriesSum | None, SeriesSum, SeriesSum]:
    """Seed sums with their extrapolation errors; ``w0`` includes the parity sign.

    With ``need_u=False`` the ``u0`` sum (the slowest one, divergent for
    ``E <= -g^2``) is skipped and returned as None.
    """
    parity = Parity.parse(parity)
    cap = max_terms or max_terms_default()
    _check_singlet(params, parity, E, EPS_POLE)
    p = 1.0 + E + params.g2
    if p <= 1.0 and need_u or p <= 0.0:
        raise NoConvergence(0, what=f"seed sums diverge for E={E} <= -g^2")
    result = None
    for n in schedule(cap):
        tu, tv, tw = _seed_terms(params, parity, E, n)
        su = accelerated_sum(tu, p - 1.0) if need_u else None
        sv = accelerated_sum(tv, p)
        sw = accelerated_sum(tw, p)
        sw = SeriesSum(parity.sign * sw.value, sw.error, sw.terms)
        result = (su, sv, sw)
        if all(x is None or x.converged(tol) for x in result):
            return result
    worst = max((x for x in result if x is not None),
                key=lambda x: x.error / max(1.0, abs(x.value)))
    raise NoConvergence(cap, worst.value, worst.error, "seed sums")


def displaced_seed(params: ModelParams, parity: Parity | str, E: float, tol: float = DEFAULT_TOL,
                   max_terms: int | None = None) -> tuple[float, float, float]:
    """``(u0, v0, w0)``: projections of the Fock-side state onto the displaced vacuum."""
    su, sv, sw = seed_sums(params, parity, E, tol, max_terms)
    return su.value, sv.value, sw.value


def displaced_recurrence(params: ModelParams, parity: Parity | str, E: float, N: int,
                         seeds: tuple[float, float, float],
                         eps_pole: float = EPS_POLE) -> DisplacedCoeffs:
    """Unscaled ``u_n, v_n, w_n`` for n = 0..N from the three seeds."""
    g, g2, c = params.g, params.g2, params.coupling
    for n in range(N + 1):
        if abs(E - (n - g2)) < eps_pole:
            raise DisplacedPole(n, n - g2, E)
    u = np.zeros(N + 1)
    v = np.zeros(N + 1)
    w = np.zeros(N + 1)
    u[0], v[0], w[0] = seeds
    for n in range(1, N + 1):
        v2 = v[n - 2] if n >= 2 else 0.0
        w2 = w[n - 2] if n >= 2 else 0.0
        v[n] = -((E - g2 - n + 1) * v[n - 1] + c * (u[n - 1] + w[n - 1]) + g * v2) / (g * n)
        w[n] = -((E - 3 * g2 - n + 1) * w[n - 1] + c * v[n - 1] + 2 * g * w2) / (2 * g * n)
        u[n] = -c / (E - n + g2) * v[n]
    return DisplacedCoeffs(u, v, w, float(E))


def _g_basis_sums(params: ModelParams, parity: Parity, E: float, n: int):
    """G-series for unit seeds along u0, v0 and w0 (G is linear in the seeds)."""
    s = parity.sign
    out = []
    for seeds in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)):
        tu, _, tw = _kernels.displaced_terms(params.delta, params.g, float(E), *seeds, n)
        out.append(accelerated_sum(tu - s * tw, 1.0 + E))
    return out


def _g_at_order(params: ModelParams, parity: Parity, E: float, n: int) -> tuple[float, float, float]:
    """``(value, error, scale)`` of G from the first ``n`` terms of every series."""
    g2 = params.g2
    tu, tv, tw = _seed_terms(params, parity, E, n)
    su = accelerated_sum(tu, E + g2)
    sv = accelerated_sum(tv, 1.0 + E + g2)
    sw = accelerated_sum(tw, 1.0 + E + g2)
    seeds = (su.value, sv.value, parity.sign * sw.value)
    seed_err = (su.error, sv.error, sw.error)
    basis = _g_basis_sums(params, parity, E, n)
    parts = [x * b.value for x, b in zip(seeds, basis)]
    value = math.fsum(parts)
    err = sum(abs(x) * b.error + e * abs(b.value) for x, e, b in zip(seeds, seed_err, basis))
    # extrapolation differences can vanish below the rounding level of the sums
    err += ROUNDOFF_FACTOR * EPS * math.fsum(abs(p) for p in parts)
    return value, err, max(1.0, max(abs(p) for p in parts))


def _check_domain(params: ModelParams, parity: Parity, E: float, eps_pole: float):
    _check_singlet(params, parity, E, eps_pole)
    _check_displaced(params, E, eps_pole)
    if E + params.g2 <= 0.0 or E <= -1.0:
        raise NoConvergence(0, what=f"G series diverge at E={E}")


def g_fixed_order(params: ModelParams, parity: Parity | str, E: float, n_terms: int,
                  eps_pole: float = EPS_POLE) -> GEvaluation:
    """G from exactly ``n_terms`` terms (rounded down to a doubling mark), no adaptivity."""
    parity = Parity.parse(parity)
    _check_domain(params, parity, E, eps_pole)
    n = int(schedule(n_terms)[-1])
    value, err, _ = _g_at_order(params, parity, E, n)
    return GEvaluation(value, n, err, nearest_pole(params, parity, E))


def g_function(params: ModelParams, parity: Parity | str, E: float, tol: float = DEFAULT_TOL,
               max_terms: int | None = None, eps_pole: float = EPS_POLE,
               a0: float = 1.0) -> GEvaluation:
    """Evaluate ``G_(+/-)(E)`` with adaptive truncation.

    Even parity sums ``u_n - w_n``, odd parity ``u_n + w_n``. ``a0`` is the
    normalisation of the Fock recurrence; G is linear in it.

    The returned ``tail_estimate`` is the estimated absolute error after
    extrapolation, including the propagated error of the seed sums; the
    evaluation succeeds once it is below ``tol`` times the larger of 1 and
    the magnitude of the summed contributions.
    """
    parity = Parity.parse(parity)
    cap = max_terms or max_terms_default()
    _check_domain(params, parity, E, eps_pole)
    pole = nearest_pole(params, parity, E)
    best = None
    for n in schedule(cap):
        value, err, scale = _g_at_order(params, parity, E, n)
        best = GEvaluation(a0 * value, n, abs(a0) * err, pole)
        if err <= tol * scale:
            return best
    raise NoConvergence(cap, best.value, best.tail_estimate, "G")
