"""Compiled inner loops for the series sums.

Everything here works with coefficients pre-multiplied by ``g**n`` so that
nothing overflows for small couplings at large truncation orders.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def fock_terms(delta, g, s, E, K):
    """Scaled Fock coefficients ``a_k g^k`` and ``b_k g^k`` for k < K."""
    g2 = g * g
    c = delta / math.sqrt(2.0)
    ta = np.empty(K)
    tb = np.empty(K)
    prev = 0.0
    cur = 1.0
    for k in range(K):
        ta[k] = cur
        matched = (k % 2 == 0) == (s > 0)
        if matched and delta != 0.0:
            tb[k] = -2.0 * c / (E - k) * cur
            shift = delta * delta / (E - k)
        else:
            tb[k] = 0.0
            shift = 0.0
        nxt = ((E - k - shift) * cur - g2 * prev) / (k + 1)
        prev = cur
        cur = nxt
    return ta, tb


@njit(cache=True)
def displaced_terms(delta, g, E, u0, v0, w0, K):
    """Scaled displaced-basis coefficients ``(u_n, v_n, w_n) g^n`` for n < K."""
    g2 = g * g
    c = delta / math.sqrt(2.0)
    tu = np.empty(K)
    tv = np.empty(K)
    tw = np.empty(K)
    tu[0] = u0
    tv[0] = v0
    tw[0] = w0
    vm = 0.0
    wm = 0.0
    for n in range(1, K):
        u = tu[n - 1]
        v = tv[n - 1]
        w = tw[n - 1]
        vn = -((E - g2 - n + 1) * v + c * (u + w) + g2 * vm) / n
        wn = -((E - 3.0 * g2 - n + 1) * w + c * v + 2.0 * g2 * wm) / (2.0 * n)
        tv[n] = vn
        tw[n] = wn
        tu[n] = -c * vn / (E - n + g2)
        vm = v
        wm = w
    return tu, tv, tw


@njit(cache=True)
def laguerre(m, alpha, x):
    if m == 0:
        return 1.0
    prev = 1.0
    cur = 1.0 + alpha - x
    for k in range(1, m):
        nxt = ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
        prev = cur
        cur = nxt
    return cur


@njit(cache=True)
def exceptional_terms(tb, g, m):
    """Terms of ``sum_n sqrt(n!) b_n D_mn`` from scaled ``b_n g^n``.

    The ``sqrt(n!)`` factors cancel analytically against ``D_mn``.
    """
    K = tb.size
    out = np.empty(K)
    x = g * g
    lfm = math.lgamma(m + 1.0)
    for n in range(K):
        if tb[n] == 0.0:
            out[n] = 0.0
        elif n >= m:
            sign = 1.0 if (n - m) % 2 == 0 else -1.0
            out[n] = sign * tb[n] * math.exp(0.5 * lfm - m * math.log(g)) * laguerre(m, n - m, x)
        else:
            # D_mn = (-1)^(n-m) D_nm
            out[n] = (tb[n] * math.exp(math.lgamma(n + 1.0) - 0.5 * lfm + (m - 2 * n) * math.log(g))
                      * laguerre(n, m - n, x))
    return out


@njit(cache=True)
def partial_sums(terms, marks):
    """Compensated partial sums of ``terms`` at the term counts in ``marks``."""
    out = np.empty(marks.size)
    total = 0.0
    comp = 0.0
    j = 0
    for k in range(marks[-1]):
        t = terms[k]
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
        if k + 1 == marks[j]:
            out[j] = total + comp
            j += 1
    return out
