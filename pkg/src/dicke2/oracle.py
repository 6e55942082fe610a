"""Truncated Fock-basis diagonalisation used as independent ground truth.

Basis ordering is (spin row r in {0, 1, 2}) x (photon number n in 0..n_fock),
flattened as ``r * (n_fock + 1) + n``, for the rotated 3x3 matrix Hamiltonian
of the j=1 subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dicke2.errors import IterationLimit, Unclassified
from dicke2.params import SQRT2, ModelParams, Parity

DEFAULT_N_FOCK = 100
PARITY_THRESHOLD = 0.999


def _delta_g(params) -> tuple[float, float]:
    if isinstance(params, ModelParams):
        return params.delta, params.g
    delta, g = params
    return float(delta), float(g)


def build_hamiltonian(params: ModelParams | tuple[float, float], n_fock: int) -> np.ndarray:
    """Dense symmetric j=1 Hamiltonian of dimension ``3 (n_fock + 1)``.

    ``params`` may also be a plain ``(delta, g)`` pair so that the uncoupled
    limit g = 0 can be built.
    """
    if n_fock < 1:
        raise ValueError("n_fock must be >= 1")
    delta, g = _delta_g(params)
    dim = n_fock + 1
    H = np.zeros((3 * dim, 3 * dim))
    n = np.arange(dim)
    hop = g * np.sqrt(n[1:])
    for r, sign in ((0, 1.0), (1, 0.0), (2, -1.0)):
        idx = r * dim + n
        H[idx, idx] = n
        if sign:
            # both triangles from the same array, so symmetric bit for bit
            H[idx[:-1], idx[1:]] = sign * hop
            H[idx[1:], idx[:-1]] = sign * hop
    c = -delta / SQRT2
    for r in (0, 1):
        top, bot = r * dim + n, (r + 1) * dim + n
        H[top, bot] = c
        H[bot, top] = c
    return H


def parity_operator(n_fock: int) -> np.ndarray:
    """Swap of spin rows 0 and 2 times ``(-1)^n`` on the photon."""
    dim = n_fock + 1
    sign = (-1.0) ** np.arange(dim)
    P = np.zeros((3 * dim, 3 * dim))
    n = np.arange(dim)
    P[n, 2 * dim + n] = sign
    P[2 * dim + n, n] = sign
    P[dim + n, dim + n] = sign
    return P


@dataclass
class EigenSolution:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    sweeps: int = 0


def _jacobi(A: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Cyclic Jacobi rotations; fine for a few hundred rows at most."""
    A = np.array(A, dtype=float)
    d = A.shape[0]
    V = np.eye(d)
    scale = np.linalg.norm(A)
    for sweep in range(1, max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        # rounding keeps off-diagonal mass near d * eps * ||A||
        if off <= 4.0 * d * np.finfo(float).eps * scale:
            return np.diag(A).copy(), V, sweep - 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= 1e-3 * np.finfo(float).eps * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = cs * ap - sn * aq
                A[:, q] = sn * ap + cs * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = cs * ap - sn * aq
                A[q, :] = sn * ap + cs * aq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = cs * vp - sn * vq
                V[:, q] = sn * vp + cs * vq
    raise IterationLimit(f"Jacobi did not converge in {max_sweeps} sweeps")


def diagonalize(matrix: np.ndarray, method: str = "eigh", max_sweeps: int = 50) -> EigenSolution:
    """Full spectrum of a dense symmetric matrix, ascending.

    ``method="eigh"`` uses LAPACK; ``method="jacobi"`` the cyclic Jacobi
    routine above. Either way the per-pair residual is checked against
    ``1e-10 * ||H||_F``.
    """
    H = np.asarray(matrix, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    if not np.array_equal(H, H.T):
        raise ValueError("matrix must be symmetric")
    sweeps = 0
    if method == "eigh":
        values, vectors = np.linalg.eigh(H)
    elif method == "jacobi":
        values, vectors, sweeps = _jacobi(H, max_sweeps)
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    residuals = np.linalg.norm(H @ vectors - vectors * values, axis=0)
    bound = 1e-10 * max(np.linalg.norm(H), 1.0)
    if np.any(residuals > bound):
        raise IterationLimit(f"residual {residuals.max():.3g} exceeds {bound:.3g}")
    return EigenSolution(values, vectors, residuals, sweeps)


def parity_expectation(vector: np.ndarray, n_fock: int) -> float:
    dim = n_fock + 1
    v = np.asarray(vector, dtype=float)
    sign = (-1.0) ** np.arange(dim)
    top, mid, bot = v[:dim], v[dim:2 * dim], v[2 * dim:]
    return float(2.0 * np.dot(top, sign * bot) + np.dot(mid, sign * mid))


def parity_classify(vector: np.ndarray, n_fock: int) -> tuple[Parity, float]:
    expectation = parity_expectation(vector, n_fock)
    if abs(expectation) < PARITY_THRESHOLD:
        raise Unclassified(expectation)
    return (Parity.EVEN if expectation > 0 else Parity.ODD), expectation


def _align_degenerate(sol: EigenSolution, n_fock: int, gap: float = 1e-9) -> EigenSolution:
    """Rotate degenerate eigenvector clusters onto parity eigenstates."""
    values, V = sol.values, sol.vectors.copy()
    P = None
    i = 0
    while i < values.size:
        j = i + 1
        while j < values.size and values[j] - values[j - 1] < gap:
            j += 1
        if j - i > 1:
            if P is None:
                P = parity_operator(n_fock)
            block = V[:, i:j]
            _, rot = np.linalg.eigh(block.T @ P @ block)
            V[:, i:j] = block @ rot
        i = j
    return EigenSolution(values, V, sol.residuals, sol.sweeps)


@dataclass(frozen=True)
class OracleLevel:
    energy: float
    parity: Parity | None
    expectation: float
    residual: float


@dataclass
class OracleSpectrum:
    delta: float
    g: float
    n_fock: int
    window: tuple[float, float]
    levels: list[OracleLevel]
    max_shift: float | None = None
    unclassified: int = 0
    meta: dict = field(default_factory=dict)

    def energies(self, parity: Parity | str | None = None) -> np.ndarray:
        if parity is None:
            return np.array([lv.energy for lv in self.levels])
        parity = Parity.parse(parity)
        return np.array([lv.energy for lv in self.levels if lv.parity is parity])


def _classified_levels(delta: float, g: float, n_fock: int, lo: float, hi: float):
    sol = _align_degenerate(diagonalize(build_hamiltonian((delta, g), n_fock)), n_fock)
    levels = []
    for k in np.nonzero((sol.values > lo) & (sol.values <= hi))[0]:
        vec = sol.vectors[:, k]
        exp = parity_expectation(vec, n_fock)
        par = None
        if abs(exp) >= PARITY_THRESHOLD:
            par = Parity.EVEN if exp > 0 else Parity.ODD
        levels.append(OracleLevel(float(sol.values[k]), par, exp, float(sol.residuals[k])))
    return levels


def oracle_spectrum(params: ModelParams | tuple[float, float], n_fock: int = DEFAULT_N_FOCK,
                    window: tuple[float, float] = (-math.inf, 4.0),
                    check_convergence: bool = True) -> OracleSpectrum:
    """Parity-labelled j=1 eigenvalues in ``(lo, hi]``.

    Only the window below ``n_fock / 2`` is trusted. With
    ``check_convergence`` the same window is recomputed at ``n_fock - 20``
    and the largest same-parity shift is recorded in ``max_shift``.
    """
    delta, g = _delta_g(params)
    lo, hi = window
    if not hi > lo:
        raise ValueError("empty window")
    if hi > n_fock / 2:
        raise ValueError(f"window top {hi} exceeds trusted limit n_fock/2 = {n_fock / 2}")
    levels = _classified_levels(delta, g, n_fock, lo, hi)
    out = OracleSpectrum(delta, g, n_fock, (lo, hi), levels,
                         unclassified=sum(lv.parity is None for lv in levels))
    if check_convergence and n_fock - 20 >= 2 * hi and n_fock > 20:
        coarse = _classified_levels(delta, g, n_fock - 20, lo - 1e-6, hi + 1e-6)
        shifts = []
        for lv in levels:
            same = [c.energy for c in coarse if c.parity is lv.parity]
            if same:
                shifts.append(min(abs(lv.energy - e) for e in same))
            else:
                shifts.append(math.inf)
        out.max_shift = max(shifts) if shifts else 0.0
    return out
