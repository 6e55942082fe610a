"""One-to-one comparison of G-function zeros with oracle eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dicke2.oracle import DEFAULT_N_FOCK, build_hamiltonian, oracle_spectrum
from dicke2.params import ModelParams, Parity
from dicke2.roots import pole_grid, scan_zeros
from dicke2.series import fock_eigenvector

MATCH_TOL = 5e-7
POLE_EXCLUSION = 1e-3


@dataclass(frozen=True)
class Pair:
    parity: Parity
    zero: float | None
    oracle: float | None
    status: str  # matched | unmatched_zero | unmatched_oracle | excluded

    @property
    def deviation(self) -> float | None:
        if self.zero is None or self.oracle is None:
            return None
        return abs(self.zero - self.oracle)


@dataclass
class VerifyReport:
    params: ModelParams
    window: tuple[float, float]
    n_fock: int
    pairs: list[Pair] = field(default_factory=list)

    @property
    def unmatched(self) -> list[Pair]:
        return [p for p in self.pairs if p.status.startswith("unmatched")]

    @property
    def max_deviation(self) -> float:
        devs = [p.deviation for p in self.pairs if p.status == "matched"]
        return max(devs) if devs else 0.0

    @property
    def ok(self) -> bool:
        return not self.unmatched


def _near_pole(E: float, poles, width: float) -> bool:
    return any(abs(E - p.location) < width for p in poles)


def match_levels(zeros, oracle, poles, parity: Parity, tol: float = MATCH_TOL,
                 exclusion: float = POLE_EXCLUSION) -> list[Pair]:
    """Pair zeros and oracle levels greedily by distance, at most once each."""
    cand = sorted((abs(z - o), i, j) for i, z in enumerate(zeros) for j, o in enumerate(oracle)
                  if abs(z - o) <= tol)
    zi, oj, pairs = set(), set(), []
    for _, i, j in cand:
        if i not in zi and j not in oj:
            zi.add(i)
            oj.add(j)
            pairs.append(Pair(parity, zeros[i], oracle[j], "matched"))
    for i, z in enumerate(zeros):
        if i not in zi:
            pairs.append(Pair(parity, z, None, "unmatched_zero"))
    for j, o in enumerate(oracle):
        if j not in oj:
            status = "excluded" if _near_pole(o, poles, exclusion) else "unmatched_oracle"
            pairs.append(Pair(parity, None, o, status))
    pairs.sort(key=lambda p: p.zero if p.zero is not None else p.oracle)
    return pairs


def verify_against_oracle(params: ModelParams, window: tuple[float, float] | None = None,
                          parities=(Parity.EVEN, Parity.ODD), n_fock: int = DEFAULT_N_FOCK,
                          match_tol: float = MATCH_TOL, exclusion: float = POLE_EXCLUSION,
                          **scan_kwargs) -> VerifyReport:
    """Check the zero/eigenvalue bijection per parity in ``(lo, hi]``.

    Oracle levels within ``exclusion`` of a pole of the same sector are
    exempt from needing a partner (exceptional candidates); zeros never are.
    The default window is ``(-g^2 + 0.02, 5]``.
    """
    if window is None:
        window = (-params.g2 + 0.02, 5.0)
    lo, hi = window
    tol = match_tol
    spec = oracle_spectrum(params, n_fock, (lo - 2 * tol, hi + 2 * tol), check_convergence=False)
    report = VerifyReport(params, (lo, hi), n_fock)
    for parity in parities:
        parity = Parity.parse(parity)
        zeros = scan_zeros(params, parity, (lo, hi), **scan_kwargs).energies
        oracle = [e for e in spec.energies(parity) if lo < e <= hi
                  or any(abs(e - z) <= tol for z in zeros)]
        poles = pole_grid(params, parity, (lo - 1.0, hi + 1.0)) if hi > lo else []
        report.pairs.extend(match_levels(zeros, oracle, poles, parity, tol, exclusion))
    return report


def fock_residual(params: ModelParams, parity: Parity | str, E: float, n_max: int = 80,
                  n_fock: int = DEFAULT_N_FOCK) -> float:
    """``||H psi - E psi|| / ||psi||`` for the Fock-ansatz vector truncated at ``n_max``.

    Small at true eigenvalues of the sector; of order one elsewhere.
    """
    if n_max > n_fock:
        raise ValueError("n_max must not exceed n_fock")
    psi = fock_eigenvector(params, parity, E, n_max)
    dim = n_fock + 1
    full = np.zeros(3 * dim)
    for r in range(3):
        full[r * dim: r * dim + n_max + 1] = psi[r * (n_max + 1): (r + 1) * (n_max + 1)]
    H = build_hamiltonian(params, n_fock)
    return float(np.linalg.norm(H @ full - E * full) / np.linalg.norm(full))
