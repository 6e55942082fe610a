"""Zeros of G between its poles, and parity-resolved spectra over a g-grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from dicke2.errors import Dicke2Error
from dicke2.params import DEFAULT_TOL, EPS_POLE, ModelParams, Parity
from dicke2.series import g_function

DEFAULT_GRID_STEP = 0.01
DEFAULT_TOL_E = 1e-10


@dataclass(frozen=True)
class Pole:
    kind: str  # "displaced" (E = n - g^2) or "singlet" (E = n)
    index: int
    location: float


@dataclass(frozen=True)
class Root:
    energy: float
    bracket: tuple[float, float]
    iterations: int
    residual: float


@dataclass(frozen=True)
class SampleFailure:
    interval: tuple[float, float]
    energy: float
    reason: str


@dataclass
class ZeroScan:
    roots: list[Root]
    failures: list[SampleFailure] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)

    @property
    def energies(self) -> list[float]:
        return [r.energy for r in self.roots]


def singlet_levels(window: tuple[float, float] | None = None, n_max: int | None = None) -> list[int]:
    """Trivial j=0 levels ``E = n``; always part of the full spectrum."""
    if n_max is None:
        if window is None:
            raise ValueError("need a window or n_max")
        lo, hi = window
        return [n for n in range(max(0, math.ceil(lo)), math.floor(hi) + 1)]
    return list(range(n_max + 1))


def pole_grid(params: ModelParams, parity: Parity | str, window: tuple[float, float]) -> list[Pole]:
    """Both pole families of ``G_parity`` inside the closed window, sorted.

    When ``g^2`` is an integer, displaced and singlet poles coincide; both
    entries are kept.
    """
    parity = Parity.parse(parity)
    lo, hi = window
    if not hi > lo:
        raise ValueError("empty window")
    slack = 1e-12
    g2 = params.g2
    poles = []
    for n in range(max(0, math.floor(lo + g2)), math.floor(hi + g2) + 2):
        x = n - g2
        if lo - slack <= x <= hi + slack:
            poles.append(Pole("displaced", n, x))
    for n in range(max(0, math.floor(lo)), math.floor(hi) + 2):
        if parity.matches(n) and lo - slack <= n <= hi + slack:
            poles.append(Pole("singlet", n, float(n)))
    poles.sort(key=lambda p: (p.location, p.kind))
    return poles


def _bisect(f, a: float, fa: float, b: float, tol_E: float, max_iter: int = 200, fb: float | None = None):
    """Bisection to a bracket below ``tol_E``, finished by one secant step inside it."""
    if fb is None:
        fb = f(b)
    it = 0
    while b - a > tol_E and it < max_iter:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        fm = f(mid)
        it += 1
        if fm == 0.0:
            return mid, it, (mid, mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    root = 0.5 * (a + b)
    if (fa > 0) != (fb > 0):
        x = a - fa * (b - a) / (fb - fa)
        if a <= x <= b:
            root = x
    return root, it, (a, b)


def scan_zeros(params: ModelParams, parity: Parity | str, window: tuple[float, float],
               grid_step: float = DEFAULT_GRID_STEP, tol_E: float = DEFAULT_TOL_E,
               tol: float = DEFAULT_TOL, eps_pole: float = EPS_POLE,
               max_terms: int | None = None) -> ZeroScan:
    """Sign-change scan of G between consecutive poles, refined by bisection.

    The window bottom is raised to ``-g^2 + 10 eps_pole`` if needed. Sample
    points where G cannot be evaluated are recorded in ``failures`` and
    skipped; a sign change is only trusted between two good samples.
    """
    parity = Parity.parse(parity)
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    lo, hi = window
    if not hi > lo:
        raise ValueError("empty window")
    lo = max(lo, -params.g2 + 10 * eps_pole)
    if not hi > lo:
        return ZeroScan([])

    def G(E):
        return g_function(params, parity, E, tol=tol, max_terms=max_terms, eps_pole=eps_pole).value

    margin = 2.0 * eps_pole
    cuts = [lo] + [p.location for p in pole_grid(params, parity, (lo, hi))] + [hi]
    cuts = sorted(set(cuts))
    scan = ZeroScan([])
    if params.delta > 0:
        scan.caveats.append(
            f"zeros within {margin:g} of a pole are not searched")
    for a, b in zip(cuts[:-1], cuts[1:]):
        a_in = a + margin if a > lo or _is_pole(params, parity, a, eps_pole) else a
        b_in = b - margin if b < hi or _is_pole(params, parity, b, eps_pole) else b
        if not b_in > a_in:
            continue
        k0 = math.floor((a_in - lo) / grid_step) + 1
        k1 = math.ceil((b_in - lo) / grid_step) - 1
        xs = [a_in] + [lo + k * grid_step for k in range(k0, k1 + 1)
                       if a_in < lo + k * grid_step < b_in] + [b_in]
        samples = []
        for x in xs:
            try:
                samples.append((x, G(x)))
            except Dicke2Error as exc:
                scan.failures.append(SampleFailure((a, b), x, str(exc)))
        for (x0, f0), (x1, f1) in zip(samples[:-1], samples[1:]):
            if f0 == 0.0:
                scan.roots.append(Root(x0, (x0, x0), 0, 0.0))
                continue
            if (f0 > 0) != (f1 > 0) and f1 != 0.0:
                root, iters, br = _bisect(G, x0, f0, x1, tol_E, fb=f1)
                try:
                    res = abs(G(root))
                except Dicke2Error:
                    res = math.nan
                scan.roots.append(Root(root, br, iters, res))
        if samples and samples[-1][1] == 0.0:
            scan.roots.append(Root(samples[-1][0], (samples[-1][0],) * 2, 0, 0.0))
    scan.roots.sort(key=lambda r: r.energy)
    return scan


def _is_pole(params, parity, x, eps):
    n = round(x)
    if parity.matches(n) and n >= 0 and abs(x - n) < eps:
        return True
    m = round(x + params.g2)
    return m >= 0 and abs(x - (m - params.g2)) < eps


def find_zeros(params: ModelParams, parity: Parity | str, window: tuple[float, float],
               grid_step: float = DEFAULT_GRID_STEP, tol_E: float = DEFAULT_TOL_E,
               **kwargs) -> list[float]:
    """Sorted zeros of ``G_parity`` in the window."""
    return scan_zeros(params, parity, window, grid_step, tol_E, **kwargs).energies


@dataclass
class SweepPoint:
    g: float
    roots: list[Root]
    labels: list[int] = field(default_factory=list)
    failures: list[SampleFailure] = field(default_factory=list)
    error: str | None = None

    @property
    def energies(self) -> list[float]:
        return [r.energy for r in self.roots]


@dataclass
class SpectrumResult:
    delta: float
    parity: Parity
    window: tuple[float, float]
    points: list[SweepPoint]
    singlets: list[int]
    grid_step: float = DEFAULT_GRID_STEP
    tol_E: float = DEFAULT_TOL_E

    @property
    def g_grid(self) -> list[float]:
        return [p.g for p in self.points]

    def level(self, label: int) -> list[tuple[float, float]]:
        """``(g, E)`` samples carrying a given continuation label."""
        out = []
        for p in self.points:
            for lab, r in zip(p.labels, p.roots):
                if lab == label:
                    out.append((p.g, r.energy))
        return out

    def labels(self) -> list[int]:
        return sorted({lab for p in self.points for lab in p.labels})

    @property
    def failed(self) -> bool:
        return any(p.error is not None for p in self.points)


def _continue_labels(prev: list[float], prev_labels: list[int], cur: list[float],
                     next_label: int, max_jump: float) -> tuple[list[int], int]:
    """Greedy nearest-neighbour matching of levels at adjacent g."""
    pairs = sorted((abs(e - p), i, j) for i, e in enumerate(cur) for j, p in enumerate(prev))
    labels = [-1] * len(cur)
    used = set()
    for dist, i, j in pairs:
        if dist > max_jump:
            break
        if labels[i] < 0 and j not in used:
            labels[i] = prev_labels[j]
            used.add(j)
    for i in range(len(cur)):
        if labels[i] < 0:
            labels[i] = next_label
            next_label += 1
    return labels, next_label


def sweep_spectrum(delta: float, g_grid, parity: Parity | str, window: tuple[float, float],
                   grid_step: float = DEFAULT_GRID_STEP, tol_E: float = DEFAULT_TOL_E,
                   max_jump: float = 0.5, **kwargs) -> SpectrumResult:
    """Zeros of ``G_parity`` at each coupling in ``g_grid`` (input order kept).

    Level labels follow nearest-neighbour continuation in E and are purely
    cosmetic; the energies always come from root-finding.
    """
    parity = Parity.parse(parity)
    points = []
    prev, prev_labels, next_label = [], [], 0
    for g in g_grid:
        g = float(g)
        try:
            scan = scan_zeros(ModelParams(delta, g), parity, window, grid_step, tol_E, **kwargs)
        except (Dicke2Error, ValueError) as exc:
            points.append(SweepPoint(g, [], error=str(exc)))
            continue
        point = SweepPoint(g, scan.roots, failures=scan.failures)
        point.labels, next_label = _continue_labels(prev, prev_labels, point.energies,
                                                    next_label, max_jump)
        prev, prev_labels = point.energies, point.labels
        points.append(point)
    return SpectrumResult(delta, parity, tuple(window), points, singlet_levels(window),
                          grid_step, tol_E)


def _level_at(result: SpectrumResult, g: float, guess: float, halfwidth: float) -> float | None:
    params = ModelParams(result.delta, g)
    lo = max(guess - halfwidth, result.window[0])
    hi = min(guess + halfwidth, result.window[1])
    if not hi > lo:
        return None
    zeros = find_zeros(params, result.parity, (lo, hi), grid_step=halfwidth / 20,
                       tol_E=result.tol_E)
    if not zeros:
        return None
    return min(zeros, key=lambda e: abs(e - guess))


def level_crossings(result: SpectrumResult, m: int, tol_g: float = 1e-6) -> list[tuple[float, float]]:
    """Where continued levels cross the displaced-pole line ``E = m - g^2``.

    Each sign change of ``E_level(g) - (m - g^2)`` between grid points is
    bisected in g, relocating the level by root-finding at every trial g.
    """
    if not result.points:
        raise ValueError("empty spectrum result")
    out = []
    for label in result.labels():
        track = result.level(label)
        for (g0, e0), (g1, e1) in zip(track[:-1], track[1:]):
            h0 = e0 - (m - g0 * g0)
            h1 = e1 - (m - g1 * g1)
            if h0 == 0.0:
                out.append((g0, e0))
                continue
            if (h0 > 0) == (h1 > 0):
                continue
            halfwidth = max(0.05, 2.0 * abs(e1 - e0))
            a, b, ea, eb = g0, g1, e0, e1
            ok = True
            while b - a > tol_g:
                gm = 0.5 * (a + b)
                guess = ea + (eb - ea) * (gm - a) / (b - a)
                em = _level_at(result, gm, guess, halfwidth)
                if em is None:
                    # a zero swallowed by the pole guard sits on the parabola itself
                    ok = abs(guess - (m - gm * gm)) < 1e-3
                    a = b = gm
                    break
                hm = em - (m - gm * gm)
                if (hm > 0) == (h0 > 0):
                    a, ea = gm, em
                else:
                    b, eb = gm, em
            if ok:
                gc = 0.5 * (a + b)
                out.append((gc, m - gc * gc))
    out.sort()
    return out
