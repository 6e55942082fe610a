"""Command-line front end: ``dicke2 <command> [flags]``.

Every command writes one tidy table (CSV or JSON) to stdout or ``--out``.
Exit status is 0 on success, 2 when a sweep finished with per-point
failures (their rows are kept), and 1 on validation or operation errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from dicke2.errors import Dicke2Error, NoConvergence, PoleError
from dicke2.exceptional import find_exceptional_g
from dicke2.oracle import DEFAULT_N_FOCK, oracle_spectrum
from dicke2.output import Table, render
from dicke2.params import DEFAULT_TOL, EPS_POLE, ModelParams, Parity
from dicke2.roots import DEFAULT_GRID_STEP, DEFAULT_TOL_E, singlet_levels, sweep_spectrum
from dicke2.series import g_function
from dicke2.verify import MATCH_TOL, fock_residual, verify_against_oracle

COMMANDS = ("gcurve", "spectrum", "exceptional", "oracle", "verify", "singlet")
EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    delta: float | None = None
    g: float | None = None
    g_grid: tuple[float, float, float] | None = None
    parity: str = "both"
    window: tuple[float, float] | None = None
    step: float | None = None
    tol: float = DEFAULT_TOL
    tol_e: float = DEFAULT_TOL_E
    eps_pole: float = EPS_POLE
    n_fock: int = DEFAULT_N_FOCK
    m: tuple[int, ...] = (1, 2, 3)
    g_range: tuple[float, float] = (0.0, 1.5)
    method: str = "series"
    n_max: int | None = None
    verify: bool = False
    format: str = "csv"
    out: str | None = None

    @property
    def parities(self) -> list[Parity]:
        if self.parity == "both":
            return [Parity.EVEN, Parity.ODD]
        return [Parity.parse(self.parity)]

    def g_values(self) -> list[float]:
        if self.g_grid is not None:
            return expand_grid(*self.g_grid)
        if self.g is not None:
            return [self.g]
        raise ConfigError("need --g or --g-grid")


# --- parsing helpers -----------------------------------------------------------

def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    parts = str(text).split(":")
    if len(parts) != n:
        raise ConfigError(f"{what} must have the form {':'.join(['x'] * n)}, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"bad number in {what} {text!r}") from None


def parse_window(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)):
        lo, hi = (float(x) for x in text)
    else:
        lo, hi = _floats(text, 2, "window")
    if not hi > lo:
        raise ConfigError(f"empty window {lo}:{hi}")
    return lo, hi


def parse_grid(text) -> tuple[float, float, float]:
    if isinstance(text, (list, tuple)):
        start, stop, step = (float(x) for x in text)
    else:
        start, stop, step = _floats(text, 3, "g-grid")
    if not step > 0:
        raise ConfigError("g-grid step must be positive")
    if stop < start:
        raise ConfigError("g-grid stop is below start")
    return start, stop, step


def expand_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid ``start, start+step, ..., <= stop`` rounded to 12 digits."""
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def parse_m(text) -> tuple[int, ...]:
    if isinstance(text, int):
        return (text,)
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    try:
        return tuple(int(x) for x in str(text).split(","))
    except ValueError:
        raise ConfigError(f"bad --m {text!r}") from None


_CONVERT = {
    "window": parse_window,
    "g_grid": parse_grid,
    "g_range": lambda t: _floats(t, 2, "g-range") if isinstance(t, str) else tuple(map(float, t)),
    "m": parse_m,
    "delta": float, "g": float, "step": float, "tol": float, "tol_e": float,
    "eps_pole": float, "n_fock": int, "n_max": int, "verify": bool,
}


class _Parser(argparse.ArgumentParser):
    # usage errors must not share exit status 2 with partial sweep failures
    def error(self, message):
        raise ConfigError(message)


_VALUED = ("--window", "--g-grid", "--g-range", "--delta", "--g", "--step")


def _glue_negative(argv: list[str]) -> list[str]:
    """Turn ``--window -0.3:4`` into ``--window=-0.3:4`` so argparse accepts it."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUED and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dicke2", description="Two-qubit Rabi model spectra.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=None, help="JSON file with the same keys as the flags")
    common.add_argument("--delta", default=S)
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--g", default=S)
    grp.add_argument("--g-grid", dest="g_grid", default=S, metavar="START:STOP:STEP")
    common.add_argument("--parity", choices=["even", "odd", "both"], default=S)
    common.add_argument("--window", default=S, metavar="LO:HI")
    common.add_argument("--step", default=S)
    common.add_argument("--tol", default=S)
    common.add_argument("--tol-e", dest="tol_e", default=S)
    common.add_argument("--eps-pole", dest="eps_pole", default=S)
    common.add_argument("--n-fock", dest="n_fock", default=S)
    common.add_argument("--format", choices=["csv", "json"], default=S)
    common.add_argument("--out", default=S)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "exceptional":
            p.add_argument("--m", default=S, help="comma-separated m values")
            p.add_argument("--g-range", dest="g_range", default=S, metavar="LO:HI")
            p.add_argument("--method", choices=["series", "direct"], default=S)
        if name == "singlet":
            p.add_argument("--n-max", dest="n_max", default=S)
        if name == "spectrum":
            p.add_argument("--verify", action="store_true", default=S)
    return parser


def load_config(argv: list[str] | None = None) -> RunConfig:
    """Merge the optional JSON config with the flags (flags win) and validate."""
    if argv is None:
        argv = sys.argv[1:]
    ns = vars(build_parser().parse_args(_glue_negative(list(argv))))
    values = {}
    config_path = ns.pop("config", None)
    if config_path:
        with open(config_path) as fh:
            raw = json.load(fh)
        values.update({k.replace("-", "_"): v for k, v in raw.items()})
        values.pop("command", None)
        # a coupling given on the command line replaces either form from the file
        if "g" in ns or "g_grid" in ns:
            values.pop("g", None)
            values.pop("g_grid", None)
    values.update(ns)
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, conv in _CONVERT.items():
        if key in values and values[key] is not None:
            try:
                values[key] = conv(values[key])
            except (TypeError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"bad value for {key}: {values[key]!r}") from None
    if values.get("g") is not None and values.get("g_grid") is not None:
        raise ConfigError("give either g or g-grid, not both")
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.parity not in ("even", "odd", "both"):
        raise ConfigError(f"bad parity {cfg.parity!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"bad format {cfg.format!r}")
    if cfg.command != "singlet":
        if cfg.delta is None:
            raise ConfigError("--delta is required")
        if not (math.isfinite(cfg.delta) and cfg.delta >= 0):
            raise ConfigError("delta must be finite and >= 0")
    if cfg.g is not None and not cfg.g > 0:
        raise ConfigError("g must be > 0")
    if cfg.g_grid is not None and not cfg.g_grid[0] > 0:
        raise ConfigError("g-grid must start above 0")
    for name in ("step", "tol", "tol_e", "eps_pole"):
        val = getattr(cfg, name)
        if val is not None and not val > 0:
            raise ConfigError(f"{name} must be positive")
    if cfg.n_fock < 2:
        raise ConfigError("n-fock must be >= 2")
    if cfg.command in ("gcurve", "oracle", "verify") and cfg.g is None:
        raise ConfigError(f"{cfg.command} needs a single --g")
    if cfg.command == "spectrum":
        cfg.g_values()
    if cfg.command in ("gcurve", "spectrum") and cfg.window is None:
        raise ConfigError("--window is required")
    if cfg.command == "singlet" and cfg.n_max is None and cfg.window is None:
        raise ConfigError("singlet needs --n-max or --window")
    if cfg.n_max is not None and cfg.n_max < 0:
        raise ConfigError("n-max must be >= 0")
    if any(m < 0 for m in cfg.m):
        raise ConfigError("m must be >= 0")
    lo, hi = cfg.g_range
    if not hi > max(lo, 0.0):
        raise ConfigError("g-range must contain positive couplings")


# --- commands --------------------------------------------------------------------

def _pole_token(parity: Parity, exc: Exception) -> str:
    if isinstance(exc, PoleError):
        return f"{parity}:{exc.kind}-{exc.n}"
    if isinstance(exc, NoConvergence):
        return f"{parity}:nc"
    return f"{parity}:error"


def cmd_gcurve(cfg: RunConfig) -> tuple[Table, int]:
    params = ModelParams(cfg.delta, cfg.g)
    lo, hi = cfg.window
    step = cfg.step or 0.005
    n = int(math.floor((hi - lo) / step + 1e-9))
    table = Table("gcurve", ["E", "G_even", "G_odd", "pole_flag"])
    wanted = set(cfg.parities)
    for k in range(n + 1):
        E = round(lo + k * step, 12)
        vals, flags = {}, []
        for parity in (Parity.EVEN, Parity.ODD):
            if parity not in wanted:
                continue
            try:
                vals[parity] = g_function(params, parity, E, tol=cfg.tol, eps_pole=cfg.eps_pole).value
            except Dicke2Error as exc:
                flags.append(_pole_token(parity, exc))
        table.add(E, vals.get(Parity.EVEN), vals.get(Parity.ODD), ";".join(flags) or None)
    return table, EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> tuple[Table, int]:
    lo, hi = cfg.window
    grid = cfg.g_values()
    step = cfg.step or DEFAULT_GRID_STEP
    cols = ["kind", "g", "parity", "level_index", "E"] + (["oracle_dev"] if cfg.verify else []) + ["note"]
    table = Table("spectrum", cols)
    sweeps = {p: sweep_spectrum(cfg.delta, grid, p, (lo, hi), grid_step=step, tol_E=cfg.tol_e,
                                tol=cfg.tol, eps_pole=cfg.eps_pole) for p in cfg.parities}
    status = EXIT_OK

    def row(kind, g, parity, idx, E, dev, note):
        vals = [kind, g, parity, idx, E] + ([dev] if cfg.verify else []) + [note]
        table.add(*vals)

    for i, g in enumerate(grid):
        oracle = None
        if cfg.verify:
            try:
                oracle = oracle_spectrum(ModelParams(cfg.delta, g), cfg.n_fock,
                                         (lo - 1e-3, hi + 1e-3), check_convergence=False)
            except (Dicke2Error, ValueError) as exc:
                row("error", g, None, None, None, None, f"oracle: {exc}")
                status = EXIT_PARTIAL
        for parity, result in sweeps.items():
            point = result.points[i]
            if point.error is not None:
                row("error", g, str(parity), None, None, None, point.error)
                status = EXIT_PARTIAL
                continue
            ref = oracle.energies(parity) if oracle is not None else None
            for label, E in zip(point.labels, point.energies):
                dev = float(np.min(np.abs(ref - E))) if ref is not None and ref.size else None
                row("level", g, str(parity), label, E, dev, None)
            for f in point.failures:
                row("error", g, str(parity), None, f.energy, None, f.reason)
                status = EXIT_PARTIAL
        for n in singlet_levels((lo, hi)):
            row("singlet", g, None, n, float(n), None, "j=0")
        for m in range(0, math.floor(hi + g * g) + 1):
            E = m - g * g
            if lo <= E <= hi:
                row("pole_line", g, None, m, E, None, "E=m-g^2")
    return table, status


def cmd_exceptional(cfg: RunConfig) -> tuple[Table, int]:
    table = Table("exceptional", ["m", "parity", "g_star", "E_star", "residual"])
    for m in cfg.m:
        for parity in cfg.parities:
            points = find_exceptional_g(cfg.delta, parity, m, cfg.g_range, method=cfg.method,
                                        step=cfg.step or 0.01)
            if not points:
                table.add(m, str(parity), None, None, None)
            for p in points:
                table.add(m, str(parity), p.g_star, p.energy, p.condition_residual)
    return table, EXIT_OK


def cmd_oracle(cfg: RunConfig) -> tuple[Table, int]:
    window = cfg.window or (-math.inf, 4.0)
    spec = oracle_spectrum(ModelParams(cfg.delta, cfg.g), cfg.n_fock, window)
    table = Table("oracle", ["parity", "E", "residual", "parity_expectation"])
    wanted = set(cfg.parities)
    for lv in spec.levels:
        if lv.parity is None or lv.parity in wanted:
            table.add(None if lv.parity is None else str(lv.parity), lv.energy, lv.residual,
                      lv.expectation)
    return table, EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[Table, int]:
    params = ModelParams(cfg.delta, cfg.g)
    report = verify_against_oracle(params, cfg.window, cfg.parities, cfg.n_fock, MATCH_TOL,
                                   grid_step=cfg.step or DEFAULT_GRID_STEP, tol_E=cfg.tol_e,
                                   tol=cfg.tol, eps_pole=cfg.eps_pole)
    table = Table("verify", ["parity", "E_G", "E_oracle", "deviation", "status", "fock_residual"])
    for p in report.pairs:
        res = None
        if p.status == "unmatched_zero":
            res = fock_residual(params, p.parity, p.zero, n_fock=cfg.n_fock)
        table.add(str(p.parity), p.zero, p.oracle, p.deviation, p.status, res)
    table.add(None, None, None, report.max_deviation, "max_deviation", None)
    return table, EXIT_OK if report.ok else EXIT_ERROR


def cmd_singlet(cfg: RunConfig) -> tuple[Table, int]:
    levels = singlet_levels(cfg.window, cfg.n_max)
    table = Table("singlet", ["n", "E"])
    for n in levels:
        table.add(n, float(n))
    return table, EXIT_OK


HANDLERS = {
    "gcurve": cmd_gcurve, "spectrum": cmd_spectrum, "exceptional": cmd_exceptional,
    "oracle": cmd_oracle, "verify": cmd_verify, "singlet": cmd_singlet,
}


def run(cfg: RunConfig) -> tuple[str, int]:
    table, status = HANDLERS[cfg.command](cfg)
    return render(table, cfg.format), status


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = load_config(argv)
        text, status = run(cfg)
    except (ConfigError, Dicke2Error, ValueError, OSError) as exc:
        print(f"dicke2: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
