"""Scenario configuration, presets and the ``darkcqed`` command.

Config grammar
--------------
Plain text, one or more ``key = value`` pairs per line.  ``#`` starts a
comment, blank lines are ignored and ``[section]`` headers are accepted but
carry no meaning (the key space is flat).  A value runs until the next
``key =`` on the same line or the end of the line, so both::

    scenario = g2-scan
    grid = -0.15, 0.15, 201

and ``scenario=rabi preset=setA`` are valid.  Keys:

==============  ============================================================
scenario        effective-params | eigen-scan | kappa-scan | rabi |
                spectrum | g2-scan | regime-map
preset          setA | setB
g J delta1      system parameters in units of g (override the preset)
kappa1 kappa2
gamma
delta2          number or ``resonance`` (default: resonance)
cutoffs         ``N1,N2``; or n1_cutoff / n2_cutoff separately
eps             probe amplitude (default: scenario-specific fraction of g_eff)
grid            ``start, stop, count`` for the scan abscissa (time for rabi)
grid2           second axis of regime-map (J)
hold            kappa-scan only: ``ratio`` (delta1 = 10 kappa1) or ``delta1``
output          CSV path
rtol atol       integrator tolerances
==============  ============================================================
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .dynamics import DEFAULT_ATOL, DEFAULT_RTOL, rabi_experiment
from .effective import (
    coupling_ratios,
    effective_params,
    effective_spectrum,
    regime_map,
    resonance_delta2,
)
from .eigen import avoided_crossing_scan, effective_agreement_scan
from .hilbert import ProbeDrive, SystemParams
from .probe import g2_scan, excitation_spectrum
from .results import MapResult, Record, ScanResult, write_csv

log = logging.getLogger(__name__)

__all__ = [
    "PRESETS",
    "SCENARIOS",
    "ConfigError",
    "Grid",
    "ScenarioConfig",
    "parse_config",
    "serialize_config",
    "run_scenario",
    "main",
]

SCENARIOS = ("effective-params", "eigen-scan", "kappa-scan", "rabi", "spectrum",
             "g2-scan", "regime-map")
_GRID_REQUIRED = {"eigen-scan", "kappa-scan", "spectrum", "g2-scan", "regime-map"}

PRESETS = {
    "setA": dict(g=1.0, J=5.0, delta1=1000.0, kappa1=100.0, kappa2=1e-3, gamma=1e-3),
    "setB": dict(g=1.0, J=5.0, delta1=100.0, kappa1=10.0, kappa2=1e-3, gamma=1e-3),
}
_PRESET_CUTOFFS = {"g2-scan": (3, 3)}

_PARAM_KEYS = ("g", "J", "delta1", "kappa1", "kappa2", "gamma")
_KEYS = {"scenario", "preset", *_PARAM_KEYS, "delta2", "cutoffs", "n1_cutoff",
         "n2_cutoff", "eps", "grid", "grid2", "hold", "output", "rtol", "atol"}
_REQUIRED_MSG = "required keys: scenario, and either preset or all of " + ", ".join(_PARAM_KEYS)


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError("grid count must be at least 2")
        if self.start == self.stop:
            raise ConfigError("grid start and stop must differ")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self):
        return f"{self.start!r}, {self.stop!r}, {self.count}"


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: SystemParams
    drive: ProbeDrive | None = None
    grid: Grid | None = None
    grid2: Grid | None = None
    output: str | None = None
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    preset: str | None = None
    hold: str = "ratio"


_PAIR = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*(?=(?:\s[A-Za-z_][A-Za-z0-9_]*\s*=)|$)")


def _tokenize(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or re.fullmatch(r"\[[^\]]*\]", line):
            continue
        pos = 0
        while pos < len(line):
            m = _PAIR.match(line, pos)
            if not m or not m.group(2):
                raise ConfigError(f"cannot parse {line[pos:]!r}; expected key = value", lineno)
            yield lineno, m.group(1), m.group(2)
            pos = m.end()
            while pos < len(line) and line[pos].isspace():
                pos += 1


def _float(value, key, line):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}", line) from None


def _int(value, key, line):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}", line) from None


def _grid(value, key, line):
    parts = [s.strip() for s in value.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 'start, stop, count'", line)
    try:
        return Grid(_float(parts[0], key, line), _float(parts[1], key, line),
                    _int(parts[2], key, line))
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], line) from None


def parse_config(text: str, overrides: dict | None = None) -> ScenarioConfig:
    """Parse config text into a fully resolved :class:`ScenarioConfig`.

    ``overrides`` (already-split ``key -> value`` strings, e.g. from the
    command line) take precedence over the text.
    """
    raw: dict[str, tuple[int | None, str]] = {}
    for line, key, value in _tokenize(text):
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", line)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", line)
        raw[key] = (line, value)
    for key, value in (overrides or {}).items():
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}")
        raw[key] = (None, str(value))

    if not raw:
        raise ConfigError(f"empty configuration; {_REQUIRED_MSG}")
    if "scenario" not in raw:
        raise ConfigError(f"missing scenario; {_REQUIRED_MSG}")
    line, scenario = raw["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}", line)

    values: dict = {}
    preset = None
    if "preset" in raw:
        line, preset = raw["preset"]
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}", line)
        values.update(PRESETS[preset])
    for key in _PARAM_KEYS:
        if key in raw:
            line, v = raw[key]
            if preset is not None and key in values:
                log.info("%s = %s overrides preset %s value %r", key, v, preset, values[key])
            values[key] = _float(v, key, line)
    missing = [k for k in _PARAM_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing parameters {', '.join(missing)}; {_REQUIRED_MSG}")

    cut = _PRESET_CUTOFFS.get(scenario, (2, 2))
    if "cutoffs" in raw:
        line, v = raw["cutoffs"]
        parts = v.split(",")
        if len(parts) != 2:
            raise ConfigError("cutoffs: expected 'N1,N2'", line)
        cut = (_int(parts[0].strip(), "cutoffs", line), _int(parts[1].strip(), "cutoffs", line))
    n1c = _int(raw["n1_cutoff"][1], "n1_cutoff", raw["n1_cutoff"][0]) if "n1_cutoff" in raw else cut[0]
    n2c = _int(raw["n2_cutoff"][1], "n2_cutoff", raw["n2_cutoff"][0]) if "n2_cutoff" in raw else cut[1]

    try:
        params = SystemParams(delta2=0.0, n1_cutoff=n1c, n2_cutoff=n2c, **values)
        if "delta2" in raw and raw["delta2"][1] != "resonance":
            line, v = raw["delta2"]
            if preset is not None:
                log.info("explicit delta2 = %s used instead of the preset's resonance value", v)
            params = replace(params, delta2=_float(v, "delta2", line))
        else:
            params = replace(params, delta2=resonance_delta2(params))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None

    drive = None
    if "eps" in raw:
        line, v = raw["eps"]
        try:
            drive = ProbeDrive(amplitude=_float(v, "eps", line))
        except ValueError as exc:
            raise ConfigError(str(exc), line) from None

    grid = _grid(raw["grid"][1], "grid", raw["grid"][0]) if "grid" in raw else None
    grid2 = _grid(raw["grid2"][1], "grid2", raw["grid2"][0]) if "grid2" in raw else None
    if scenario in _GRID_REQUIRED and grid is None:
        raise ConfigError(f"scenario {scenario} requires grid = start, stop, count")
    if scenario == "regime-map" and grid2 is None:
        raise ConfigError("scenario regime-map requires grid2 = start, stop, count (J axis)")

    hold = raw["hold"][1] if "hold" in raw else "ratio"
    if hold not in ("ratio", "delta1"):
        raise ConfigError(f"hold must be 'ratio' or 'delta1', got {hold!r}", raw["hold"][0])

    kwargs = {}
    for key in ("rtol", "atol"):
        if key in raw:
            kwargs[key] = _float(raw[key][1], key, raw[key][0])
            if kwargs[key] <= 0:
                raise ConfigError(f"{key} must be positive", raw[key][0])

    return ScenarioConfig(
        scenario=scenario,
        params=params,
        drive=drive,
        grid=grid,
        grid2=grid2,
        output=raw["output"][1] if "output" in raw else None,
        preset=preset,
        hold=hold,
        **kwargs,
    )


def serialize_config(cfg: ScenarioConfig) -> str:
    """Config text that parses back to ``cfg``."""
    p = cfg.params
    lines = [f"scenario = {cfg.scenario}"]
    if cfg.preset:
        lines.append(f"preset = {cfg.preset}")
    for key in _PARAM_KEYS + ("delta2",):
        lines.append(f"{key} = {float(getattr(p, key))!r}")
    lines.append(f"cutoffs = {p.n1_cutoff},{p.n2_cutoff}")
    if cfg.drive is not None:
        lines.append(f"eps = {cfg.drive.amplitude!r}")
    if cfg.grid is not None:
        lines.append(f"grid = {cfg.grid}")
    if cfg.grid2 is not None:
        lines.append(f"grid2 = {cfg.grid2}")
    if cfg.hold != "ratio":
        lines.append(f"hold = {cfg.hold}")
    if cfg.output is not None:
        lines.append(f"output = {cfg.output}")
    lines.append(f"rtol = {cfg.rtol!r}")
    lines.append(f"atol = {cfg.atol!r}")
    return "\n".join(lines) + "\n"


def _eps(cfg):
    return None if cfg.drive is None else cfg.drive.amplitude


def _compute(cfg: ScenarioConfig):
    p = cfg.params
    s = cfg.scenario
    if s == "effective-params":
        eff = effective_params(p)
        row = {k: getattr(eff, k) for k in (f.name for f in fields(eff))}
        try:
            row.update(coupling_ratios(p)._asdict())
        except ValueError:
            row.update(g_over_k=np.nan, g_over_gamma=np.nan, cooperativity=np.nan)
        row["delta2_resonance"] = resonance_delta2(p)
        return Record(row)
    if s == "eigen-scan":
        return avoided_crossing_scan(p, cfg.grid.values())
    if s == "kappa-scan":
        fixed = p.delta1 if cfg.hold == "delta1" else None
        return effective_agreement_scan(p, cfg.grid.values(), fixed_delta1=fixed)
    if s == "rabi":
        t = cfg.grid.values() if cfg.grid is not None else None
        res = rabi_experiment(p, t_grid=t, rtol=cfg.rtol, atol=cfg.atol)
        ts = res.series
        return ScanResult("t", ts.times, {"N1": ts.n1, "N2": ts.n2, "Pe": ts.pe,
                                          "Pe_eff": res.pe_eff})
    if s == "spectrum":
        grid = cfg.grid.values()
        res = excitation_spectrum(p, _eps(cfg), grid)
        res.columns["S_eff"] = effective_spectrum(effective_params(p), grid)["S_eff"]
        return res
    if s == "g2-scan":
        return g2_scan(p, _eps(cfg), cfg.grid.values(),
                       cutoffs=(p.n1_cutoff, p.n2_cutoff),
                       check_cutoffs=(max(1, p.n1_cutoff - 1), max(1, p.n2_cutoff - 1)))
    if s == "regime-map":
        return regime_map(p, cfg.grid.values(), cfg.grid2.values())
    raise ConfigError(f"unknown scenario {s!r}")


def _comments(cfg: ScenarioConfig, result=None):
    out = [f"darkcqed {__version__}", f"scenario: {cfg.scenario}",
           "units: rates and detunings in g, time in 1/g", "config:"]
    out += ["  " + line for line in serialize_config(cfg).splitlines()]
    meta = getattr(result, "metadata", None) or {}
    if "eps" in meta:
        out.append(f"probe amplitude used: {meta['eps']!r}")
    for key in ("cutoffs", "check_cutoffs", "n_exc", "detuning_ratio", "fixed_delta1"):
        if key in meta and meta[key] is not None:
            out.append(f"{key}: {meta[key]}")
    return out


def run_scenario(cfg: ScenarioConfig, output: str | None = None):
    """Run ``cfg`` and return ``(result, csv_text)``; writes the CSV when a path is set."""
    result = _compute(cfg)
    path = output if output is not None else cfg.output
    text = write_csv(result, path, _comments(cfg, result))
    return result, text


def _gnuplot_script(cfg: ScenarioConfig, result, csv_path: str) -> str:
    header = result.header
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set title '{cfg.scenario}'"]
    if isinstance(result, MapResult):
        lines += ["set view map", f"splot '{csv_path}' using 1:2:3 with image"]
    else:
        cols = range(2, len(header) + 1)
        plots = ", ".join(f"'{csv_path}' using 1:{c} with lines" for c in cols)
        lines.append(f"plot {plots}")
    return "\n".join(lines) + "\n"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="darkcqed",
        description="Dark-state cavity QED simulator: reproduce effective parameters, "
                    "spectra, Rabi oscillations and g2(0) scans as CSV tables.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("config", nargs="?", help="config file (key = value lines)")
    run.add_argument("--preset", choices=sorted(PRESETS))
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--out", help="CSV output path (default: stdout)")
    run.add_argument("--tol", type=float, help="integrator relative tolerance")
    run.add_argument("--cutoffs", help="Fock cutoffs as N1,N2")
    run.add_argument("--grid", help="scan grid as 'start,stop,count'")
    run.add_argument("--gnuplot", action="store_true",
                     help="also write <out>.gp, a gnuplot script for the CSV")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    overrides = {}
    if args.preset:
        overrides["preset"] = args.preset
    if args.scenario:
        overrides["scenario"] = args.scenario
    if args.tol is not None:
        overrides["rtol"] = repr(args.tol)
    if args.cutoffs:
        overrides["cutoffs"] = args.cutoffs
    if args.grid:
        overrides["grid"] = args.grid

    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"darkcqed: cannot read config: {exc}", file=sys.stderr)
            return 1
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"darkcqed: config error: {exc}", file=sys.stderr)
        return 1

    out = args.out if args.out is not None else cfg.output
    try:
        result, csv_text = run_scenario(cfg, output=out)
    except Exception as exc:  # numerical failure: leave a marked partial file behind
        log.debug("scenario failed", exc_info=True)
        msg = f"{type(exc).__name__}: {exc}"
        partial = "".join(f"# {c}\n" for c in _comments(cfg)) + f"# PARTIAL OUTPUT: {msg}\n"
        if out:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(partial)
        print(f"darkcqed: run failed: {msg}", file=sys.stderr)
        return 2
    if out is None:
        sys.stdout.write(csv_text)
    elif args.gnuplot:
        with open(out + ".gp", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_gnuplot_script(cfg, result, out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
