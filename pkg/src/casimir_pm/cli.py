"""Command-line front end.

A run is described by a flat ``key=value`` file (one pair per line, ``#``
starts a comment)::

    outer.kind = corrugated
    outer.b = 2
    outer.h = 0.01
    outer.nu = 3
    numerics.S = 18
    numerics.polarization = TM
    task = sweep
    sweep.axis = phi0
    sweep.values = 0:2.0944:9

and the results are written as CSV, one row per computed energy::

    casimir run config.txt --out energies.csv --fit
    casimir oracle table1 --out table1.csv

Sweep values are either a comma separated list or ``start:stop:count``
(inclusive).  Every module error maps to its own exit code, see
:data:`EXIT_CODES`.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .energy import (SWEEP_AXES, UNITS, EnergyResult, GeometrySpec, SweepSpec, casimir_energy,
                     parse_polarizations, sweep, to_units, torque)
from .errors import (CasimirError, ConfigError, DomainError, InvariantViolation,
                     NonConvergence, SingularCollocation, StarShapeViolation)
from .geometry import PAIR_PARAMS
from .oracles import TABLE1_CASES, table1

__all__ = [
    "RunConfig",
    "parse_config",
    "format_config",
    "fit_amplitude",
    "run",
    "main",
    "CSV_COLUMNS",
    "EXIT_CODES",
]

log = logging.getLogger("casimir_pm")

CSV_COLUMNS = ("task", "axis_value", "pol", "energy_per_length", "unit", "quad_error",
               "im_residual", "S", "y_max", "nodes")
ORACLE_COLUMNS = ("task", "nu", "alpha", "h", "amplitude", "unit")

EXIT_CODES = {
    ConfigError: 2,
    StarShapeViolation: 3,
    SingularCollocation: 4,
    NonConvergence: 5,
    InvariantViolation: 6,
    DomainError: 7,
    CasimirError: 1,
}
# a sweep finished but some of its points failed
EXIT_PARTIAL = 8

TASKS = ("single", "sweep", "torque", "oracle")
ORACLES = ("table1",)
POLARIZATIONS = ("both", "TM", "TE", "TE_radial", "TE_normal")
TE_MODES = ("radial", "normal")


@dataclass
class RunConfig:
    """Validated run description; lengths are in units of the inner radius."""

    task: str = "single"
    kind: Optional[str] = None
    params: dict = field(default_factory=dict)
    a: float = 1.0
    S: int = 18
    rel_tolerance: float = 1e-6
    y_max: Optional[float] = None
    polarization: str = "both"
    te_mode: str = "radial"
    workers: int = 1
    deterministic_sum: bool = False
    sweep_axis: Optional[str] = None
    sweep_values: tuple = ()
    baseline: Optional[dict] = None
    torque_phi0: tuple = ()
    torque_step: Optional[float] = None
    oracle: Optional[str] = None
    csv_path: Optional[str] = None
    units: str = "per_a2"

    def geometry(self) -> GeometrySpec:
        return GeometrySpec(self.kind, self.params)

    def energy_kwargs(self):
        return dict(S=self.S, polarizations=self.polarization, te_mode=self.te_mode,
                    rel_tol=self.rel_tolerance, y_max=self.y_max,
                    deterministic_sum=self.deterministic_sum)


def _parse_float(text, key, line):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", key, line) from None
    if not math.isfinite(value):
        raise ConfigError("value must be finite", key, line)
    return value


def _parse_int(text, key, line):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", key, line) from None


def _parse_bool(text, key, line):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}", key, line)


def parse_values(text, key=None, line=None):
    """``start:stop:count`` (inclusive) or a comma separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("range must be start:stop:count", key, line)
        start = _parse_float(parts[0], key, line)
        stop = _parse_float(parts[1], key, line)
        count = _parse_int(parts[2], key, line)
        if count < 1:
            raise ConfigError("range count must be positive", key, line)
        return tuple(float(v) for v in np.linspace(start, stop, count))
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ConfigError("empty value list", key, line)
    return tuple(_parse_float(s, key, line) for s in items)


def _choice(text, options, key, line):
    for opt in options:
        if text.lower() == opt.lower():
            return opt
    raise ConfigError(f"expected one of {', '.join(options)}, got {text!r}", key, line)


def _positive(value, key, line):
    if not value > 0:
        raise ConfigError("must be positive", key, line)
    return value


_SIMPLE_KEYS = {
    "task": "task",
    "oracle": "oracle",
    "inner.a": "a",
    "numerics.S": "S",
    "numerics.rel_tolerance": "rel_tolerance",
    "numerics.y_max": "y_max",
    "numerics.polarization": "polarization",
    "numerics.te_mode": "te_mode",
    "numerics.workers": "workers",
    "numerics.deterministic_sum": "deterministic_sum",
    "sweep.axis": "sweep_axis",
    "sweep.values": "sweep_values",
    "torque.phi0": "torque_phi0",
    "torque.step": "torque_step",
    "output.csv": "csv_path",
    "output.units": "units",
}


def _convert(key, text, line):
    if key == "task":
        return _choice(text, TASKS, key, line)
    if key == "oracle":
        return _choice(text, ORACLES, key, line)
    if key in ("inner.a", "numerics.rel_tolerance", "torque.step"):
        return _positive(_parse_float(text, key, line), key, line)
    if key == "numerics.S":
        value = _parse_int(text, key, line)
        if value < 1:
            raise ConfigError("must be at least 1", key, line)
        return value
    if key == "numerics.workers":
        return max(1, _parse_int(text, key, line))
    if key == "numerics.y_max":
        if text.lower() == "auto":
            return None
        return _positive(_parse_float(text, key, line), key, line)
    if key == "numerics.polarization":
        return _choice(text, POLARIZATIONS, key, line)
    if key == "numerics.te_mode":
        return _choice(text, TE_MODES, key, line)
    if key == "numerics.deterministic_sum":
        return _parse_bool(text, key, line)
    if key == "sweep.axis":
        return _choice(text, SWEEP_AXES, key, line)
    if key in ("sweep.values", "torque.phi0"):
        return parse_values(text, key, line)
    if key == "output.units":
        return _choice(text, UNITS, key, line)
    return text


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat ``key=value`` configuration.

    Raises
    ------
    ConfigError
        With the offending line number and/or key.

    Examples
    --------
    >>> cfg = parse_config("outer.kind=circle\\nouter.b=2.0\\nnumerics.S=10\\ntask=single")
    >>> cfg.kind, cfg.params, cfg.S, cfg.rel_tolerance, cfg.polarization
    ('circle', {'b': 2.0}, 10, 1e-06, 'both')
    """
    cfg = RunConfig()
    seen = {}
    kind_line = None
    raw_params = {}
    baseline = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected key=value, got {stripped!r}", line=lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if not value:
            raise ConfigError("empty value", key, lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", key, lineno)
        seen[key] = lineno
        if key == "outer.kind":
            if value not in PAIR_PARAMS:
                raise ConfigError(f"unknown kind {value!r}; expected one of "
                                  f"{', '.join(PAIR_PARAMS)}", key, lineno)
            cfg.kind = value
            kind_line = lineno
        elif key.startswith("outer."):
            raw_params[key[len("outer."):]] = (value, lineno)
        elif key.startswith("sweep.baseline."):
            baseline[key[len("sweep.baseline."):]] = (value, lineno)
        elif key in _SIMPLE_KEYS:
            setattr(cfg, _SIMPLE_KEYS[key], _convert(key, value, lineno))
        else:
            raise ConfigError("unknown key", key, lineno)

    if cfg.task == "oracle":
        if cfg.oracle is None:
            raise ConfigError("required for task=oracle", "oracle")
        return cfg
    if cfg.kind is None:
        raise ConfigError("required", "outer.kind")

    allowed = PAIR_PARAMS[cfg.kind]
    for name, (value, lineno) in raw_params.items():
        if name not in allowed:
            raise ConfigError(f"not a parameter of kind {cfg.kind!r}", f"outer.{name}", lineno)
        cfg.params[name] = _parse_float(value, f"outer.{name}", lineno)
    for name, default in allowed.items():
        if default is None and name not in cfg.params:
            raise ConfigError(f"required for kind {cfg.kind!r}", f"outer.{name}")
    if "nu" in cfg.params:
        nu = cfg.params["nu"]
        if nu != int(nu) or nu < 1:
            raise ConfigError("must be a positive integer", "outer.nu", seen.get("outer.nu"))
        cfg.params["nu"] = int(nu)
    if baseline:
        cfg.baseline = {}
        for name, (value, lineno) in baseline.items():
            if name not in allowed:
                raise ConfigError(f"not a parameter of kind {cfg.kind!r}",
                                  f"sweep.baseline.{name}", lineno)
            cfg.baseline[name] = _parse_float(value, f"sweep.baseline.{name}", lineno)

    if cfg.task == "sweep":
        if cfg.sweep_axis is None:
            raise ConfigError("required for task=sweep", "sweep.axis")
        if not cfg.sweep_values:
            raise ConfigError("required for task=sweep", "sweep.values")
        try:
            SweepSpec(cfg.geometry(), cfg.sweep_axis, cfg.sweep_values, cfg.baseline)
        except ValueError as exc:
            raise ConfigError(str(exc), "sweep.axis", seen.get("sweep.axis")) from None
    if cfg.task == "torque":
        if cfg.kind != "corrugated":
            raise ConfigError("task=torque needs outer.kind=corrugated", "outer.kind", kind_line)
        if not cfg.torque_phi0:
            raise ConfigError("required for task=torque", "torque.phi0")
    try:
        cfg.geometry().pair(cfg.a)
    except ValueError as exc:
        raise ConfigError(f"invalid geometry: {exc}", "outer.kind", kind_line) from None
    return cfg


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: RunConfig) -> str:
    """Text that :func:`parse_config` maps back to ``cfg``."""
    lines = [f"task = {cfg.task}"]
    if cfg.oracle is not None:
        lines.append(f"oracle = {cfg.oracle}")
    if cfg.kind is not None:
        lines.append(f"outer.kind = {cfg.kind}")
        for name, value in cfg.params.items():
            lines.append(f"outer.{name} = {_fmt(value)}")
    lines += [
        f"inner.a = {_fmt(float(cfg.a))}",
        f"numerics.S = {cfg.S}",
        f"numerics.rel_tolerance = {_fmt(float(cfg.rel_tolerance))}",
        f"numerics.y_max = {'auto' if cfg.y_max is None else _fmt(float(cfg.y_max))}",
        f"numerics.polarization = {cfg.polarization}",
        f"numerics.te_mode = {cfg.te_mode}",
        f"numerics.workers = {cfg.workers}",
        f"numerics.deterministic_sum = {str(cfg.deterministic_sum).lower()}",
    ]
    if cfg.sweep_axis is not None:
        lines.append(f"sweep.axis = {cfg.sweep_axis}")
    if cfg.sweep_values:
        lines.append("sweep.values = " + ", ".join(_fmt(float(v)) for v in cfg.sweep_values))
    for name, value in (cfg.baseline or {}).items():
        lines.append(f"sweep.baseline.{name} = {_fmt(value)}")
    if cfg.torque_phi0:
        lines.append("torque.phi0 = " + ", ".join(_fmt(float(v)) for v in cfg.torque_phi0))
    if cfg.torque_step is not None:
        lines.append(f"torque.step = {_fmt(float(cfg.torque_step))}")
    if cfg.csv_path is not None:
        lines.append(f"output.csv = {cfg.csv_path}")
    lines.append(f"output.units = {cfg.units}")
    return "\n".join(lines) + "\n"


def fit_amplitude(phi0, energy, nu):
    """Least-squares fit of ``E(phi0) = mean + A cos(nu phi0)``.

    Parameters
    ----------
    phi0, energy : array_like
        Sweep abscissae and energies; at least 8 points covering a full
        period ``2 pi / nu``.
    nu : int
        Corrugation frequency.

    Returns
    -------
    (A, residual)
        Amplitude and the RMS misfit relative to ``|A|``.

    Examples
    --------
    >>> phi = np.linspace(0, 2 * np.pi, 25)
    >>> A, res = fit_amplitude(phi, 0.5 + 0.001 * np.cos(3 * phi), 3)
    >>> round(A, 12), res < 1e-12
    (0.001, True)
    """
    phi0 = np.asarray(phi0, dtype=float)
    energy = np.asarray(energy, dtype=float)
    if phi0.shape != energy.shape or phi0.ndim != 1:
        raise ValueError("phi0 and energy must be matching 1-d arrays")
    if phi0.size < 8:
        raise ValueError(f"amplitude fit needs at least 8 points, got {phi0.size}")
    if np.ptp(phi0) * nu < 2.0 * np.pi * (1.0 - 1.0 / phi0.size) - 1e-9:
        raise ValueError("amplitude fit needs the sweep to cover one period 2 pi / nu")
    design = np.column_stack([np.ones_like(phi0), np.cos(nu * phi0)])
    coef, *_ = np.linalg.lstsq(design, energy, rcond=None)
    amp = float(coef[1])
    misfit = energy - design @ coef
    rms = float(np.sqrt(np.mean(misfit ** 2)))
    return amp, (rms / abs(amp) if amp != 0 else math.inf)


def _pol_label(cfg):
    return "+".join(p.value for p in parse_polarizations(cfg.polarization, cfg.te_mode))


def _energy_row(task, axis_value, cfg, res: EnergyResult, value=None):
    a = cfg.a
    energy = res.energy_per_length if value is None else value
    return {
        "task": task,
        "axis_value": axis_value,
        "pol": _pol_label(cfg),
        "energy_per_length": to_units(energy, cfg.units, a),
        "unit": cfg.units,
        "quad_error": to_units(res.quadrature_error, cfg.units, a),
        "im_residual": res.im_residual,
        "S": res.S,
        "y_max": res.y_max,
        "nodes": res.nodes,
    }


def _blank_row(task, axis_value, cfg):
    return {"task": task, "axis_value": axis_value, "pol": _pol_label(cfg),
            "energy_per_length": "", "unit": cfg.units, "quad_error": "",
            "im_residual": "", "S": cfg.S, "y_max": "", "nodes": ""}


def _log_result(label, res):
    log.info("%s: E=%.12g err=%.3g nodes=%d y_max=%.4g im=%.2g", label,
             res.energy_per_length, res.quadrature_error, res.nodes, res.y_max, res.im_residual)


def _exit_code(exc):
    for cls, code in EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return 1


def _run_rows(cfg, fit):
    """Compute the CSV rows of a geometry task; returns (rows, exit code)."""
    kwargs = cfg.energy_kwargs()
    status = 0
    rows = []
    if cfg.task == "single":
        res = casimir_energy(cfg.geometry().pair(cfg.a), **kwargs)
        _log_result("single", res)
        rows.append(_energy_row("single", "", cfg, res))
    elif cfg.task == "sweep":
        spec = SweepSpec(cfg.geometry(), cfg.sweep_axis, cfg.sweep_values, cfg.baseline)
        points = sweep(spec, workers=cfg.workers, **kwargs)
        for pt in points:
            if pt.ok:
                _log_result(f"{cfg.sweep_axis}={pt.value:g}", pt.result)
                rows.append(_energy_row("sweep", pt.value, cfg, pt.result))
            else:
                log.error("%s=%g failed: %s", cfg.sweep_axis, pt.value, pt.error)
                rows.append(_blank_row("sweep", pt.value, cfg))
                status = EXIT_PARTIAL
        if cfg.baseline is not None:
            for pt in points:
                if pt.ok:
                    rows.append(_energy_row("sweep_delta", pt.value, cfg, pt.result, pt.delta))
        if fit:
            if cfg.sweep_axis != "phi0" or cfg.kind != "corrugated":
                raise ConfigError("--fit needs a phi0 sweep of a corrugated geometry",
                                  "sweep.axis")
            good = [pt for pt in points if pt.ok]
            amp, resid = fit_amplitude([p.value for p in good],
                                       [p.result.energy_per_length for p in good],
                                       cfg.params["nu"])
            log.info("fit: A=%.10g residual=%.3g", amp, resid)
            rows.append({"task": "fit", "axis_value": "", "pol": _pol_label(cfg),
                         "energy_per_length": to_units(amp, cfg.units, cfg.a),
                         "unit": cfg.units, "quad_error": resid, "im_residual": "",
                         "S": cfg.S, "y_max": "", "nodes": len(good)})
    elif cfg.task == "torque":
        unit = "per_a" if cfg.units == "per_a2" else "per_4pi_a"
        factor = cfg.a if cfg.units == "per_a2" else 4.0 * math.pi * cfg.a
        for phi in cfg.torque_phi0:
            tq = torque(cfg.geometry(), phi, step=cfg.torque_step, **kwargs)
            log.info("torque phi0=%g: %.12g", phi, tq)
            rows.append({"task": "torque", "axis_value": phi, "pol": _pol_label(cfg),
                         "energy_per_length": tq * factor, "unit": unit, "quad_error": "",
                         "im_residual": "", "S": cfg.S, "y_max": "", "nodes": ""})
    return rows, status


def _cell(value):
    if isinstance(value, (float, np.floating)):
        # + 0.0 turns a negative zero into 0
        return format(float(value) + 0.0, ".17g")
    return value


def write_csv(rows, columns, stream):
    writer = csv.DictWriter(stream, fieldnames=columns, quoting=csv.QUOTE_MINIMAL)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k, "")) for k in columns})


def oracle_rows(name="table1"):
    if name != "table1":
        raise ConfigError(f"unknown oracle {name!r}", "oracle")
    return [{"task": "oracle_table1", "nu": nu, "alpha": alpha, "h": h,
             "amplitude": amp, "unit": "per_a2"} for nu, alpha, h, amp in table1(TABLE1_CASES)]


def run(cfg: RunConfig, out=None, fit=False, deterministic_sum=None):
    """Execute a configuration and write its CSV.

    Parameters
    ----------
    cfg : RunConfig
    out : str, file-like or None
        Destination; defaults to ``cfg.csv_path`` and then standard output.
    fit : bool
        Append a ``cos(nu phi0)`` amplitude fit row to a ``phi0`` sweep.
    deterministic_sum : bool, optional
        Overrides ``numerics.deterministic_sum``.

    Returns
    -------
    int
        Exit code, 0 on success.
    """
    if deterministic_sum is not None:
        cfg.deterministic_sum = bool(deterministic_sum)
    try:
        if cfg.task == "oracle":
            rows, columns, status = oracle_rows(cfg.oracle), ORACLE_COLUMNS, 0
        else:
            (rows, status), columns = _run_rows(cfg, fit), CSV_COLUMNS
    except (CasimirError, ValueError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return _exit_code(exc) if isinstance(exc, CasimirError) else 1
    _emit(rows, columns, out if out is not None else cfg.csv_path)
    return status


def _emit(rows, columns, out):
    if out is None:
        write_csv(rows, columns, sys.stdout)
    elif isinstance(out, io.IOBase) or hasattr(out, "write"):
        write_csv(rows, columns, out)
    else:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, columns, fh)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="casimir",
        description="Casimir energy between nested perfectly conducting cylinders.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a key=value configuration file")
    p_run.add_argument("config", help="configuration file")
    p_run.add_argument("--out", help="CSV output path (default: output.csv or stdout)")
    p_run.add_argument("--fit", action="store_true",
                       help="append an A cos(nu phi0) fit row to a phi0 sweep")
    p_run.add_argument("--deterministic-sum", action="store_true",
                       help="order-independent summation of quadrature panels")
    p_or = sub.add_parser("oracle", help="regenerate a reference table")
    p_or.add_argument("name", choices=ORACLES)
    p_or.add_argument("--out", help="CSV output path (default: stdout)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.command == "oracle":
        return run(RunConfig(task="oracle", oracle=args.name), out=args.out)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        log.error("cannot read %s: %s", args.config, exc)
        return EXIT_CODES[ConfigError]
    except ConfigError as exc:
        log.error("ConfigError: %s", exc)
        return EXIT_CODES[ConfigError]
    return run(cfg, out=args.out, fit=args.fit,
               deterministic_sum=True if args.deterministic_sum else None)


if __name__ == "__main__":
    sys.exit(main())
