"""Command-line front end.

    ermakov-lab <mode> --config FILE --out DIR [--snapshots] [--sweep key=v1,v2,...] [--dts v1,v2,...]

Modes: ``ode``, ``pde``, ``compare``, ``sweep``, ``converge``. Exit status is
0 on success, 2 for usage/configuration/IO problems and 3 when a run fails
numerically (width collapse or blow-up).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .core import (
    ConfigError,
    Constant,
    ErmakovLabError,
    GaussianState,
    GridSpec,
    LinearRamp,
    NumericalFailure,
    PhysicalParams,
    ScenarioConfig,
    Sinusoidal,
)
from .dynamics import integrate
from .gpe import GridError, SpatialGrid, run_and_compare, run_pde
from .invariant import drift_report
from .madelung import field_snapshot, residual_report
from .numerics import StencilError, fit_exponent

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3

DEFAULTS: Dict[str, str] = {
    "hbar": "1.0",
    "mass": "1.0",
    "coupling": "0.0",
    "omega.kind": "constant",
    "omega.w0": "1.0",
    "omega.rate": "0.0",
    "omega.eps": "0.0",
    "omega.bigomega": "1.0",
    "q0": "1.0",
    "qdot0": "0.0",
    "alpha0": "1.0",
    "alphadot0": "0.0",
    "t_end": "20.0",
    "dt": "0.001",
    "tol": "1e-10",
    "method": "rk4",
    "grid.n": "2048",
    "grid.length": "40.0",
}
KEYS = tuple(DEFAULTS)
OMEGA_KINDS = ("constant", "linear", "sinusoidal")
_POSITIVE = {"hbar", "mass", "alpha0", "t_end", "dt", "tol", "grid.length"}


class ConfigParseError(ConfigError):
    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        where = f"line {line}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


def _convert(key: str, raw: str, line: Optional[int]):
    if key == "omega.kind":
        if raw not in OMEGA_KINDS:
            raise ConfigParseError(f"omega.kind must be one of {OMEGA_KINDS}, got {raw!r}", line, key)
        return raw
    if key == "method":
        if raw not in ("rk4", "rkf45"):
            raise ConfigParseError(f"method must be rk4 or rkf45, got {raw!r}", line, key)
        return raw
    if key == "grid.n":
        try:
            n = int(raw)
        except ValueError:
            raise ConfigParseError(f"cannot parse {key}={raw!r} as an integer", line, key) from None
        if n < 256 or n & (n - 1):
            raise ConfigParseError(f"grid.n must be a power of two >= 256, got {n}", line, key)
        return n
    try:
        value = float(raw)
    except ValueError:
        raise ConfigParseError(f"cannot parse {key}={raw!r} as a number", line, key) from None
    if not np.isfinite(value):
        raise ConfigParseError(f"{key} must be finite, got {raw!r}", line, key)
    if key in _POSITIVE and not value > 0:
        raise ConfigParseError(f"invariant violated: {key} must be > 0, got {raw}", line, key)
    return value


def _read_pairs(text: str) -> Dict[str, Tuple[str, int]]:
    pairs: Dict[str, Tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected key=value, got {line!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigParseError(f"unknown key {key!r}", lineno, key)
        pairs[key] = (raw, lineno)
    return pairs


def config_from_values(values: Dict[str, object], lines: Optional[Dict[str, int]] = None) -> ScenarioConfig:
    lines = lines or {}
    kind = values["omega.kind"]
    if kind == "constant":
        omega = Constant(values["omega.w0"])
    elif kind == "linear":
        omega = LinearRamp(values["omega.w0"], values["omega.rate"])
    else:
        omega = Sinusoidal(values["omega.w0"], values["omega.eps"], values["omega.bigomega"])
    if values["dt"] > values["t_end"]:
        raise ConfigParseError(f"invariant violated: dt ({values['dt']}) must not exceed t_end "
                               f"({values['t_end']})", lines.get("dt"), "dt")
    params = PhysicalParams(values["hbar"], values["mass"], values["coupling"], omega)
    initial = GaussianState(0.0, values["q0"], values["qdot0"], values["alpha0"], values["alphadot0"])
    return ScenarioConfig(params, initial, values["t_end"], values["dt"], values["tol"],
                          GridSpec(values["grid.n"], values["grid.length"]), values["method"])


def parse_config(source) -> ScenarioConfig:
    """Parse a key=value scenario file (a path) or its text.

    Omitted keys take the values in :data:`DEFAULTS`. Errors raise
    :class:`ConfigParseError` carrying the offending line number and key.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "=" not in source and "\n" not in source):
        text = Path(source).read_text()
    else:
        text = source
    pairs = _read_pairs(text)
    values = {k: _convert(k, pairs[k][0] if k in pairs else v, pairs[k][1] if k in pairs else None)
              for k, v in DEFAULTS.items()}
    return config_from_values(values, {k: ln for k, (_, ln) in pairs.items()})


def config_values(config: ScenarioConfig) -> Dict[str, object]:
    p, s = config.params, config.initial
    om = p.omega
    grid = config.grid or GridSpec()
    return {
        "hbar": p.hbar, "mass": p.mass, "coupling": p.coupling,
        "omega.kind": om.kind, "omega.w0": om.w0,
        "omega.rate": getattr(om, "rate", 0.0), "omega.eps": getattr(om, "eps", 0.0),
        "omega.bigomega": getattr(om, "bigomega", 1.0),
        "q0": s.q, "qdot0": s.qdot, "alpha0": s.alpha, "alphadot0": s.alphadot,
        "t_end": config.t_end, "dt": config.dt, "tol": config.tol, "method": config.method,
        "grid.n": grid.n, "grid.length": grid.length,
    }


def format_config(config: ScenarioConfig) -> str:
    """Canonical text form; ``parse_config(format_config(c)) == c``."""
    out = []
    for key, value in config_values(config).items():
        out.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
    return "\n".join(out) + "\n"


def substitute(config: ScenarioConfig, key: str, raw: str) -> ScenarioConfig:
    if key not in DEFAULTS:
        raise ConfigParseError(f"unknown sweep key {key!r}", key=key)
    values = config_values(config)
    values[key] = _convert(key, raw, None)
    return config_from_values(values)


# --- run modes ---------------------------------------------------------------

MODES = ("ode", "pde", "compare", "sweep", "converge")


@dataclass(frozen=True)
class RunMode:
    kind: str
    sweep_key: Optional[str] = None
    sweep_values: Tuple[str, ...] = ()
    dts: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in MODES:
            raise ConfigParseError(f"unknown mode {self.kind!r}")
        if self.kind == "sweep":
            if self.sweep_key not in DEFAULTS:
                raise ConfigParseError(f"sweep parameter must be a config key, got {self.sweep_key!r}")
            if not self.sweep_values:
                raise ConfigParseError("sweep needs at least one value")
        if self.kind == "converge" and len(self.dts) < 2:
            raise ConfigParseError("converge needs at least two dt values (--dts)")


def _ode(config: ScenarioConfig, out: Path, suffix: str = ""):
    traj = integrate(config)
    traj.to_csv(out / f"trajectory{suffix}.csv")
    params = config.params
    x = SpatialGrid.from_spec(config.grid or GridSpec()).x
    field_snapshot(traj.state(len(traj) - 1), params, x).to_csv(out / f"fields{suffix}.csv")
    try:
        rep = drift_report(traj, params)
    except StencilError as exc:
        return traj, None, f"drift skipped ({exc})"
    rep.to_csv(out / f"drift{suffix}.csv")
    rep.write_summary(out / f"drift_summary{suffix}.txt")
    residual_report(traj, params, x).to_csv(out / f"residuals{suffix}.csv")
    return traj, rep, None


def _converge(config: ScenarioConfig, dts: Sequence[float], out: Path) -> float:
    dts = sorted(dts, reverse=True)
    ref = integrate(config.with_(dt=dts[-1] / 4.0, method="rk4"))
    y_ref = np.array([ref.q[-1], ref.qdot[-1], ref.alpha[-1], ref.alphadot[-1]])
    errors = []
    for dt in dts:
        tr = integrate(config.with_(dt=dt, method="rk4"))
        y = np.array([tr.q[-1], tr.qdot[-1], tr.alpha[-1], tr.alphadot[-1]])
        errors.append(float(np.max(np.abs(y - y_ref))))
    orders = [float("nan")] + [float(np.log(errors[i - 1] / errors[i]) / np.log(dts[i - 1] / dts[i]))
                               for i in range(1, len(dts))]
    np.savetxt(out / "convergence.csv", np.column_stack([dts, errors, orders]), delimiter=",",
               fmt="%.17g", header="dt,max_error,order", comments="")
    return fit_exponent(dts, errors)


def execute(mode: RunMode, config: ScenarioConfig, out_dir, snapshots: bool = False) -> int:
    """Run ``mode`` on ``config``, writing CSV files into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if mode.kind == "ode":
            _, rep, note = _ode(config, out)
            if rep is None:
                print(f"ode: {note}")
            else:
                print(f"ode: max|dI|={rep.max_abs_invariant_change:.3e} "
                      f"max_residual={rep.max_abs_residual:.3e}")
        elif mode.kind == "pde":
            run = run_pde(config, snapshots=snapshots)
            run.to_csv(out / "moments.csv")
            for tag, snap in zip(("initial", "final"), run.snapshots):
                snap.to_csv(out / f"snapshot_{tag}.csv")
            norm = run.column("norm")
            print(f"pde: samples={len(run.t)} max|norm-1|={np.max(np.abs(norm - 1)):.3e}")
        elif mode.kind == "compare":
            rep = run_and_compare(config, snapshots=snapshots)
            rep.to_csv(out / "comparison.csv")
            for tag, snap in zip(("initial", "final"), rep.pde.snapshots):
                snap.to_csv(out / f"snapshot_{tag}.csv")
            print(f"compare: max|dq|={rep.max_q_deviation:.3e} max|dsigma|={rep.max_sigma_deviation:.3e} "
                  f"max|dI_pde|={rep.max_I_pde_change:.3e} max|norm-1|={rep.max_norm_error:.3e}")
        elif mode.kind == "sweep":
            rows = []
            for raw in mode.sweep_values:
                child = substitute(config, mode.sweep_key, raw)
                _, rep, _ = _ode(child, out, f"_{mode.sweep_key}={raw}")
                rows.append((float(raw) if mode.sweep_key != "omega.kind" else float("nan"),
                             rep.max_abs_invariant_change if rep else float("nan"),
                             rep.max_abs_residual if rep else float("nan")))
            np.savetxt(out / "sweep.csv", np.array(rows), delimiter=",", fmt="%.17g",
                       header=f"{mode.sweep_key},max_abs_invariant_change,max_abs_residual", comments="")
            worst = max(r[1] for r in rows)
            print(f"sweep: {mode.sweep_key} x{len(rows)} max|dI|={worst:.3e}")
        elif mode.kind == "converge":
            order = _converge(config, mode.dts, out)
            print(f"converge: measured RK4 order={order:.3f}")
    except NumericalFailure as exc:
        print(f"numerical failure at t={exc.t:.10g}: {exc}")
        return EXIT_NUMERICAL
    except (ConfigError, GridError, StencilError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ermakov-lab",
                                 description="Reduced Ermakov dynamics and GP split-step oracle")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="key=value scenario file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--snapshots", action="store_true", help="also write wavefunction snapshots")
    ap.add_argument("--sweep", help="key=v1,v2,... for sweep mode")
    ap.add_argument("--dts", help="comma-separated time steps for converge mode")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = parse_config(Path(args.config))
        sweep_key, sweep_values, dts = None, (), ()
        if args.sweep:
            if "=" not in args.sweep:
                raise ConfigParseError("--sweep expects key=v1,v2,...")
            sweep_key, vals = args.sweep.split("=", 1)
            sweep_values = tuple(v.strip() for v in vals.split(",") if v.strip())
        if args.dts:
            try:
                dts = tuple(float(v) for v in args.dts.split(","))
            except ValueError:
                raise ConfigParseError(f"cannot parse --dts {args.dts!r}") from None
        mode = RunMode(args.mode, sweep_key, sweep_values, dts)
    except (ErmakovLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(mode, config, args.out, args.snapshots)


if __name__ == "__main__":
    sys.exit(main())
