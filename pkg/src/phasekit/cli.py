"""``phasekit`` command-line entry point.

Configuration is layered: built-in defaults, then the file named by
``PHASEKIT_CONFIG``, then ``--config``, then dotted flags such as
``--quadrature.gh_order 96``. Every output file starts with the resolved
configuration and the package version, and floats are written with 17
significant digits, so identical inputs give byte-identical files.

Exit codes: 0 success, 1 numerical or verification failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basis import GaussianPacket, HermiteGaussian, load_state, phi, phi_tilde, state_to_dict
from .kernel import CapExceeded, TailTooHeavy, chi_closed, chi_closed_arrays
from .operators import GridTooSmall, ZeroField
from .quadrature import Adaptive, GaussHermite, NonConvergence
from .scales import PhaseIndex, ScaleParam
from .transform import WindowSensitive, phase_field, project_spectrum, norm_sum
from .verify import DEFAULT_TOLERANCES, run_checks

__all__ = ["ConfigError", "DEFAULTS", "resolve_config", "main"]

ENV_VAR = "PHASEKIT_CONFIG"

DEFAULTS = {
    "hbar": 1.0,
    "a": 1.0,
    "workers": 1,
    "quadrature": {"method": "auto", "gh_order": 64, "rel_tol": 1e-10, "abs_tol": 1e-12, "max_refinements": 16},
    "grid": {"h_X": None, "h_P": None, "extent_X": 6.0, "extent_P": 6.0},
    "truncation": {"N": 40, "tail_tol": 1e-8},
    "state": {"file": None, "preset": "packet", "n": 0, "X": 0.0, "P": 0.0, "width": None},
    "base": {"X": 0.0, "P": 0.0},
    "density": {"n": 0, "h_X": None, "h_P": None, "extent_X": 6.0, "extent_P": 6.0},
    "kernel": {"sweep": "n", "n_max": 8, "n": 0, "n2": 0, "X2": 0.0, "P2": 0.0, "a2": None, "points": 41},
    "basis": {"n_max": 4, "points": 201, "extent": 6.0},
    "verify": {"seed": 20240917, "draws": 50, "tol": dict(DEFAULT_TOLERANCES)},
    "debug": {"eigenvalue_multiplier": 1.0},
    "output": {"report": "verify_report.json", "spectrum": "spectrum.json", "csv": None},
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (exit code 2)."""


# ---------------------------------------------------------------------------
# Configuration


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


NULLABLE_PATHS = ("state.file", "output.csv")


def _coerce(key: str, value, default):
    if value is None:
        if default is None:
            return None
        raise ConfigError(f"{key} cannot be null")
    if default is None:
        # nullable keys: paths take strings, everything else a number
        if key in NULLABLE_PATHS:
            default = ""
        else:
            default = 0.0
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, str):
        if isinstance(value, str):
            return value
    raise ConfigError(f"{key}: expected {type(default).__name__}, got {value!r}")


def _merge(base: dict, layer: dict, where: str, prefix: str = ""):
    for k, v in layer.items():
        key = f"{prefix}{k}"
        if k not in base:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where}: {key} must be an object")
            _merge(base[k], v, where, key + ".")
        else:
            base[k] = _coerce(key, v, DEFAULT_FLAT[key])


def _set_dotted(cfg: dict, key: str, value):
    parts = key.split(".")
    node = cfg
    for p in parts[:-1]:
        node = node[p]
    node[parts[-1]] = _coerce(key, value, DEFAULT_FLAT[key])


def _read_json(path: str, where: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{where}: config file {path!r} not found") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{where}: cannot read {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be an object")
    return data


def _validate(cfg: dict):
    if not cfg["a"] > 0:
        raise ConfigError("a must be positive")
    if not cfg["hbar"] > 0:
        raise ConfigError("hbar must be positive")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if cfg["truncation"]["N"] < 0:
        raise ConfigError("truncation.N must be >= 0")
    if cfg["quadrature"]["method"] not in ("auto", "gauss_hermite", "adaptive"):
        raise ConfigError("quadrature.method must be auto, gauss_hermite or adaptive")
    if cfg["state"]["preset"] not in ("packet", "basis"):
        raise ConfigError("state.preset must be 'packet' or 'basis'")
    if cfg["kernel"]["sweep"] not in ("n", "XP"):
        raise ConfigError("kernel.sweep must be 'n' or 'XP'")
    for key, v in _flatten(cfg).items():
        if key.endswith(("tol", "tolerance")) or ".tol." in key:
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigError(f"{key} must be positive")
        if key.split(".")[-1] in ("h_X", "h_P", "width", "a2") and v is not None and not v > 0:
            raise ConfigError(f"{key} must be positive")
    for key in ("density.n", "kernel.n", "kernel.n2", "kernel.n_max", "basis.n_max", "state.n"):
        sec, name = key.split(".")
        if cfg[sec][name] < 0:
            raise ConfigError(f"{key} must be >= 0")
    for key in ("kernel.points", "basis.points"):
        sec, name = key.split(".")
        if cfg[sec][name] < 2:
            raise ConfigError(f"{key} must be >= 2")


DEFAULT_FLAT = _flatten(DEFAULTS)


def resolve_config(config_path: str | None = None, overrides: dict | None = None, env=None) -> dict:
    """Defaults, then ``$PHASEKIT_CONFIG``, then ``config_path``, then dotted overrides."""
    env = os.environ if env is None else env
    cfg = copy.deepcopy(DEFAULTS)
    if env.get(ENV_VAR):
        _merge(cfg, _read_json(env[ENV_VAR], ENV_VAR), ENV_VAR)
    if config_path is not None:
        _merge(cfg, _read_json(config_path, "--config"), "--config")
    for key, value in (overrides or {}).items():
        if key not in DEFAULT_FLAT:
            raise ConfigError(f"unknown option --{key}")
        _set_dotted(cfg, key, value)
    _validate(cfg)
    return cfg


def _parse_flag_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


# ---------------------------------------------------------------------------
# Output


def _fmt(v) -> str:
    return format(float(v), ".17g")


# Execution-only settings; they cannot change any number, so they stay out of
# the echoed config and outputs remain byte-identical across worker counts.
EXECUTION_KEYS = ("workers",)


def _echo(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in EXECUTION_KEYS}


def _config_json(cfg: dict) -> str:
    return json.dumps(_echo(cfg), sort_keys=True, separators=(",", ":"))


def _write_csv(path: str, command: str, cfg: dict, columns, rows, footer=()):
    lines = [
        f"# phasekit {__version__}",
        f"# command: {command}",
        f"# config: {_config_json(cfg)}",
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    for k, v in footer:
        lines.append(f"# {k}: {_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: str, command: str, cfg: dict, payload: dict):
    payload = dict(payload)
    payload["meta"] = {"version": __version__, "command": command, "config": _echo(cfg)}
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _csv_path(cfg: dict, command: str) -> str:
    return cfg["output"]["csv"] or f"{command}.csv"


# ---------------------------------------------------------------------------
# Commands


def _scale(cfg) -> ScaleParam:
    return ScaleParam(cfg["a"], cfg["hbar"])


def _state(cfg):
    st = cfg["state"]
    if st["file"]:
        try:
            return load_state(st["file"], hbar=cfg["hbar"])
        except FileNotFoundError:
            raise ConfigError(f"state file {st['file']!r} not found") from None
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse state file {st['file']!r}: {exc}") from None
    width = st["width"] if st["width"] is not None else cfg["a"]
    if st["preset"] == "basis":
        return HermiteGaussian(PhaseIndex(st["n"], st["X"], st["P"], ScaleParam(width, cfg["hbar"])))
    return GaussianPacket(st["X"], width, st["P"], cfg["hbar"])


def _projection_spec(cfg, state):
    """Explicit rule for ``quadrature.method`` other than ``auto``.

    The integrand is the basis function at the base point times the state, so
    the Gauss-Hermite rule is matched to the product of the two envelopes and
    the adaptive domain covers both.
    """
    q = cfg["quadrature"]
    if q["method"] == "auto":
        return None
    a, X0 = cfg["a"], cfg["base"]["X"]
    xc, xw, _, _ = state.envelope()
    if q["method"] == "gauss_hermite":
        s2 = a * a + xw * xw
        return GaussHermite(q["gh_order"], (xw * xw * X0 + a * a * xc) / s2, 2.0 * a * xw / math.sqrt(s2))
    lo = min(X0 - 12.0 * a, xc - 12.0 * xw)
    hi = max(X0 + 12.0 * a, xc + 12.0 * xw)
    return Adaptive(lo, hi, abs_tol=q["abs_tol"], rel_tol=q["rel_tol"], max_refinements=q["max_refinements"])


def cmd_verify(cfg: dict) -> int:
    grid = cfg["grid"]
    report = run_checks(
        _scale(cfg),
        tol=cfg["verify"]["tol"],
        seed=cfg["verify"]["seed"],
        draws=cfg["verify"]["draws"],
        lattice=grid,
        eigenvalue_multiplier=cfg["debug"]["eigenvalue_multiplier"],
        workers=cfg["workers"],
    )
    _write_json(cfg["output"]["report"], "verify", cfg, report.to_dict())
    for c in report.checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"{mark} {c.name}: measured {c.measured:.3e} (tolerance {c.tolerance:.1e})")
    n_pass = sum(c.passed for c in report.checks)
    print(f"{n_pass}/{len(report.checks)} checks passed; report written to {cfg['output']['report']}")
    return 0 if report.passed else 1


def cmd_project(cfg: dict) -> int:
    state = _state(cfg)
    scale = _scale(cfg)
    sp = project_spectrum(
        state, cfg["base"]["X"], cfg["base"]["P"], scale, N=cfg["truncation"]["N"],
        spec=_projection_spec(cfg, state),
    )
    payload = sp.to_dict()
    payload["state"] = state_to_dict(state) if not cfg["state"]["file"] else {"file": cfg["state"]["file"]}
    _write_json(cfg["output"]["spectrum"], "project", cfg, payload)
    rows = [(str(n), c.real, c.imag, abs(c) ** 2) for n, c in enumerate(sp.amplitudes)]
    total = norm_sum(sp)
    _write_csv(_csv_path(cfg, "project"), "project", cfg, ("n", "re", "im", "abs2"), rows,
               footer=[("sum_abs2", total), ("tail_bound", sp.tail_bound)])
    print(f"sum |Psi^n|^2 = {total:.17g} over n = 0..{sp.N}")
    return 0


def _density_axes(cfg, state):
    scale = _scale(cfg)
    d = cfg["density"]
    xc, _, pc, _ = state.envelope()
    h_X = d["h_X"] if d["h_X"] is not None else scale.a / 10.0
    h_P = d["h_P"] if d["h_P"] is not None else scale.b / 10.0
    nX = int(round(d["extent_X"] * scale.a / h_X))
    nP = int(round(d["extent_P"] * scale.b / h_P))
    if nX < 1 or nP < 1:
        raise ConfigError("density lattice needs at least 3 points per axis")
    return xc + h_X * np.arange(-nX, nX + 1), pc + h_P * np.arange(-nP, nP + 1), h_X, h_P


def cmd_density(cfg: dict) -> int:
    state = _state(cfg)
    scale = _scale(cfg)
    X, P, h_X, h_P = _density_axes(cfg, state)
    n = cfg["density"]["n"]
    psi = phase_field(state, n, X, P, scale, workers=cfg["workers"])
    dens = np.abs(psi) ** 2 / (2.0 * math.pi * scale.hbar)
    mass = float(np.sum(dens)) * h_X * h_P
    rows = ((X[i], P[j], dens[i, j]) for i in range(X.size) for j in range(P.size))
    _write_csv(_csv_path(cfg, "density"), "density", cfg, ("X", "P", "density"), rows,
               footer=[("mass", mass), ("cell_area", h_X * h_P)])
    print(f"lattice mass = {mass:.17g}")
    return 0


def cmd_kernel(cfg: dict) -> int:
    k = cfg["kernel"]
    scale = _scale(cfg)
    scale2 = ScaleParam(k["a2"] if k["a2"] is not None else cfg["a"], cfg["hbar"])
    X0, P0 = cfg["base"]["X"], cfg["base"]["P"]
    if k["sweep"] == "n":
        columns = ("n", "n2", "re", "im", "abs")
        rows = []
        for n in range(k["n_max"] + 1):
            for n2 in range(k["n_max"] + 1):
                c = chi_closed(PhaseIndex(n, X0, P0, scale), PhaseIndex(n2, k["X2"], k["P2"], scale2))
                rows.append((str(n), str(n2), c.real, c.imag, abs(c)))
    else:
        ext_X, ext_P = cfg["grid"]["extent_X"], cfg["grid"]["extent_P"]
        X = X0 + np.linspace(-ext_X * scale.a, ext_X * scale.a, k["points"])
        P = P0 + np.linspace(-ext_P * scale.b, ext_P * scale.b, k["points"])
        vals = chi_closed_arrays(k["n"], X[:, None], P[None, :], scale, k["n2"], k["X2"], k["P2"], scale2)
        columns = ("X", "P", "re", "im", "abs")
        rows = [
            (X[i], P[j], vals[i, j].real, vals[i, j].imag, abs(vals[i, j]))
            for i in range(X.size)
            for j in range(P.size)
        ]
    _write_csv(_csv_path(cfg, "kernel"), "kernel", cfg, columns, rows)
    print(f"{len(rows)} kernel rows written")
    return 0


def cmd_basis(cfg: dict) -> int:
    bcfg = cfg["basis"]
    scale = _scale(cfg)
    X0, P0 = cfg["base"]["X"], cfg["base"]["P"]
    u = np.linspace(-bcfg["extent"], bcfg["extent"], bcfg["points"])
    x, p = X0 + scale.a * u, P0 + scale.b * u
    rows = []
    for n in range(bcfg["n_max"] + 1):
        idx = PhaseIndex(n, X0, P0, scale)
        f, g = phi(idx, x), phi_tilde(idx, p)
        rows.extend((str(n), x[i], f[i].real, f[i].imag, p[i], g[i].real, g[i].imag) for i in range(u.size))
    _write_csv(_csv_path(cfg, "basis"), "basis", cfg,
               ("n", "x", "phi_re", "phi_im", "p", "phi_tilde_re", "phi_tilde_im"), rows)
    print(f"{len(rows)} basis rows written")
    return 0


COMMANDS = {
    "verify": (cmd_verify, "run the invariant suite and write a JSON report"),
    "project": (cmd_project, "project a state onto the basis at one (X, P) and write its spectrum"),
    "density": (cmd_density, "write the phase-space density |Psi^n|^2 / 2 pi hbar on a lattice"),
    "kernel": (cmd_kernel, "tabulate the overlap kernel over (n, n') or over (X, P)"),
    "basis": (cmd_basis, "sample the basis functions in coordinate and momentum space"),
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    opts = common.add_argument_group("configuration overrides (JSON literals or bare strings)")
    for key, default in DEFAULT_FLAT.items():
        opts.add_argument(f"--{key}", dest=f"cfg:{key}", metavar="VALUE", default=argparse.SUPPRESS,
                          help=f"default: {json.dumps(default)}")
    parser = argparse.ArgumentParser(prog="phasekit", description="Harmonic phase-space toolkit.")
    parser.add_argument("--version", action="version", version=f"phasekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    overrides = {k[4:]: _parse_flag_value(v) for k, v in vars(args).items() if k.startswith("cfg:")}
    try:
        cfg = resolve_config(args.config, overrides)
        return COMMANDS[args.command][0](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergence, WindowSensitive, TailTooHeavy, CapExceeded, GridTooSmall, ZeroField) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
