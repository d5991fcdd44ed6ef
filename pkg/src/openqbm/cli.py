"""Command-line entry point.

Experiments are described by flat ``section.key = value`` text files::

    # comment
    bath.gamma = 0.1
    bath.temperature = 1.0
    grid.n = 128

Every key can be overridden on the command line, either as ``--set key=value``
or directly as ``--grid.n 64``. Exit codes: 0 success, 2 configuration error,
3 numerical failure, 4 path-sum budget exceeded.
"""
import argparse
import csv
import math
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .cl_evolve import (DensityMatrixGrid, GridSpec, Potential, evolve, make_cat,
                        make_gaussian)
from .errors import BudgetExceededError, ConfigError, NumericalError, OpenQBMError
from .influence import sliced_propagator_oracle
from .kernels import (Continuum, Discrete, kernel_set, mass_shift, ohmic_highT_kernel_set,
                      ohmic_highT_reference)
from .observables import observe_rho, observe_wigner, write_series
from .wigner import CONVENTIONS, WignerGrid, default_n_pi, evolve_wigner, wigner_transform

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_BUDGET = 0, 2, 3, 4

#: Every accepted key with its type and default (``None`` = required or unset).
SCHEMA = {
    "bath.kind": (str, "ohmic"),
    "bath.gamma": (float, 0.1),
    "bath.k": (float, 1.0),
    "bath.lambda": (float, 10.0),
    "bath.omega_tilde": (float, 1.0),
    "bath.oscillators": (str, ""),
    "bath.temperature": (float, None),
    "bath.beta": (float, None),
    "potential.mu2": (float, -1.0),
    "potential.lambda": (float, 0.0),
    "potential.renormalize": (bool, False),
    "grid.phi_min": (float, -5.0),
    "grid.phi_max": (float, 5.0),
    "grid.n": (int, 128),
    "grid.n_pi": (str, "auto"),
    "grid.pi_window": (float, None),
    "state.kind": (str, "gaussian"),
    "state.center": (float, 0.0),
    "state.momentum": (float, 0.0),
    "state.width": (float, 0.70710678118654757),
    "state.separation": (float, 4.0),
    "evolution.picture": (str, "rho"),
    "evolution.t_final": (float, 1.0),
    "evolution.dt": (str, "auto"),
    "evolution.samples": (int, 11),
    "evolution.jolt": (bool, False),
    "evolution.c_gamma_convention": (str, "transform-consistent"),
    "evolution.c_stab": (float, 0.2),
    "kernels.s_max": (float, 1.0),
    "kernels.points": (int, 101),
    "kernels.rtol": (float, 1e-10),
    "oracle.slices": (int, 2),
    "oracle.t": (float, 0.2),
    "oracle.refine": (int, 40),
    "oracle.lambda": (float, 200.0),
    "oracle.budget": (float, 2e8),
    "oracle.kinetic": (str, "projected"),
    "oracle.dt": (float, 1e-3),
    "output.series": (str, "observables.csv"),
    "output.snapshot_every": (int, 0),
    "output.snapshot_dir": (str, "snapshots"),
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(key, raw, where):
    kind = SCHEMA[key][0]
    text = raw.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError("expected true/false")
        if kind is float and text.lower() in ("none", ""):
            return None
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value {raw!r} for {key} ({exc})") from None


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines into a dict, with line-numbered diagnostics."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}"
        if "=" not in body:
            raise ConfigError(f"{where}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        values[key] = _convert(key, raw, where)
    return values


@dataclass
class ExperimentConfig:
    """Validated experiment description (all keys of :data:`SCHEMA`)."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @classmethod
    def build(cls, file_values=None, overrides=None):
        values = {k: d for k, (_, d) in SCHEMA.items()}
        values.update(file_values or {})
        values.update(overrides or {})
        cfg = cls(values)
        cfg.validate()
        return cfg

    @property
    def temperature(self):
        t, b = self["bath.temperature"], self["bath.beta"]
        if t is not None and b is not None:
            raise ConfigError("give either bath.temperature or bath.beta, not both")
        if t is None and b is None:
            raise ConfigError("bath.temperature (or bath.beta) is required")
        return t if t is not None else 1.0 / b

    def validate(self):
        v = self.values
        T = self.temperature
        if not T > 0:
            raise ConfigError("bath.temperature must be > 0")
        if v["bath.gamma"] < 0:
            raise ConfigError("bath.gamma must be >= 0")
        if v["bath.kind"] not in ("ohmic", "continuum", "discrete"):
            raise ConfigError(f"bath.kind must be ohmic, continuum or discrete, "
                              f"got {v['bath.kind']!r}")
        if v["bath.lambda"] <= 0:
            raise ConfigError("bath.lambda must be > 0")
        if v["potential.lambda"] < 0:
            raise ConfigError("potential.lambda must be >= 0")
        if v["grid.n"] < 3 or not v["grid.phi_max"] > v["grid.phi_min"]:
            raise ConfigError("grid needs n >= 3 and phi_max > phi_min")
        self.n_pi  # parses grid.n_pi
        if v["state.kind"] not in ("gaussian", "cat"):
            raise ConfigError(f"state.kind must be gaussian or cat, got {v['state.kind']!r}")
        if not v["state.width"] > 0:
            raise ConfigError("state.width must be > 0")
        if v["evolution.picture"] not in ("rho", "wigner", "both"):
            raise ConfigError("evolution.picture must be rho, wigner or both")
        if v["evolution.c_gamma_convention"] not in CONVENTIONS:
            raise ConfigError(f"evolution.c_gamma_convention must be one of "
                              f"{sorted(CONVENTIONS)}")
        if not v["evolution.t_final"] > 0 or v["evolution.samples"] < 2:
            raise ConfigError("evolution needs t_final > 0 and samples >= 2")
        self.dt  # parses evolution.dt
        if v["kernels.points"] < 2 or not v["kernels.s_max"] > 0:
            raise ConfigError("kernels needs points >= 2 and s_max > 0")
        if not 1 <= v["oracle.slices"] <= 3 or v["oracle.refine"] < 1:
            raise ConfigError("oracle.slices must be 1..3 and oracle.refine >= 1")
        if v["output.snapshot_every"] < 0:
            raise ConfigError("output.snapshot_every must be >= 0")

    @property
    def n_pi(self):
        raw = str(self["grid.n_pi"]).strip().lower()
        if raw == "auto":
            return default_n_pi(self["grid.n"])
        try:
            n_pi = int(raw)
        except ValueError:
            raise ConfigError(f"grid.n_pi must be 'auto' or an odd integer, got {raw!r}") from None
        if n_pi % 2 == 0 or n_pi < default_n_pi(self["grid.n"]):
            raise ConfigError(f"grid.n_pi must be odd and >= {default_n_pi(self['grid.n'])}")
        return n_pi

    @property
    def dt(self):
        raw = str(self["evolution.dt"]).strip().lower()
        if raw == "auto":
            return None
        try:
            dt = float(raw)
        except ValueError:
            raise ConfigError(f"evolution.dt must be 'auto' or a number, got {raw!r}") from None
        if not dt > 0:
            raise ConfigError("evolution.dt must be > 0")
        return dt

    # builders
    def grid(self):
        return GridSpec(self["grid.phi_min"], self["grid.phi_max"], self["grid.n"])

    def spectral_density(self):
        kind = self["bath.kind"]
        if kind == "discrete":
            pairs = [p for p in self["bath.oscillators"].replace(";", ",").split(",") if p.strip()]
            if not pairs:
                raise ConfigError("bath.oscillators must list 'mass:omega' pairs")
            try:
                osc = [tuple(float(x) for x in p.split(":")) for p in pairs]
            except ValueError:
                raise ConfigError("bath.oscillators entries must look like 'mass:omega'") from None
            if any(len(o) != 2 for o in osc):
                raise ConfigError("bath.oscillators entries must look like 'mass:omega'")
            return Discrete(tuple(osc))
        k = 1.0 if kind == "ohmic" else self["bath.k"]
        return Continuum(k=k, gamma=self["bath.gamma"], lambda_cut=self["bath.lambda"],
                         omega_tilde=self["bath.omega_tilde"])

    def potential(self):
        shift = 0.0
        if self["potential.renormalize"]:
            shift = mass_shift(self.spectral_density())
        return Potential(mu2=self["potential.mu2"], lambda4=self["potential.lambda"],
                         mass_shift=shift, renormalized=self["potential.renormalize"])

    def initial_state(self):
        g = self.grid()
        if self["state.kind"] == "cat":
            return make_cat(self["state.separation"], self["state.width"], g,
                            center=self["state.center"])
        return make_gaussian(self["state.center"], self["state.momentum"],
                             self["state.width"], g)

    def sample_times(self):
        return np.linspace(0.0, self["evolution.t_final"], self["evolution.samples"])


def load_config(path=None, overrides=None):
    file_values = {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        file_values = parse_config_text(text, source=str(path))
    parsed = {}
    for key, raw in (overrides or {}).items():
        if key not in SCHEMA:
            raise ConfigError(f"command line: unknown key {key!r}")
        parsed[key] = _convert(key, raw, "command line")
    return ExperimentConfig.build(file_values, parsed)


# snapshots ------------------------------------------------------------------

def write_snapshot(path, state):
    """``# rows cols dphi dpi t`` header, then row-major values."""
    if isinstance(state, WignerGrid):
        rows, cols = state.data.shape
        dpi = state.dpi
        lines = [" ".join(repr(float(x)) for x in row) for row in state.data]
    else:
        rows, cols = state.data.shape
        dpi = 0.0
        lines = [" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row)
                 for row in state.data]
    with open(path, "w") as fh:
        fh.write(f"# {rows} {cols} {state.dphi!r} {dpi!r} {float(state.t)!r}\n")
        fh.write("\n".join(lines))
        fh.write("\n")


def read_snapshot(path, phi_min):
    """Inverse of :func:`write_snapshot` (``phi_min`` is not stored)."""
    with open(path) as fh:
        header = fh.readline().lstrip("#").split()
        rows, cols = int(header[0]), int(header[1])
        dphi, dpi, t = (float(x) for x in header[2:5])
        body = [line.split() for line in fh if line.strip()]
    phi_max = phi_min + dphi * (rows - 1)
    if body and "," in body[0][0]:
        data = np.array([[complex(*map(float, z.split(","))) for z in row] for row in body])
        return DensityMatrixGrid(phi_min, phi_max, data, t)
    data = np.array(body, dtype=float).reshape(rows, cols)
    n_pi_full = int(round(math.pi / (dpi * dphi)))
    return WignerGrid(phi_min, phi_max, data, t, n_pi_full=max(n_pi_full, cols))


# subcommands ----------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def _snapshots(cfg, out, states, prefix):
    every = cfg["output.snapshot_every"]
    if not every:
        return
    d = os.path.join(out, cfg["output.snapshot_dir"])
    os.makedirs(d, exist_ok=True)
    for i, s in enumerate(states):
        if i % every == 0 or i == len(states) - 1:
            write_snapshot(os.path.join(d, f"{prefix}_{i:04d}.txt"), s)


def _run_rho(cfg):
    return evolve(cfg.initial_state(), cfg.potential(), cfg["bath.gamma"], cfg.temperature,
                  cfg["evolution.t_final"], cfg.dt, sample_times=cfg.sample_times(),
                  jolt=cfg["evolution.jolt"], c_stab=cfg["evolution.c_stab"])


def _run_wigner(cfg):
    w0 = wigner_transform(cfg.initial_state(), cfg.n_pi, cfg["grid.pi_window"])
    return evolve_wigner(w0, cfg.potential(), cfg["bath.gamma"], cfg.temperature,
                         cfg["evolution.t_final"], cfg["evolution.c_gamma_convention"],
                         cfg.dt, sample_times=cfg.sample_times(),
                         jolt=cfg["evolution.jolt"])


def cmd_kernels(cfg, out):
    sd = cfg.spectral_density()
    beta = 1.0 / cfg.temperature
    ks = kernel_set(sd, beta, cfg["kernels.rtol"])
    s = np.linspace(0.0, cfg["kernels.s_max"], cfg["kernels.points"])
    rows = [s, ks.nu(s), ks.eta(s), ks.etabar(s)]
    header = ["s", "nu", "eta", "etabar"]
    if cfg["bath.kind"] == "ohmic":
        rows.append(ohmic_highT_reference(cfg["bath.gamma"], cfg.temperature,
                                          cfg["bath.lambda"], s)[0])
        header.append("nu_highT")
    _write_csv(os.path.join(out, "kernels.csv"), header, np.column_stack(rows))
    return f"wrote {len(s)} kernel samples"


def cmd_evolve_rho(cfg, out):
    states = _run_rho(cfg)
    write_series(os.path.join(out, cfg["output.series"]), [observe_rho(s) for s in states])
    _snapshots(cfg, out, states, "rho")
    return f"evolved density matrix to t={states[-1].t:g}"


def cmd_evolve_wigner(cfg, out):
    states = _run_wigner(cfg)
    write_series(os.path.join(out, cfg["output.series"]), [observe_wigner(s) for s in states])
    _snapshots(cfg, out, states, "wigner")
    return f"evolved Wigner function to t={states[-1].t:g}"


def compare_pictures(cfg):
    """Evolve both pictures; return ``(t, divergence)`` rows where divergence is
    the relative L2 distance between the transformed density matrix and the
    transported Wigner function."""
    rhos = _run_rho(cfg)
    ws = _run_wigner(cfg)
    rows = []
    for r, w in zip(rhos, ws):
        ref = wigner_transform(r, cfg.n_pi).data
        rows.append((r.t, float(np.linalg.norm(ref - w.full().data) / np.linalg.norm(ref))))
    return rows, rhos, ws


def cmd_compare(cfg, out):
    rows, rhos, ws = compare_pictures(cfg)
    _write_csv(os.path.join(out, "divergence.csv"), ["t", "divergence"], rows)
    write_series(os.path.join(out, "rho_" + cfg["output.series"]),
                 [observe_rho(s) for s in rhos])
    write_series(os.path.join(out, "wigner_" + cfg["output.series"]),
                 [observe_wigner(s) for s in ws])
    return f"max divergence {max(d for _, d in rows):.3e}"


def cmd_oracle(cfg, out):
    rho0 = cfg.initial_state()
    pot = cfg.potential()
    gamma, T = cfg["bath.gamma"], cfg.temperature
    ks = ohmic_highT_kernel_set(gamma, T, cfg["oracle.lambda"])
    t = cfg["oracle.t"]
    orc = sliced_propagator_oracle(rho0, pot, ks, cfg["oracle.slices"], t,
                                   kinetic=cfg["oracle.kinetic"], refine=cfg["oracle.refine"],
                                   include_renorm=True, budget=cfg["oracle.budget"])
    ref = evolve(rho0, pot, gamma, T, t, dt=min(cfg["oracle.dt"], t))[-1]
    dist = float(np.linalg.norm(orc.data - ref.data) / np.linalg.norm(ref.data))
    write_snapshot(os.path.join(out, "oracle.txt"), orc)
    write_snapshot(os.path.join(out, "master.txt"), ref)
    _write_csv(os.path.join(out, "oracle.csv"), ["t", "relative_l2"], [(t, dist)])
    return f"oracle vs master equation: relative L2 distance {dist:.4e}"


COMMANDS = {
    "kernels": cmd_kernels,
    "evolve-rho": cmd_evolve_rho,
    "evolve-wigner": cmd_evolve_wigner,
    "compare": cmd_compare,
    "oracle": cmd_oracle,
}


def _split_overrides(extra):
    """Turn ``--a.b=v`` / ``--a.b v`` leftovers into a dict."""
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or "." not in tok:
            raise ConfigError(f"unrecognized argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for {tok}")
            i += 1
            val = extra[i]
        out[key] = val
        i += 1
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="openqbm",
        description="Quantum Brownian motion of a scalar field mode in a thermal bath.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")
    return parser


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            overrides[k.strip()] = v
        overrides.update(_split_overrides(extra))
        cfg = load_config(args.config, overrides)
        os.makedirs(args.out, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            msg = COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OpenQBMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(msg)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
