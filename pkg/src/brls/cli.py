"""
Command-line front end.

Every run is described by an INI file (see ``DEFAULTS`` for the schema); any
key can be overridden with ``--set section.key=value`` and the most common
ones have dedicated flags.  Physical quantities carry their unit in the key
name.  Each invocation writes its CSV outputs plus ``manifest.json`` into the
output directory.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import platform
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bath import (QuadratureError, SpectralDensity, effective_density_table,
                   effective_sd_curve, surrogate_structured_density)
from .dynamics import (HBAR_EV_FS, StiffnessError, basis_density, check_density, evolve,
                       eigenstate_density, fs_to_internal, write_trajectory)
from .nheig import NearDefectiveError, decompose, write_diagnostics
from .nonmarkov import default_pairs, nm_measure, write_nm
from .operators import (BathCoupling, InvalidModelError, JumpOperator, SystemModel,
                        build_nh, tavis_cummings)
from .oracle import DimensionError, ExactPropagator, discretize, exact_evolve, write_bath
from .redfield import (FCache, assemble_generator, br_tensor, brls_tensor, eigen_couplings,
                       secular_rates)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

METHODS = ("brls", "br", "exact", "nh-only")

DEFAULTS = {
    "model": {
        "kind": "tavis-cummings",
        "n_emitters": "1",
        "omega_c_ev": "2.0",
        "omega_e_ev": "2.0",
        "g_ec_ev": "0.1",
        "gamma_c_ev": "0.1",
        "gamma_e_ev": "0.0001",
        "jump": "decay",
        "excitation_cap": "1",
        # kind = matrix
        "hamiltonian_file": "",
        "coupling_files": "",
        "jump_files": "",
        "jump_rates_ev": "",
    },
    "bath": {
        "kind": "lorentzian",
        "g_b_ev": "0.03",
        "omega_b_ev": "0.2",
        "kappa_ev": "0.005",
        "peaks": "",
        "surrogate_scale": "1.0",
        "table_path": "",
        "temperature_ev": "0.0",
    },
    "run": {
        "method": "brls",
        "initial": "up",
        "t_max_fs": "200",
        "samples": "400",
        "rtol": "1e-8",
        "atol": "1e-12",
        "jeff_width_ev": "",
    },
    "exact": {
        "window_lo_ev": "0.05",
        "window_hi_ev": "0.35",
        "n_modes": "200",
        "phonon_cap": "1",
        "max_dim": "4000",
    },
    "sweep": {
        "parameter": "model.g_ec_ev",
        "start": "0.025",
        "stop": "0.175",
        "steps": "31",
    },
    "jeff": {
        "gamma_pairs_ev": "",
        "omega_min_ev": "0.0",
        "omega_max_ev": "0.4",
        "samples": "2000",
    },
    "nm": {
        "gamma_c_ev": "0.001, 0.005, 0.02, 0.1",
        "dynamics": "exact",
        "n_random": "32",
        "horizon_fs": "500",
        "samples": "2001",
    },
}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


# -- configuration ----------------------------------------------------------

def load_config(path=None, overrides=()) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    cfg.read_dict(DEFAULTS)
    if path is not None:
        if not Path(path).is_file():
            raise ConfigError(f"--config: file not found: {path}")
        try:
            cfg.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"--config: {exc}") from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set: expected section.key=value, got {item!r}")
        key, value = item.split("=", 1)
        section, name = key.strip().split(".", 1)
        if section not in cfg:
            raise ConfigError(f"{section}: unknown section")
        cfg[section][name.strip()] = value.strip()
    for section in cfg.sections():
        known = DEFAULTS.get(section)
        if known is None:
            raise ConfigError(f"{section}: unknown section")
        for name in cfg[section]:
            if name not in known:
                raise ConfigError(f"{section}.{name}: unknown key")
    return cfg


def _get(cfg, field, kind=float, positive=False, nonneg=False):
    section, name = field.split(".")
    raw = cfg[section][name].strip()
    try:
        val = kind(raw)
    except ValueError:
        raise ConfigError(f"{field}: cannot parse {raw!r} as {kind.__name__}") from None
    if kind in (float, int) and not np.isfinite(val):
        raise ConfigError(f"{field}: must be finite")
    if positive and val <= 0:
        raise ConfigError(f"{field}: must be > 0, got {val}")
    if nonneg and val < 0:
        raise ConfigError(f"{field}: must be >= 0, got {val}")
    return val


def _floats(cfg, field):
    section, name = field.split(".")
    raw = cfg[section][name].strip()
    if not raw:
        return []
    try:
        return [float(x) for x in raw.split(",")]
    except ValueError:
        raise ConfigError(f"{field}: expected a comma-separated list of numbers") from None


def _matrix(path, field):
    if not Path(path).is_file():
        raise ConfigError(f"{field}: file not found: {path}")
    try:
        return np.atleast_2d(np.loadtxt(path, dtype=complex))
    except ValueError as exc:
        raise ConfigError(f"{field}: {exc}") from exc


def build_bath(cfg) -> SpectralDensity:
    kind = cfg["bath"]["kind"].strip()
    T = _get(cfg, "bath.temperature_ev", nonneg=True)
    if kind == "lorentzian":
        return SpectralDensity.lorentzian(_get(cfg, "bath.g_b_ev", nonneg=True),
                                          _get(cfg, "bath.omega_b_ev", positive=True),
                                          _get(cfg, "bath.kappa_ev", positive=True), T)
    if kind == "composite":
        peaks = []
        for item in cfg["bath"]["peaks"].split(","):
            parts = item.strip().split(":")
            if len(parts) != 3:
                raise ConfigError("bath.peaks: expected g:omega:kappa triples")
            try:
                peaks.append(tuple(float(p) for p in parts))
            except ValueError:
                raise ConfigError(f"bath.peaks: cannot parse {item!r}") from None
        try:
            return SpectralDensity.composite(peaks, T)
        except ValueError as exc:
            raise ConfigError(f"bath.peaks: {exc}") from exc
    if kind == "surrogate":
        return surrogate_structured_density(_get(cfg, "bath.surrogate_scale", nonneg=True), T)
    if kind == "tabulated":
        path = cfg["bath"]["table_path"].strip()
        if not path or not Path(path).is_file():
            raise ConfigError(f"bath.table_path: file not found: {path!r}")
        try:
            return SpectralDensity.from_file(path, T)
        except ValueError as exc:
            raise ConfigError(f"bath.table_path: {exc}") from exc
    if kind == "zero":
        return SpectralDensity.zero()
    raise ConfigError(f"bath.kind: unknown kind {kind!r}")


def build_model(cfg, sd: SpectralDensity | None = None) -> SystemModel:
    sd = build_bath(cfg) if sd is None else sd
    kind = cfg["model"]["kind"].strip()
    try:
        if kind == "tavis-cummings":
            jump = cfg["model"]["jump"].strip()
            if jump not in ("decay", "dephasing"):
                raise ConfigError(f"model.jump: expected decay or dephasing, got {jump!r}")
            return tavis_cummings(
                _get(cfg, "model.n_emitters", int, positive=True),
                _get(cfg, "model.omega_c_ev"), _get(cfg, "model.omega_e_ev"),
                _get(cfg, "model.g_ec_ev", nonneg=True),
                _get(cfg, "model.gamma_c_ev", nonneg=True),
                _get(cfg, "model.gamma_e_ev", nonneg=True),
                sd=sd, jump=jump,
                excitation_cap=_get(cfg, "model.excitation_cap", int, positive=True))
        if kind == "matrix":
            H = _matrix(cfg["model"]["hamiltonian_file"].strip(), "model.hamiltonian_file")
            files = [f.strip() for f in cfg["model"]["coupling_files"].split(",") if f.strip()]
            couplings = [BathCoupling(_matrix(f, "model.coupling_files"), sd) for f in files]
            jfiles = [f.strip() for f in cfg["model"]["jump_files"].split(",") if f.strip()]
            rates = _floats(cfg, "model.jump_rates_ev")
            if len(rates) != len(jfiles):
                raise ConfigError("model.jump_rates_ev: need one rate per jump file")
            jumps = [JumpOperator(_matrix(f, "model.jump_files"), r)
                     for f, r in zip(jfiles, rates)]
            return SystemModel(H, jumps, couplings, info={"kind": "matrix"})
    except InvalidModelError as exc:
        raise ConfigError(f"model: {exc}") from exc
    raise ConfigError(f"model.kind: unknown kind {kind!r}")


def config_dict(cfg) -> dict:
    return {s: dict(cfg[s]) for s in cfg.sections()}


# -- helpers ----------------------------------------------------------------

def state_labels(eig) -> list[str]:
    """G, LP, DS..., UP for a ground + single-excitation manifold."""
    d = eig.dim
    labels = ["G", "LP"] + ["DS"] * max(d - 3, 0) + ["UP"]
    return labels[:d]


def initial_state(spec: str, eig, dim: int) -> np.ndarray:
    spec = spec.strip().lower()
    if spec == "up":
        return eigenstate_density(eig, dim - 1)
    if spec == "lp":
        return eigenstate_density(eig, 1 if dim > 1 else 0)
    kind, _, arg = spec.partition(":")
    if kind in ("eigen", "basis"):
        try:
            k = int(arg)
        except ValueError:
            raise ConfigError(f"run.initial: bad index in {spec!r}") from None
        if not 0 <= k < dim:
            raise ConfigError(f"run.initial: index {k} out of range 0..{dim - 1}")
        return eigenstate_density(eig, k) if kind == "eigen" else basis_density(dim, k)
    if kind == "file":
        rho = _matrix(arg, "run.initial")
        try:
            return check_density(rho)
        except ValueError as exc:
            raise ConfigError(f"run.initial: {exc}") from exc
    raise ConfigError(f"run.initial: expected up, lp, eigen:K, basis:K or file:PATH, got {spec!r}")


def time_grid(cfg):
    t_max = _get(cfg, "run.t_max_fs", positive=True)
    n = _get(cfg, "run.samples", int)
    if n < 2:
        raise ConfigError("run.samples: need at least 2 samples")
    return fs_to_internal(np.linspace(0.0, t_max, n))


def model_operators(model):
    """(names, ops): cavity number, total emitter excitation and sum_j sigma_j^+ a."""
    space = model.space
    if space is None or model.info.get("kind") != "tavis-cummings":
        return [], []
    a = space.lower(0)
    n_exc = sum(space.number(j) for j in range(1, len(space.modes)))
    sp_a = sum(space.raise_(j) @ a for j in range(1, len(space.modes)))
    return ["n_cav", "n_exc", "sigma_plus_a"], [space.number(0), n_exc, sp_a]


def _check_method(cfg):
    method = cfg["run"]["method"].strip()
    if method not in METHODS:
        raise ConfigError(f"run.method: expected one of {', '.join(METHODS)}, got {method!r}")
    if method == "exact":
        lo = _get(cfg, "exact.window_lo_ev", nonneg=True)
        hi = _get(cfg, "exact.window_hi_ev", positive=True)
        if hi <= lo:
            raise ConfigError("exact.window_hi_ev: must exceed exact.window_lo_ev")
        if _get(cfg, "exact.n_modes", int) < 2:
            raise ConfigError("exact.n_modes: need at least 2 modes")
        if _get(cfg, "exact.phonon_cap", int) < 1:
            raise ConfigError("exact.phonon_cap: must be >= 1")
    if cfg["run"]["jeff_width_ev"].strip() and method != "br":
        raise ConfigError("run.jeff_width_ev: only meaningful with run.method = br")
    return method


def _bath_for_exact(cfg, sd):
    return discretize(sd, (_get(cfg, "exact.window_lo_ev"), _get(cfg, "exact.window_hi_ev")),
                      _get(cfg, "exact.n_modes", int))


def propagate(cfg, model=None):
    """Run the configured method; returns the trajectory."""
    method = _check_method(cfg)
    sd = build_bath(cfg)
    model = build_model(cfg, sd) if model is None else model
    grid = time_grid(cfg)
    eig = decompose(build_nh(model))
    rho0 = initial_state(cfg["run"]["initial"], eig, model.dim)
    rtol = _get(cfg, "run.rtol", positive=True)
    atol = _get(cfg, "run.atol", positive=True)
    if method == "exact":
        return exact_evolve(model, _bath_for_exact(cfg, sd), rho0, grid,
                            phonon_cap=_get(cfg, "exact.phonon_cap", int),
                            max_dim=_get(cfg, "exact.max_dim", int), rtol=rtol, atol=atol)
    if method == "nh-only":
        tensor = None
    elif method == "brls":
        tensor = brls_tensor(eig, eigen_couplings(eig, model))
    else:
        width = cfg["run"]["jeff_width_ev"].strip()
        override = None
        if width:
            override = effective_density_table(sd, _get(cfg, "run.jeff_width_ev", nonneg=True))
        tensor = br_tensor(eig, eigen_couplings(eig, model, sd=override))
    return evolve(assemble_generator(eig, tensor, model.jumps), rho0, grid, rtol=rtol, atol=atol)


# -- subcommands --------------------------------------------------------------

def cmd_eig(cfg, out, args, outputs):
    model = build_model(cfg)
    eig = decompose(build_nh(model))
    path = out / "eigensystem.csv"
    write_diagnostics(eig, path)
    outputs.append(path.name)
    for label, lam in zip(state_labels(eig), eig.eigenvalues):
        print(f"{label:>3}  {lam.real:+.10f} {lam.imag:+.10f}i eV")
    print(f"condition number {eig.condition:.3e}")


def cmd_evolve(cfg, out, args, outputs):
    sd = build_bath(cfg)
    model = build_model(cfg, sd)
    traj = propagate(cfg, model)
    names, ops = model_operators(model)
    write_trajectory(traj, out / "trajectory.csv", ops, names)
    write_diagnostics(traj.eig, out / "eigensystem.csv")
    outputs += ["trajectory.csv", "eigensystem.csv"]
    drift = np.abs(traj.trace - 1).max()
    print(f"{cfg['run']['method']}: {traj.times.size} samples, max trace drift {drift:.2e}")


def cmd_exact(cfg, out, args, outputs):
    cfg["run"]["method"] = "exact"
    _check_method(cfg)
    sd = build_bath(cfg)
    model = build_model(cfg, sd)
    bath = _bath_for_exact(cfg, sd)
    write_bath(bath, out / "bath.csv")
    traj = propagate(cfg, model)
    names, ops = model_operators(model)
    write_trajectory(traj, out / "trajectory.csv", ops, names)
    outputs += ["bath.csv", "trajectory.csv"]
    extra = traj.extra or {}
    print(f"exact: joint dimension {extra.get('joint_dim')}, path {extra.get('path')}, "
          f"recurrence {bath.recurrence_time * HBAR_EV_FS:.0f} fs")


def _sweep_point(payload):
    k, cfg_dict, out = payload
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.read_dict(cfg_dict)
    traj = propagate(cfg)
    path = Path(out) / f"point_{k:03d}.csv"
    write_trajectory(traj, path)
    return path.name


def cmd_sweep(cfg, out, args, outputs):
    field = cfg["sweep"]["parameter"].strip()
    if "." not in field:
        raise ConfigError(f"sweep.parameter: expected section.key, got {field!r}")
    section, name = field.split(".", 1)
    if section not in ("model", "bath") or name not in DEFAULTS[section]:
        raise ConfigError(f"sweep.parameter: {field!r} is not a model or bath key")
    start = _get(cfg, "sweep.start")
    stop = _get(cfg, "sweep.stop")
    steps = _get(cfg, "sweep.steps", int)
    if steps < 1:
        raise ConfigError("sweep.steps: must be >= 1")
    values = np.linspace(start, stop, steps)
    _check_method(cfg)
    payloads = []
    for k, v in enumerate(values):
        point = config_dict(cfg)
        point[section][name] = repr(float(v))
        payloads.append((k, point, str(out)))
    # validate one point up front so configuration errors surface before fan-out
    probe = configparser.ConfigParser(interpolation=None)
    probe.read_dict(payloads[0][1])
    build_model(probe)
    workers = args.workers or os.cpu_count() or 1
    if workers > 1 and steps > 1:
        with ProcessPoolExecutor(max_workers=min(workers, steps)) as pool:
            names = list(pool.map(_sweep_point, payloads))
    else:
        names = [_sweep_point(p) for p in payloads]
    outputs += names
    # stacked map, merged after all points are written
    rows = []
    header = None
    for v, name_k in zip(values, names):
        data = np.genfromtxt(out / name_k, delimiter=",", names=True)
        cols = [c for c in data.dtype.names if c.startswith("P_")]
        if header is None:
            header = [name, "t_fs"] + cols
        for r in data:
            rows.append([v, r["t_fs"]] + [r[c] for c in cols])
    with open(out / "map.csv", "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(f"{x:.15g}" for x in r) + "\n")
    outputs.append("map.csv")
    print(f"sweep over {field}: {steps} points -> map.csv")


def cmd_jeff(cfg, out, args, outputs):
    sd = build_bath(cfg)
    pairs = []
    raw = cfg["jeff"]["gamma_pairs_ev"].strip()
    if raw:
        for item in raw.split(","):
            parts = item.strip().split(":")
            if len(parts) != 2:
                raise ConfigError("jeff.gamma_pairs_ev: expected gamma_i:gamma_f pairs")
            try:
                pairs.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise ConfigError(f"jeff.gamma_pairs_ev: cannot parse {item!r}") from None
    else:
        gc = _get(cfg, "model.gamma_c_ev", nonneg=True)
        ge = _get(cfg, "model.gamma_e_ev", nonneg=True)
        gp = 0.5 * (gc + ge)
        pairs = [(gp, gp), (gp, ge)]
    if any(g < 0 for p in pairs for g in p):
        raise ConfigError("jeff.gamma_pairs_ev: rates must be >= 0")
    lo = _get(cfg, "jeff.omega_min_ev")
    hi = _get(cfg, "jeff.omega_max_ev")
    n = _get(cfg, "jeff.samples", int)
    if hi <= lo or n < 2:
        raise ConfigError("jeff.omega_max_ev: need omega_max > omega_min and samples >= 2")
    w = np.linspace(lo, hi, n)
    J0 = sd(w)
    for k, (gi, gf) in enumerate(pairs, start=1):
        Je = effective_sd_curve(sd, w, gi + gf)
        path = out / f"jeff_{k}.csv"
        with open(path, "w") as fh:
            fh.write(f"# gamma_i_ev={gi!r} gamma_f_ev={gf!r}\n")
            fh.write("omega_ev,J0_ev,Jeff_ev\n")
            for row in zip(w, J0, Je):
                fh.write(",".join(f"{x:.15g}" for x in row) + "\n")
        outputs.append(path.name)
        tv0 = np.abs(np.diff(J0)).sum()
        tv1 = np.abs(np.diff(Je)).sum()
        print(f"J_eff {k}: widths ({gi:g}, {gf:g}) eV, total variation {tv1:.4g} vs {tv0:.4g}")


def cmd_rates(cfg, out, args, outputs):
    model = build_model(cfg)
    eig = decompose(build_nh(model))
    K = secular_rates(eig, eigen_couplings(eig, model), cache=FCache())
    labels = state_labels(eig)
    with open(out / "rates.csv", "w") as fh:
        fh.write("i,f,label_i,label_f,omega_i_ev,omega_f_ev,gamma_i_ev,gamma_f_ev,K_ev,K_per_fs\n")
        for i in range(eig.dim):
            for f in range(eig.dim):
                if i == f:
                    continue
                fh.write(f"{i},{f},{labels[i]},{labels[f]},{eig.energies[i]:.12g},"
                         f"{eig.energies[f]:.12g},{eig.widths[i]:.12g},{eig.widths[f]:.12g},"
                         f"{K[i, f]:.15g},{K[i, f] / HBAR_EV_FS:.15g}\n")
    outputs.append("rates.csv")
    d = eig.dim
    up, lp = d - 1, 1
    ds = [k for k, lab in enumerate(labels) if lab == "DS"]
    summary = [("UP->LP", K[up, lp])]
    if ds:
        summary.insert(0, ("UP->DS", K[up, ds].sum()))
        summary.insert(1, ("DS->LP", K[ds, lp].mean()))
    with open(out / "rates_summary.csv", "w") as fh:
        fh.write("transition,K_ev,K_per_fs\n")
        for name, k in summary:
            fh.write(f"{name},{k:.15g},{k / HBAR_EV_FS:.15g}\n")
            print(f"K[{name}] = {k:.6g} eV")
    outputs.append("rates_summary.csv")


def cmd_nm(cfg, out, args, outputs):
    gammas = _floats(cfg, "nm.gamma_c_ev")
    if not gammas or any(g <= 0 for g in gammas):
        raise ConfigError("nm.gamma_c_ev: need a nonempty list of positive rates")
    dyn = cfg["nm"]["dynamics"].strip()
    if dyn not in ("exact", "brls"):
        raise ConfigError(f"nm.dynamics: expected exact or brls, got {dyn!r}")
    horizon = _get(cfg, "nm.horizon_fs", positive=True)
    n = _get(cfg, "nm.samples", int)
    if n < 400:
        raise ConfigError("nm.samples: the measure needs at least 400 samples")
    n_random = _get(cfg, "nm.n_random", int, nonneg=True)
    grid = fs_to_internal(np.linspace(0.0, horizon, n))
    sd = build_bath(cfg)
    rows = []
    for k, gc in enumerate(gammas, start=1):
        cfg["model"]["gamma_c_ev"] = repr(gc)
        model = build_model(cfg, sd)
        if dyn == "exact":
            prop = ExactPropagator(model, _bath_for_exact(cfg, sd), grid,
                                   phonon_cap=_get(cfg, "exact.phonon_cap", int),
                                   max_dim=_get(cfg, "exact.max_dim", int))
            dynamics = prop.reduced
        else:
            eig = decompose(build_nh(model))
            gen = assemble_generator(eig, brls_tensor(eig, eigen_couplings(eig, model)),
                                     model.jumps)
            dynamics = lambda rho0, gen=gen: evolve(gen, rho0, grid)  # noqa: E731
        pairs = default_pairs(model.space, n_random, args.seed)
        full = nm_measure(dynamics, pairs, grid, workers=args.workers or 1)
        t_min = 1.0 / gc
        restricted = nm_measure(dynamics, pairs, grid, t_min=t_min, workers=args.workers or 1)
        write_nm(full, out / f"nm_{k}.csv")
        outputs.append(f"nm_{k}.csv")
        rows.append((gc, full.value, restricted.value, t_min * HBAR_EV_FS, full.best_pair))
        print(f"gamma_c = {gc:g} eV: NM = {full.value:.6g}, restricted NM = {restricted.value:.3g}")
    with open(out / "nm.csv", "w") as fh:
        fh.write("gamma_c_ev,nm,nm_restricted,t_min_fs,best_pair\n")
        for gc, v, r, tm, best in rows:
            fh.write(f"{gc:.12g},{v:.15g},{r:.15g},{tm:.10g},{best}\n")
    outputs.append("nm.csv")


COMMANDS = {
    "eig": cmd_eig,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "jeff": cmd_jeff,
    "rates": cmd_rates,
    "nm": cmd_nm,
    "exact": cmd_exact,
}

# flag -> config field
OVERRIDES = {
    "n_emitters": "model.n_emitters",
    "g_ec": "model.g_ec_ev",
    "gamma_c": None,  # model.gamma_c_ev, or nm.gamma_c_ev for the nm subcommand
    "gamma_e": "model.gamma_e_ev",
    "jump": "model.jump",
    "bath": "bath.kind",
    "method": "run.method",
    "initial": "run.initial",
    "t_max_fs": "run.t_max_fs",
    "samples": "run.samples",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brls", description="Loss-broadened Bloch-Redfield dynamics and exact benchmarks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--out", default="brls_out", help="output directory")
    common.add_argument("--workers", type=int, default=None, help="parallel workers")
    common.add_argument("--seed", type=int, default=0, help="seed for random state pairs")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override any configuration key")
    common.add_argument("--n-emitters", dest="n_emitters")
    common.add_argument("--g-ec", dest="g_ec", help="emitter-cavity coupling (eV)")
    common.add_argument("--gamma-c", dest="gamma_c",
                        help="cavity loss (eV); comma-separated list for nm")
    common.add_argument("--gamma-e", dest="gamma_e", help="emitter loss (eV)")
    common.add_argument("--jump", choices=("decay", "dephasing"))
    common.add_argument("--bath", choices=("lorentzian", "composite", "surrogate",
                                           "tabulated", "zero"))
    common.add_argument("--method", choices=METHODS)
    common.add_argument("--initial")
    common.add_argument("--t-max-fs", dest="t_max_fs")
    common.add_argument("--samples")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "eig": "NH eigenvalues and diagnostics",
        "evolve": "propagate one configuration",
        "sweep": "parameter sweep with per-point files and a stacked map",
        "jeff": "effective spectral densities",
        "rates": "secular transfer rate table",
        "nm": "trace-distance non-Markovianity versus cavity loss",
        "exact": "discretized-bath reference dynamics",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _overrides(args) -> list[str]:
    sets = list(args.set)
    for attr, field in OVERRIDES.items():
        val = getattr(args, attr, None)
        if val is None:
            continue
        if attr == "gamma_c":
            field = "nm.gamma_c_ev" if args.command == "nm" else "model.gamma_c_ev"
        sets.append(f"{field}={val}")
    return sets


def _versions():
    return {"brls": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    manifest = {"command": args.command, "argv": list(sys.argv[1:] if argv is None else argv),
                "versions": _versions(), "seed": args.seed, "outputs": []}
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        cfg = load_config(args.config, _overrides(args))
        manifest["config"] = config_dict(cfg)
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            COMMANDS[args.command](cfg, out, args, manifest["outputs"])
        manifest["status"] = "ok"
    except ConfigError as exc:
        code = EXIT_CONFIG
        manifest["status"] = "config-error"
        manifest["error"] = str(exc)
        print(f"configuration error: {exc}", file=sys.stderr)
    except (StiffnessError, NearDefectiveError, QuadratureError, DimensionError,
            np.linalg.LinAlgError, FloatingPointError) as exc:
        code = EXIT_NUMERIC
        manifest["status"] = "numeric-error"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
    manifest["wall_time_s"] = round(time.perf_counter() - t0, 3)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
    except OSError as exc:
        print(f"could not write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
