"""Command-line driver.

    simulate <subcommand> --config cfg.json [--seed N] [--out DIR]
                          [--workers N] [--no-cache]

Subcommands: spectrum, chi-curve, landscape, anticrossing, readout,
noise-readout, gates, noise-gates. Every run emits CSV files plus a
manifest.json into the output directory. Exit codes: 0 success, 2 config
error, 3 numerical failure, 4 I/O error.

Sweep cells and Monte Carlo draws fan out to a process pool when
--workers > 1; all reductions are index-ordered so outputs are
byte-identical for any worker count. The FLUXSIM_WORKERS environment
variable overrides the worker count (and nothing else).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import units
from .cache import cache_get, cache_put
from .config import RunConfig, config_from_dict, parse_config
from .coupled import (
    DEFAULT_TRANSITIONS,
    STATUS_OK,
    STATUS_RESONANT,
    build_chi_profile,
    compute_landscapes,
    dispersive_shift,
    fill_and_clamp,
    find_anticrossing,
    _cell_values,
)
from .errors import ConfigError, FluxsimError
from .gates import build_gate_space, optimize_pulse
from .noise import NoiseSpec, noisy_gate_error, noisy_readout_snr
from .qubit import FluxBias, Spectrum, fluxonium_spectrum
from .readout import ChiProfile, run_ramped_readout, run_static_readout
from .output import write_csv, write_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


# ---------------------------------------------------------------------------
# Worker tasks (module-level so they pickle)

def _chi_point_task(args):
    cfg, f = args
    try:
        return dispersive_shift(cfg.params, FluxBias(f), cfg.resonator,
                                cfg.mode, cfg.dims)
    except FluxsimError:
        return math.nan


def _cell_task(args):
    cfg, e_j_ghz, f = args
    params = replace(cfg.params, e_j=units.ghz(e_j_ghz))
    return _cell_values(params, FluxBias(f), cfg.resonator, cfg.mode,
                        cfg.dims, DEFAULT_TRANSITIONS)


def _pool_map(workers):
    """An ordered mapper: the builtin for one worker, a process pool above."""
    if workers <= 1:
        return map, None
    pool = ProcessPoolExecutor(max_workers=workers)
    return pool.map, pool


# ---------------------------------------------------------------------------
# Cached evaluators

def _device_key(cfg: RunConfig):
    return {
        "device": cfg.raw["device"],
        "chi_clamp_mhz": cfg.raw["readout"]["chi_clamp_mhz"],
    }


def _chi_points(cfg: RunConfig, grid, cache_dir):
    """Dispersive shift at each grid point, via cache then pool; NaN marks
    resonant points. Returns (values array, hit count)."""
    values = np.full(len(grid), math.nan)
    pending = []
    hits = 0
    for idx, f in enumerate(grid):
        if cache_dir is not None:
            key = {"op": "chi", "f": float(f), **_device_key(cfg)}
            cached = cache_get(cache_dir, key)
            if cached is not None:
                values[idx] = math.nan if cached["chi"] is None else cached["chi"]
                hits += 1
                continue
        pending.append((idx, float(f)))
    if pending:
        mapper, pool = _pool_map(cfg.workers)
        try:
            results = list(mapper(_chi_point_task,
                                  [(cfg, f) for _, f in pending]))
        finally:
            if pool is not None:
                pool.shutdown()
        for (idx, f), chi in zip(pending, results):
            values[idx] = chi
            if cache_dir is not None:
                key = {"op": "chi", "f": f, **_device_key(cfg)}
                cache_put(cache_dir, key,
                          {"chi": None if math.isnan(chi) else float(chi)})
    return values, hits


def _profile_from_cache(cfg: RunConfig, cache_dir) -> ChiProfile:
    """Chi-vs-flux profile over the configured chi_curve window."""
    cc = cfg.raw["chi_curve"]
    n = int(round((cc["f_max"] - cc["f_min"]) / cc["step"]))
    grid = cc["f_min"] + cc["step"] * np.arange(n + 1)
    values, _ = _chi_points(cfg, grid, cache_dir)
    return ChiProfile(grid, fill_and_clamp(values, cfg.chi_clamp), cfg.chi_clamp)


# ---------------------------------------------------------------------------
# Subcommands

def cmd_spectrum(cfg: RunConfig, out_dir, cache_dir):
    key = {"op": "spectrum", "f": cfg.flux, "device": cfg.raw["device"]}
    cached = cache_get(cache_dir, key) if cache_dir is not None else None
    if cached is not None:
        spec = Spectrum.from_json(cached)
    else:
        spec = fluxonium_spectrum(cfg.params, FluxBias(cfg.flux), cfg.dims.dim)
        if cache_dir is not None:
            cache_put(cache_dir, key, spec.to_json())
    rows = [(k, units.to_ghz(w)) for k, w in enumerate(spec.eigenvalues)]
    path = write_csv(out_dir / "spectrum.csv", ["level", "energy_ghz"], rows)
    return [(path, "spectrum")]


def cmd_chi_curve(cfg: RunConfig, out_dir, cache_dir):
    cc = cfg.raw["chi_curve"]
    n = int(round((cc["f_max"] - cc["f_min"]) / cc["step"]))
    grid = cc["f_min"] + cc["step"] * np.arange(n + 1)
    values, _ = _chi_points(cfg, grid, cache_dir)
    status = [STATUS_OK if math.isfinite(v) else STATUS_RESONANT for v in values]
    emitted = fill_and_clamp(values, cfg.chi_clamp)
    rows = [(float(f), units.to_mhz(v), s)
            for f, v, s in zip(grid, emitted, status)]
    path = write_csv(out_dir / "chi_curve.csv", ["f", "chi_mhz", "status"], rows)
    return [(path, "chi-curve")]


def cmd_landscape(cfg: RunConfig, out_dir, cache_dir):
    sweep = cfg.raw["sweep"]
    e_j_axis = np.linspace(sweep["e_j_min_ghz"], sweep["e_j_max_ghz"],
                           sweep["n_e_j"])
    f_axis = np.linspace(sweep["f_min"], sweep["f_max"], sweep["n_f"])
    cells = {}
    pending = []
    for e_j in e_j_axis:
        for f in f_axis:
            coords = (float(e_j), float(f))
            if cache_dir is not None:
                key = {"op": "cell", "e_j_ghz": coords[0], "f": coords[1],
                       **_device_key(cfg)}
                cached = cache_get(cache_dir, key)
                if cached is not None:
                    cells[coords] = {
                        k: (math.nan if v is None else v, s)
                        for k, (v, s) in cached.items()}
                    continue
            pending.append(coords)
    if pending:
        mapper, pool = _pool_map(cfg.workers)
        try:
            results = list(mapper(_cell_task,
                                  [(cfg, e_j, f) for e_j, f in pending]))
        finally:
            if pool is not None:
                pool.shutdown()
        for coords, cell in zip(pending, results):
            cells[coords] = cell
            if cache_dir is not None:
                key = {"op": "cell", "e_j_ghz": coords[0], "f": coords[1],
                       **_device_key(cfg)}
                cache_put(cache_dir, key, {
                    k: (None if not math.isfinite(v) else float(v), s)
                    for k, (v, s) in cell.items()})

    def cell_fn(e_j, f):
        return cells[(float(e_j), float(f))]

    grids = compute_landscapes(e_j_axis, f_axis, cfg.params.e_c, cfg.params.e_l,
                               cfg.resonator, cfg.mode, cfg.dims,
                               cell_fn=cell_fn)
    files = []
    for kind, grid in grids.items():
        unit = "MHz" if kind == "chi" else "GHz"
        conv = units.to_mhz if kind == "chi" else units.to_ghz
        emitted = grid.emitted_values()
        rows = []
        for a, e_j in enumerate(grid.e_j_axis):
            for b, f in enumerate(grid.f_axis):
                rows.append((float(e_j), float(f), conv(emitted[a, b]),
                             unit, grid.status[a, b]))
        path = write_csv(out_dir / f"landscape_{kind}.csv",
                         ["e_j_ghz", "f", "value", "unit", "status"], rows)
        files.append((path, f"landscape-{kind}"))
    return files


def cmd_anticrossing(cfg: RunConfig, out_dir, cache_dir):
    ac = cfg.raw["anticrossing"]
    result = find_anticrossing(cfg.params, cfg.resonator, cfg.mode, cfg.dims,
                               transition=(ac["level_i"], ac["level_j"]),
                               window=(ac["window_lo"], ac["window_hi"]))
    rows = [(result.f_star, units.to_mhz(result.gap),
             units.to_mhz(result.g_ij), result.t_swap)]
    path = write_csv(out_dir / "anticrossing.csv",
                     ["f_star", "gap_mhz", "g_ij_mhz", "t_swap_ns"], rows)
    return [(path, "anticrossing")]


def _readout_rows(traj):
    rows = []
    for i, tau in enumerate(traj.times):
        rows.append((float(tau), float(traj.snr[i]), float(traj.error[i]),
                     float(traj.m_s_plus[i]), float(traj.m_s_minus[i]),
                     float(traj.alpha_out_plus[i].real),
                     float(traj.alpha_out_plus[i].imag),
                     float(traj.alpha_out_minus[i].real),
                     float(traj.alpha_out_minus[i].imag)))
    return rows


READOUT_HEADER = ["tau_ns", "snr", "error", "m_s_0", "m_s_1",
                  "re_alpha_out_0", "im_alpha_out_0",
                  "re_alpha_out_1", "im_alpha_out_1"]


def cmd_readout(cfg: RunConfig, out_dir, cache_dir):
    profile = _profile_from_cache(cfg, cache_dir)
    pulsed = run_ramped_readout(cfg.ramp, profile, cfg.readout)
    static = run_static_readout(profile.chi_at(cfg.ramp.f_start), cfg.readout)
    files = []
    for name, traj in (("readout_pulsed.csv", pulsed),
                       ("readout_static.csv", static)):
        path = write_csv(out_dir / name, READOUT_HEADER, _readout_rows(traj))
        files.append((path, "readout"))
    return files


NOISE_HEADER = ["axis_value", "mean", "stderr", "n_effective", "n_excluded",
                "scale", "seed"]


def _noise_rows(curve):
    return [(float(a), float(m), float(s), curve.n_effective,
             curve.n_excluded, curve.scale, curve.seed)
            for a, m, s in zip(curve.axis, curve.mean, curve.stderr)]


def cmd_noise_readout(cfg: RunConfig, out_dir, cache_dir):
    profile = _profile_from_cache(cfg, cache_dir)
    mapper, pool = _pool_map(cfg.workers)
    try:
        result = noisy_readout_snr(cfg.ramp, profile, cfg.readout, cfg.noise,
                                   map_fn=mapper)
    finally:
        if pool is not None:
            pool.shutdown()
    files = []
    for name, curve in (("noise_readout_snr.csv", result.snr),
                        ("noise_readout_error.csv", result.error)):
        path = write_csv(out_dir / name, NOISE_HEADER, _noise_rows(curve))
        files.append((path, "noise-readout"))
    return files


def _optimized_pulses(cfg: RunConfig):
    space = build_gate_space(cfg.params, FluxBias(cfg.flux), cfg.resonator,
                             cfg.mode, cfg.gate_dims)
    out = []
    for tau in cfg.gate_taus:
        pulse, result = optimize_pulse(space, tau, dt=cfg.gate_dt)
        out.append((pulse, result))
    return out


def cmd_gates(cfg: RunConfig, out_dir, cache_dir):
    rows = []
    for pulse, result in _optimized_pulses(cfg):
        rows.append((pulse.tau_g, pulse.eps_d, pulse.lam, result.fidelity,
                     result.error, result.leakage))
    path = write_csv(out_dir / "gates.csv",
                     ["tau_g_ns", "eps_d", "lambda", "fidelity", "error",
                      "leakage"], rows)
    return [(path, "gates")]


def cmd_noise_gates(cfg: RunConfig, out_dir, cache_dir):
    pulses = [pulse for pulse, _ in _optimized_pulses(cfg)]
    mapper, pool = _pool_map(cfg.workers)
    try:
        curve = noisy_gate_error(cfg.params, cfg.resonator, pulses, cfg.noise,
                                 base_flux=cfg.flux, mode=cfg.mode,
                                 dims=cfg.gate_dims, dt=cfg.gate_dt,
                                 map_fn=mapper)
    finally:
        if pool is not None:
            pool.shutdown()
    path = write_csv(out_dir / "noise_gates.csv", NOISE_HEADER,
                     _noise_rows(curve))
    return [(path, "noise-gates")]


SUBCOMMANDS = {
    "spectrum": cmd_spectrum,
    "chi-curve": cmd_chi_curve,
    "landscape": cmd_landscape,
    "anticrossing": cmd_anticrossing,
    "readout": cmd_readout,
    "noise-readout": cmd_noise_readout,
    "gates": cmd_gates,
    "noise-gates": cmd_noise_gates,
}


def run_subcommand(name, cfg: RunConfig, use_cache=True):
    """Execute one subcommand; returns the manifest path."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = out_dir / ".cache" if use_cache else None
    files = SUBCOMMANDS[name](cfg, out_dir, cache_dir)
    manifest = write_manifest(out_dir, files, cfg, cfg.seed)
    return manifest


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Fluxonium flux-pulse-assisted readout simulator.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override config seed (also the noise seed)")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker process count")
        p.add_argument("--no-cache", action="store_true",
                       help="bypass the result cache entirely")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    raw = json.loads(json.dumps(cfg.raw))
    if args.seed is not None:
        raw["seed"] = args.seed
        raw["noise"]["seed"] = args.seed
    if args.out is not None:
        raw["out_dir"] = args.out
    workers = os.environ.get("FLUXSIM_WORKERS")
    if workers is not None:
        try:
            raw["workers"] = int(workers)
        except ValueError as exc:
            raise ConfigError("invariant-violation",
                              f"FLUXSIM_WORKERS must be an integer: {exc}")
    if args.workers is not None:
        raw["workers"] = args.workers
    updated = config_from_dict(raw)
    # overrides are explicit, not defaults; keep the original provenance
    return replace(updated, defaults_used=cfg.defaults_used)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        cfg = _apply_overrides(cfg, args)
        run_subcommand(args.subcommand, cfg, use_cache=not args.no_cache)
        return EXIT_OK
    except ConfigError as exc:
        _emit_error(args, "config", type(exc).__name__,
                    f"[{exc.category}] {exc}")
        return EXIT_CONFIG
    except FluxsimError as exc:
        _emit_error(args, "numerical", type(exc).__name__, str(exc))
        return EXIT_NUMERICAL
    except OSError as exc:
        _emit_error(args, "io", type(exc).__name__, str(exc))
        return EXIT_IO


def _emit_error(args, category, kind, message):
    """Machine-readable error record on stderr, best-effort error.json."""
    record = {"error": {"category": category, "type": kind, "message": message}}
    print(json.dumps(record), file=sys.stderr)
    out = args.out
    if out:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "error.json").write_text(
                json.dumps(record, indent=2) + "\n", encoding="utf-8")
        except OSError:
            pass


if __name__ == "__main__":
    sys.exit(main())
