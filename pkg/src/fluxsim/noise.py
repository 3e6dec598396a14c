"""Quasi-static flux-noise Monte Carlo.

Each draw applies one constant reduced-flux offset delta = scale * x (x
standard normal) to the whole flux trajectory of a readout sequence, or to
the bias point of an already-optimized gate, and the per-draw curves are
averaged in draw-index order.

The PRNG is pinned: a Philox counter-based generator keyed per draw index
from the master seed, with an explicit Box-Muller transform, so the offset
sequences are bitwise reproducible across platforms and worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupled import DEFAULT_MODE, CoupledDims, CouplingMode, ResonatorParams
from .errors import DomainError
from .gates import GateResult, PulseParams, build_gate_space, evaluate_gate
from .gates import DEFAULT_GATE_DT
from .qubit import EnergyParams, FluxBias
from .readout import (ChiProfile, FluxRamp, ReadoutConfig, run_ramped_readout,
                      time_grid)


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian quasi-static flux-noise model: offset scale in reduced flux,
    draw count, and the 64-bit master seed."""

    scale: float
    n_draws: int = 50
    seed: int = 1234

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale >= 0.0):
            raise ValueError(f"scale must be finite and >= 0, got {self.scale}")
        if self.n_draws < 1:
            raise ValueError(f"n_draws must be >= 1, got {self.n_draws}")
        if not (0 <= self.seed < 1 << 64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def standard_normal_draw(seed, index):
    """One standard-normal variate from a Philox stream keyed by
    (seed, draw index), via Box-Muller on two uniforms.

    log1p(-u1) keeps precision for u1 near 0 and avoids log(0) since the
    generator draws u from [0, 1).
    """
    gen = np.random.Generator(np.random.Philox(key=(int(seed) << 64) + int(index)))
    u1, u2 = gen.random(2)
    return math.sqrt(-2.0 * math.log1p(-u1)) * math.cos(2.0 * math.pi * u2)


def sample_flux_offsets(spec: NoiseSpec) -> np.ndarray:
    """Reduced-flux offsets delta_k = scale * x_k, reproducible from the seed.

    Draw k depends only on (seed, k), so any subset of draws can be
    regenerated independently (e.g. on different workers).
    """
    return np.array([spec.scale * standard_normal_draw(spec.seed, k)
                     for k in range(spec.n_draws)])


@dataclass(frozen=True)
class McCurve:
    """Monte Carlo aggregate of per-draw curves on a common axis.

    mean is the draw-index-ordered average over included draws; stderr the
    pointwise standard error (ddof=1, zero for a single draw). Excluded
    draws are counted, never silently dropped: n_effective + n_excluded
    equals the requested draw count.
    """

    axis: np.ndarray
    draws: np.ndarray
    included: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_effective: int
    n_excluded: int
    scale: float
    seed: int

    def at_axis(self, value):
        """(mean, stderr) at the axis point closest to value."""
        i = int(np.argmin(np.abs(self.axis - value)))
        return float(self.mean[i]), float(self.stderr[i])


def aggregate_curves(axis, draws, included, scale, seed) -> McCurve:
    """Index-ordered reduction of per-draw curves into an McCurve.

    The mean is accumulated in a fixed loop over draw indices so the result
    is bitwise independent of how the draws were scheduled.
    """
    axis = np.asarray(axis, dtype=float)
    draws = np.asarray(draws, dtype=float)
    included = np.asarray(included, dtype=bool)
    n_eff = int(np.count_nonzero(included))
    if n_eff == 0:
        raise DomainError("every Monte Carlo draw was excluded; "
                          "widen the chi profile or reduce the noise scale")
    total = np.zeros_like(axis)
    for k in range(draws.shape[0]):
        if included[k]:
            total = total + draws[k]
    mean = total / n_eff
    if n_eff > 1:
        sq = np.zeros_like(axis)
        for k in range(draws.shape[0]):
            if included[k]:
                sq = sq + (draws[k] - mean) ** 2
        stderr = np.sqrt(sq / (n_eff - 1)) / math.sqrt(n_eff)
    else:
        stderr = np.zeros_like(axis)
    return McCurve(axis, draws, included, mean, stderr,
                   n_eff, int(included.size - n_eff), scale, seed)


@dataclass(frozen=True)
class NoisyReadoutResult:
    """SNR(tau) and assignment-error(tau) Monte Carlo aggregates."""

    snr: McCurve
    error: McCurve


def readout_draw(delta, ramp: FluxRamp, profile: ChiProfile, cfg: ReadoutConfig):
    """One noisy readout draw: the whole flux trajectory is shifted by delta
    and the drive amplitude is recalibrated to the shifted plateau chi (the
    drive calibration tracks the biased operating point, as a tune-up run
    under the same quasi-static offset would).

    Returns (snr_curve, error_curve, included); a draw whose shifted
    trajectory leaves the chi-profile domain is flagged as excluded.
    """
    try:
        traj = run_ramped_readout(ramp.shifted(delta), profile, cfg)
    except DomainError:
        zeros = np.zeros_like(time_grid(cfg.t_max, cfg.dt))
        return zeros, zeros, False
    return traj.snr, traj.error, True


def noisy_readout_snr(ramp: FluxRamp, profile: ChiProfile, cfg: ReadoutConfig,
                      spec: NoiseSpec, map_fn=map) -> NoisyReadoutResult:
    """Monte Carlo over flux offsets applied to flux-pulse-assisted readout.

    map_fn lets a caller substitute a pool mapper; the reduction is always
    draw-index ordered, so the aggregate is identical for any scheduler.
    """
    deltas = sample_flux_offsets(spec)
    results = list(map_fn(_readout_draw_task,
                          [(d, ramp, profile, cfg) for d in deltas]))
    snr_draws = np.array([r[0] for r in results])
    err_draws = np.array([r[1] for r in results])
    included = np.array([r[2] for r in results])
    axis = time_grid(cfg.t_max, cfg.dt)
    return NoisyReadoutResult(
        snr=aggregate_curves(axis, snr_draws, included, spec.scale, spec.seed),
        error=aggregate_curves(axis, err_draws, included, spec.scale, spec.seed),
    )


def _readout_draw_task(args):
    return readout_draw(*args)


def gate_draw(delta, params: EnergyParams, res: ResonatorParams,
              pulse: PulseParams, base_flux=0.5, mode: CouplingMode = DEFAULT_MODE,
              dims: CoupledDims = CoupledDims(kept=6, n_res=3),
              dt=DEFAULT_GATE_DT) -> GateResult:
    """Evaluate a fixed, pre-optimized pulse at the offset flux bias.

    The pulse (amplitude, DRAG weight, drive frequency) is frozen at its
    delta=0 optimum; only the static Hamiltonian moves with the offset.
    """
    space = build_gate_space(params, FluxBias(base_flux + delta), res, mode, dims)
    return evaluate_gate(space, pulse, dt)


def noisy_gate_error(params: EnergyParams, res: ResonatorParams,
                     pulses, spec: NoiseSpec, base_flux=0.5,
                     mode: CouplingMode = DEFAULT_MODE,
                     dims: CoupledDims = CoupledDims(kept=6, n_res=3),
                     dt=DEFAULT_GATE_DT, map_fn=map) -> McCurve:
    """Mean gate error versus gate time under quasi-static flux offsets.

    pulses is a sequence of PulseParams pre-optimized at delta=0, one per
    gate time; the axis of the returned curve is their tau_g values.
    """
    deltas = sample_flux_offsets(spec)
    tasks = [(d, params, res, tuple(pulses), base_flux, mode, dims, dt)
             for d in deltas]
    rows = list(map_fn(_gate_draw_task, tasks))
    draws = np.array(rows)
    included = np.ones(len(rows), dtype=bool)
    axis = np.array([p.tau_g for p in pulses])
    return aggregate_curves(axis, draws, included, spec.scale, spec.seed)


def _gate_draw_task(args):
    delta, params, res, pulses, base_flux, mode, dims, dt = args
    return [gate_draw(delta, params, res, p, base_flux, mode, dims, dt).error
            for p in pulses]
