"""Coupled fluxonium-resonator spectrum.

Two-stage truncation (full HO-basis fluxonium eigensolve, then the lowest
kept levels tensored with resonator Fock states), dressed-state labeling by
bare-state overlap, dispersive shift, transition detunings, flux/E_J
landscapes, anticrossing extraction, and chi-vs-flux profiles for the
readout dynamics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, units
from .errors import (
    InvalidDimensionError,
    NumericalFailureError,
    ResonanceRegionError,
)
from .qubit import (
    DEFAULT_DIM,
    EnergyParams,
    FluxBias,
    build_ho_operators,
    fluxonium_spectrum,
)
from .readout import ChiProfile
from .special import golden_section_minimize


@dataclass(frozen=True)
class ResonatorParams:
    """Readout resonator: frequency, linewidth, coupling (all angular, rad/ns)."""

    omega_r: float
    kappa: float
    g: float

    def __post_init__(self):
        if not self.omega_r > 0:
            raise ValueError(f"omega_r must be positive, got {self.omega_r}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")

    @classmethod
    def from_ghz(cls, omega_r_ghz, kappa_mhz, g_mhz):
        return cls(units.ghz(omega_r_ghz), units.mhz(kappa_mhz), units.mhz(g_mhz))


class CouplingMode(enum.Enum):
    """Qubit-resonator coupling operator.

    CHARGE: g * n_hat (x) (a + a^dag), so the stated g multiplies the charge
    matrix element <i|n|j> directly.
    LADDER_RWA: g * (a c^dag + a^dag c) with c the harmonic-basis lowering
    operator of the qubit (projected into the kept eigenbasis). This is the
    mode that calibrates to the published dispersive-shift values, so it is
    the default for all regression work; see the calibration test.
    """

    CHARGE = "charge"
    LADDER_RWA = "ladder-rwa"


DEFAULT_MODE = CouplingMode.LADDER_RWA


@dataclass(frozen=True)
class CoupledDims:
    """Truncations: full fluxonium HO dim, kept eigenlevels, resonator Fock states."""

    dim: int = DEFAULT_DIM
    kept: int = 8
    n_res: int = 8

    def __post_init__(self):
        if self.kept < 2 or self.n_res < 2:
            raise InvalidDimensionError(
                f"kept levels and resonator Fock states must both be >= 2, "
                f"got kept={self.kept}, n_res={self.n_res}"
            )
        if self.kept > self.dim:
            raise InvalidDimensionError(
                f"cannot keep {self.kept} levels from a dim-{self.dim} eigensolve"
            )


def _resonator_ops(m):
    a = np.zeros((m, m), dtype=complex)
    idx = np.arange(1, m)
    a[idx - 1, idx] = np.sqrt(idx)
    return a, a.conj().T


def _ladder_op(k):
    c = np.zeros((k, k), dtype=complex)
    idx = np.arange(1, k)
    c[idx - 1, idx] = np.sqrt(idx)
    return c


def assemble_coupled(qubit_energies, qubit_coupling_op, res: ResonatorParams,
                     mode: CouplingMode, n_res):
    """Coupled Hamiltonian on the product space, index = i_q * n_res + n_r.

    qubit_coupling_op is the charge operator projected into the kept
    eigenbasis (CHARGE) or the eigen-level lowering ladder (LADDER_RWA).
    """
    energies = np.asarray(qubit_energies, dtype=float)
    k = energies.size
    m = int(n_res)
    if k < 2 or m < 2:
        raise InvalidDimensionError(f"need k >= 2 and m >= 2, got k={k}, m={m}")
    a, adag = _resonator_ops(m)
    eye_q = np.eye(k, dtype=complex)
    eye_r = np.eye(m, dtype=complex)
    h = np.kron(np.diag(energies.astype(complex)), eye_r)
    h += np.kron(eye_q, res.omega_r * (adag @ a + 0.5 * eye_r))
    op = np.asarray(qubit_coupling_op, dtype=complex)
    if mode is CouplingMode.CHARGE:
        h += res.g * np.kron(op, a + adag)
    elif mode is CouplingMode.LADDER_RWA:
        h += res.g * (np.kron(op.conj().T, a) + np.kron(op, adag))
    else:
        raise ValueError(f"unknown coupling mode {mode!r}")
    return 0.5 * (h + h.conj().T)


def build_coupled_hamiltonian(params: EnergyParams, flux: FluxBias,
                              res: ResonatorParams,
                              mode: CouplingMode = DEFAULT_MODE,
                              dims: CoupledDims = CoupledDims()):
    """Fluxonium eigensolve at full dim, project the coupling operator onto
    the lowest kept levels, tensor with the resonator."""
    spec = fluxonium_spectrum(params, flux, dims.dim)
    energies = spec.eigenvalues[:dims.kept]
    w = spec.eigenvectors[:, :dims.kept]
    if mode is CouplingMode.CHARGE:
        _, _, n_op, _ = build_ho_operators(dims.dim, params.phi0)
        q_op = w.conj().T @ n_op @ w
    else:
        a, _, _, _ = build_ho_operators(dims.dim, params.phi0)
        q_op = w.conj().T @ a @ w
    return assemble_coupled(energies, q_op, res, mode, dims.n_res)


@dataclass(frozen=True)
class DressedLevels:
    """Greedy bare-label assignment of a coupled eigensystem.

    assignment maps (qubit level, photon number) -> dressed eigenstate index;
    quality holds the squared overlap backing each assignment.
    """

    energies: np.ndarray
    assignment: dict
    quality: dict
    kept: int
    n_res: int
    warn: bool = field(default=False)

    def energy(self, i, n):
        return float(self.energies[self.assignment[(i, n)]])

    def quality_of(self, i, n):
        return float(self.quality[(i, n)])


def diagonalize(h):
    """Hermitian eigensolve with the shared failure wrapper and counter."""
    diagnostics.count_eigensolve()
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"coupled eigensolve failed: {exc}",
                                    shape=h.shape) from exc
    return vals, vecs


def assign_dressed_levels(eigenvalues, eigenvectors, kept, n_res) -> DressedLevels:
    """Assign each bare product label to the dressed state with the largest
    remaining overlap (greedy, descending, unique). Low-quality assignments
    set the warn flag; they are never fatal here."""
    overlap = np.abs(eigenvectors) ** 2  # overlap[bare, dressed]
    flat_order = np.argsort(-overlap, axis=None, kind="stable")
    dim = overlap.shape[0]
    assignment = {}
    quality = {}
    used_bare = set()
    used_dressed = set()
    for flat in flat_order:
        b, d = divmod(int(flat), dim)
        if b in used_bare or d in used_dressed:
            continue
        used_bare.add(b)
        used_dressed.add(d)
        label = divmod(b, n_res)  # (qubit level, photon number)
        assignment[label] = d
        quality[label] = float(overlap[b, d])
        if len(used_bare) == dim:
            break
    warn = any(q < 0.5 for q in quality.values())
    return DressedLevels(np.asarray(eigenvalues, dtype=float), assignment,
                         quality, kept, n_res, warn)


def coupled_eigensystem(params: EnergyParams, flux: FluxBias, res: ResonatorParams,
                        mode: CouplingMode = DEFAULT_MODE,
                        dims: CoupledDims = CoupledDims()) -> DressedLevels:
    h = build_coupled_hamiltonian(params, flux, res, mode, dims)
    vals, vecs = diagonalize(h)
    return assign_dressed_levels(vals, vecs, dims.kept, dims.n_res)


def two_level_eigensystem(omega_q, res: ResonatorParams,
                          mode: CouplingMode = CouplingMode.LADDER_RWA,
                          n_res=8) -> DressedLevels:
    """Surrogate with a bare two-level qubit (energies 0, omega_q); the
    coupling operator is the two-level ladder for either mode."""
    h = assemble_coupled(np.array([0.0, omega_q]), _ladder_op(2), res, mode, n_res)
    vals, vecs = diagonalize(h)
    return assign_dressed_levels(vals, vecs, 2, n_res)


MIN_ASSIGNMENT_QUALITY = 0.25


def _require_quality(dressed: DressedLevels, labels, flux_value):
    worst = min(dressed.quality_of(*lbl) for lbl in labels)
    if worst < MIN_ASSIGNMENT_QUALITY:
        raise ResonanceRegionError(
            f"dressed assignment quality {worst:.3f} below "
            f"{MIN_ASSIGNMENT_QUALITY} at f={flux_value}; dispersive model invalid",
            flux=flux_value, worst_quality=worst,
        )


def dispersive_shift_from(dressed: DressedLevels, flux_value=None):
    """chi from dressed energies:
    2 chi = (w(1,1) - w(1,0)) - (w(0,1) - w(0,0))."""
    labels = [(0, 0), (0, 1), (1, 0), (1, 1)]
    _require_quality(dressed, labels, flux_value)
    return 0.5 * ((dressed.energy(1, 1) - dressed.energy(1, 0))
                  - (dressed.energy(0, 1) - dressed.energy(0, 0)))


def dispersive_shift(params: EnergyParams, flux: FluxBias, res: ResonatorParams,
                     mode: CouplingMode = DEFAULT_MODE,
                     dims: CoupledDims = CoupledDims()):
    """Signed dispersive shift chi (angular) at one flux point."""
    dressed = coupled_eigensystem(params, flux, res, mode, dims)
    return dispersive_shift_from(dressed, flux.f)


def transition_detuning_from(dressed: DressedLevels, res: ResonatorParams,
                             i, j, flux_value=None):
    if not i > j:
        raise ValueError(f"transition requires i > j, got ({i}, {j})")
    _require_quality(dressed, [(i, 0), (j, 0)], flux_value)
    return (dressed.energy(i, 0) - dressed.energy(j, 0)) - res.omega_r


def transition_detuning(params: EnergyParams, flux: FluxBias, res: ResonatorParams,
                        mode: CouplingMode, dims: CoupledDims, i, j):
    """Delta_ij: dressed qubit transition (photon vacuum) minus the bare
    resonator frequency (signed, angular)."""
    dressed = coupled_eigensystem(params, flux, res, mode, dims)
    return transition_detuning_from(dressed, res, i, j, flux.f)


# ---------------------------------------------------------------------------
# Landscapes

DEFAULT_TRANSITIONS = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))
CHI_CLAMP = units.mhz(5.0)
DELTA_CLAMP = units.ghz(5.0)

STATUS_OK = "ok"
STATUS_RESONANT = "resonant"


@dataclass(frozen=True)
class LandscapeGrid:
    """One scalar landscape over (E_J, f) with per-cell status.

    values holds the raw computed numbers (NaN where resonant); emission
    clamps to +-clamp and saturates resonant cells with the sign of the last
    valid row-major neighbor.
    """

    e_j_axis: np.ndarray
    f_axis: np.ndarray
    values: np.ndarray
    status: np.ndarray
    kind: str
    clamp: float | None

    def __post_init__(self):
        ej = np.asarray(self.e_j_axis, dtype=float)
        f = np.asarray(self.f_axis, dtype=float)
        if ej.size == 0 or f.size == 0:
            raise ValueError("landscape axes must be nonempty")
        if np.any(np.diff(ej) <= 0) or np.any(np.diff(f) <= 0):
            raise ValueError("landscape axes must be strictly increasing")
        if self.values.shape != (ej.size, f.size):
            raise ValueError("value matrix shape must match axis lengths")

    def emitted_values(self):
        out = self.values.copy()
        clamp = self.clamp
        if clamp is None:
            return out
        flat = out.ravel()
        bad = (self.status.ravel() == STATUS_RESONANT) | ~np.isfinite(flat)
        good = np.flatnonzero(~bad)
        last_sign = math.copysign(1.0, flat[good[0]]) if good.size else 1.0
        for idx in range(flat.size):
            if bad[idx]:
                flat[idx] = last_sign * clamp
            elif flat[idx] != 0.0:
                last_sign = math.copysign(1.0, flat[idx])
        np.clip(flat, -clamp, clamp, out=flat)
        return flat.reshape(out.shape)


def _cell_values(params, flux, res, mode, dims, transitions):
    """All landscape quantities from a single coupled eigensystem."""
    spec = fluxonium_spectrum(params, flux, dims.dim)
    dressed = coupled_eigensystem(params, flux, res, mode, dims)
    cell = {"omega_q": (spec.transition(1, 0), STATUS_OK)}
    try:
        cell["chi"] = (dispersive_shift_from(dressed, flux.f), STATUS_OK)
    except ResonanceRegionError:
        cell["chi"] = (math.nan, STATUS_RESONANT)
    for (i, j) in transitions:
        try:
            cell[f"delta_{i}{j}"] = (
                transition_detuning_from(dressed, res, i, j, flux.f), STATUS_OK)
        except ResonanceRegionError:
            cell[f"delta_{i}{j}"] = (math.nan, STATUS_RESONANT)
    return cell


def compute_landscapes(e_j_axis, f_axis, e_c, e_l, res: ResonatorParams,
                       mode: CouplingMode = DEFAULT_MODE,
                       dims: CoupledDims = CoupledDims(),
                       transitions=DEFAULT_TRANSITIONS,
                       cell_fn=None):
    """Sweep (E_J, f); every grid cell equals the single-point operation with
    identical inputs. Resonance errors become per-cell status, never aborts.

    cell_fn allows the CLI scheduler to substitute a cached / parallel
    evaluator with identical semantics. Returns {kind: LandscapeGrid}.
    """
    e_j_axis = np.asarray(e_j_axis, dtype=float)
    f_axis = np.asarray(f_axis, dtype=float)
    kinds = ["omega_q", "chi"] + [f"delta_{i}{j}" for (i, j) in transitions]
    clamps = {"omega_q": None, "chi": CHI_CLAMP}
    clamps.update({f"delta_{i}{j}": DELTA_CLAMP for (i, j) in transitions})
    values = {k: np.empty((e_j_axis.size, f_axis.size)) for k in kinds}
    status = {k: np.empty((e_j_axis.size, f_axis.size), dtype=object) for k in kinds}
    if cell_fn is None:
        def cell_fn(e_j, f):
            return _cell_values(EnergyParams(e_j, e_c, e_l), FluxBias(f),
                                res, mode, dims, transitions)
    for a, e_j in enumerate(e_j_axis):
        for b, f in enumerate(f_axis):
            cell = cell_fn(float(e_j), float(f))
            for k in kinds:
                values[k][a, b], status[k][a, b] = cell[k]
    return {
        k: LandscapeGrid(e_j_axis, f_axis, values[k], status[k], k, clamps[k])
        for k in kinds
    }


# ---------------------------------------------------------------------------
# Anticrossing

@dataclass(frozen=True)
class Anticrossing:
    """Avoided-crossing summary: location, minimum gap, half-gap coupling,
    and the swap time pi / (2 g_ij)."""

    f_star: float
    gap: float
    g_ij: float
    t_swap: float


def _hybridized_gap(params, flux, res, mode, dims, i, j):
    """Energy gap between the two dressed levels hybridizing from the bare
    pair |i, 0> and |j, 1> (the two with the largest overlap on that span)."""
    h = build_coupled_hamiltonian(params, flux, res, mode, dims)
    vals, vecs = diagonalize(h)
    b_i0 = i * dims.n_res + 0
    b_j1 = j * dims.n_res + 1
    span = np.abs(vecs[b_i0, :]) ** 2 + np.abs(vecs[b_j1, :]) ** 2
    top = np.argsort(-span, kind="stable")[:2]
    return abs(float(vals[top[0]] - vals[top[1]]))


def find_anticrossing(params: EnergyParams, res: ResonatorParams,
                      mode: CouplingMode = DEFAULT_MODE,
                      dims: CoupledDims = CoupledDims(),
                      transition=(3, 1), window=(0.55, 0.60),
                      xtol=1e-6) -> Anticrossing:
    """Golden-section minimization of the dressed-level gap over the flux
    window; the window must bracket exactly one interior gap minimum."""
    i, j = transition

    def gap(f):
        return _hybridized_gap(params, FluxBias(f), res, mode, dims, i, j)

    f_star, gap_min = golden_section_minimize(gap, window[0], window[1],
                                              xtol=xtol, require_interior=True)
    g_ij = 0.5 * gap_min
    t_swap = math.inf if g_ij == 0.0 else math.pi / (2.0 * g_ij)
    return Anticrossing(f_star, gap_min, g_ij, t_swap)


# ---------------------------------------------------------------------------
# Chi-vs-flux profile for the readout dynamics

def fill_and_clamp(vals, clamp):
    """Replace non-finite entries with +-clamp carrying the sign of the
    nearest preceding valid value (the first valid value for a leading run),
    then clip everything to [-clamp, clamp]. Returns a new array."""
    vals = np.asarray(vals, dtype=float).copy()
    bad = ~np.isfinite(vals)
    last = None
    for idx in range(vals.size):
        if bad[idx]:
            if last is not None:
                vals[idx] = math.copysign(clamp, last)
        else:
            last = vals[idx]
    first_valid = int(np.argmin(bad))
    for idx in range(first_valid):
        vals[idx] = math.copysign(clamp, vals[first_valid])
    return np.clip(vals, -clamp, clamp)


def build_chi_profile(params: EnergyParams, res: ResonatorParams,
                      mode: CouplingMode = DEFAULT_MODE,
                      dims: CoupledDims = CoupledDims(),
                      f_min=0.40, f_max=0.70, step=1e-4,
                      clamp=units.mhz(50.0),
                      point_fn=None) -> ChiProfile:
    """Tabulate chi on a uniform flux grid. Resonant points (assignment
    breakdown) are filled with the clamp bound carrying the sign of the last
    valid neighbor; all values are clipped to +-clamp.

    point_fn allows a cached evaluator with identical semantics.
    """
    n = int(round((f_max - f_min) / step))
    grid = f_min + step * np.arange(n + 1)
    if point_fn is None:
        def point_fn(f):
            try:
                return dispersive_shift(params, FluxBias(f), res, mode, dims)
            except ResonanceRegionError:
                return math.nan
    vals = np.array([point_fn(float(f)) for f in grid])
    bad = ~np.isfinite(vals)
    if np.all(bad):
        raise NumericalFailureError("chi profile entirely resonant",
                                    f_min=f_min, f_max=f_max)
    return ChiProfile(grid, fill_and_clamp(vals, clamp), clamp)
