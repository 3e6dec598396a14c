"""Bare fluxonium in the harmonic-oscillator basis.

Operators, Hamiltonian construction, spectrum with a deterministic
eigenvector phase convention, and charge matrix elements. All frequencies
are angular (rad/ns); see :mod:`fluxsim.units`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics, units
from .errors import IndexBoundError, InvalidDimensionError, NumericalFailureError


@dataclass(frozen=True)
class EnergyParams:
    """Fluxonium energies E_J, E_C, E_L as angular frequencies (rad/ns)."""

    e_j: float
    e_c: float
    e_l: float

    def __post_init__(self):
        if not math.isfinite(self.e_j) or self.e_j < 0.0:
            raise ValueError(f"e_j must be finite and >= 0, got {self.e_j}")
        for name in ("e_c", "e_l"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and strictly positive, got {v}")

    @classmethod
    def from_ghz(cls, e_j_ghz, e_c_ghz, e_l_ghz):
        return cls(units.ghz(e_j_ghz), units.ghz(e_c_ghz), units.ghz(e_l_ghz))

    @property
    def phi0(self):
        """Zero-point phase scale (8 E_C / E_L)^(1/4)."""
        return (8.0 * self.e_c / self.e_l) ** 0.25


@dataclass(frozen=True)
class FluxBias:
    """Reduced external flux f = Phi_ext / Phi_0."""

    f: float

    def __post_init__(self):
        if not math.isfinite(self.f):
            raise ValueError(f"flux must be finite, got {self.f}")

    @property
    def phi_ext(self):
        return 2.0 * math.pi * self.f

    def reduced(self):
        """Canonical representative in [0, 1). Not applied automatically:
        noise offsets may legitimately leave the unit interval."""
        return FluxBias(self.f % 1.0)

    def shifted(self, delta):
        return FluxBias(self.f + delta)


@dataclass(frozen=True)
class HoBasis:
    """Harmonic-oscillator basis truncation and zero-point scale."""

    dim: int
    phi0: float

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError(f"HO basis needs dim >= 2, got {self.dim}")
        if not self.phi0 > 0.0:
            raise ValueError(f"phi0 must be positive, got {self.phi0}")


DEFAULT_DIM = 40


def build_ho_operators(dim, phi0):
    """Dense (annihilation, creation, charge, flux) matrices on a dim-level
    oscillator with zero-point phase scale phi0."""
    basis = HoBasis(dim, phi0)  # validates
    a = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(1, dim)
    a[idx - 1, idx] = np.sqrt(idx)
    adag = a.conj().T
    n_op = (-1j / (math.sqrt(2.0) * basis.phi0)) * (a - adag)
    phi_op = (basis.phi0 / math.sqrt(2.0)) * (a + adag)
    return a, adag, n_op, phi_op


def build_fluxonium_hamiltonian(params: EnergyParams, flux: FluxBias, dim=DEFAULT_DIM):
    """H = 4 E_C n^2 + (1/2) E_L phi^2 - E_J cos(phi - phi_ext).

    The operator cosine is evaluated by spectral calculus on the Hermitian
    flux operator, which is exact on the truncated space.
    """
    _, _, n_op, phi_op = build_ho_operators(dim, params.phi0)
    lam, v = np.linalg.eigh(phi_op)
    cos_op = (v * np.cos(lam - flux.phi_ext)) @ v.conj().T
    h = 4.0 * params.e_c * (n_op @ n_op) + 0.5 * params.e_l * (phi_op @ phi_op) \
        - params.e_j * cos_op
    return 0.5 * (h + h.conj().T)


def _fix_phases(vecs):
    """Rotate each eigenvector so its largest-magnitude component is real
    positive (ties broken by lowest index via argmax)."""
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        i = int(np.argmax(np.abs(col)))
        pivot = col[i]
        mag = abs(pivot)
        if mag > 0.0:
            out[:, k] = col * (pivot.conjugate() / mag)
    return out


@dataclass(frozen=True)
class Spectrum:
    """Eigensystem of the bare fluxonium with provenance metadata.

    eigenvalues are ascending angular frequencies; eigenvectors are the
    matching orthonormal columns in the HO basis with fixed phases.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    params: EnergyParams
    flux: FluxBias
    dim: int

    def transition(self, i, j):
        """omega_i - omega_j (angular)."""
        return self.eigenvalues[i] - self.eigenvalues[j]

    def to_json(self):
        """Documented cache layout: eigenvalues as plain GHz (omega / 2pi),
        eigenvectors row-major as [re, im] pairs."""
        return json.dumps({
            "eigenvalues_ghz": [units.to_ghz(w) for w in self.eigenvalues],
            "eigenvectors": [[[z.real, z.imag] for z in row] for row in self.eigenvectors],
            "e_j_ghz": units.to_ghz(self.params.e_j),
            "e_c_ghz": units.to_ghz(self.params.e_c),
            "e_l_ghz": units.to_ghz(self.params.e_l),
            "f": self.flux.f,
            "dim": self.dim,
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        vals = np.array([units.ghz(w) for w in d["eigenvalues_ghz"]])
        vecs = np.array([[complex(re, im) for re, im in row] for row in d["eigenvectors"]])
        return cls(
            eigenvalues=vals,
            eigenvectors=vecs,
            params=EnergyParams.from_ghz(d["e_j_ghz"], d["e_c_ghz"], d["e_l_ghz"]),
            flux=FluxBias(d["f"]),
            dim=d["dim"],
        )


def fluxonium_spectrum(params: EnergyParams, flux: FluxBias, dim=DEFAULT_DIM) -> Spectrum:
    """Diagonalize the fluxonium Hamiltonian; ascending eigenvalues,
    deterministic eigenvector phases."""
    h = build_fluxonium_hamiltonian(params, flux, dim)
    diagnostics.count_eigensolve()
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            f"fluxonium eigensolve failed: {exc}",
            params=params, flux=flux, dim=dim,
        ) from exc
    return Spectrum(vals, _fix_phases(vecs), params, flux, dim)


def charge_matrix_element(spec: Spectrum, i, j):
    """<i| n |j> in the fixed-phase eigenbasis.

    Indices are restricted to the lower half of the truncated space, where
    eigenstates are trusted to be converged.
    """
    bound = spec.dim // 2
    if not (0 <= i < bound and 0 <= j < bound):
        raise IndexBoundError(
            f"levels ({i}, {j}) outside trusted range [0, {bound}) for dim={spec.dim}"
        )
    _, _, n_op, _ = build_ho_operators(spec.dim, spec.params.phi0)
    return complex(spec.eigenvectors[:, i].conj() @ n_op @ spec.eigenvectors[:, j])


def qubit_frequency(params: EnergyParams, flux: FluxBias, dim=DEFAULT_DIM):
    """omega_q = omega_1 - omega_0 (angular)."""
    spec = fluxonium_spectrum(params, flux, dim)
    return spec.transition(1, 0)


def anharmonicity(params: EnergyParams, flux: FluxBias, dim=DEFAULT_DIM):
    """alpha = (omega_2 - omega_1) - (omega_1 - omega_0) (angular)."""
    spec = fluxonium_spectrum(params, flux, dim)
    return spec.transition(2, 1) - spec.transition(1, 0)
