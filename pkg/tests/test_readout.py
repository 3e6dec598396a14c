"""Tests for the Langevin readout dynamics."""

import math

import numpy as np
import pytest

from fluxsim import units
from fluxsim.coupled import ResonatorParams, dispersive_shift
from fluxsim.errors import DomainError
from fluxsim.qubit import EnergyParams, FluxBias
from fluxsim.readout import (
    ChiProfile,
    DemodPhase,
    FluxRamp,
    ReadoutConfig,
    drive_amplitude,
    flux_ramp_profile,
    integrate_langevin,
    output_field,
    qubit_phase_shift,
    readout_error,
    run_ramped_readout,
    run_static_readout,
    static_output_field,
    time_grid,
)
from fluxsim.special import erfc

KAPPA = units.mhz(5.0)
CHI = units.mhz(0.527)


def test_langevin_matches_closed_form_static():
    cfg = ReadoutConfig(n_bar=10.0, kappa=KAPPA, t_max=1000.0, dt=0.05)
    times = time_grid(cfg.t_max, cfg.dt)
    eps = drive_amplitude(cfg.n_bar, cfg.kappa, CHI)
    for sz in (+1, -1):
        alpha = integrate_langevin(lambda t: np.full_like(np.asarray(t, float), CHI),
                                   cfg.kappa, eps, sz, times)
        out = output_field(alpha, cfg.kappa, eps)
        sample = range(0, times.size, 97)
        worst = max(abs(out[i] - static_output_field(CHI, cfg.kappa, eps, sz,
                                                     float(times[i])))
                    for i in sample)
        assert worst < 1e-8


def test_steady_state_photon_number():
    cfg = ReadoutConfig(n_bar=10.0, kappa=KAPPA, t_max=3000.0, dt=0.05)
    traj = run_static_readout(CHI, cfg)
    assert abs(traj.alpha_plus[-1]) ** 2 == pytest.approx(10.0, rel=1e-6)
    assert abs(traj.alpha_minus[-1]) ** 2 == pytest.approx(10.0, rel=1e-6)


def test_static_output_field_limits():
    eps = drive_amplitude(10.0, KAPPA, CHI)
    at0 = static_output_field(CHI, KAPPA, eps, +1, 0.0)
    assert at0 == pytest.approx(-eps / math.sqrt(KAPPA), abs=1e-12)
    phi = qubit_phase_shift(CHI, KAPPA)
    late = static_output_field(CHI, KAPPA, eps, +1, 1e7)
    want = (eps / math.sqrt(KAPPA)) * np.exp(-1j * phi)
    assert abs(late - want) < 1e-12


def test_eta_quarter_halves_snr_pointwise():
    demod = DemodPhase("fixed", math.pi / 2)
    base = ReadoutConfig(n_bar=10.0, eta=1.0, kappa=KAPPA, demod_phase=demod,
                         t_max=300.0, dt=0.05)
    quarter = ReadoutConfig(n_bar=10.0, eta=0.25, kappa=KAPPA, demod_phase=demod,
                            t_max=300.0, dt=0.05)
    full = run_static_readout(CHI, base)
    half = run_static_readout(CHI, quarter)
    assert np.max(np.abs(2.0 * half.snr - full.snr)) < 1e-12


def test_optimal_demod_phase_is_quadrature():
    cfg = ReadoutConfig(n_bar=10.0, kappa=KAPPA, t_max=300.0, dt=0.05)
    traj = run_static_readout(CHI, cfg)
    assert abs(abs(traj.theta) - math.pi / 2) < 1e-6


def test_static_snr_calibration_constant():
    params = EnergyParams.from_ghz(4.75, 1.25, 1.5)
    res = ResonatorParams.from_ghz(7.0, 5.0, 50.0)
    chi = dispersive_shift(params, FluxBias(0.5), res)
    cfg = ReadoutConfig(n_bar=10.0, eta=1.0, kappa=KAPPA, t_max=250.0, dt=0.05)
    traj = run_static_readout(chi, cfg)
    snr, _ = traj.at_time(200.0)
    assert snr == pytest.approx(2.0729907011622464, rel=1e-9)


def test_error_curve_is_half_erfc_of_half_snr():
    cfg = ReadoutConfig(n_bar=10.0, kappa=KAPPA, t_max=200.0, dt=0.05)
    traj = run_static_readout(CHI, cfg)
    for i in range(0, traj.times.size, 203):
        assert traj.error[i] == 0.5 * erfc(0.5 * traj.snr[i])
    assert readout_error(0.0) == pytest.approx(0.5, abs=1e-15)


def test_snr_zero_at_origin():
    cfg = ReadoutConfig(n_bar=10.0, kappa=KAPPA, t_max=100.0, dt=0.05)
    traj = run_static_readout(CHI, cfg)
    assert traj.snr[0] == 0.0
    assert traj.m_s_plus[0] == 0.0 and traj.m_s_minus[0] == 0.0


def test_flux_ramp_shape():
    ramp = FluxRamp(0.5, 0.641, 50.0)
    assert ramp.flux_at(0.0) == 0.5
    assert ramp.flux_at(25.0) == pytest.approx(0.5705)
    assert ramp.flux_at(50.0) == pytest.approx(0.641)
    assert ramp.flux_at(500.0) == pytest.approx(0.641)
    shifted = ramp.shifted(0.01)
    assert shifted.f_start == pytest.approx(0.51)
    assert shifted.f_end == pytest.approx(0.651)
    step = FluxRamp(0.5, 0.6, 0.0)
    assert step.flux_at(0.0) == 0.5 and step.flux_at(1e-9) == 0.6
    with pytest.raises(ValueError):
        FluxRamp(0.5, 0.6, -1.0)
    with pytest.raises(ValueError):
        FluxRamp(0.5, 0.6, 10.0, shape="cosine")


def test_chi_profile_interpolation_and_clamp():
    grid = np.array([0.4, 0.5, 0.6])
    vals = np.array([1.0, 3.0, 200.0])
    profile = ChiProfile(grid, vals, clamp=10.0)
    assert profile.chi_at(0.45) == pytest.approx(2.0)
    assert profile.chi_at(0.6) == 10.0  # clamped on evaluation
    with pytest.raises(DomainError):
        profile.chi_at(0.39)
    with pytest.raises(DomainError):
        profile.chi_at(0.61)
    with pytest.raises(ValueError):
        ChiProfile(np.array([0.5, 0.4]), np.array([1.0, 2.0]))


def test_flux_ramp_profile_domain_check():
    profile = ChiProfile(np.array([0.45, 0.55]), np.array([1.0, 2.0]), clamp=10.0)
    with pytest.raises(DomainError):
        flux_ramp_profile(FluxRamp(0.5, 0.641, 50.0), profile)
    chi_of_t = flux_ramp_profile(FluxRamp(0.46, 0.54, 10.0), profile)
    assert chi_of_t(0.0) == pytest.approx(1.1)


def test_ramped_readout_targets_plateau_chi():
    grid = np.linspace(0.4, 0.7, 31)
    vals = units.mhz(0.5 - 60.0 * (grid - 0.5))  # synthetic smooth profile
    profile = ChiProfile(grid, vals, clamp=units.mhz(50.0))
    ramp = FluxRamp(0.5, 0.641, 50.0)
    cfg = ReadoutConfig(n_bar=10.0, kappa=KAPPA, t_max=300.0, dt=0.05)
    traj = run_ramped_readout(ramp, profile, cfg)
    want_eps = drive_amplitude(10.0, KAPPA, profile.chi_at(0.641))
    assert traj.epsilon == pytest.approx(want_eps, rel=1e-12)
    assert np.all(np.isfinite(traj.snr))


def test_time_grid_rounding():
    t = time_grid(1.0, 0.3)
    assert t.size == 4 and t[-1] == pytest.approx(0.9)
    t = time_grid(10.0, 0.05)
    assert t.size == 201 and t[-1] == pytest.approx(10.0)


def test_drive_amplitude_and_phase_shift():
    assert drive_amplitude(0.0, KAPPA, CHI) == 0.0
    assert drive_amplitude(4.0, KAPPA, 0.0) == pytest.approx(2.0 * KAPPA / 2.0)
    assert qubit_phase_shift(0.0, KAPPA) == 0.0
    assert qubit_phase_shift(KAPPA / 2.0, KAPPA) == pytest.approx(math.pi / 2.0)
    with pytest.raises(ValueError):
        drive_amplitude(-1.0, KAPPA, CHI)
    with pytest.raises(ValueError):
        qubit_phase_shift(CHI, 0.0)


def test_readout_config_validation():
    with pytest.raises(ValueError):
        ReadoutConfig(eta=0.0)
    with pytest.raises(ValueError):
        ReadoutConfig(eta=1.5)
    with pytest.raises(ValueError):
        ReadoutConfig(n_bar=-1.0)
    with pytest.raises(ValueError):
        ReadoutConfig(dt=0.0)
    with pytest.raises(ValueError):
        DemodPhase("best")
