"""
Tests for the Maxwell-Bloch storage solver.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad

from core.control.envelopes import GaussianControl, GaussianEnvelope, ZeroEnvelope, gaussian_envelope
from core.exceptions import ConfigurationError, IntegrationDivergedError
from core.memory.dynamics import (
    DIVERGENCE_CHECK_INTERVAL,
    StorageOutcome,
    absorption_sanity,
    check_convergence,
    resolve_dt,
    simulate_batch,
    simulate_storage,
    storage_efficiency,
    transmission_oracle,
)
from core.memory.params import MemoryParams, SignalPulse, SolverConfig, signal_energy_fraction, signal_envelope


@pytest.fixture
def fast_cfg():
    """Coarse grid that keeps single runs well below a second."""
    return SolverConfig(n_z=60, dt=4e-3)


@pytest.fixture
def pi_pulse():
    return gaussian_envelope(GaussianControl(theta=math.pi, delay=1.0, fwhm=0.5))


def _outcome(stored: float, input_energy: float) -> StorageOutcome:
    z = np.linspace(0.0, 1.0, 5)
    return StorageOutcome(
        stored_energy=stored,
        transmitted_energy=0.0,
        spin_wave=np.zeros(5, dtype=complex),
        polarization_energy=0.0,
        input_energy=input_energy,
        z=z,
        dt=1e-3,
        n_steps=10,
    )


class TestSignal:
    """Tests for the input signal envelope."""

    def test_half_maximum_at_half_width(self):
        peak = abs(signal_envelope(0.0)) ** 2
        assert abs(signal_envelope(0.5)) ** 2 == pytest.approx(peak / 2, rel=1e-12)
        assert abs(signal_envelope(-0.5)) ** 2 == pytest.approx(peak / 2, rel=1e-12)

    def test_unit_energy(self):
        energy, _ = quad(lambda t: float(signal_envelope(t)) ** 2, -4.0, 4.0, epsabs=1e-13)
        assert abs(energy - 1.0) < 1e-6

    def test_closed_form_value(self):
        expected = (4 * math.log(2) / math.pi) ** 0.25 * math.exp(-2 * math.log(2) * 1.3 ** 2)
        assert float(signal_envelope(1.3)) == pytest.approx(expected, rel=1e-14)

    def test_symmetric_and_positive(self):
        tau = np.linspace(-3, 3, 61)
        values = signal_envelope(tau)
        assert np.all(values > 0)
        assert np.allclose(values, values[::-1], rtol=0, atol=1e-15)

    def test_energy_fraction_of_default_window(self):
        assert signal_energy_fraction((-3.0, 6.0)) > 0.999999
        assert signal_energy_fraction((-0.3, 0.3)) < 0.999

    def test_standard_pulse_is_default(self):
        tau = np.linspace(-2, 2, 41)
        assert np.array_equal(signal_envelope(tau, SignalPulse()), signal_envelope(tau))

    def test_moved_and_stretched_pulse(self):
        pulse = SignalPulse(center=1.5, fwhm=2.0, energy=0.5)
        peak = abs(signal_envelope(1.5, pulse)) ** 2
        assert abs(signal_envelope(2.5, pulse)) ** 2 == pytest.approx(peak / 2, rel=1e-12)
        energy, _ = quad(lambda t: float(signal_envelope(t, pulse)) ** 2, -8.0, 11.0, epsabs=1e-13)
        assert energy == pytest.approx(0.5, abs=1e-6)
        assert signal_energy_fraction((-3.0, 6.0), SignalPulse(center=1.5)) == pytest.approx(
            signal_energy_fraction((-4.5, 4.5)), rel=1e-12
        )

    @pytest.mark.parametrize("fields", [{"fwhm": 0.0}, {"energy": -1.0}, {"center": float("inf")}])
    def test_invalid_pulse(self, fields):
        with pytest.raises(ValidationError):
            SignalPulse(**fields)


class TestParams:
    """Validation of memory points and solver settings."""

    def test_negative_parameters_rejected(self):
        with pytest.raises(ValidationError):
            MemoryParams(d=-1.0, g=0.1)
        with pytest.raises(ValidationError):
            MemoryParams(d=1.0, g=-0.1)

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            MemoryParams(d=float("inf"), g=0.1)
        with pytest.raises(ValidationError):
            MemoryParams(d=1.0, g=float("nan"))

    def test_zero_allowed(self):
        m = MemoryParams(d=0.0, g=0.0)
        assert m.adiabaticity == 0.0

    def test_solver_config_invariants(self):
        with pytest.raises(ValidationError):
            SolverConfig(n_z=1)
        with pytest.raises(ValidationError):
            SolverConfig(dt=0.0)
        with pytest.raises(ValidationError):
            SolverConfig(window=(2.0, 1.0))
        with pytest.raises(ValidationError):
            SolverConfig(snapshot_stride=-1)

    def test_default_dt_follows_control_width(self):
        cfg = SolverConfig()
        narrow = gaussian_envelope(GaussianControl(theta=math.pi, fwhm=0.02))
        assert resolve_dt([narrow], cfg) == pytest.approx(0.02 / 50)
        assert resolve_dt([ZeroEnvelope()], cfg) == cfg.dt_max
        assert resolve_dt([narrow], SolverConfig(dt=0.01)) == 0.01


class TestSimulateStorage:
    """Behaviour of single storage runs."""

    def test_zero_control_stores_nothing(self, fast_cfg):
        outcome = simulate_storage(MemoryParams(d=20.0, g=0.5), ZeroEnvelope(), fast_cfg)
        assert storage_efficiency(outcome) < 1e-10

    def test_zero_optical_depth_stores_nothing(self, fast_cfg, pi_pulse):
        outcome = simulate_storage(MemoryParams(d=0.0, g=0.5), pi_pulse, fast_cfg)
        assert storage_efficiency(outcome) < 1e-10
        assert outcome.transmitted_energy == pytest.approx(1.0, abs=1e-6)

    def test_efficiency_in_unit_interval(self, fast_cfg, pi_pulse):
        outcome = simulate_storage(MemoryParams(d=10.0, g=0.3), pi_pulse, fast_cfg)
        assert 0.0 < outcome.efficiency <= 1.0

    @pytest.mark.parametrize("d,g", [(1.0, 0.1), (10.0, 0.3), (30.0, 1.5)])
    def test_energy_inequality(self, fast_cfg, pi_pulse, d, g):
        outcome = simulate_storage(MemoryParams(d=d, g=g), pi_pulse, fast_cfg)
        total = outcome.transmitted_energy + outcome.stored_energy + outcome.polarization_energy
        assert total <= 1.0 + 1e-3

    @pytest.mark.parametrize("amplitude", [2.0, 1j])
    def test_linearity(self, fast_cfg, pi_pulse, amplitude):
        m = MemoryParams(d=10.0, g=0.3)
        base = simulate_storage(m, pi_pulse, fast_cfg)
        scaled = simulate_storage(m, pi_pulse, fast_cfg, amplitude=amplitude)
        assert abs(base.efficiency - scaled.efficiency) < 1e-10
        assert np.allclose(scaled.spin_wave, amplitude * base.spin_wave, rtol=1e-9, atol=1e-12)

    def test_time_covariance(self, fast_cfg, pi_pulse):
        m = MemoryParams(d=10.0, g=0.3)
        base = simulate_storage(m, pi_pulse, fast_cfg)
        shift = 0.7
        moved = simulate_storage(m, pi_pulse.shifted(shift), fast_cfg.shifted(shift), signal_shift=shift)
        assert abs(base.efficiency - moved.efficiency) < 1e-6

    def test_window_too_small(self, pi_pulse):
        cfg = SolverConfig(n_z=20, dt=1e-2, window=(-0.5, 6.0))
        with pytest.raises(ConfigurationError):
            simulate_storage(MemoryParams(d=1.0, g=1.0), pi_pulse, cfg)

    def test_batch_matches_single_runs(self, fast_cfg, pi_pulse):
        memories = [MemoryParams(d=5.0, g=0.2), MemoryParams(d=20.0, g=1.0)]
        batch = simulate_batch(memories, [pi_pulse, pi_pulse], fast_cfg)
        for m, outcome in zip(memories, batch):
            single = simulate_storage(m, pi_pulse, fast_cfg)
            assert outcome.stored_energy == pytest.approx(single.stored_energy, abs=1e-12)
            assert outcome.transmitted_energy == pytest.approx(single.transmitted_energy, abs=1e-12)

    def test_empty_batch(self, fast_cfg):
        assert simulate_batch([], [], fast_cfg) == []

    def test_divergence_names_member(self):
        cfg = SolverConfig(n_z=20, dt=1e-2)
        runaway = GaussianEnvelope(peak=1e6, center=0.0, sigma=2.0)
        calm = GaussianEnvelope(peak=1.0, center=0.0, sigma=2.0)
        m = MemoryParams(d=1.0, g=1.0)
        with pytest.raises(IntegrationDivergedError) as exc_info:
            simulate_batch([m, m], [calm, runaway], cfg)
        err = exc_info.value
        assert err.member == 1
        # blows up long before the first check, so the reported window is the first one
        assert err.last_finite_step == 0
        assert err.step == DIVERGENCE_CHECK_INTERVAL
        assert err.last_finite_tau == pytest.approx(cfg.window[0])
        assert err.tau == pytest.approx(cfg.window[0] + DIVERGENCE_CHECK_INTERVAL * 1e-2)
        assert f"between steps 0 and {DIVERGENCE_CHECK_INTERVAL}" in str(err)

    def test_snapshots(self, pi_pulse):
        cfg = SolverConfig(n_z=30, dt=1e-2, snapshot_stride=100)
        outcome = simulate_storage(MemoryParams(d=5.0, g=0.5), pi_pulse, cfg)
        fields = outcome.fields
        assert fields is not None
        assert fields.A.shape == (len(fields.taus), 30)
        # boundary value is the input signal
        assert np.allclose(fields.A[:, 0], signal_envelope(fields.taus), atol=1e-12)
        assert np.all(fields.P[0] == 0) and np.all(fields.B[0] == 0)
        assert len(fields.output) == outcome.n_steps + 1
        assert np.allclose(fields.B[-1], outcome.spin_wave)


class TestStorageEfficiency:
    """Normalization guard of the efficiency accessor."""

    def test_zero_spin_wave(self):
        assert storage_efficiency(_outcome(0.0, 1.0)) == 0.0

    def test_renormalizes_input_energy(self):
        assert storage_efficiency(_outcome(0.5, 0.999)) == pytest.approx(0.5 / 0.999, rel=1e-14)

    def test_small_deviation_untouched(self):
        assert storage_efficiency(_outcome(0.5, 1.00005)) == 0.5

    def test_clipped(self):
        assert storage_efficiency(_outcome(1.2, 1.0)) == 1.0


class TestAbsorption:
    """Transmission without control against the frequency-domain oracle."""

    @pytest.fixture
    def oracle_cfg(self):
        return SolverConfig(n_z=120, dt=2e-3)

    def test_empty_medium_transmits_everything(self, oracle_cfg):
        assert absorption_sanity(MemoryParams(d=0.0, g=0.5), oracle_cfg) == pytest.approx(1.0, abs=1e-6)
        assert transmission_oracle(MemoryParams(d=0.0, g=0.5), oracle_cfg) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("d", [1.0, 10.0, 50.0])
    @pytest.mark.parametrize("g", [0.01, 0.1, 1.5])
    def test_matches_lorentzian_filter(self, oracle_cfg, d, g):
        m = MemoryParams(d=d, g=g)
        simulated = absorption_sanity(m, oracle_cfg)
        assert simulated == pytest.approx(transmission_oracle(m, oracle_cfg), abs=1e-3)

    def test_full_and_windowed_agree_for_fast_decay(self, oracle_cfg):
        m = MemoryParams(d=10.0, g=1.5)
        windowed = transmission_oracle(m, oracle_cfg)
        full = transmission_oracle(m, oracle_cfg, windowed=False)
        assert full == pytest.approx(windowed, abs=1e-6)

    def test_narrow_line_nearly_transparent(self, oracle_cfg):
        m = MemoryParams(d=50.0, g=0.01)
        assert transmission_oracle(m, oracle_cfg, windowed=False) > 0.8

    def test_window_cuts_slow_reemission_tail(self, oracle_cfg):
        m = MemoryParams(d=50.0, g=0.01)
        windowed = transmission_oracle(m, oracle_cfg)
        full = transmission_oracle(m, oracle_cfg, windowed=False)
        assert full - windowed > 5e-3

    @pytest.mark.parametrize("g", [0.01, 0.1, 1.5])
    def test_windowed_never_exceeds_full(self, oracle_cfg, g):
        m = MemoryParams(d=10.0, g=g)
        assert transmission_oracle(m, oracle_cfg) <= transmission_oracle(m, oracle_cfg, windowed=False) + 1e-9


class TestConvergence:
    """Self-refinement checks."""

    def test_zero_depth_exact(self, fast_cfg, pi_pulse):
        _, _, delta = check_convergence(MemoryParams(d=0.0, g=1.0), pi_pulse, fast_cfg)
        assert delta < 1e-12

    def test_zero_control_exact(self, fast_cfg):
        _, _, delta = check_convergence(MemoryParams(d=10.0, g=1.0), ZeroEnvelope(), fast_cfg)
        assert delta < 1e-10

    def test_refinement_small_for_smooth_control(self, pi_pulse):
        cfg = SolverConfig(n_z=100, dt=2e-3)
        eta_c, eta_r, delta = check_convergence(MemoryParams(d=10.0, g=0.3), pi_pulse, cfg)
        assert delta == pytest.approx(abs(eta_c - eta_r))
        assert delta < 1e-3
