"""Maxwell-Bloch storage simulation for resonant Lambda-type memories."""

from core.memory.dynamics import (
    FieldState,
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

__all__ = [
    "FieldState",
    "MemoryParams",
    "SignalPulse",
    "SolverConfig",
    "StorageOutcome",
    "absorption_sanity",
    "check_convergence",
    "resolve_dt",
    "signal_energy_fraction",
    "signal_envelope",
    "simulate_batch",
    "simulate_storage",
    "storage_efficiency",
    "transmission_oracle",
]
