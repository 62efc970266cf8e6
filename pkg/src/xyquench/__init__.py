"""Geometric phase of the XY spin chain under a linear field quench."""

from __future__ import annotations

from .dynamics import (
    DefectReport,
    IntegratorConfig,
    Method,
    ModeState,
    ScalingFit,
    audit_closed_forms,
    evolve_mode,
    evolve_modes,
    final_phase_one_pair,
    final_phase_with_defects,
    fit_power_law,
    kink_count,
    lz_probability,
    mode_hamiltonian,
    scaling_fit,
)
from .errors import (
    AccuracyError,
    DegeneracyError,
    DomainError,
    FitError,
    GaplessPointError,
    IntegrationError,
    ResourceError,
    StepRefinementError,
    XYQuenchError,
)
from .model import (
    ChainSpec,
    ModeGrid,
    PhaseConvention,
    PhaseReport,
    QuenchSchedule,
    adiabatic_threshold,
    bogoliubov_angle_cos,
    critical_mode_phase,
    energy_gap,
    field_at,
    mode_phase,
    mode_phase_at_time,
    momentum_grid,
    single_spin_phase,
    total_phase,
)
from .oracle import (
    HamiltonianConvention,
    LoopConfig,
    berry_phase_loop,
    build_hamiltonian,
    ground_state,
    validate_against_analytic,
)

__version__ = "0.1.0"
