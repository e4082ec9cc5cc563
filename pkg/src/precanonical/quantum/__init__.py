"""Precanonical quantisation of a scalar field in the y representation."""
from .eigen import (
    Eigenpair,
    apply_dw_hamiltonian,
    box_spectrum,
    eigensolve,
    fd_eigensolve,
    natural_width,
    oscillator_eigenfunction,
    oscillator_spectrum,
)
from .model import QuantumModel
from .modes import (
    ConvergenceStudy,
    GridWave,
    ModeSolution,
    ModeSuperposition,
    SchrodingerResidual,
    WaveComponents,
    assemble_mode,
    component_residuals,
    conservation_field,
    conservation_residual,
    from_multivector,
    gamma_form_agreement,
    gamma_form_residual,
    kappa_cancellation,
    load_wave_csv,
    mode_from_eigenpair,
    sample_on_grid,
    schrodinger_residual,
    second_order_residual,
    standard_schrodinger_residual,
    to_multivector,
    write_wave_csv,
)
from .spectral import GridFunction, SpectralFunction, hermite_functions
from .wkb import (
    SweepResult,
    WKBData,
    WKBExtraction,
    WKBResidual,
    decompose,
    extract_wkb,
    ground_state_wkb,
    hbar_kappa_sweep,
    hj_norm,
    standing_ground_state,
    wkb_residual,
)
