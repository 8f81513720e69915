"""
Indirect measurement of trapped-ion vibrational mean values.

A vibrational observable ``A`` is coupled to the internal two-level atom
through ``H = hbar gamma A sigma_x``; for a short pulse the atomic
inversion is linear in ``<A>``, so the mean can be read from the atomic
populations alone.

Modules
-------
hilbert       truncated Fock spaces, operators, states, matrix functions
observables   ladder operators, L_z, C_xy, quadratures and the coupling Hamiltonians
dynamics      exact interaction-picture evolution
protocol      calibration, preparation, readout and the linearised estimator
experiments   Rabi scans, estimator sweeps, Raman reduction, parity effect
validation    the end-to-end identity suite
cli           ``ionmeter`` command-line front end
"""

__version__ = "0.1.0"

from .hilbert import (
    ATOM,
    DimensionError,
    HermiticityError,
    HermitianOperator,
    ModeLayout,
    Operator,
    Space,
    SpectralWindow,
    StateVector,
    TruncationError,
    atom_state,
    coherent_state,
    expectation,
    fock_state,
    matrix_function,
    product_state,
    sigma_x,
    sigma_y,
    sigma_z,
    spectral_decomposition,
    superposition,
    tensor_embed,
)
from .observables import (
    RamanConfig,
    angular_momentum_z,
    annihilation,
    beam_splitter,
    carrier_nonlinearity,
    correlation,
    coupling_hamiltonian,
    creation,
    number,
    observable_by_name,
    position_quadrature,
    momentum_quadrature,
    raman_cxy_hamiltonian,
    sideband_qx_hamiltonian,
    two_boson_jc_hamiltonian,
)
from .dynamics import carrier_pulse, evolve_generic, evolve_vibronic, heisenberg_sigma_z, vibronic_propagator
from .protocol import (
    EstimateResult,
    FiniteSpectrumWarning,
    ProtocolConfig,
    ZoneViolation,
    calibrate,
    cubic_bound,
    estimate_mean,
    linearization_bound,
    prepare,
    readout,
)
from .experiments import (
    ParityDemoConfig,
    StateSpec,
    estimator_sweep,
    parity_demo,
    rabi_scan,
    raman_reduction_study,
    su2_coherent_state,
)
from .validation import run_validation
