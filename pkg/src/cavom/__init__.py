"""Single-atom cavity optomechanics in the unresolved-sideband regime.

Scattering matrices, conditional motional states, photon statistics,
heating, a motion-only master equation, and an exact single-excitation
benchmark of the effective theory.
"""

__version__ = "0.1.0"

from .params import (DegenerateDetuning, DerivedQuantities, DriveFrequency,
                     NoConvergence, SystemParams, averaged_linewidth,
                     derived_quantities, drive_at, effective_linewidth,
                     get_preset, load_params, mode_profile,
                     optomechanical_coupling, position_detuning, PRESETS,
                     resonant_positions, solve_resonant_drive,
                     zero_point_resolution)
from .motional import (GridTooNarrow, MotionalWavefunction, NotNormalized,
                       PositionGrid, auto_grid, fock_overlap, fock_spectrum,
                       fock_state, ground_state, phonon_expectation)
from .scattering import (AddedPhonons, Channel, ChannelAmplitudes,
                         ScatteringOutcome, ZeroProbability, added_phonons,
                         channel_amplitudes, conditional_transmission,
                         family_ground_state, fit_loglog_slope, g2_statistics,
                         heralded_phonon_state, ideal_family, phase_profile,
                         reflection_spectrum, resolution_sweep, scatter_photon)
from .dynamics import (ComplexPotential, LindbladGenerator,
                       MotionalDensityMatrix, StepSizeUnderflow,
                       TruncationExceeded, classical_potential, fock_density,
                       lindblad_generator, propagate, quantum_potential)
from .fulljc import (DegenerateEigenvector, FullModelDecomposition,
                     FullScattering, SingleExcitationBasis, build_hamiltonian,
                     decompose, full_scattering, s_matrix_elements,
                     validity_sweep_detuning, validity_sweep_sideband)
