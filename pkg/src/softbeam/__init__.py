"""Softened nanomechanical Duffing resonators coupled to optical cavities.

The package follows one beam from its elastic eigenmodes through
electrostatic softening and anharmonic quantization to the sideband
resolved light it scatters out of a driven cavity.
"""

__version__ = "0.1.0"

from .beam import (
    BeamSpec,
    DuffingParams,
    MechanicalMode,
    NonlinearityTensor,
    duffing_params,
    mode_properties,
    mode_roots,
    mode_shape,
    nonlinearity_tensor,
    stiffness_overlaps,
)
from .spectrum import (
    AnharmonicSpectrum,
    build_hamiltonian,
    diagonalize,
    duffing_spectrum,
    rwa_spectrum,
    transition_table,
)

__all__ = [
    "AnharmonicSpectrum",
    "BeamSpec",
    "DuffingParams",
    "MechanicalMode",
    "NonlinearityTensor",
    "__version__",
    "build_hamiltonian",
    "diagonalize",
    "duffing_params",
    "duffing_spectrum",
    "mode_properties",
    "mode_roots",
    "mode_shape",
    "nonlinearity_tensor",
    "rwa_spectrum",
    "stiffness_overlaps",
    "transition_table",
]
