"""Exciton-vibration coupling of ultracold two-level atoms in a 1D optical lattice.

Closed-form couplings, exciton band structure, golden-rule scattering,
polaron dressing and an exact-diagonalisation oracle for small chains.
"""

__version__ = "0.1.0"

from .params import (  # noqa: E402
    UNITS,
    AtomSpec,
    LatticeSpec,
    OnSiteSlopeModel,
    ParameterBundle,
    UnitSystem,
    VibrationSpec,
    oscillator_length,
    validate_spec,
)
from .couplings import (  # noqa: E402
    CouplingSet,
    classify_regime,
    compute_couplings,
    dipole_transfer_J,
    onsite_coupling_M,
    polaron_shift,
    transfer_vibration_F,
)
