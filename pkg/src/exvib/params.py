"""Parameter types, the eV/angstrom unit system and input validation.

All frequencies are carried as energies (hbar*omega, in eV), lengths in
angstrom and transition dipoles in e*angstrom.  Rates come out in eV/hbar,
and times are measured in hbar/eV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .errors import DomainError, ModelError, ValidationError

COULOMB_EV_ANGSTROM = 14.39964
HBAR_C_EV_ANGSTROM = 1973.2698


@dataclass(frozen=True)
class UnitSystem:
    """Fixed constants for the eV / angstrom / e*angstrom system.

    ``coulomb`` is e^2/(4 pi eps0) in eV*angstrom, ``hbar_c`` is hbar*c in
    eV*angstrom.
    """

    coulomb: float = COULOMB_EV_ANGSTROM
    hbar_c: float = HBAR_C_EV_ANGSTROM

    def __post_init__(self):
        if not (self.coulomb > 0 and self.hbar_c > 0):
            raise DomainError("unit constants must be strictly positive")


UNITS = UnitSystem()


@dataclass(frozen=True)
class LatticeSpec:
    n: int
    a: float
    boundary: str = "open"

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"


@dataclass(frozen=True)
class AtomSpec:
    """Two-level atom; ``theta`` is the dipole-to-lattice angle in radians."""

    omega_a: float
    mu: float
    theta: float
    mc2: float

    @classmethod
    def from_degrees(cls, omega_a, mu, theta_deg, mc2):
        return cls(omega_a, mu, math.radians(theta_deg), mc2)

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)


@dataclass(frozen=True)
class VibrationSpec:
    """Trap vibration quanta for ground (b) and excited (c) atoms.

    ``n_max`` truncates every mode; ``q_max`` (optional) caps the total
    number of quanta summed over all modes.
    """

    omega_g: float
    omega_e: float
    n_max: int = 1
    q_max: Optional[int] = None


@dataclass(frozen=True)
class OnSiteSlopeModel:
    """Source of the on-site coupling M for each internal state.

    In ``direct`` mode ``m_g`` and ``m_e`` are used as given (eV).  In
    ``polynomial`` mode ``d_g`` and ``d_e`` are coefficients
    ``(c0, c1, c2, ...)`` of the level shift D(u) = sum_k c_k u^k with u in
    angstrom, and M = abar * c1.
    """

    mode: str = "direct"
    m_g: float = 0.0
    m_e: float = 0.0
    d_g: Tuple[float, ...] = ()
    d_e: Tuple[float, ...] = ()

    def slope(self, state: str) -> float:
        coeffs = self.d_g if state == "g" else self.d_e
        if len(coeffs) < 2:
            raise ModelError(
                f"polynomial D^{state} needs degree >= 1, got {len(coeffs) - 1}"
            )
        c1 = float(coeffs[1])
        if not math.isfinite(c1):
            raise ModelError(f"linear coefficient of D^{state} is not finite")
        return c1


@dataclass(frozen=True)
class ParameterBundle:
    lattice: LatticeSpec
    atom: AtomSpec
    vib: VibrationSpec
    onsite: OnSiteSlopeModel = field(default_factory=OnSiteSlopeModel)
    units: UnitSystem = UNITS


def oscillator_length(mc2: float, hw: float, units: UnitSystem = UNITS) -> float:
    """Zero-point length sqrt(hbar / 2 m omega) in angstrom.

    Uses hbar c / sqrt(2 mc^2 * hbar omega) so both inputs are energies in eV.
    """
    if not (mc2 > 0 and hw > 0):
        raise DomainError(f"oscillator_length needs mc2 > 0 and hw > 0, got {mc2}, {hw}")
    return units.hbar_c / math.sqrt(2.0 * mc2 * hw)


def _positive(value) -> bool:
    try:
        return math.isfinite(value) and value > 0
    except TypeError:
        return False


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_spec(
    lattice: LatticeSpec,
    atom: AtomSpec,
    vib: VibrationSpec,
    onsite: Optional[OnSiteSlopeModel] = None,
    units: UnitSystem = UNITS,
) -> ParameterBundle:
    """Check every invariant and return the bundle, or raise listing them all."""
    bad = []
    if not _is_int(lattice.n) or lattice.n < 2:
        bad.append(("site-count", f"N must be an integer >= 2, got {lattice.n!r}"))
    if not _positive(lattice.a):
        bad.append(("lattice-constant", f"a must be > 0, got {lattice.a!r}"))
    if lattice.boundary not in ("open", "periodic"):
        bad.append(("boundary", f"must be 'open' or 'periodic', got {lattice.boundary!r}"))

    if not _positive(atom.omega_a):
        bad.append(("transition-frequency", f"omega_a must be > 0, got {atom.omega_a!r}"))
    if not _positive(atom.mu):
        bad.append(("dipole", f"mu must be > 0, got {atom.mu!r}"))
    if not (isinstance(atom.theta, (int, float)) and 0.0 <= atom.theta <= math.pi):
        bad.append(("dipole-angle", f"theta must lie in [0, pi], got {atom.theta!r}"))
    if not _positive(atom.mc2):
        bad.append(("rest-mass-energy", f"mc2 must be > 0, got {atom.mc2!r}"))

    if not _positive(vib.omega_g):
        bad.append(("ground-frequency", f"omega_v^g must be > 0, got {vib.omega_g!r}"))
    if not _positive(vib.omega_e):
        bad.append(("excited-frequency", f"omega_v^e must be > 0, got {vib.omega_e!r}"))
    if not _is_int(vib.n_max) or vib.n_max < 0:
        bad.append(("truncation", f"n_max must be a non-negative integer, got {vib.n_max!r}"))
    if vib.q_max is not None:
        if not _is_int(vib.q_max) or vib.q_max < 0:
            bad.append(("quanta-cap", f"q_max must be a non-negative integer, got {vib.q_max!r}"))
        elif _is_int(lattice.n) and _is_int(vib.n_max) and vib.q_max > lattice.n * vib.n_max:
            bad.append(
                ("quanta-cap", f"q_max={vib.q_max} exceeds N*n_max={lattice.n * vib.n_max}")
            )

    onsite = onsite if onsite is not None else OnSiteSlopeModel()
    if onsite.mode not in ("direct", "polynomial"):
        bad.append(("onsite-mode", f"must be 'direct' or 'polynomial', got {onsite.mode!r}"))
    elif onsite.mode == "direct":
        for name in ("m_g", "m_e"):
            value = getattr(onsite, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                bad.append((f"onsite-{name}", f"must be finite, got {value!r}"))

    if bad:
        raise ValidationError(bad)
    return ParameterBundle(lattice, atom, vib, onsite, units)
