"""Closed-form coupling constants and the coupling-regime classifier.

Nearest-neighbour dipole-dipole transfer ``J``, its first-order change with
atomic displacement ``F`` (per internal state), the on-site slopes ``M``,
the polaron shift ``Delta`` and the renormalised transition ``omega_0``.
All values are energies in eV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import DegenerateInputError
from .params import (
    UNITS,
    AtomSpec,
    LatticeSpec,
    OnSiteSlopeModel,
    ParameterBundle,
    UnitSystem,
    VibrationSpec,
    oscillator_length,
)

MAGIC_ANGLE = math.acos(1.0 / math.sqrt(3.0))
DEFAULT_THRESHOLDS = (0.1, 10.0)


def angular_factor(theta: float) -> float:
    """1 - 3 cos^2(theta); zero at the magic angle."""
    return 1.0 - 3.0 * math.cos(theta) ** 2


def dipole_transfer_J(atom: AtomSpec, lattice: LatticeSpec, units: UnitSystem = UNITS) -> float:
    return units.coulomb * atom.mu**2 * angular_factor(atom.theta) / lattice.a**3


def transfer_vibration_F(
    atom: AtomSpec, lattice: LatticeSpec, hw: float, units: UnitSystem = UNITS
) -> float:
    """d J / d u times the zero-point length of a mode with quantum ``hw``.

    Carries the sign of 3 cos^2(theta) - 1, i.e. always opposite to J.
    """
    abar = oscillator_length(atom.mc2, hw, units)
    return abar * 3.0 * units.coulomb * atom.mu**2 * (-angular_factor(atom.theta)) / lattice.a**4


def onsite_coupling_M(
    model: OnSiteSlopeModel, vib: VibrationSpec, atom: AtomSpec, units: UnitSystem = UNITS
) -> Tuple[float, float]:
    if model.mode == "direct":
        return model.m_g, model.m_e
    m_g = oscillator_length(atom.mc2, vib.omega_g, units) * model.slope("g")
    m_e = oscillator_length(atom.mc2, vib.omega_e, units) * model.slope("e")
    return m_g, m_e


def polaron_shift(m_g, m_e, omega_g, omega_e, omega_a) -> Tuple[float, float]:
    """Return ``(Delta, omega_0)`` with Delta = M_g^2/w_g + M_e^2/w_e."""
    delta = m_g**2 / omega_g + m_e**2 / omega_e
    return delta, omega_a - delta


@dataclass(frozen=True)
class CouplingSet:
    J: float
    F_g: float
    F_e: float
    M_g: float
    M_e: float
    delta: float
    omega_0: float
    abar_g: float
    abar_e: float
    omega_a: float
    omega_g: float
    omega_e: float

    @classmethod
    def make(cls, *, omega_a, omega_g, omega_e, J=0.0, F_g=0.0, F_e=0.0,
             M_g=0.0, M_e=0.0, abar_g=math.nan, abar_e=math.nan):
        """Assemble a set from raw values, deriving Delta and omega_0."""
        delta, omega_0 = polaron_shift(M_g, M_e, omega_g, omega_e, omega_a)
        return cls(J, F_g, F_e, M_g, M_e, delta, omega_0, abar_g, abar_e,
                   omega_a, omega_g, omega_e)

    def is_consistent(self, rtol=1e-12) -> bool:
        delta, omega_0 = polaron_shift(self.M_g, self.M_e, self.omega_g, self.omega_e, self.omega_a)
        ok_delta = math.isclose(self.delta, delta, rel_tol=rtol, abs_tol=0.0) or self.delta == delta
        ok_w0 = math.isclose(self.omega_0, omega_0, rel_tol=rtol)
        return ok_delta and ok_w0 and self.delta >= 0

    def replace(self, **changes) -> "CouplingSet":
        values = {
            "omega_a": self.omega_a, "omega_g": self.omega_g, "omega_e": self.omega_e,
            "J": self.J, "F_g": self.F_g, "F_e": self.F_e, "M_g": self.M_g, "M_e": self.M_e,
            "abar_g": self.abar_g, "abar_e": self.abar_e,
        }
        values.update(changes)
        return CouplingSet.make(**values)

    def as_dict(self) -> dict:
        return {
            "hJ_ev": self.J,
            "hF_g_ev": self.F_g,
            "hF_e_ev": self.F_e,
            "hM_g_ev": self.M_g,
            "hM_e_ev": self.M_e,
            "hDelta_ev": self.delta,
            "homega_0_ev": self.omega_0,
            "abar_g_angstrom": self.abar_g,
            "abar_e_angstrom": self.abar_e,
            "homega_a_ev": self.omega_a,
            "homega_v_g_ev": self.omega_g,
            "homega_v_e_ev": self.omega_e,
        }


def compute_couplings(bundle: ParameterBundle) -> CouplingSet:
    atom, lattice, vib, units = bundle.atom, bundle.lattice, bundle.vib, bundle.units
    m_g, m_e = onsite_coupling_M(bundle.onsite, vib, atom, units)
    return CouplingSet.make(
        omega_a=atom.omega_a,
        omega_g=vib.omega_g,
        omega_e=vib.omega_e,
        J=dipole_transfer_J(atom, lattice, units),
        F_g=transfer_vibration_F(atom, lattice, vib.omega_g, units),
        F_e=transfer_vibration_F(atom, lattice, vib.omega_e, units),
        M_g=m_g,
        M_e=m_e,
        abar_g=oscillator_length(atom.mc2, vib.omega_g, units),
        abar_e=oscillator_length(atom.mc2, vib.omega_e, units),
    )


@dataclass(frozen=True)
class RegimeReport:
    regime: str
    ratio: float
    thresholds: Tuple[float, float]

    def as_dict(self):
        return {"regime": self.regime, "ratio_M_over_F": self.ratio,
                "thresholds": list(self.thresholds)}


def classify_regime(couplings: CouplingSet, thresholds: Optional[Tuple[float, float]] = None) -> RegimeReport:
    """Compare the weaker on-site slope with the stronger transfer vertex.

    ratio = min(|M_g|, |M_e|) / max(|F_g|, |F_e|); above the upper bound the
    on-site coupling dominates ("strong-onsite"), below the lower bound the
    transfer vertex does ("transfer-dominated").
    """
    lower, upper = thresholds if thresholds is not None else DEFAULT_THRESHOLDS
    m = min(abs(couplings.M_g), abs(couplings.M_e))
    f = max(abs(couplings.F_g), abs(couplings.F_e))
    if f == 0.0:
        if max(abs(couplings.M_g), abs(couplings.M_e)) == 0.0:
            raise DegenerateInputError("all on-site and transfer couplings are zero")
        ratio = math.inf
    else:
        ratio = m / f
    if ratio > upper:
        regime = "strong-onsite"
    elif ratio < lower:
        regime = "transfer-dominated"
    else:
        regime = "intermediate"
    return RegimeReport(regime, ratio, (lower, upper))


def theta_sweep_rows(bundle: ParameterBundle, thetas_deg):
    """(theta_deg, J, F_g, F_e) for each angle, other parameters fixed."""
    rows = []
    for theta_deg in thetas_deg:
        atom = AtomSpec(bundle.atom.omega_a, bundle.atom.mu, math.radians(theta_deg), bundle.atom.mc2)
        rows.append((
            float(theta_deg),
            dipole_transfer_J(atom, bundle.lattice, bundle.units),
            transfer_vibration_F(atom, bundle.lattice, bundle.vib.omega_g, bundle.units),
            transfer_vibration_F(atom, bundle.lattice, bundle.vib.omega_e, bundle.units),
        ))
    return rows


def locate_sign_change(thetas, values):
    """Linearly interpolated angle of every sign change in ``values``."""
    roots = []
    for (t0, v0), (t1, v1) in zip(zip(thetas, values), zip(thetas[1:], values[1:])):
        if v0 == 0.0:
            roots.append(t0)
        elif v0 * v1 < 0:
            roots.append(t0 + (t1 - t0) * v0 / (v0 - v1))
    if values and values[-1] == 0.0:
        roots.append(thetas[-1])
    return roots
