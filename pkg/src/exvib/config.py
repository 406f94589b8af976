"""Flat key-value scenario configuration.

Recognised keys (all optional; defaults are the typical optical-lattice
numbers ``mu=2 eA, a=2000 A, mc^2=1e12 eV, hw_v=1e-9 eV``)::

    lattice.n            int      site count
    lattice.a_angstrom   float    lattice constant
    lattice.boundary     str      "open" | "periodic"
    atom.omega_a_ev      float    bare transition energy
    atom.mu_e_angstrom   float    transition dipole
    atom.theta_deg       float    dipole angle in degrees
    atom.theta_rad       float    same angle in radians (used by the echo)
    atom.mc2_ev          float    rest-mass energy
    vib.omega_g_ev       float    ground-state trap quantum
    vib.omega_e_ev       float    excited-state trap quantum
    vib.n_max            int      per-mode truncation
    vib.q_max            int      total-quanta cap (null/absent: none)
    onsite.mode          str      "direct" | "polynomial"
    onsite.m_g_ev        float    direct M^g
    onsite.m_e_ev        float    direct M^e
    onsite.d_g_coeffs    [float]  polynomial coefficients of D^g(u)
    onsite.d_e_coeffs    [float]  polynomial coefficients of D^e(u)

Files may be JSON (a flat object, or nested objects that flatten to these
keys) or TOML, where ``lattice.n = 4`` is native dotted-key syntax.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ValidationError
from .params import (
    AtomSpec,
    LatticeSpec,
    OnSiteSlopeModel,
    ParameterBundle,
    VibrationSpec,
    validate_spec,
)

DEFAULTS = {
    "lattice.n": 4,
    "lattice.a_angstrom": 2000.0,
    "lattice.boundary": "periodic",
    "atom.omega_a_ev": 1.0,
    "atom.mu_e_angstrom": 2.0,
    "atom.theta_deg": 90.0,
    "atom.mc2_ev": 1.0e12,
    "vib.omega_g_ev": 1.0e-9,
    "vib.omega_e_ev": 1.0e-9,
    "vib.n_max": 1,
    "vib.q_max": None,
    "onsite.mode": "direct",
    "onsite.m_g_ev": 0.0,
    "onsite.m_e_ev": 0.0,
    "onsite.d_g_coeffs": [],
    "onsite.d_e_coeffs": [],
}
KNOWN_KEYS = set(DEFAULTS) | {"atom.theta_rad"}


def flatten(mapping, prefix=""):
    flat = {}
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


def read_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError([("config", f"cannot read {path}: {exc.strerror}")]) from exc
    try:
        if path.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except ValueError as exc:
        raise ValidationError([("config", f"cannot parse {path}: {exc}")]) from exc
    if not isinstance(data, dict):
        raise ValidationError([("config", "top level must be a key-value mapping")])
    return flatten(data)


def bundle_from_mapping(mapping) -> ParameterBundle:
    """Build and validate a parameter bundle from flat (or nested) keys."""
    flat = flatten(mapping)
    unknown = sorted(set(flat) - KNOWN_KEYS)
    if unknown:
        raise ValidationError([(key, "unknown config key") for key in unknown])
    if "atom.theta_deg" in flat and "atom.theta_rad" in flat:
        raise ValidationError([("atom.theta", "give theta_deg or theta_rad, not both")])
    cfg = {**DEFAULTS, **flat}
    try:
        if "atom.theta_rad" in flat:
            theta = float(flat["atom.theta_rad"])
        else:
            theta = math.radians(float(cfg["atom.theta_deg"]))
        lattice = LatticeSpec(cfg["lattice.n"], float(cfg["lattice.a_angstrom"]), cfg["lattice.boundary"])
        atom = AtomSpec(float(cfg["atom.omega_a_ev"]), float(cfg["atom.mu_e_angstrom"]), theta,
                        float(cfg["atom.mc2_ev"]))
        vib = VibrationSpec(float(cfg["vib.omega_g_ev"]), float(cfg["vib.omega_e_ev"]),
                            cfg["vib.n_max"], cfg["vib.q_max"])
        onsite = OnSiteSlopeModel(
            cfg["onsite.mode"],
            float(cfg["onsite.m_g_ev"]),
            float(cfg["onsite.m_e_ev"]),
            tuple(float(c) for c in cfg["onsite.d_g_coeffs"]),
            tuple(float(c) for c in cfg["onsite.d_e_coeffs"]),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError([("config", f"bad value type: {exc}")]) from exc
    return validate_spec(lattice, atom, vib, onsite)


def bundle_to_mapping(bundle: ParameterBundle) -> dict:
    """Flat mapping that re-parses to an identical bundle.

    The angle is written in radians so the round trip is bit-exact.
    """
    lat, atom, vib, onsite = bundle.lattice, bundle.atom, bundle.vib, bundle.onsite
    return {
        "lattice.n": lat.n,
        "lattice.a_angstrom": lat.a,
        "lattice.boundary": lat.boundary,
        "atom.omega_a_ev": atom.omega_a,
        "atom.mu_e_angstrom": atom.mu,
        "atom.theta_rad": atom.theta,
        "atom.mc2_ev": atom.mc2,
        "vib.omega_g_ev": vib.omega_g,
        "vib.omega_e_ev": vib.omega_e,
        "vib.n_max": vib.n_max,
        "vib.q_max": vib.q_max,
        "onsite.mode": onsite.mode,
        "onsite.m_g_ev": onsite.m_g,
        "onsite.m_e_ev": onsite.m_e,
        "onsite.d_g_coeffs": list(onsite.d_g),
        "onsite.d_e_coeffs": list(onsite.d_e),
    }


def load_bundle(path=None, overrides=None) -> ParameterBundle:
    mapping = read_config(path) if path is not None else {}
    if overrides:
        mapping.update(overrides)
        if "atom.theta_deg" in overrides:
            mapping.pop("atom.theta_rad", None)
    return bundle_from_mapping(mapping)
