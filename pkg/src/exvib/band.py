"""Quasi-momentum grid, exciton band and golden-rule scattering in 1D.

Momentum-space vertex for a transition k -> k' (Fourier transform of the
nearest-neighbour transfer vertex, ``F(k) = 2 F cos(ka) / sqrt(N)``):

    species  emission (quantum created)   absorption (quantum destroyed)
    g        F_g(k')                      F_g(k)
    e        F_e(k)                       F_e(k')
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import DomainError, UnsupportedBoundaryError
from .params import LatticeSpec

SPECIES = ("g", "e")


@dataclass(frozen=True)
class MomentumGrid:
    n_sites: int
    a: float
    labels: np.ndarray
    k: np.ndarray

    def __len__(self):
        return self.n_sites

    def index_of_label(self, label: int) -> int:
        return int(np.flatnonzero(self.labels == label)[0])

    def negative(self) -> np.ndarray:
        """Index of -k for each mode (k = pi/a maps to itself)."""
        n = self.n_sites
        out = np.empty(n, dtype=int)
        for idx, lab in enumerate(self.labels):
            target = -lab
            if target not in self.labels:  # -N/2 folds onto N/2
                target += n
            out[idx] = self.index_of_label(target)
        return out


def build_grid(lattice: LatticeSpec) -> MomentumGrid:
    """Modes k = 2 pi n / (N a) with k in (-pi/a, pi/a], ascending."""
    if not lattice.periodic:
        raise UnsupportedBoundaryError("momentum grid needs a periodic lattice")
    n = lattice.n
    if n % 2 == 0:
        labels = np.arange(-n // 2 + 1, n // 2 + 1)
    else:
        labels = np.arange(-(n - 1) // 2, (n - 1) // 2 + 1)
    k = 2.0 * np.pi * labels / (n * lattice.a)
    return MomentumGrid(n, lattice.a, labels, k)


@dataclass(frozen=True)
class ExcitonBand:
    grid: MomentumGrid
    energies: np.ndarray
    J: float
    omega_a: float

    @property
    def bandwidth(self) -> float:
        """Width 4|J| of the continuous cosine band."""
        return 4.0 * abs(self.J)

    @property
    def spread(self) -> float:
        """max - min over the grid modes (equals ``bandwidth`` for even N)."""
        return float(self.energies.max() - self.energies.min())

    def supports(self, hw: float) -> bool:
        return self.bandwidth > hw


def exciton_dispersion(grid: MomentumGrid, omega_a: float, J: float) -> ExcitonBand:
    energies = omega_a + 2.0 * J * np.cos(grid.k * grid.a)
    return ExcitonBand(grid, energies, J, omega_a)


def vertex_Fk(grid: MomentumGrid, F: float) -> np.ndarray:
    return 2.0 * F * np.cos(grid.k * grid.a) / math.sqrt(grid.n_sites)


def golden_rule_rate(Fk):
    """2 pi |F(k)|^2 with hbar = 1, exactly as the bare golden-rule form.

    No density of final states is included, so the result carries units of
    energy; see :func:`dos_weighted_rates` for the broadened version.
    """
    return 2.0 * np.pi * np.abs(Fk) ** 2


def gaussian_delta(x, eta):
    if eta <= 0:
        raise DomainError(f"broadening eta must be > 0, got {eta}")
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x / eta) ** 2) / (eta * math.sqrt(2.0 * math.pi))


def default_eta(band: ExcitonBand) -> float:
    """10% of the level spacing at the band centre, 4 pi |J| / N."""
    return 0.1 * 4.0 * math.pi * abs(band.J) / band.grid.n_sites


def emission_vertex(species, Fk_values, initial, final):
    if species == "g":
        return Fk_values[final]
    return Fk_values[initial]


def absorption_vertex(species, Fk_values, initial, final):
    if species == "g":
        return Fk_values[initial]
    return Fk_values[final]


@dataclass(frozen=True)
class Channel:
    initial: int
    final: int
    species: str
    kind: str
    detuning: float


def scattering_channels(band: ExcitonBand, omega_g: float, omega_e: float, eta: float) -> List[Channel]:
    """Mode pairs where the exciton energy change matches one vibration quantum.

    Emission k -> k' needs w(k) > w(k') and |w(k) - w(k') - w_v| <= eta;
    absorption is the reverse process.  Species whose quantum exceeds the
    band spread by more than eta are skipped outright.
    """
    if eta < 0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    w = band.energies
    out = []
    for species, hw in zip(SPECIES, (omega_g, omega_e)):
        if band.spread + eta < hw:
            continue
        diff = w[:, None] - w[None, :]  # diff[i, f] = w_i - w_f
        for i, f in zip(*np.nonzero(np.abs(diff - hw) <= eta)):
            if diff[i, f] > 0:
                out.append(Channel(int(i), int(f), species, "emission", float(diff[i, f] - hw)))
        for i, f in zip(*np.nonzero(np.abs(-diff - hw) <= eta)):
            if diff[i, f] < 0:
                out.append(Channel(int(i), int(f), species, "absorption", float(-diff[i, f] - hw)))
    return out


def dos_weighted_rates(band: ExcitonBand, F: float, hw: float, eta: float, species: str = "g"):
    """Per-mode emission and absorption rates with a broadened final-state sum.

    Returns two arrays ``(emit, absorb)``; entry i is
    sum_f 2 pi |V_if|^2 delta_eta(dE - hw) over final modes f, without
    thermal occupation factors (spontaneous emission; absorption assumes
    one quantum present).
    """
    w = band.energies
    fk = vertex_Fk(band.grid, F)
    n = len(w)
    emit = np.zeros(n)
    absorb = np.zeros(n)
    for i in range(n):
        for f in range(n):
            if i == f:
                continue
            drop = w[i] - w[f]
            if drop > 0:
                v = emission_vertex(species, fk, i, f)
                emit[i] += 2.0 * np.pi * v**2 * gaussian_delta(drop - hw, eta)
            elif drop < 0:
                v = absorption_vertex(species, fk, i, f)
                absorb[i] += 2.0 * np.pi * v**2 * gaussian_delta(-drop - hw, eta)
    return emit, absorb
