"""Rate-equation kinetics of exciton populations over the k-modes.

Each downhill pair k -> k' (energy drop eps = w(k) - w(k') > 0) gets, per
vibration species, the golden-rule rate

    2 pi |V|^2 delta_eta(eps - w_v) (n(eps) + 1)

and the uphill partner k' -> k the same expression with n(eps) in place of
n(eps) + 1, where n is the Bose occupation at temperature T (energy units).
Evaluating n at the actual exciton energy change (equal to w_v on
resonance) makes the forward/backward ratio exactly exp(eps/T), so the
stationary state is Boltzmann on every connected component.  The Gaussian
delta is cut at ``cutoff * eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from .band import (
    SPECIES,
    ExcitonBand,
    absorption_vertex,
    emission_vertex,
    gaussian_delta,
    vertex_Fk,
)
from .couplings import CouplingSet
from .errors import DomainError, ValidationError

CHANNELS = ("emission", "absorption")


def bose(eps, temperature):
    if temperature <= 0:
        return 0.0
    if eps > 700.0 * temperature:  # exp overflows; occupation underflows to zero anyway
        return 0.0
    return 1.0 / math.expm1(eps / temperature)


@dataclass
class RateMatrix:
    """``parts[(species, channel)][f, i]`` is the rate from mode i to mode f."""

    band: ExcitonBand
    parts: Dict[tuple, np.ndarray]
    eta: float
    temperature: float
    omega_v: Dict[str, float]

    @property
    def total(self) -> np.ndarray:
        return sum(self.parts.values())

    @property
    def generator(self) -> np.ndarray:
        R = self.total
        return R - np.diag(R.sum(axis=0))

    def components(self):
        adj = (self.total > 0) | (self.total.T > 0)
        return connected_components(adj, directed=False)


def build_rate_matrix(band: ExcitonBand, couplings: CouplingSet, eta: float,
                      temperature: float = 0.0, cutoff: float = 2.0) -> RateMatrix:
    if not eta > 0:
        raise DomainError(f"broadening eta must be > 0, got {eta}")
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    w = band.energies
    n = len(w)
    omega_v = {"g": couplings.omega_g, "e": couplings.omega_e}
    F = {"g": couplings.F_g, "e": couplings.F_e}
    parts = {}
    for species in SPECIES:
        fk = vertex_Fk(band.grid, F[species])
        hw = omega_v[species]
        emit = np.zeros((n, n))
        absorb = np.zeros((n, n))
        for i in range(n):
            for f in range(n):
                eps = w[i] - w[f]
                if eps <= 0 or abs(eps - hw) > cutoff * eta:
                    continue
                weight = 2.0 * math.pi * float(gaussian_delta(eps - hw, eta))
                occ = bose(eps, temperature)
                emit[f, i] = weight * emission_vertex(species, fk, i, f) ** 2 * (occ + 1.0)
                # reverse process f -> i absorbs the same quantum
                absorb[i, f] = weight * absorption_vertex(species, fk, f, i) ** 2 * occ
        parts[(species, "emission")] = emit
        parts[(species, "absorption")] = absorb
    return RateMatrix(band, parts, eta, temperature, omega_v)


@dataclass
class PopulationTrajectory:
    times: np.ndarray
    populations: np.ndarray  # (len(times), n_modes)
    quanta: Dict[tuple, np.ndarray]  # (species, channel) -> cumulative count per time


def _check_probability(P0, n):
    P0 = np.asarray(P0, dtype=float)
    if P0.shape != (n,):
        raise ValidationError([("initial-populations", f"expected shape ({n},), got {P0.shape}")])
    if np.any(P0 < 0) or abs(P0.sum() - 1.0) > 1e-12:
        raise ValidationError([("initial-populations", "must be non-negative and sum to 1")])
    return P0


def evolve_populations(R: RateMatrix, P0, t: float, steps: int = 100) -> PopulationTrajectory:
    """Integrate dP/dt = G P exactly with one matrix exponential per step size.

    The generator is augmented with rows that accumulate the number of
    emitted/absorbed quanta per species, so counters are integrated exactly
    as well.
    """
    n = len(R.band.energies)
    P0 = _check_probability(P0, n)
    if steps < 1:
        raise DomainError("steps must be >= 1")
    keys = list(R.parts)
    m = len(keys)
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = R.generator
    for row, key in enumerate(keys):
        aug[n + row, :n] = R.parts[key].sum(axis=0)
    times = np.linspace(0.0, t, steps + 1)
    step = scipy.linalg.expm(aug * (t / steps))
    state = np.concatenate([P0, np.zeros(m)])
    out = np.empty((steps + 1, n + m))
    out[0] = state
    for k in range(1, steps + 1):
        state = step @ state
        out[k] = state
    quanta = {key: out[:, n + row] for row, key in enumerate(keys)}
    return PopulationTrajectory(times, out[:, :n], quanta)


def stationary_state(R: RateMatrix, P0) -> np.ndarray:
    """Long-time limit reached from ``P0``.

    Each connected component carries its initial weight; within a component
    the distribution is the null vector of the generator restricted to it.
    For T = 0 the null vector sits on modes with no outgoing rate.
    """
    n = len(R.band.energies)
    P0 = _check_probability(P0, n)
    G = R.generator
    _, labels = connected_components((R.total > 0) | (R.total.T > 0), directed=False)
    out = np.zeros(n)
    for comp in np.unique(labels):
        idx = np.flatnonzero(labels == comp)
        mass = P0[idx].sum()
        if mass == 0:
            continue
        sub = G[np.ix_(idx, idx)]
        if len(idx) == 1:
            out[idx] = mass
            continue
        if R.temperature > 0:
            null = scipy.linalg.null_space(sub, rcond=1e-13)
            if null.shape[1] != 1:
                raise DomainError("stationary state is not unique on a component")
            v = np.abs(null[:, 0])
            out[idx] = mass * v / v.sum()
        else:
            # absorbing modes; propagate until the transient weight is gone
            sinks = idx[R.total[:, idx].sum(axis=0) == 0.0]
            rates = -np.diag(sub)
            horizon = 60.0 / rates[rates > 0].min()
            sub_state = scipy.linalg.expm(sub * horizon) @ P0[idx]
            out[idx] = np.where(np.isin(idx, sinks), sub_state, 0.0)
            out[idx] *= mass / out[idx].sum()
    return out


def boltzmann(energies, temperature):
    x = -(np.asarray(energies) - np.min(energies)) / temperature
    p = np.exp(x)
    return p / p.sum()


@dataclass
class HeatingReport:
    times: np.ndarray
    mean_energy: np.ndarray
    quanta_emitted: Dict[str, np.ndarray]
    quanta_absorbed: Dict[str, np.ndarray]
    energy_lost: float
    vibrational_energy: float
    bookkeeping_error: float
    bookkeeping_bound: float

    @property
    def closes(self) -> bool:
        return self.bookkeeping_error <= self.bookkeeping_bound

    def as_dict(self):
        return {
            "initial_mean_energy_ev": float(self.mean_energy[0]),
            "final_mean_energy_ev": float(self.mean_energy[-1]),
            "exciton_energy_lost_ev": self.energy_lost,
            "vibrational_energy_ev": self.vibrational_energy,
            "quanta_emitted": {k: float(v[-1]) for k, v in self.quanta_emitted.items()},
            "quanta_absorbed": {k: float(v[-1]) for k, v in self.quanta_absorbed.items()},
            "bookkeeping_error_ev": self.bookkeeping_error,
            "bookkeeping_bound_ev": self.bookkeeping_bound,
            "bookkeeping_closes": self.closes,
        }


def heating_report(traj: PopulationTrajectory, band: ExcitonBand, omega_v: Dict[str, float],
                   eta: float) -> HeatingReport:
    """Mean exciton energy and vibrational quanta, with an energy balance check.

    Each transition moves the exciton by w_v within ``2 eta`` (the rate
    cutoff), so the balance must close to 2 eta times the number of
    transitions.
    """
    offsets = band.energies - band.omega_a
    relative = traj.populations @ offsets
    emitted = {s: traj.quanta[(s, "emission")] for s in SPECIES}
    absorbed = {s: traj.quanta[(s, "absorption")] for s in SPECIES}
    lost = float(relative[0] - relative[-1])
    vib = float(sum(omega_v[s] * (emitted[s][-1] - absorbed[s][-1]) for s in SPECIES))
    transitions = float(sum(emitted[s][-1] + absorbed[s][-1] for s in SPECIES))
    # rounding allowance on top of the per-transition window
    slack = 1e-9 * float(np.abs(offsets).max(initial=0.0))
    return HeatingReport(traj.times, relative + band.omega_a, emitted, absorbed, lost, vib,
                         abs(lost - vib), 2.0 * eta * transitions + slack)
