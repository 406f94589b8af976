import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exvib.band import build_grid, default_eta, exciton_dispersion
from exvib.errors import DomainError, ValidationError
from exvib.params import LatticeSpec
from exvib.relaxation import (
    RateMatrix,
    boltzmann,
    bose,
    build_rate_matrix,
    evolve_populations,
    heating_report,
    stationary_state,
)

from .conftest import make_couplings

J = 1e-8
HW = 1e-9


def band(n=60, J=J):
    return exciton_dispersion(build_grid(LatticeSpec(n, 1.0, "periodic")), 0.0, J)


def rates(n=60, eta=3e-10, T=0.0, **kw):
    base = dict(J=J, F_g=3e-10, F_e=-2e-10, omega_g=HW, omega_e=1.4e-9)
    base.update(kw)
    return build_rate_matrix(band(n, base["J"]), make_couplings(**base), eta, T)


def test_bose():
    assert bose(1.0, 0.0) == 0.0
    assert bose(1.0, 1.0) == pytest.approx(1 / (math.e - 1))


def test_eta_must_be_positive():
    with pytest.raises(DomainError):
        rates(eta=0.0)
    with pytest.raises(DomainError):
        rates(eta=-1e-10)
    with pytest.raises(DomainError):
        rates(T=-1.0)


def test_flat_band_has_no_rates():
    R = rates(J=0.0)
    assert not R.total.any()


def test_zero_temperature_downhill_only():
    R = rates()
    w = R.band.energies
    assert R.total.any()
    f, i = np.nonzero(R.total)
    assert np.all(w[i] > w[f])
    for s in ("g", "e"):
        assert not R.parts[(s, "absorption")].any()


@settings(max_examples=25, deadline=None)
@given(st.floats(2e-10, 5e-9), st.integers(20, 80))
def test_detailed_balance(T, n):
    R = rates(n=n, T=T)
    w = R.band.energies
    tot = R.total
    f, i = np.nonzero(tot)
    for a, b in zip(i, f):
        if w[a] > w[b]:
            assert tot[a, b] / tot[b, a] == pytest.approx(math.exp(-(w[a] - w[b]) / T), rel=1e-9)


@given(st.floats(0.0, 5e-9))
def test_generator_columns_sum_to_zero(T):
    G = rates(T=T).generator
    np.testing.assert_allclose(G.sum(axis=0), 0.0, atol=1e-12 * np.abs(G).max())


def test_no_rates_leaves_populations_unchanged():
    R = rates(J=0.0)
    P0 = np.full(60, 1 / 60)
    traj = evolve_populations(R, P0, 1e12, 5)
    np.testing.assert_array_equal(traj.populations, np.tile(P0, (6, 1)))


def test_two_mode_decay_closed_form():
    n = 2
    b = band(n)
    w = 7.5e-3
    R = RateMatrix(b, {("g", "emission"): np.array([[0.0, w], [0.0, 0.0]]),
                       ("g", "absorption"): np.zeros((2, 2))}, 1e-10, 0.0, {"g": HW})
    traj = evolve_populations(R, [0.0, 1.0], 400.0, 40)
    np.testing.assert_allclose(traj.populations[:, 1], np.exp(-w * traj.times), rtol=1e-12)
    np.testing.assert_allclose(traj.quanta[("g", "emission")], 1 - np.exp(-w * traj.times), atol=1e-14)


def test_zero_temperature_relaxation_monotone():
    R = rates()
    top = int(np.argmax(R.band.energies))
    P0 = np.eye(60)[top]
    traj = evolve_populations(R, P0, 1e11, 200)
    mean = traj.populations @ R.band.energies
    assert np.all(np.diff(mean) <= 1e-12 * np.abs(R.band.energies).max())
    assert mean[-1] < mean[0]
    np.testing.assert_allclose(traj.populations.sum(axis=1), 1.0, atol=1e-12)


def test_finite_temperature_reaches_boltzmann():
    T = 2e-9
    R = rates(n=40, T=T, eta=6e-10)
    ncomp, labels = R.components()
    P0 = np.full(40, 1 / 40)
    stat = stationary_state(R, P0)
    w = R.band.energies
    for comp in range(ncomp):
        idx = np.flatnonzero(labels == comp)
        expect = boltzmann(w[idx], T) * P0[idx].sum()
        np.testing.assert_allclose(stat[idx], expect, atol=1e-12)
    G = R.generator
    np.testing.assert_allclose(G @ stat, 0.0, atol=1e-9 * np.abs(G).max())


def test_stationary_state_zero_temperature_sinks():
    R = rates()
    P0 = np.full(60, 1 / 60)
    stat = stationary_state(R, P0)
    sinks = R.total.sum(axis=0) == 0.0
    assert stat.sum() == pytest.approx(1.0)
    assert np.all(stat[~sinks] == 0.0)


def test_population_validation():
    R = rates()
    with pytest.raises(ValidationError):
        evolve_populations(R, np.ones(60), 1.0)
    with pytest.raises(ValidationError):
        evolve_populations(R, np.ones(5) / 5, 1.0)
    bad = np.full(60, 1 / 59)
    bad[0] = -bad[0] * 0
    bad[1] = -1 / 59
    with pytest.raises(ValidationError):
        evolve_populations(R, bad / bad.sum(), 1.0)


@pytest.mark.parametrize("T", [0.0, 1e-9])
def test_heating_bookkeeping_closes(T):
    eta = 3e-10
    R = rates(T=T, eta=eta)
    top = int(np.argmax(R.band.energies))
    traj = evolve_populations(R, np.eye(60)[top], 5e10, 50)
    rep = heating_report(traj, R.band, R.omega_v, eta)
    assert rep.closes
    assert rep.energy_lost > 0
    if T == 0.0:
        assert all(v[-1] == 0.0 for v in rep.quanta_absorbed.values())


def test_default_eta():
    assert default_eta(band(40)) == pytest.approx(0.1 * 4 * math.pi * J / 40)
