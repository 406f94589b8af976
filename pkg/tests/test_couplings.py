import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from exvib.couplings import (
    MAGIC_ANGLE,
    classify_regime,
    compute_couplings,
    dipole_transfer_J,
    onsite_coupling_M,
    polaron_shift,
    transfer_vibration_F,
)
from exvib.errors import DegenerateInputError, ModelError
from exvib.params import AtomSpec, LatticeSpec, OnSiteSlopeModel, VibrationSpec, oscillator_length

from .conftest import A, HW, MC2, MU, make_couplings

LAT = LatticeSpec(4, A, "periodic")


def atom(theta_deg):
    return AtomSpec.from_degrees(1.0, MU, theta_deg, MC2)


def test_J_perpendicular_dipole():
    # 4 * 14.39964 / 8e9 by hand
    assert dipole_transfer_J(atom(90), LAT) == pytest.approx(7.19982e-9, rel=1e-12)


def test_J_parallel_dipole_is_minus_twice():
    assert dipole_transfer_J(atom(0), LAT) == pytest.approx(-1.439964e-8, rel=1e-12)
    assert dipole_transfer_J(atom(0), LAT) / dipole_transfer_J(atom(90), LAT) == pytest.approx(-2.0, rel=1e-15)


def test_J_and_F_vanish_at_magic_angle():
    at = AtomSpec(1.0, MU, MAGIC_ANGLE, MC2)
    j90 = dipole_transfer_J(atom(90), LAT)
    assert math.degrees(MAGIC_ANGLE) == pytest.approx(54.7356, abs=1e-4)
    assert abs(dipole_transfer_J(at, LAT)) < 1e-15 * abs(j90)
    assert abs(transfer_vibration_F(at, LAT, HW)) < 1e-15 * abs(j90)


def test_F_perpendicular_dipole():
    abar = oscillator_length(MC2, HW)
    expected = -3 * abar / A * 7.19982e-9
    F = transfer_vibration_F(atom(90), LAT, HW)
    assert F == pytest.approx(expected, rel=1e-12)
    assert F == pytest.approx(-4.77e-10, rel=2e-3)


@given(
    theta=st.floats(0.0, math.pi),
    mu=st.floats(0.1, 10.0),
    a=st.floats(100.0, 1e5),
    mc2=st.floats(1e9, 1e14),
    hw=st.floats(1e-12, 1e-6),
)
def test_F_over_J_ratio(theta, mu, a, mc2, hw):
    at = AtomSpec(1.0, mu, theta, mc2)
    lat = LatticeSpec(2, a)
    J = dipole_transfer_J(at, lat)
    F = transfer_vibration_F(at, lat, hw)
    if J == 0.0:
        assert F == 0.0
        return
    assert F / J == pytest.approx(-3 * oscillator_length(mc2, hw) / a, rel=1e-12)
    if F != 0.0:
        assert math.copysign(1, F) == -math.copysign(1, J)


def test_scaling_with_lattice_constant():
    J1 = dipole_transfer_J(atom(90), LatticeSpec(2, 1000.0))
    J2 = dipole_transfer_J(atom(90), LatticeSpec(2, 2000.0))
    F1 = transfer_vibration_F(atom(90), LatticeSpec(2, 1000.0), HW)
    F2 = transfer_vibration_F(atom(90), LatticeSpec(2, 2000.0), HW)
    assert J1 / J2 == pytest.approx(8.0, rel=1e-14)
    assert F1 / F2 == pytest.approx(16.0, rel=1e-14)


def test_onsite_direct_zero():
    assert onsite_coupling_M(OnSiteSlopeModel(), VibrationSpec(HW, HW), atom(90)) == (0.0, 0.0)


def test_onsite_polynomial_slope():
    model = OnSiteSlopeModel("polynomial", d_g=(0.0, 0.0), d_e=(5.0, 1e-11, 3e-12))
    m_g, m_e = onsite_coupling_M(model, VibrationSpec(HW, HW), atom(90))
    assert m_g == 0.0
    # abar^e * c1 = 44.1237 * 1e-11 by hand
    assert m_e == pytest.approx(4.41e-10, rel=1e-3)
    assert m_e == pytest.approx(oscillator_length(MC2, HW) * 1e-11, rel=1e-15)


def test_onsite_polynomial_frequency_scaling():
    model = OnSiteSlopeModel("polynomial", d_g=(0.0, 2e-11), d_e=(0.0, 1e-11))
    slow = onsite_coupling_M(model, VibrationSpec(HW, HW), atom(90))
    fast = onsite_coupling_M(model, VibrationSpec(2 * HW, 2 * HW), atom(90))
    assert fast[0] / slow[0] == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    assert fast[1] / slow[1] == pytest.approx(1 / math.sqrt(2), rel=1e-14)


def test_onsite_polynomial_needs_linear_term():
    with pytest.raises(ModelError):
        onsite_coupling_M(OnSiteSlopeModel("polynomial", d_g=(1.0,), d_e=(0.0, 1.0)),
                          VibrationSpec(HW, HW), atom(90))


def test_polynomial_and_direct_modes_agree():
    c1 = 2.5e-12
    poly = OnSiteSlopeModel("polynomial", d_g=(0.0, c1), d_e=(0.0, c1))
    m_poly = onsite_coupling_M(poly, VibrationSpec(HW, 2 * HW), atom(90))
    direct = OnSiteSlopeModel("direct", m_g=m_poly[0], m_e=m_poly[1])
    assert onsite_coupling_M(direct, VibrationSpec(HW, 2 * HW), atom(90)) == m_poly


def test_polaron_shift_values():
    assert polaron_shift(0.0, 0.0, HW, HW, 1.0) == (0.0, 1.0)
    delta, w0 = polaron_shift(5e-11, 0.0, 1e-9, 1e-9, 1.0)
    assert delta == pytest.approx(2.5e-12, rel=1e-14)
    assert w0 == 1.0 - delta
    both = polaron_shift(5e-11, 3e-11, 1e-9, 2e-9, 1.0)[0]
    assert both == pytest.approx(polaron_shift(5e-11, 0, 1e-9, 2e-9, 1.0)[0]
                                 + polaron_shift(0, 3e-11, 1e-9, 2e-9, 1.0)[0], rel=1e-15)


@given(st.floats(-1e-8, 1e-8), st.floats(-1e-8, 1e-8), st.floats(1e-10, 1e-8), st.floats(1e-10, 1e-8))
def test_polaron_shift_properties(m_g, m_e, w_g, w_e):
    d1, _ = polaron_shift(m_g, m_e, w_g, w_e, 1.0)
    d2, _ = polaron_shift(m_e, m_g, w_e, w_g, 1.0)
    assert d1 >= 0
    assert d1 == pytest.approx(d2, rel=1e-15, abs=0)


def test_coupling_set_consistency(reference_bundle):
    cs = compute_couplings(reference_bundle)
    assert cs.is_consistent()
    assert cs.F_g * cs.J < 0


@pytest.mark.parametrize("m,f,regime", [
    (100.0, 1.0, "strong-onsite"),
    (0.001, 1.0, "transfer-dominated"),
    (1.0, 1.0, "intermediate"),
])
def test_classify_regime(m, f, regime):
    cs = make_couplings(M_g=m * 1e-10, M_e=m * 1e-10, F_g=f * 1e-10, F_e=-f * 1e-10)
    report = classify_regime(cs, (0.1, 10.0))
    assert report.regime == regime
    assert report.ratio == pytest.approx(m / f)


def test_classify_regime_degenerate():
    with pytest.raises(DegenerateInputError):
        classify_regime(make_couplings())
    assert classify_regime(make_couplings(M_g=1e-10, M_e=1e-10)).regime == "strong-onsite"
