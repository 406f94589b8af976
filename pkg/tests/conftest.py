import math

import pytest

from exvib.couplings import CouplingSet
from exvib.params import AtomSpec, LatticeSpec, VibrationSpec, validate_spec

# Typical optical-lattice numbers: mu = 2 eA, a = 2000 A, mc^2 = 1e12 eV, hw_v = 1e-9 eV.
MU = 2.0
A = 2000.0
MC2 = 1.0e12
HW = 1.0e-9


@pytest.fixture
def reference_bundle():
    return validate_spec(
        LatticeSpec(4, A, "periodic"),
        AtomSpec(1.0, MU, math.pi / 2, MC2),
        VibrationSpec(HW, HW, n_max=1),
    )


def make_couplings(**kw):
    base = dict(omega_a=1.0, omega_g=HW, omega_e=HW)
    base.update(kw)
    return CouplingSet.make(**base)
