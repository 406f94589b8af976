"""Polaron (displaced-oscillator) dressing of the on-site coupling.

The generator acting on an excited site is

    s = (M_g / w_g) (b^+ - b) - (M_e / w_e) (c^+ - c)

and the dressing operator is X = exp(-s).  In the truncated space ``s`` is
a real antisymmetric matrix, so X is exactly orthogonal and the transform
H -> X H X^+ preserves the spectrum up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .couplings import CouplingSet, polaron_shift
from .errors import DomainError, ShapeError
from .fock import FockBasis, FockState, HamiltonianMatrix, assemble_hamiltonian, enumerate_basis


def ladder(n_max: int) -> np.ndarray:
    """Annihilation operator on {0..n_max}."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)


def build_shift_generator(M_g, M_e, omega_g, omega_e, n_max) -> np.ndarray:
    """Generator s on the (n_max+1)^2 two-mode space, b index major."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    a = ladder(n_max)
    eye = np.eye(n_max + 1)
    quad = a.T - a
    return (M_g / omega_g) * np.kron(quad, eye) - (M_e / omega_e) * np.kron(eye, quad)


def site_hamiltonian(couplings: CouplingSet, n_max: int) -> np.ndarray:
    """Excited-atom Hamiltonian on one site's (b, c) space."""
    cs = couplings
    a = ladder(n_max)
    eye = np.eye(n_max + 1)
    num = a.T @ a
    b, c = np.kron(a, eye), np.kron(eye, a)
    return (cs.omega_a * np.kron(eye, eye)
            + cs.omega_g * np.kron(num, eye) + cs.omega_e * np.kron(eye, num)
            + cs.M_e * (c + c.T) - cs.M_g * (b + b.T))


def transform_site_hamiltonian(H_site: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Return X H X^+ with X = exp(-s): the Hamiltonian seen by dressed operators."""
    H_site = np.asarray(H_site)
    if H_site.shape != s.shape:
        raise ShapeError(f"Hamiltonian {H_site.shape} and generator {s.shape} differ in shape")
    X = scipy.linalg.expm(-s)
    return X @ H_site @ X.conj().T


@dataclass
class PolaronFrame:
    g_b: float
    g_c: float
    omega_0: float
    delta: float
    X: np.ndarray
    unitarity_residual: float

    def as_dict(self):
        return {
            "displacement_g": self.g_b,
            "displacement_e": self.g_c,
            "delta_ev": self.delta,
            "omega0_ev": self.omega_0,
            "unitarity_residual": self.unitarity_residual,
        }


def polaron_frame(couplings: CouplingSet, n_max: int = 10) -> PolaronFrame:
    cs = couplings
    s = build_shift_generator(cs.M_g, cs.M_e, cs.omega_g, cs.omega_e, n_max)
    X = scipy.linalg.expm(-s)
    resid = float(np.linalg.norm(X.conj().T @ X - np.eye(len(X)), ord=2))
    delta, omega_0 = polaron_shift(cs.M_g, cs.M_e, cs.omega_g, cs.omega_e, cs.omega_a)
    return PolaronFrame(cs.M_g / cs.omega_g, cs.M_e / cs.omega_e, omega_0, delta, X, resid)


def shift_check(couplings: CouplingSet, n_max: int = 10) -> dict:
    """Compare the single-site ground level from ED and from the dressed frame with w_a - Delta.

    Residuals are reported relative to w_a - Delta, plus ``delta_rel_error``
    which measures the shift itself (w_a - E) against Delta.
    """
    cs = couplings.replace(J=0.0, F_g=0.0, F_e=0.0)
    frame = polaron_frame(cs, n_max)
    target = frame.omega_0

    basis = enumerate_basis(1, n_max)
    H = assemble_hamiltonian(basis, cs, terms=("ex", "vib", "onsite"))
    reduced = H.matrix.toarray()
    ed_vals = np.linalg.eigvalsh(reduced)
    e_ed = ed_vals[0] + H.shift

    H_site = site_hamiltonian(cs.replace(omega_a=0.0), n_max)
    s = build_shift_generator(cs.M_g, cs.M_e, cs.omega_g, cs.omega_e, n_max)
    H_t = transform_site_hamiltonian(H_site, s)
    e_dressed = H_t[0, 0] + cs.omega_a
    bare = np.linalg.eigvalsh(H_site)
    dressed = np.linalg.eigvalsh((H_t + H_t.T) / 2)
    scale = max(abs(bare).max(), np.finfo(float).tiny)
    off = H_t - np.diag(np.diag(H_t))
    return {
        "delta_ev": frame.delta,
        "omega0_ev": target,
        "ed_ground_ev": float(e_ed),
        "dressed_ground_ev": float(e_dressed),
        "shift_residual": float(abs(e_ed - target) / abs(target)) if target else float(abs(e_ed)),
        "dressed_residual": float(abs(e_dressed - target) / abs(target)) if target else float(abs(e_dressed)),
        "delta_rel_error": (float(abs(-ed_vals[0] - frame.delta) / frame.delta)
                            if frame.delta else float(abs(ed_vals[0]))),
        "spectrum_residual": float(np.max(np.abs(bare - dressed)) / scale),
        "ground_offdiag": float(np.max(np.abs(off[0]))),
        "unitarity_residual": frame.unitarity_residual,
    }


def dressing_generator(basis: FockBasis, couplings: CouplingSet) -> sp.csr_matrix:
    """Sum over sites of s_i n_i, restricted to the truncated basis."""
    cs = couplings
    g_b, g_c = cs.M_g / cs.omega_g, cs.M_e / cs.omega_e
    rows, cols, vals = [], [], []
    for col, st in enumerate(basis.states):
        e = st.site
        for field, coeff in (("b", g_b), ("c", -g_c)):
            if coeff == 0.0:
                continue
            occ = getattr(st, field)
            n = occ[e]
            # coeff * (a^+ - a)
            up = list(occ)
            up[e] = n + 1
            down = list(occ)
            down[e] = n - 1
            for new, amp in ((up, np.sqrt(n + 1)), (down, -np.sqrt(n) if n > 0 else 0.0)):
                if amp == 0.0:
                    continue
                b, c = (new, list(st.c)) if field == "b" else (list(st.b), new)
                if not basis.allows(b, c):
                    continue
                rows.append(basis.index(FockState(e, tuple(b), tuple(c))))
                cols.append(col)
                vals.append(coeff * amp)
    dim = len(basis)
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()


def transform_hamiltonian(H: HamiltonianMatrix, basis: FockBasis, couplings: CouplingSet) -> np.ndarray:
    """Dense shift-free part of X H X^+ on a multi-site basis."""
    G = dressing_generator(basis, couplings).toarray()
    X = scipy.linalg.expm(-G)
    return X @ H.matrix.toarray() @ X.T


def dressed_transfer_check(couplings: CouplingSet, n_max: int = 2, q_max=None) -> dict:
    """Transfer vertices of the dressed two-site Hamiltonian.

    For the hop 0 -> 1 the four processes are read off as
    I <x1; b0=1|H|x0>, II <x1; c1=1|H|x0>, III <x1|H|x0; b1=1>,
    IV <x1|H|x0; c0=1>; ``J_eff`` is <x1|H|x0>.  Deviations are measured
    from F_g (I, III), F_e (II, IV) and J.
    """
    basis = enumerate_basis(2, n_max, q_max)
    H = assemble_hamiltonian(basis, couplings, boundary="open")
    Ht = transform_hamiltonian(H, basis, couplings)
    x0 = basis.find(0)
    x1 = basis.find(1)
    amps = {
        "I": Ht[basis.find(1, b={0: 1}), x0],
        "II": Ht[basis.find(1, c={1: 1}), x0],
        "III": Ht[x1, basis.find(0, b={1: 1})],
        "IV": Ht[x1, basis.find(0, c={0: 1})],
    }
    expected = {"I": couplings.F_g, "II": couplings.F_e, "III": couplings.F_g, "IV": couplings.F_e}
    j_eff = Ht[x1, x0]
    return {
        "amplitudes_ev": {k: float(v) for k, v in amps.items()},
        "deviations_ev": {k: float(amps[k] - expected[k]) for k in amps},
        "J_eff_ev": float(j_eff),
        "J_reduction": float(j_eff / couplings.J) if couplings.J else None,
    }
