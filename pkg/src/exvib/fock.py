"""Exact diagonalisation on the one-exciton, truncated-vibration Fock space.

Basis states carry the excited site and the occupations of the ground-state
(b) and excited-state (c) vibration modes of every site.  The Hamiltonian is
the first-order expanded model

    H = sum_i w_a n_i + sum_<ij> J B_i^+ B_j                      ("ex")
      + sum_i (w_g b_i^+ b_i + w_e c_i^+ c_i)                       ("vib")
      + sum_i [M_e (c_i + c_i^+) - M_g (b_i + b_i^+)] n_i           ("onsite")
      + sum_<ij> [F_e c_i^+ + F_g b_i + F_e c_j + F_g b_j^+] B_i^+ B_j  ("transfer")

where <ij> runs over ordered nearest-neighbour pairs.  The four transfer
vertices are the processes

    I    F_g b_j^+  emission of a ground-state quantum on the site left behind
    II   F_e c_i^+  emission of an excited-state quantum on the arrival site
    III  F_g b_i    absorption of a ground-state quantum on the arrival site
    IV   F_e c_j    absorption of an excited-state quantum on the site left behind

I and III (II and IV) are hermitian partners, so selecting a single process
gives a non-hermitian operator; that is useful for inspecting matrix
elements but not for spectra.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .couplings import CouplingSet
from .errors import DegenerateInputError, DomainError, NumericalError, ResourceError, ShapeError

TERMS = ("ex", "vib", "onsite", "transfer")
PROCESSES = ("I", "II", "III", "IV")
DEFAULT_SIZE_CAP = 100_000
DENSE_LIMIT = 2_000


@dataclass(frozen=True, order=True)
class FockState:
    site: int
    b: Tuple[int, ...]
    c: Tuple[int, ...]

    @property
    def quanta(self) -> int:
        return sum(self.b) + sum(self.c)

    def label(self) -> str:
        return f"x{self.site}|b{''.join(map(str, self.b))}|c{''.join(map(str, self.c))}"


def _bounded_count(n_modes, n_max, q_max):
    """Number of occupation patterns of n_modes modes, each <= n_max, total <= q_max."""
    poly = np.zeros(1, dtype=object)
    poly[0] = 1
    one_mode = np.array([1] * (n_max + 1), dtype=object)
    for _ in range(n_modes):
        poly = np.convolve(poly, one_mode)
    return int(sum(poly[: q_max + 1]))


def basis_size(n_sites, n_max, q_max=None) -> int:
    q = 2 * n_sites * n_max if q_max is None else q_max
    return n_sites * _bounded_count(2 * n_sites, n_max, q)


class FockBasis:
    """Ordered, duplicate-free list of :class:`FockState` with index lookup."""

    def __init__(self, n_sites, n_max, q_max, states):
        self.n_sites = n_sites
        self.n_max = n_max
        self.q_max = q_max
        self.states: List[FockState] = list(states)
        self._index: Dict[FockState, int] = {s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, idx):
        return self.states[idx]

    def __contains__(self, state):
        return state in self._index

    def index(self, state: FockState) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise KeyError(f"{state} not in basis") from None

    def find(self, site, b=None, c=None) -> int:
        """Index of the state with the given exciton site and sparse occupations.

        ``b`` and ``c`` are ``{site: quanta}`` dicts; omitted sites are empty.
        """
        bb = [0] * self.n_sites
        cc = [0] * self.n_sites
        for s, q in (b or {}).items():
            bb[s] = q
        for s, q in (c or {}).items():
            cc[s] = q
        return self.index(FockState(site, tuple(bb), tuple(cc)))

    def allows(self, b, c) -> bool:
        if max(b, default=0) > self.n_max or max(c, default=0) > self.n_max:
            return False
        return self.q_max is None or sum(b) + sum(c) <= self.q_max

    def site_projector(self, site) -> np.ndarray:
        return np.array([s.site == site for s in self.states])


def enumerate_basis(n_sites: int, n_max: int, q_max: Optional[int] = None,
                    size_cap: int = DEFAULT_SIZE_CAP) -> FockBasis:
    """All one-exciton states in lexicographic (site, b..., c...) order.

    Accepts a :class:`~exvib.params.LatticeSpec` in place of ``n_sites``.
    """
    n_sites = getattr(n_sites, "n", n_sites)
    if n_sites < 1 or n_max < 0 or (q_max is not None and q_max < 0):
        raise DomainError("need n_sites >= 1, n_max >= 0, q_max >= 0")
    size = basis_size(n_sites, n_max, q_max)
    if size > size_cap:
        raise ResourceError(f"basis size {size} exceeds cap {size_cap}", size=size)
    occupations = [
        occ for occ in itertools.product(range(n_max + 1), repeat=2 * n_sites)
        if q_max is None or sum(occ) <= q_max
    ]
    states = [
        FockState(site, occ[:n_sites], occ[n_sites:])
        for site in range(n_sites)
        for occ in occupations
    ]
    return FockBasis(n_sites, n_max, q_max, states)


def bonds(n_sites: int, boundary: str = "open") -> List[Tuple[int, int]]:
    """Nearest-neighbour bonds; a periodic 2-site ring has its bond twice."""
    if boundary == "periodic":
        if n_sites < 2:
            return []
        return [(i, (i + 1) % n_sites) for i in range(n_sites)]
    if boundary != "open":
        raise DomainError(f"unknown boundary {boundary!r}")
    return [(i, i + 1) for i in range(n_sites - 1)]


def ordered_pairs(n_sites, boundary="open"):
    out = []
    for i, j in bonds(n_sites, boundary):
        out.append((i, j))
        out.append((j, i))
    return out


@dataclass
class HamiltonianMatrix:
    """Sparse Hamiltonian stored as ``shift * I + matrix``.

    Keeping the bare transition energy in ``shift`` preserves precision when
    it is many orders of magnitude above the couplings.
    """

    matrix: sp.csr_matrix
    shift: float
    terms: FrozenSet[str]
    processes: FrozenSet[str]
    hermitian: bool = field(init=False)
    asymmetry: float = field(init=False)

    def __post_init__(self):
        diff = self.matrix - self.matrix.getH()
        self.asymmetry = float(abs(diff).max()) if diff.nnz else 0.0
        self.hermitian = self.asymmetry <= 1e-14

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def entries(self):
        """(row, col, value) triples of the full matrix including the shift."""
        full = self.to_sparse().tocoo()
        return list(zip(full.row.tolist(), full.col.tolist(), full.data.tolist()))

    def to_sparse(self) -> sp.csr_matrix:
        return (self.matrix + self.shift * sp.identity(self.dim, format="csr")).tocsr()

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray() + self.shift * np.eye(self.dim)

    def element(self, row, col) -> float:
        return self.matrix[row, col] + (self.shift if row == col else 0.0)

    def norm(self) -> float:
        """Largest absolute row sum of the shift-free part (an upper bound on its spectral norm)."""
        if self.matrix.nnz == 0:
            return 0.0
        return float(abs(self.matrix).sum(axis=1).max())

    def expectation(self, psi, include_shift=True) -> float:
        psi = np.asarray(psi)
        value = float(np.real(np.vdot(psi, self.matrix @ psi)))
        if include_shift:
            value += self.shift * float(np.vdot(psi, psi).real)
        return value


def _parse_selection(value, allowed, what):
    if value is None:
        return frozenset(allowed)
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    chosen = frozenset(value)
    unknown = chosen - set(allowed)
    if unknown:
        raise DomainError(f"unknown {what}: {sorted(unknown)}")
    return chosen


def assemble_hamiltonian(
    basis: FockBasis,
    couplings: CouplingSet,
    terms: Optional[Iterable[str]] = None,
    boundary: str = "open",
    processes: Optional[Iterable[str]] = None,
) -> HamiltonianMatrix:
    """Build the sparse Hamiltonian on ``basis``.

    ``terms`` selects among ``ex, vib, onsite, transfer`` (default all);
    ``processes`` restricts the transfer part to a subset of ``I..IV``.
    Ladder operators that would leave the truncated space are dropped.
    """
    terms = _parse_selection(terms, TERMS, "terms")
    processes = _parse_selection(processes, PROCESSES, "processes")
    if not terms:
        raise DegenerateInputError("term mask is empty")
    n = basis.n_sites
    cs = couplings
    rows, cols, vals = [], [], []

    def add(target_site, b, c, col, value):
        if value == 0.0 or not basis.allows(b, c):
            return
        rows.append(basis.index(FockState(target_site, tuple(b), tuple(c))))
        cols.append(col)
        vals.append(value)

    def raised(occ, site):
        occ = list(occ)
        amp = math.sqrt(occ[site] + 1)
        occ[site] += 1
        return occ, amp

    def lowered(occ, site):
        if occ[site] == 0:
            return None, 0.0
        occ = list(occ)
        amp = math.sqrt(occ[site])
        occ[site] -= 1
        return occ, amp

    pairs = ordered_pairs(n, boundary)
    for col, state in enumerate(basis.states):
        e, b, c = state.site, state.b, state.c
        if "vib" in terms:
            add(e, b, c, col, cs.omega_g * sum(b) + cs.omega_e * sum(c))
        if "onsite" in terms:
            for occ_b, amp in (raised(b, e), lowered(b, e)):
                if occ_b is not None:
                    add(e, occ_b, c, col, -cs.M_g * amp)
            for occ_c, amp in (raised(c, e), lowered(c, e)):
                if occ_c is not None:
                    add(e, b, occ_c, col, cs.M_e * amp)
        for i, j in pairs:
            if j != e:
                continue
            # exciton hops j -> i
            if "ex" in terms:
                add(i, b, c, col, cs.J)
            if "transfer" not in terms:
                continue
            if "I" in processes:
                occ, amp = raised(b, j)
                add(i, occ, c, col, cs.F_g * amp)
            if "II" in processes:
                occ, amp = raised(c, i)
                add(i, b, occ, col, cs.F_e * amp)
            if "III" in processes:
                occ, amp = lowered(b, i)
                if occ is not None:
                    add(i, occ, c, col, cs.F_g * amp)
            if "IV" in processes:
                occ, amp = lowered(c, j)
                if occ is not None:
                    add(i, b, occ, col, cs.F_e * amp)

    dim = len(basis)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    shift = cs.omega_a if "ex" in terms else 0.0
    return HamiltonianMatrix(mat, shift, terms, processes)


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    residuals: np.ndarray

    def as_dict(self):
        return {
            "eigenvalues_ev": self.eigenvalues.tolist(),
            "residual_norms": self.residuals.tolist(),
        }


def diagonalize(H: HamiltonianMatrix, count: Optional[int] = None, vectors: bool = True,
                maxiter: Optional[int] = None) -> SpectrumResult:
    """Lowest ``count`` eigenpairs (all of them when ``count`` is None)."""
    if not H.hermitian:
        raise DomainError(f"Hamiltonian is not hermitian (asymmetry {H.asymmetry:.3g})")
    dim = H.dim
    count = dim if count is None else min(count, dim)
    if count < 1:
        raise DomainError("count must be >= 1")
    if dim <= DENSE_LIMIT or count >= dim - 1:
        vals, vecs = scipy.linalg.eigh(H.matrix.toarray(), subset_by_index=[0, count - 1])
    else:
        try:
            vals, vecs = spla.eigsh(H.matrix, k=count, which="SA", maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            raise NumericalError("eigsh did not converge", residual=None) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    resid = np.linalg.norm(H.matrix @ vecs - vecs * vals, axis=0)
    scale = max(H.norm(), np.finfo(float).tiny)
    if np.any(resid > 1e-10 * scale):
        raise NumericalError("eigenpair residual above tolerance", residual=float(resid.max()))
    return SpectrumResult(vals + H.shift, vecs if vectors else None, resid)


@dataclass
class Evolution:
    """Trajectory record; ``energies`` exclude the constant ``shift * norm^2``."""

    times: np.ndarray
    psi: np.ndarray
    norms: np.ndarray
    energies: np.ndarray
    populations: Optional[np.ndarray] = None


def evolve(H: HamiltonianMatrix, psi0, t: float, steps: int = 1,
           observe: Optional[Sequence[int]] = None, site_basis: Optional[FockBasis] = None,
           norm_tol: float = 1e-9) -> Evolution:
    """Propagate ``psi0`` to time ``t`` (units of hbar/eV) in ``steps`` equal steps.

    Small spaces use the exact one-step propagator from a dense
    eigendecomposition; larger ones use ``expm_multiply`` per step.  Norm and
    shift-free energy are recorded at every step.  ``observe`` lists basis indices whose
    populations are recorded; with ``site_basis`` the exciton population of
    each site is recorded instead.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    if psi.shape != (H.dim,):
        raise ShapeError(f"state has shape {psi.shape}, expected ({H.dim},)")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise DomainError("initial state must be normalised")
    if steps < 1:
        raise DomainError("steps must be >= 1")
    dt = t / steps
    if H.dim <= DENSE_LIMIT and H.hermitian:
        vals, vecs = scipy.linalg.eigh(H.matrix.toarray())
        step_op = (vecs * np.exp(-1j * vals * dt)) @ vecs.conj().T

        def advance(v):
            return step_op @ v
    else:
        gen = (-1j * dt) * H.matrix.tocsc()

        def advance(v):
            return spla.expm_multiply(gen, v)

    if site_basis is not None:
        projectors = [site_basis.site_projector(s) for s in range(site_basis.n_sites)]
    else:
        projectors = None

    def record(v):
        if projectors is not None:
            return [float(np.sum(np.abs(v[p]) ** 2)) for p in projectors]
        if observe is not None:
            return np.abs(v[list(observe)]) ** 2
        return None

    times = np.linspace(0.0, t, steps + 1)
    norms = np.empty(steps + 1)
    energies = np.empty(steps + 1)
    pops = [] if (observe is not None or projectors is not None) else None
    norms[0] = np.linalg.norm(psi)
    energies[0] = H.expectation(psi, include_shift=False)
    if pops is not None:
        pops.append(record(psi))
    for n in range(1, steps + 1):
        psi = advance(psi)
        norms[n] = np.linalg.norm(psi)
        if abs(norms[n] - 1.0) > norm_tol:
            raise NumericalError(f"norm drift {abs(norms[n] - 1.0):.3g} at step {n}",
                                 residual=abs(norms[n] - 1.0))
        energies[n] = H.expectation(psi, include_shift=False)
        if pops is not None:
            pops.append(record(psi))
    # global phase from the constant shift, applied once
    psi = psi * np.exp(-1j * H.shift * t)
    return Evolution(times, psi, norms, energies, None if pops is None else np.asarray(pops))


def transition_probability(psi, basis: FockBasis, target: FockState) -> float:
    return float(abs(psi[basis.index(target)]) ** 2)


def basis_vector(basis: FockBasis, state: FockState) -> np.ndarray:
    v = np.zeros(len(basis), dtype=complex)
    v[basis.index(state)] = 1.0
    return v


def vacuum_state(basis: FockBasis, site: int) -> FockState:
    zeros = (0,) * basis.n_sites
    return FockState(site, zeros, zeros)

