"""Chain geometry, power-law couplings and Hamiltonian construction.

Units: lattice spacing and the nearest-neighbour hopping element
``<i|H|i+1>`` are both 1 by default, so ``J_ij = 2 / |i-j|**nu``.
The pair interaction is ``J_ij (S_i.S_j - 3 S_i^z S_j^z)`` summed over
unordered pairs; sites are 1-based throughout the public API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .errors import ConsistencyError, ValidationError

#: Largest chain the 2^N oracle will build.
MAX_ORACLE_SITES = 12


@dataclass(frozen=True)
class ChainSpec:
    """One experiment instance: geometry, exponent, holes and the end sites."""

    n_sites: int
    nu: float
    holes: frozenset = field(default_factory=frozenset)
    sender: Optional[int] = None
    receiver: Optional[int] = None
    lattice_spacing: float = 1.0
    nn_energy: float = 1.0

    def __post_init__(self):
        n = self.n_sites
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValidationError("n_sites", f"must be an integer, got {n!r}")
        if n < 2:
            raise ValidationError("n_sites", f"need at least 2 sites, got {n}")
        object.__setattr__(self, "n_sites", int(n))
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise ValidationError("nu", f"exponent must be positive, got {self.nu!r}")
        if not (math.isfinite(self.lattice_spacing) and self.lattice_spacing > 0):
            raise ValidationError("lattice_spacing", "must be positive")
        if not (math.isfinite(self.nn_energy) and self.nn_energy > 0):
            raise ValidationError("nn_energy", "must be positive")

        holes = frozenset(int(h) for h in self.holes)
        object.__setattr__(self, "holes", holes)
        sender = 1 if self.sender is None else int(self.sender)
        receiver = n if self.receiver is None else int(self.receiver)
        object.__setattr__(self, "sender", sender)
        object.__setattr__(self, "receiver", receiver)

        for h in sorted(holes):
            if not 2 <= h <= n - 1:
                raise ValidationError("holes", f"hole {h} outside [2, {n - 1}]")
        for name, site in (("sender", sender), ("receiver", receiver)):
            if not 1 <= site <= n:
                raise ValidationError(name, f"site {site} outside [1, {n}]")
            if site in holes:
                raise ValidationError(name, f"site {site} is a hole")
        if sender == receiver:
            raise ValidationError("receiver", "sender and receiver coincide")

    @classmethod
    def complete(cls, n_sites: int, nu: float, **kw) -> "ChainSpec":
        return cls(n_sites, nu, **kw)

    @classmethod
    def double_hole(cls, n_sites: int, nu: float, **kw) -> "ChainSpec":
        """Chain with sites 2 and N-1 removed (needs N >= 5)."""
        if n_sites < 5:
            raise ValidationError("n_sites", f"double-hole chain needs N >= 5, got {n_sites}")
        return cls(n_sites, nu, holes=frozenset({2, n_sites - 1}), **kw)

    @classmethod
    def two_spin(cls, distance: int, nu: float, **kw) -> "ChainSpec":
        """Sender and receiver ``distance`` lattice units apart, everything between removed."""
        if distance < 1:
            raise ValidationError("distance", f"must be >= 1, got {distance}")
        n = distance + 1
        return cls(n, nu, holes=frozenset(range(2, n)), **kw)

    @property
    def occupied_sites(self) -> tuple:
        return tuple(i for i in range(1, self.n_sites + 1) if i not in self.holes)

    @property
    def distance(self) -> int:
        return abs(self.receiver - self.sender)

    @property
    def coupling_constant(self) -> float:
        """C such that C / (2 a^nu) equals ``nn_energy``."""
        return 2.0 * self.lattice_spacing**self.nu * self.nn_energy

    def is_mirror_symmetric(self) -> bool:
        n = self.n_sites
        return (
            all(n + 1 - h in self.holes for h in self.holes)
            and self.sender + self.receiver == n + 1
        )


@dataclass(frozen=True)
class CouplingTable:
    n_sites: int
    values: np.ndarray  # (N, N), 0-based indices, read-only


@dataclass(frozen=True)
class HamiltonianMatrix:
    dim: int
    entries: np.ndarray  # (dim, dim) real symmetric, read-only
    basis_sites: tuple  # row -> chain site (1-based)

    def index_of(self, site: int) -> int:
        try:
            return self.basis_sites.index(site)
        except ValueError:
            raise ValidationError("site", f"site {site} not in basis {self.basis_sites}") from None

    def shifted(self, c: float) -> "HamiltonianMatrix":
        return HamiltonianMatrix(self.dim, _frozen(self.entries + c * np.eye(self.dim)), self.basis_sites)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def build_couplings(spec: ChainSpec) -> CouplingTable:
    n = spec.n_sites
    a = spec.lattice_spacing
    site = np.arange(1, n + 1)
    sep = np.abs(site[:, None] - site[None, :]).astype(float)
    np.fill_diagonal(sep, 1.0)  # placeholder, diagonal zeroed below
    J = spec.coupling_constant / (a * sep) ** spec.nu
    np.fill_diagonal(J, 0.0)
    for h in spec.holes:
        J[h - 1, :] = 0.0
        J[:, h - 1] = 0.0
    return CouplingTable(n, _frozen(J))


def ground_energy(spec: ChainSpec, couplings: Optional[CouplingTable] = None) -> float:
    """Energy of the all-down state, -1/2 * sum over pairs of J."""
    J = (couplings or build_couplings(spec)).values
    return -0.25 * float(J.sum())


def build_single_excitation_hamiltonian(spec: ChainSpec, keep_holes: bool = False) -> HamiltonianMatrix:
    """Hamiltonian restricted to states with one flipped spin.

    With ``keep_holes`` the hole sites stay in the basis as decoupled rows;
    by default they are dropped and ``dim = N - len(holes)``.
    """
    ct = build_couplings(spec)
    J = ct.values
    e_g = ground_energy(spec, ct)
    sites = tuple(range(1, spec.n_sites + 1)) if keep_holes else spec.occupied_sites
    idx = np.array(sites) - 1
    H = 0.5 * J[np.ix_(idx, idx)]
    H[np.diag_indices_from(H)] = e_g + _row_sums(J)[idx]
    return HamiltonianMatrix(len(sites), _frozen(H), sites)


def _row_sums(J: np.ndarray) -> np.ndarray:
    """sum_k J_ik accumulated by distance, left+right first.

    Mirror-image sites then see the same additions in the same order, so
    the diagonal is exactly mirror symmetric.
    """
    n = J.shape[0]
    padded = np.zeros((n, 3 * n))
    padded[:, n : 2 * n] = J
    rows = np.arange(n)[:, None]
    d = np.arange(1, n)[None, :]
    by_distance = padded[rows, n + rows - d] + padded[rows, n + rows + d]
    return by_distance.sum(axis=1) if n > 1 else np.zeros(n)


def onsite_energies(spec: ChainSpec, shifted: bool = False) -> dict:
    """Map occupied site -> <i|H|i>; ``shifted`` moves the minimum to 0."""
    h = build_single_excitation_hamiltonian(spec)
    diag = np.diag(h.entries).copy()
    if shifted:
        diag -= diag.min()
    return dict(zip(h.basis_sites, diag.tolist()))


# ---------------------------------------------------------------- oracle

_SZ = sp.csr_matrix(np.diag([-0.5, 0.5]))  # local basis: index 0 = down, 1 = up
_SP = sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
_SM = _SP.T.tocsr()
_ID = sp.identity(2, format="csr")


def _site_op(op, i: int, n: int):
    """``op`` acting on 1-based site ``i``; site 1 is the most significant bit."""
    factors = [_ID] * n
    factors[i - 1] = op
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)


def _check_oracle_size(n: int):
    if n > MAX_ORACLE_SITES:
        raise ValidationError(
            "n_sites",
            f"full-space oracle limited to N <= {MAX_ORACLE_SITES} (2^{n} = {2**n} states requested)",
        )


def _full_sparse(spec: ChainSpec):
    n = spec.n_sites
    _check_oracle_size(n)
    J = build_couplings(spec).values
    sz = [_site_op(_SZ, i, n) for i in range(1, n + 1)]
    spl = [_site_op(_SP, i, n) for i in range(1, n + 1)]
    smi = [_site_op(_SM, i, n) for i in range(1, n + 1)]
    H = sp.csr_matrix((2**n, 2**n))
    for i in range(n):
        for j in range(i + 1, n):
            if J[i, j] == 0.0:
                continue
            # S.S - 3 SzSz = (S+S- + S-S+)/2 - 2 SzSz
            H = H + J[i, j] * (0.5 * (spl[i] @ smi[j] + smi[i] @ spl[j]) - 2.0 * sz[i] @ sz[j])
    return H


def build_full_space_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense 2^N Hamiltonian assembled from explicit spin-1/2 operators."""
    return _full_sparse(spec).toarray()


def total_sz(n: int) -> np.ndarray:
    _check_oracle_size(n)
    return reduce(lambda x, y: x + y, (_site_op(_SZ, i, n) for i in range(1, n + 1))).toarray()


def excitation_index(site: int, n: int) -> int:
    """Full-space index of the state with only ``site`` flipped up."""
    return 1 << (n - site)


def project_to_single_excitation(full: np.ndarray, spec: ChainSpec) -> HamiltonianMatrix:
    """Extract the one-flip block over occupied sites, checking it is decoupled."""
    n = spec.n_sites
    if full.shape != (2**n, 2**n):
        raise ValidationError("full", f"expected shape {(2**n, 2**n)}, got {full.shape}")
    sites = spec.occupied_sites
    rows = np.array([excitation_index(s, n) for s in sites])
    outside = np.ones(2**n, dtype=bool)
    outside[rows] = False
    leak = full[np.ix_(rows, outside)]
    if np.any(leak != 0.0):
        r, c = np.argwhere(leak != 0.0)[0]
        col = np.flatnonzero(outside)[c]
        raise ConsistencyError(
            f"single-excitation state for site {sites[r]} couples to full-space state {col} "
            f"(element {leak[r, c]!r})"
        )
    block = full[np.ix_(rows, rows)]
    return HamiltonianMatrix(len(sites), _frozen(block), sites)


def compare_with_oracle(spec: ChainSpec) -> tuple:
    """Return ``(max_dev, shift, worst_index)`` between direct and oracle blocks.

    The oracle block is aligned by one global diagonal constant (the mean
    diagonal difference) before comparison; ``worst_index`` is a pair of
    1-based sites.
    """
    direct = build_single_excitation_hamiltonian(spec).entries
    oracle = project_to_single_excitation(build_full_space_hamiltonian(spec), spec)
    shift = float(np.mean(np.diag(direct) - np.diag(oracle.entries)))
    diff = np.abs(direct - (oracle.entries + shift * np.eye(oracle.dim)))
    r, c = np.unravel_index(np.argmax(diff), diff.shape)
    return float(diff[r, c]), shift, (oracle.basis_sites[r], oracle.basis_sites[c])


def mirror_holes(n_sites: int, holes: Iterable[int]) -> frozenset:
    return frozenset(n_sites + 1 - h for h in holes)
