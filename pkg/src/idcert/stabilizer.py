"""Stabilizer groups, graph-state generators and joint eigenspaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import pauli as pl
from .pauli import PauliOperator
from .states import QuantumState, expectation, validate_adjacency


class StabilizerError(ValueError):
    pass


class EmptyEigenspaceError(StabilizerError):
    """The requested eigenvalue assignment is inconsistent with the rows' dependencies."""


def _symplectic_key(p: PauliOperator) -> int:
    return p.x | (p.z << p.n_qubits)


def gf2_rank(ops: Sequence[PauliOperator]) -> int:
    """Rank of the (x|z) rows over GF(2); signs are ignored."""
    basis: list[int] = []
    for p in ops:
        v = _symplectic_key(p)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def graph_generators(adjacency) -> list[PauliOperator]:
    """``g_a = X_a prod_{b in N(a)} Z_b`` for every vertex ``a``."""
    a = validate_adjacency(adjacency)
    n = a.shape[0]
    gens = []
    for v in range(n):
        z = sum(1 << b for b in range(n) if a[v, b])
        gens.append(PauliOperator(n, 1 << v, z, 0))
    return gens


@dataclass(frozen=True)
class StabilizerGroup:
    n_qubits: int
    generators: tuple[PauliOperator, ...]
    elements: tuple[PauliOperator, ...]
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {(e.x, e.z): e for e in self.elements})

    @property
    def order(self) -> int:
        return len(self.elements)

    def nonidentity(self) -> list[PauliOperator]:
        return [e for e in self.elements if not e.is_identity]

    def sorted_elements(self) -> list[PauliOperator]:
        """Elements ordered by weight then letters, identity last (table order)."""
        return sorted(self.elements, key=lambda e: (e.is_identity, e.letters))

    def signed(self, letters: str | PauliOperator) -> PauliOperator | None:
        """The group element with the given letter string, or ``None``."""
        p = pl.parse_pauli(letters) if isinstance(letters, str) else letters
        return self._index.get((p.x, p.z))

    def __contains__(self, p: PauliOperator) -> bool:
        e = self._index.get((p.x, p.z))
        return e is not None and e.sign == p.sign

    def table(self) -> str:
        lines = [f"{'Observable':<{self.n_qubits + 3}}| sign"]
        for e in self.sorted_elements():
            lines.append(f"{e.letters:<{self.n_qubits + 3}}| {e.sign:+d}")
        return "\n".join(lines)


def group_from_generators(gens: Sequence[PauliOperator]) -> StabilizerGroup:
    if not gens:
        raise StabilizerError("at least one generator is required")
    n = gens[0].n_qubits
    for g in gens:
        if g.n_qubits != n:
            raise StabilizerError("generators have different widths")
        if not g.is_hermitian:
            raise StabilizerError(f"generator {g!r} is not Hermitian")
        if g.is_identity:
            raise StabilizerError("identity (or -identity) is not an allowed generator")
    for i, a in enumerate(gens):
        for b in gens[i + 1:]:
            if not pl.commutes(a, b):
                raise StabilizerError(f"generators {a} and {b} anticommute")
    if gf2_rank(gens) != len(gens):
        # dependent signed generators are either redundant or generate -I
        _raise_dependent(gens)
    k = len(gens)
    # Gray-code walk: one multiplication per element
    elements = [pl.identity(n)]
    cur = pl.identity(n)
    for i in range(1, 1 << k):
        flip = (i & -i).bit_length() - 1
        cur = pl.multiply(cur, gens[flip])
        elements.append(cur)
    return StabilizerGroup(n, tuple(gens), tuple(elements))


def _raise_dependent(gens: Sequence[PauliOperator]) -> None:
    n = gens[0].n_qubits
    k = len(gens)
    for mask in range(1, 1 << k):
        acc = pl.identity(n)
        for i in range(k):
            if (mask >> i) & 1:
                acc = pl.multiply(acc, gens[i])
        if acc.is_identity:
            if acc.sign == -1:
                raise StabilizerError("inconsistent generator signs: -I is generated")
            break
    raise StabilizerError("generators are not independent")


def state_stabilizer(state: QuantumState, tol: float = 1e-6) -> StabilizerGroup:
    """Recover the stabilizer group of a stabilizer state by screening all 4^N Paulis."""
    n = state.n_qubits
    if n > 6:
        raise StabilizerError("stabilizer screening is limited to N <= 6")
    hits = []
    for p in pl.all_paulis(n):
        v = expectation(state, p)
        if abs(abs(v) - 1.0) < tol:
            hits.append(p if v > 0 else p.negate())
    if len(hits) != 1 << n:
        raise StabilizerError(
            f"not a stabilizer state: {len(hits)} of {1 << n} required stabilizers found"
        )
    gens: list[PauliOperator] = []
    for h in hits:
        if h.is_identity:
            continue
        if gf2_rank(gens + [h]) > len(gens):
            gens.append(h)
        if len(gens) == n:
            break
    return group_from_generators(gens)


@dataclass(frozen=True)
class Eigenspace:
    projector: np.ndarray
    rank: int
    state: QuantumState  # projector / rank
    pure: QuantumState | None


def joint_eigenprojector(rows: Sequence[PauliOperator], lambdas: Sequence[int]) -> Eigenspace:
    """Projector onto the joint eigenspace ``O_i = lambda_i`` of commuting rows."""
    if len(rows) != len(lambdas):
        raise StabilizerError("one eigenvalue per row is required")
    if any(l not in (1, -1) for l in lambdas):
        raise StabilizerError("eigenvalues must be +1 or -1")
    n = rows[0].n_qubits
    for i, a in enumerate(rows):
        for b in rows[i + 1:]:
            if not pl.commutes(a, b):
                raise StabilizerError(f"rows {a} and {b} anticommute")
    d = 1 << n
    proj = np.eye(d, dtype=complex)
    for r, lam in zip(rows, lambdas):
        proj = proj @ (np.eye(d) + lam * r.to_matrix()) / 2
    rank_f = np.trace(proj).real
    rank = int(round(rank_f))
    if rank == 0:
        raise EmptyEigenspaceError(
            f"empty eigenspace: eigenvalues {list(lambdas)} are inconsistent with the rows"
        )
    expected = 1 << (n - gf2_rank(rows))
    if rank != expected:
        raise StabilizerError(f"eigenspace rank {rank} differs from 2^(N-k) = {expected}")
    proj = (proj + proj.conj().T) / 2
    mixed = QuantumState(n, proj / rank)
    pure = None
    if rank == 1:
        w, v = np.linalg.eigh(proj)
        vec = v[:, -1]
        k = int(np.argmax(np.abs(vec) > 1e-9))
        vec = vec * (abs(vec[k]) / vec[k])
        pure = QuantumState(n, vec / np.linalg.norm(vec))
    return Eigenspace(proj, rank, mixed, pure)
