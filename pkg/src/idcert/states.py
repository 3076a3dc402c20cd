"""Dense pure states and density matrices on at most ``MAX_DENSE_QUBITS`` qubits.

Basis index convention: qubit 1 is the most significant bit, so ``|0011>``
has index 3 and qubit 1 is the leftmost ket label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pauli import PauliOperator

MAX_DENSE_QUBITS = 10
TOL = 1e-10
UNITARY_TOL = 1e-8


class StateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state (1-D amplitude vector) or density matrix (2-D)."""

    n_qubits: int
    data: np.ndarray

    def __post_init__(self):
        n = self.n_qubits
        if not 1 <= n <= MAX_DENSE_QUBITS:
            raise StateError(f"dense states support 1..{MAX_DENSE_QUBITS} qubits, got {n}")
        d = 1 << n
        arr = np.asarray(self.data, dtype=complex)
        if arr.ndim == 1:
            if arr.shape != (d,):
                raise StateError(f"expected {d} amplitudes, got {arr.shape[0]}")
            if abs(np.linalg.norm(arr) - 1.0) > TOL:
                raise StateError("pure state is not normalized")
        elif arr.ndim == 2:
            if arr.shape != (d, d):
                raise StateError(f"expected a {d}x{d} density matrix")
            if not np.allclose(arr, arr.conj().T, atol=TOL):
                raise StateError("density matrix is not Hermitian")
            if abs(np.trace(arr).real - 1.0) > TOL:
                raise StateError("density matrix trace differs from 1")
        else:
            raise StateError("state data must be a vector or a matrix")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def kind(self) -> str:
        return "pure" if self.data.ndim == 1 else "mixed"

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.density_matrix())[0])

    @classmethod
    def from_vector(cls, vec: Sequence[complex], normalize: bool = False) -> QuantumState:
        v = np.asarray(vec, dtype=complex)
        n = int(round(math.log2(v.shape[0])))
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(n, v)

    @classmethod
    def from_density_matrix(cls, rho: np.ndarray) -> QuantumState:
        rho = np.asarray(rho, dtype=complex)
        n = int(round(math.log2(rho.shape[0])))
        return cls(n, rho)


@dataclass(frozen=True)
class SchmidtSpectrum:
    bipartition: int  # bit mask of the first side, bit q = qubit q+1
    coefficients: np.ndarray

    @property
    def max_squared(self) -> float:
        return float(self.coefficients[0] ** 2)


def _basis_index(bits: str) -> int:
    if not bits or any(c not in "01" for c in bits):
        raise StateError(f"invalid basis bitstring {bits!r}")
    return int(bits, 2)


def _ket_sum(n: int, terms: Mapping[str, complex]) -> QuantumState:
    v = np.zeros(1 << n, dtype=complex)
    for bits, amp in terms.items():
        v[_basis_index(bits)] += amp
    return QuantumState(n, v / np.linalg.norm(v))


def ghz(n: int) -> QuantumState:
    return _ket_sum(n, {"0" * n: 1, "1" * n: 1})


def w_state(n: int) -> QuantumState:
    return _ket_sum(n, {"0" * q + "1" + "0" * (n - q - 1): 1 for q in range(n)})


def basis_state(bits: str) -> QuantumState:
    return _ket_sum(len(bits), {bits: 1})


C_LIN_KETS = {"0000": 1, "0011": 1, "1100": 1, "1111": -1}
C_SHEAR_KETS = {"0000": 1, "0101": 1, "1010": 1, "1111": -1}
C_Z_KETS = {"0000": 1, "0110": 1, "1001": 1, "1111": -1}


def bell_product(pairing: Sequence[Sequence[int]], n: int | None = None) -> QuantumState:
    """Product of |phi+> pairs on the given 1-based qubit pairs; unpaired qubits in |0>."""
    used = [q for pair in pairing for q in pair]
    n = n or max(used)
    if len(set(used)) != len(used) or any(len(p) != 2 for p in pairing):
        raise StateError(f"invalid pairing {pairing!r}")
    if any(q < 1 or q > n for q in used):
        raise StateError("pairing refers to a qubit outside the register")
    terms: dict[str, complex] = {}
    for choice in range(1 << len(pairing)):
        bits = ["0"] * n
        for k, (a, b) in enumerate(pairing):
            if (choice >> k) & 1:
                bits[a - 1] = bits[b - 1] = "1"
        terms["".join(bits)] = 1
    return _ket_sum(n, terms)


def make_named_state(name: str, n: int | None = None, **kwargs) -> QuantumState:
    """Construct one of the catalogue states by name.

    Known names: ``ghz``, ``w`` (need ``n``), ``c_lin``, ``c_shear``, ``c_z``,
    ``bell_product`` (needs ``pairing``), ``basis`` (needs ``bits``),
    ``path_graph`` and ``ring_graph`` (need ``n``).
    """
    key = name.lower()
    if key == "ghz":
        return ghz(_need_n(n, name))
    if key == "w":
        return w_state(_need_n(n, name))
    if key == "c_lin":
        return _ket_sum(4, C_LIN_KETS)
    if key == "c_shear":
        return _ket_sum(4, C_SHEAR_KETS)
    if key == "c_z":
        return _ket_sum(4, C_Z_KETS)
    if key == "bell_product":
        return bell_product(kwargs["pairing"], n)
    if key == "basis":
        return basis_state(kwargs["bits"])
    if key == "path_graph":
        return make_graph_state(path_adjacency(_need_n(n, name)))
    if key == "ring_graph":
        return make_graph_state(ring_adjacency(_need_n(n, name)))
    raise StateError(f"unknown state name {name!r}")


def _need_n(n, name):
    if n is None or n < 1:
        raise StateError(f"state {name!r} requires a qubit count n >= 1")
    return int(n)


def path_adjacency(n: int) -> np.ndarray:
    a = np.zeros((n, n), dtype=int)
    for q in range(n - 1):
        a[q, q + 1] = a[q + 1, q] = 1
    return a


def ring_adjacency(n: int) -> np.ndarray:
    a = path_adjacency(n)
    if n > 2:
        a[0, n - 1] = a[n - 1, 0] = 1
    return a


def validate_adjacency(adjacency) -> np.ndarray:
    a = np.asarray(adjacency, dtype=int)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StateError("adjacency must be a square matrix")
    if not np.array_equal(a, a.T):
        raise StateError("adjacency matrix is not symmetric")
    if np.any(np.diag(a) != 0):
        raise StateError("adjacency matrix has self loops")
    if not np.all((a == 0) | (a == 1)):
        raise StateError("adjacency entries must be 0 or 1")
    return a


def make_graph_state(adjacency) -> QuantumState:
    """|+>^N followed by a controlled-Z on every edge."""
    a = validate_adjacency(adjacency)
    n = a.shape[0]
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    # CZ phase is (-1)^{sum_{edges} b_i b_j}
    edge_count = np.einsum("ki,ij,kj->k", bits, np.triu(a), bits)
    amps = np.where(edge_count % 2 == 0, 1.0, -1.0) / math.sqrt(1 << n)
    return QuantumState(n, amps.astype(complex))


def _index_masks(obs: PauliOperator) -> tuple[int, int]:
    """Pauli x/z masks re-expressed in basis-index bit order (qubit 1 = MSB)."""
    n = obs.n_qubits
    xm = zm = 0
    for q in range(n):
        if (obs.x >> q) & 1:
            xm |= 1 << (n - 1 - q)
        if (obs.z >> q) & 1:
            zm |= 1 << (n - 1 - q)
    return xm, zm


_PARITY_CACHE: dict[int, np.ndarray] = {}


def _parity_table(n: int) -> np.ndarray:
    tab = _PARITY_CACHE.get(n)
    if tab is None:
        idx = np.arange(1 << n, dtype=np.int64)
        tab = np.zeros(1 << n, dtype=np.int8)
        for b in range(n):
            tab ^= ((idx >> b) & 1).astype(np.int8)
        _PARITY_CACHE[n] = tab
    return tab


def pauli_action(obs: PauliOperator) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(perm, coeff)`` with ``P|b> = coeff[b] |perm[b]>``."""
    n = obs.n_qubits
    xm, zm = _index_masks(obs)
    idx = np.arange(1 << n)
    par = _parity_table(n)[idx & zm]
    coeff = (1j ** obs.phase) * np.where(par == 0, 1.0, -1.0)
    return idx ^ xm, coeff


def expectation(state: QuantumState, obs: PauliOperator) -> float:
    if obs.n_qubits != state.n_qubits:
        raise StateError(f"observable acts on {obs.n_qubits} qubits, state has {state.n_qubits}")
    if not obs.is_hermitian:
        raise StateError(f"observable {obs!r} is not Hermitian")
    perm, coeff = pauli_action(obs)
    if state.is_pure:
        psi = state.data
        val = np.vdot(psi[perm], coeff * psi)
    else:
        rho = state.data
        val = np.sum(coeff * rho[np.arange(state.dim), perm])
    return float(val.real)


def fidelity(state: QuantumState, target: QuantumState) -> float:
    if not target.is_pure:
        raise StateError("fidelity target must be a pure state")
    if state.n_qubits != target.n_qubits:
        raise StateError("width mismatch")
    t = target.data
    if state.is_pure:
        return float(abs(np.vdot(t, state.data)) ** 2)
    return float(np.vdot(t, state.data @ t).real)


def schmidt_spectrum(state: QuantumState, side: int | Iterable[int]) -> SchmidtSpectrum:
    """Schmidt coefficients across the cut ``side | rest``.

    ``side`` is either a bit mask (bit q = qubit q+1) or an iterable of
    1-based qubit labels.
    """
    if not state.is_pure:
        raise StateError("Schmidt decomposition needs a pure state")
    n = state.n_qubits
    mask = side if isinstance(side, int) else sum(1 << (q - 1) for q in set(side))
    full = (1 << n) - 1
    if mask <= 0 or mask & ~full or mask == full:
        raise StateError("bipartition must be a proper nonempty subset of the qubits")
    first = [q for q in range(n) if (mask >> q) & 1]
    second = [q for q in range(n) if not (mask >> q) & 1]
    psi = state.data.reshape([2] * n).transpose(first + second)
    mat = psi.reshape(1 << len(first), 1 << len(second))
    sv = np.linalg.svd(mat, compute_uv=False)
    return SchmidtSpectrum(mask, np.sort(sv)[::-1])


def bipartitions(n: int) -> list[int]:
    """One mask per unordered proper cut; qubit 1 is always on the first side."""
    return [m for m in range(1, 1 << n) if m & 1 and m != (1 << n) - 1]


def depolarize(state: QuantumState, p: float) -> QuantumState:
    if not 0.0 <= p <= 1.0:
        raise StateError(f"depolarizing probability {p} outside [0, 1]")
    rho = (1.0 - p) * state.density_matrix() + p * np.eye(state.dim) / state.dim
    return QuantumState(state.n_qubits, rho)


def apply_local_unitaries(state: QuantumState, unitaries: Sequence[np.ndarray]) -> QuantumState:
    n = state.n_qubits
    if len(unitaries) != n:
        raise StateError(f"need {n} single-qubit unitaries, got {len(unitaries)}")
    us = []
    for q, u in enumerate(unitaries):
        u = np.asarray(u, dtype=complex)
        if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, np.eye(2), atol=UNITARY_TOL):
            raise StateError(f"factor for qubit {q + 1} is not a 2x2 unitary")
        us.append(u)
    if state.is_pure:
        psi = state.data.reshape([2] * n)
        for q, u in enumerate(us):
            psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [q])), 0, q)
        return QuantumState(n, psi.reshape(-1))
    full = np.ones((1, 1), dtype=complex)
    for u in us:
        full = np.kron(full, u)
    return QuantumState(n, full @ state.data @ full.conj().T)


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


def state_from_spec(spec: Mapping) -> QuantumState:
    """Build a state from its JSON description.

    Accepted forms: ``{"name": "ghz", "n": 3}`` (plus ``pairing`` / ``bits``
    where needed), ``{"graph": [[0, 1], [1, 0]]}`` and
    ``{"amplitudes": [[re, im], ...]}``.
    """
    if "amplitudes" in spec:
        amps = [complex(re, im) for re, im in spec["amplitudes"]]
        return QuantumState.from_vector(amps, normalize=bool(spec.get("normalize", False)))
    if "graph" in spec:
        return make_graph_state(spec["graph"])
    if "name" in spec:
        extra = {k: v for k, v in spec.items() if k not in ("name", "n")}
        return make_named_state(spec["name"], spec.get("n"), **extra)
    raise StateError("state spec needs one of 'name', 'graph' or 'amplitudes'")
