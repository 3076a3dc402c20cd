"""Signed N-qubit Pauli operators in binary symplectic form.

An operator is stored as ``i**phase * prod_q X_q**x_q Z_q**z_q`` with qubit
``q`` (0-based) held in bit ``q`` of the integers ``x`` and ``z``.  Since
``Y = i X Z`` a Hermitian ``+Y`` carries one unit of phase per Y letter.

User-facing text is the canonical form ``[+-]?[IXYZ]{N}``; position 1 of the
string is qubit 1 (bit 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 64

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}

_PAULI_MATS = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
    # X^1 Z^1 (not Y): the phase is carried separately
    (1, 1): np.array([[0, -1], [1, 0]], dtype=complex),
}


class PauliError(ValueError):
    """Raised for malformed Pauli strings or incompatible operands."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOperator:
    n_qubits: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise PauliError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        mask = (1 << self.n_qubits) - 1
        if self.x & ~mask or self.z & ~mask:
            raise PauliError("bit vectors wider than n_qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- derived quantities -------------------------------------------------

    @property
    def coefficient_exp(self) -> int:
        """Exponent ``e`` such that the operator is ``i**e`` times the Hermitian letter string."""
        return (self.phase - _popcount(self.x & self.z)) % 4

    @property
    def is_hermitian(self) -> bool:
        return self.coefficient_exp in (0, 2)

    @property
    def sign(self) -> int:
        e = self.coefficient_exp
        if e == 0:
            return 1
        if e == 2:
            return -1
        raise PauliError(f"{self!r} is not Hermitian")

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_LETTER[(self.x >> q) & 1, (self.z >> q) & 1] for q in range(self.n_qubits)
        )

    def unsigned(self) -> PauliOperator:
        """The same letter string with sign +1."""
        return PauliOperator(self.n_qubits, self.x, self.z, _popcount(self.x & self.z))

    def negate(self) -> PauliOperator:
        return PauliOperator(self.n_qubits, self.x, self.z, self.phase + 2)

    def __neg__(self) -> PauliOperator:
        return self.negate()

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        e = self.coefficient_exp
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[e]
        return f"PauliOperator({prefix}{self.letters})"

    def to_matrix(self) -> np.ndarray:
        """Dense ``2**N x 2**N`` matrix; qubit 1 is the most significant tensor factor."""
        if self.n_qubits > 12:
            raise PauliError("dense matrix requested for more than 12 qubits")
        m = np.ones((1, 1), dtype=complex)
        for q in range(self.n_qubits):
            m = np.kron(m, _PAULI_MATS[(self.x >> q) & 1, (self.z >> q) & 1])
        return (1j ** self.phase) * m


def parse_pauli(text: str) -> PauliOperator:
    """Parse ``"XYZI"``, ``"+XX"`` or ``"-IZYY"`` into a Hermitian operator."""
    s = text.strip()
    sign_phase = 0
    offset = 0
    if s and s[0] in "+-":
        sign_phase = 2 if s[0] == "-" else 0
        s = s[1:]
        offset = 1
    if not s:
        raise PauliError(f"empty Pauli string {text!r}")
    x = z = 0
    for q, ch in enumerate(s.upper()):
        try:
            xb, zb = _LETTER_BITS[ch]
        except KeyError:
            raise PauliError(
                f"invalid Pauli letter {s[q]!r} at position {q + 1 + offset} in {text!r}"
            ) from None
        x |= xb << q
        z |= zb << q
    return PauliOperator(len(s), x, z, sign_phase + _popcount(x & z))


def format_pauli(p: PauliOperator, plus: bool = False) -> str:
    """Canonical text; ``-`` prefix for negative operators, ``+`` only when asked."""
    e = p.coefficient_exp
    prefix = {0: "+" if plus else "", 1: "i", 2: "-", 3: "-i"}[e]
    return prefix + p.letters


def identity(n_qubits: int) -> PauliOperator:
    return PauliOperator(n_qubits, 0, 0, 0)


def _check_width(a: PauliOperator, b: PauliOperator) -> None:
    if a.n_qubits != b.n_qubits:
        raise PauliError(f"width mismatch: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    _check_width(a, b)
    # Z^{z_a} X^{x_b} = (-1)^{z_a . x_b} X^{x_b} Z^{z_a}
    phase = a.phase + b.phase + 2 * _popcount(a.z & b.x)
    return PauliOperator(a.n_qubits, a.x ^ b.x, a.z ^ b.z, phase)


def product(ops: Iterable[PauliOperator]) -> PauliOperator:
    it = iter(ops)
    try:
        acc = next(it)
    except StopIteration:
        raise PauliError("product of an empty sequence") from None
    for p in it:
        acc = multiply(acc, p)
    return acc


def symplectic(a: PauliOperator, b: PauliOperator) -> int:
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) & 1


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    _check_width(a, b)
    return symplectic(a, b) == 0


def restrict(p: PauliOperator, qubits: int | Sequence[int]) -> PauliOperator:
    """Keep only the selected qubits (0-based indices or a bit mask).

    The result is the unsigned letter string on the kept qubits; the sign of
    ``p`` stays with the caller.
    """
    if isinstance(qubits, int):
        mask = qubits & ((1 << p.n_qubits) - 1)
        idx = [q for q in range(p.n_qubits) if (mask >> q) & 1]
    else:
        idx = sorted(set(qubits))
        if any(q < 0 or q >= p.n_qubits for q in idx):
            raise PauliError("qubit index out of range")
    if not idx:
        raise PauliError("restriction to an empty qubit subset")
    x = z = 0
    for k, q in enumerate(idx):
        x |= ((p.x >> q) & 1) << k
        z |= ((p.z >> q) & 1) << k
    return PauliOperator(len(idx), x, z, _popcount(x & z))


def weight(p: PauliOperator) -> int:
    return _popcount(p.support)


def letter(p: PauliOperator, q: int) -> str:
    return _BITS_LETTER[(p.x >> q) & 1, (p.z >> q) & 1]


def all_paulis(n_qubits: int):
    """Every unsigned N-qubit Pauli string, identity first."""
    for x in range(1 << n_qubits):
        for z in range(1 << n_qubits):
            yield PauliOperator(n_qubits, x, z, _popcount(x & z))


def mask_from_qubits(qubits: Iterable[int]) -> int:
    """1-based qubit labels to a bit mask."""
    m = 0
    for q in qubits:
        m |= 1 << (q - 1)
    return m
