"""Bell parameter, LHVT bounds, fidelity lower bounds, witnesses and noise tolerance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import pauli as pl
from .ids import IdTable
from .stabilizer import joint_eigenprojector
from .states import QuantumState, bipartitions, schmidt_spectrum


class CertificationError(ValueError):
    pass


def _quadrature(sigmas: Sequence[float] | None, scale: float = 1.0) -> float:
    if sigmas is None:
        return 0.0
    return scale * math.sqrt(sum(float(s) ** 2 for s in sigmas))


def _clamp01(v: float) -> float:
    return max(0.0, min(1.0, v))


@dataclass(frozen=True)
class BellResult:
    m: int
    lambdas: tuple[int, ...]
    alpha_qm: float
    alpha_lhvt: float | None  # None when the ID gives no Bell inequality
    alpha_exp: float
    sigma: float

    @property
    def violation_sigmas(self) -> float | None:
        if self.alpha_lhvt is None or self.sigma <= 0:
            return None
        return (self.alpha_exp - self.alpha_lhvt) / self.sigma

    @property
    def violates(self) -> bool:
        return self.alpha_lhvt is not None and self.alpha_exp > self.alpha_lhvt

    def to_json(self) -> dict:
        return {
            "qm": self.alpha_qm,
            "lhvt": self.alpha_lhvt,
            "exp": self.alpha_exp,
            "sigma": self.sigma,
            "violation_sigmas": self.violation_sigmas,
        }


@dataclass(frozen=True)
class FidelityBound:
    method: str
    value: float
    sigma: float = 0.0
    subspace_rank: int = 1  # > 1: bound on the weight of a rank-r eigenspace
    inputs: tuple[float, ...] = ()

    @property
    def clamped(self) -> float:
        return _clamp01(self.value)

    def to_json(self) -> dict:
        out = {"value": self.value, "sigma": self.sigma, "clamped": self.clamped}
        if self.subspace_rank > 1:
            out["subspace_rank"] = self.subspace_rank
        return out


@dataclass(frozen=True)
class WitnessBound:
    class_label: str
    gamma: float
    source: str  # "analytic_bipartition" | "numeric" | "given"
    betas: dict = field(default_factory=dict)  # bipartition label -> beta


@dataclass(frozen=True)
class NoiseTolerance:
    m: int
    gamma: float
    rank: int
    p_max: float


def resolve_lambdas(id_table: IdTable, lambdas: Sequence[int] | None) -> tuple[int, ...]:
    if lambdas is None:
        lambdas = getattr(id_table, "lambdas", None)
    if lambdas is None:
        raise CertificationError("target eigenvalues (lambdas) are required for this ID")
    lam = tuple(int(l) for l in lambdas)
    if len(lam) != id_table.m or any(l not in (1, -1) for l in lam):
        raise CertificationError(f"need {id_table.m} eigenvalues in {{+1, -1}}")
    if math.prod(lam) != id_table.sign:
        raise CertificationError(
            f"eigenvalue product {math.prod(lam):+d} differs from the ID sign {id_table.sign:+d}"
        )
    return lam


def bell_parameter(
    id_table: IdTable,
    lambdas: Sequence[int] | None,
    expectations: Sequence[float],
    sigmas: Sequence[float] | None = None,
) -> BellResult:
    """``alpha = sum_i lambda_i <O_i>`` with quadrature error propagation."""
    lam = resolve_lambdas(id_table, lambdas)
    if len(expectations) != id_table.m or any(e is None for e in expectations):
        raise CertificationError(f"need one expectation per ID row ({id_table.m})")
    if sigmas is not None and len(sigmas) != id_table.m:
        raise CertificationError("need one uncertainty per ID row")
    alpha = float(sum(l * e for l, e in zip(lam, expectations)))
    lhvt = float(id_table.m - 2) if (id_table.is_whole and id_table.is_negative) else None
    return BellResult(id_table.m, lam, float(id_table.m), lhvt, alpha, _quadrature(sigmas))


def lhvt_bound(id_table: IdTable) -> int:
    if not (id_table.is_whole and id_table.is_negative):
        raise CertificationError("the ID Bell inequality needs a whole negative ID")
    return id_table.m - 2


def lhvt_max_bruteforce(id_table: IdTable, lambdas: Sequence[int]) -> float:
    """Maximum of ``sum lambda_i prod_q v(q, o_q)`` over all +-1 value assignments.

    Every qubit gets independent values for X, Y and Z (``2**(3N)``
    assignments in total); the value of a row is the product of the values of
    its letters.
    """
    n = id_table.n_qubits
    if n > 5:
        raise CertificationError("brute force limited to N <= 5")
    lam = np.array([int(l) for l in lambdas])
    if lam.shape != (id_table.m,):
        raise CertificationError("one eigenvalue per row is required")
    col = {"X": 0, "Y": 1, "Z": 2}
    # bit (3q + col) of an assignment index is 1 when that observable is -1
    row_masks = []
    for r in id_table.rows:
        mask = 0
        for q in range(n):
            ch = pl.letter(r, q)
            if ch != "I":
                mask |= 1 << (3 * q + col[ch])
        row_masks.append(mask)
    assign = np.arange(1 << (3 * n), dtype=np.int64)
    total = np.zeros(assign.shape, dtype=np.int64)
    for l, mask in zip(lam, row_masks):
        par = np.zeros(assign.shape, dtype=np.int64)
        sel = assign & mask
        for b in range(3 * n):
            par ^= (sel >> b) & 1
        total += l * (1 - 2 * par)
    return float(total.max())


def fidelity_bound_id(alpha_exp: float, m: int, sigma: float = 0.0, rank: int = 1) -> FidelityBound:
    """``F_ID = (alpha - M + 4) / 4``; with ``rank > 1`` it bounds the eigenspace weight."""
    if m < 2:
        raise CertificationError("an ID has at least two rows")
    return FidelityBound("id", (alpha_exp - m + 4) / 4, sigma / 4, rank, (alpha_exp,))


def fidelity_bound_gosg(values: Sequence[float], sigmas: Sequence[float] | None = None,
                        n_qubits: int | None = None) -> FidelityBound:
    """Generator bound ``(sum_n a_n - N + 2) / 2`` from N generator expectations."""
    n = len(values)
    if n_qubits is not None and n != n_qubits:
        raise CertificationError(f"expected {n_qubits} generator expectations, got {n}")
    if n == 0:
        raise CertificationError("no generator expectations given")
    return FidelityBound("gosg", (sum(values) - n + 2) / 2, _quadrature(sigmas, 0.5),
                         inputs=tuple(values))


def fidelity_sg(values: Sequence[float], sigmas: Sequence[float] | None = None) -> FidelityBound:
    """Projector average ``2**-N sum_S <S>`` over the full stabilizer group."""
    k = len(values)
    if k < 2 or k & (k - 1):
        raise CertificationError(f"need 2^N stabilizer expectations, got {k}")
    return FidelityBound("sg", float(sum(values)) / k, _quadrature(sigmas, 1.0 / k),
                         inputs=tuple(values))


@dataclass(frozen=True)
class IdGosgComparison:
    difference: float
    f_id: float
    f_gosg: float
    best_value: float
    best_method: str  # "id" or "gosg:<dropped row index>"
    gosg_better: bool


def compare_id_gosg(a: Sequence[float], dependent: int = -1) -> IdGosgComparison:
    """Compare the ID bound with the generator bound on the same data.

    ``a`` are the sign-corrected expectations ``lambda_i <O_i>`` of an ID with
    ``M = N + 1`` rows; the row at index ``dependent`` plays the product of
    the other ``N`` generators.
    """
    a = [float(v) for v in a]
    m = len(a)
    if m < 3:
        raise CertificationError("need at least three expectations (M = N + 1 >= 3)")
    n = m - 1
    k = dependent % m
    gens = [v for i, v in enumerate(a) if i != k]
    diff = ((a[k] - 1) + (n - sum(gens))) / 4
    f_id = fidelity_bound_id(sum(a), m).value
    f_g = fidelity_bound_gosg(gens).value
    best_value, best_method = f_id, "id"
    for i in range(m):
        v = fidelity_bound_gosg([x for j, x in enumerate(a) if j != i]).value
        if v > best_value:
            best_value, best_method = v, f"gosg:{i}"
    e = [1 - v for v in a]
    return IdGosgComparison(diff, f_id, f_g, best_value, best_method,
                            sum(e[i] for i in range(m) if i != k) < e[k])


def _cut_label(mask: int, n: int) -> str:
    left = "".join(str(q + 1) for q in range(n) if (mask >> q) & 1)
    right = "".join(str(q + 1) for q in range(n) if not (mask >> q) & 1)
    return f"{left}|{right}"


def witness_gamma_analytic(
    id_table: IdTable,
    lambdas: Sequence[int] | None = None,
    target: QuantumState | None = None,
) -> WitnessBound:
    """Biseparable-class bound ``max_l (M - 4 + 4 max_m nu_m^2)`` over all cuts."""
    if target is None:
        lam = resolve_lambdas(id_table, lambdas)
        space = joint_eigenprojector(id_table.rows, lam)
        if space.pure is None:
            raise CertificationError(
                f"target eigenspace has rank {space.rank}; the analytic bound needs rank 1"
            )
        target = space.pure
    if not target.is_pure:
        raise CertificationError("the analytic bound needs a pure target state")
    n = target.n_qubits
    m = id_table.m
    betas = {}
    for cut in bipartitions(n):
        spec = schmidt_spectrum(target, cut)
        betas[_cut_label(cut, n)] = m - 4 + 4 * spec.max_squared
    return WitnessBound("biseparable", max(betas.values()), "analytic_bipartition", betas)


def witness_value(gamma: float, alpha_exp: float, sigma: float = 0.0) -> tuple[float, float]:
    """``<W> = gamma - alpha``; negative values exclude the class."""
    return gamma - alpha_exp, sigma


def witness_fidelity_relation(gamma: float, witness: float, m: int) -> float:
    return (gamma - witness - m + 4) / 4


def noise_tolerance(m: int, gamma: float, rank: int = 1) -> NoiseTolerance:
    """Largest white-noise weight for which the witness stays negative."""
    if gamma > m:
        raise CertificationError(f"gamma {gamma} exceeds M = {m}")
    if gamma < 0:
        raise CertificationError("gamma must be nonnegative")
    if rank < 1:
        raise CertificationError("eigenspace rank must be >= 1")
    num = rank * (m - gamma)
    den = num + gamma
    p = 1.0 if den == 0 else num / den
    return NoiseTolerance(m, gamma, rank, p)


@dataclass(frozen=True)
class NonlocalFidelity:
    value: float
    trace: str


def min_nonlocal_fidelity(m: int = 5) -> NonlocalFidelity:
    """Fidelity bound at the LHVT threshold ``alpha = M - 2``; independent of ``M``."""
    v = fidelity_bound_id(m - 2, m).value
    return NonlocalFidelity(v, f"alpha = M - 2 = {m - 2}: F = ({m - 2} - {m} + 4)/4 = {v}")
