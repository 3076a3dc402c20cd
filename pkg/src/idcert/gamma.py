"""Numerical upper bounds on witness constants over local-unitary orbits.

For a class of states given by a seed state and its LU orbit, the bound is
``max sum_i |<psi(theta)|O_i|psi(theta)>|`` found by multistart Nelder-Mead
over ``3N`` Euler angles.  Because the objective dominates
``|sum_i lambda_i <O_i>|`` pointwise, the value bounds the Bell parameter
over the class from above (as far as the search reaches the true maximum).
"""

from __future__ import annotations

import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import states as st
from ._backend import kernels, python_kernels
from .ids import IdTable
from .pauli import PauliOperator
from .states import QuantumState

log = logging.getLogger(__name__)

DEFAULT_STARTS = 400
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 2000


class GammaError(ValueError):
    pass


@dataclass(frozen=True)
class StateClass:
    label: str
    seed: QuantumState

    @property
    def n_free_parameters(self) -> int:
        return 3 * self.seed.n_qubits


@dataclass
class GammaEstimate:
    class_label: str
    value: float
    best_parameters: np.ndarray
    n_starts: int
    n_converged: int
    best_start: int
    objective: str = "sum_abs"
    start_values: np.ndarray = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "class": self.class_label,
            "value": self.value,
            "best_parameters": [float(v) for v in self.best_parameters],
            "n_starts": self.n_starts,
            "n_converged": self.n_converged,
            "best_start": self.best_start,
            "objective": self.objective,
        }


# -- class labels -------------------------------------------------------------

_TOKEN = re.compile(r"(psi|phi|ghz|w)(\d+)|(c_lin|c_shear|c_z)", re.IGNORECASE)


def embed_factors(n: int, factors: Sequence[tuple[Sequence[int], QuantumState]]) -> QuantumState:
    """Tensor product of states placed on given 1-based qubits; the rest in |0>."""
    used: list[int] = []
    vec = np.ones(1, dtype=complex)
    for qubits, state in factors:
        if len(qubits) != state.n_qubits:
            raise GammaError(f"factor on qubits {qubits} has {state.n_qubits} qubits")
        used.extend(qubits)
        vec = np.kron(vec, state.data)
    rest = [q for q in range(1, n + 1) if q not in used]
    if len(set(used)) != len(used) or any(q < 1 or q > n for q in used):
        raise GammaError("factors overlap or leave the register")
    for _ in rest:
        vec = np.kron(vec, np.array([1, 0], dtype=complex))
    order = used + rest  # axis k of vec holds qubit order[k]
    psi = vec.reshape([2] * n)
    perm = [order.index(q) for q in range(1, n + 1)]
    return QuantumState(n, psi.transpose(perm).reshape(-1))


def class_from_label(label: str, n: int) -> StateClass:
    """Seed for labels such as ``"psi1 psi2 Phi34"``, ``"psi4 W123"`` or ``"C_lin"``.

    ``psi<q>`` is a free single-qubit factor, ``Phi<ab>`` a Bell pair,
    ``GHZ<...>`` / ``W<...>`` a GHZ / W state on the listed qubits, and
    ``C_lin``, ``C_shear``, ``C_Z`` the four-qubit cluster states.
    """
    pos = 0
    factors = []
    text = label.replace(" ", "")
    whole_state = None
    n_psi = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise GammaError(f"cannot parse class label {label!r} at {text[pos:]!r}")
        pos = m.end()
        if m.group(3):
            whole_state = st.make_named_state(m.group(3).lower())
            continue
        kind = m.group(1).lower()
        qubits = [int(c) for c in m.group(2)]
        if kind == "psi":
            if len(qubits) != 1:
                raise GammaError(f"psi factor must name one qubit: {m.group(0)}")
            n_psi += 1
            continue  # |0> on that qubit; the LU orbit covers all product factors
        if kind == "phi":
            if len(qubits) != 2:
                raise GammaError(f"Phi factor must name two qubits: {m.group(0)}")
            factors.append((qubits, st.bell_product([(1, 2)], 2)))
        elif kind == "ghz":
            factors.append((qubits, st.ghz(len(qubits))))
        else:
            factors.append((qubits, st.w_state(len(qubits))))
    if whole_state is not None:
        if factors or n_psi or whole_state.n_qubits != n:
            raise GammaError(f"cluster label {label!r} cannot be combined with factors")
        return StateClass(label, whole_state)
    return StateClass(label, embed_factors(n, factors))


def default_catalog(n: int = 4) -> list[str]:
    """Class labels in the order used by the reference tables (four qubits)."""
    if n != 4:
        raise GammaError("the built-in catalogue is defined for four qubits")
    return [
        "psi1 psi2 psi3 psi4",
        "psi1 psi2 Phi34", "psi1 psi3 Phi24", "psi1 psi4 Phi23",
        "psi2 psi3 Phi14", "psi2 psi4 Phi13", "psi3 psi4 Phi12",
        "Phi12 Phi34", "Phi13 Phi24", "Phi14 Phi23",
        "psi1 GHZ234", "psi2 GHZ134", "psi3 GHZ124", "psi4 GHZ123",
        "psi1 W234", "psi2 W134", "psi3 W124", "psi4 W123",
        "GHZ1234", "W1234", "C_shear", "C_Z", "C_lin",
    ]


def catalog_from_json(entries: Sequence, n: int) -> list[StateClass]:
    """Entries are labels or ``{"label": ..., "amplitudes": [[re, im], ...]}``."""
    out = []
    for e in entries:
        if isinstance(e, str):
            out.append(class_from_label(e, n))
        elif isinstance(e, Mapping) and "amplitudes" in e:
            seed = st.state_from_spec({"amplitudes": e["amplitudes"], "normalize": True})
            if seed.n_qubits != n:
                raise GammaError(f"custom seed {e.get('label')!r} has the wrong qubit count")
            out.append(StateClass(str(e.get("label", "custom")), seed))
        elif isinstance(e, Mapping) and "label" in e:
            out.append(class_from_label(e["label"], n))
        else:
            raise GammaError(f"malformed catalogue entry {e!r}")
    return out


# -- orbit and optimizer ------------------------------------------------------


def euler_unitary(a: float, b: float, c: float) -> np.ndarray:
    """``Rz(a) Ry(b) Rz(c)``."""
    rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    ry = np.array([[math.cos(b / 2), -math.sin(b / 2)], [math.sin(b / 2), math.cos(b / 2)]])
    return rz(a) @ ry @ rz(c)


def lu_orbit_state(seed: QuantumState, params: Sequence[float]) -> QuantumState:
    p = np.asarray(params, dtype=float)
    if p.shape != (3 * seed.n_qubits,) or not np.all(np.isfinite(p)):
        raise GammaError(f"need {3 * seed.n_qubits} finite Euler angles")
    return QuantumState(seed.n_qubits, kernels.lu_state(seed.data, p, seed.n_qubits))


def nelder_mead_max(objective: Callable[[np.ndarray], float], x0, tolerance: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER) -> tuple[np.ndarray, float]:
    """Local maximization of an arbitrary objective with the simplex method."""
    x, f, _, _ = python_kernels.nelder_mead_max(objective, x0, tolerance, max_iter)
    return x, f


def _row_actions(rows: Sequence[PauliOperator]):
    acts = [st.pauli_action(r) for r in rows]
    perms = np.array([a[0] for a in acts], dtype=np.int64)
    coeffs = np.array([a[1] for a in acts], dtype=complex)
    return perms, coeffs


def sum_abs_objective(rows: Sequence[PauliOperator], state: QuantumState) -> float:
    return float(sum(abs(st.expectation(state, r)) for r in rows))


def _start_point(rng_seed: int, start: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng([rng_seed, start])
    return rng.uniform(0.0, 2 * math.pi, dim)


def _run_starts(args):
    seed, perms, coeffs, n, rng_seed, starts, tol, max_iter = args
    out = []
    for s in starts:
        x0 = _start_point(rng_seed, s, 3 * n)
        x, f, _, conv = kernels.maximize_sum_abs(
            seed.real, seed.imag, perms, coeffs.real, coeffs.imag, n, x0, tol, max_iter
        )
        out.append((s, f, x, conv))
    return out


def gamma_numeric(
    id_table: IdTable | Sequence[PauliOperator],
    state_class: StateClass,
    n_starts: int = DEFAULT_STARTS,
    rng_seed: int = 0,
    *,
    tolerance: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> GammaEstimate:
    rows = id_table.rows if isinstance(id_table, IdTable) else tuple(id_table)
    n = rows[0].n_qubits
    if state_class.seed.n_qubits != n:
        raise GammaError(
            f"class {state_class.label!r} has {state_class.seed.n_qubits} qubits, ID has {n}"
        )
    if n_starts < 1:
        raise GammaError("need at least one start")
    if n_starts == 1:
        log.warning("a single start was requested; the upper bound may be loose")
    perms, coeffs = _row_actions(rows)
    seed = state_class.seed.data
    starts = list(range(n_starts))
    if workers > 1:
        chunks = [starts[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(
                _run_starts,
                [(seed, perms, coeffs, n, rng_seed, c, tolerance, max_iter) for c in chunks],
            )
            results = sorted((r for part in parts for r in part), key=lambda r: r[0])
    else:
        results = _run_starts((seed, perms, coeffs, n, rng_seed, starts, tolerance, max_iter))
    values = np.array([r[1] for r in results])
    best = int(np.argmax(values))
    return GammaEstimate(
        class_label=state_class.label,
        value=float(values[best]),
        best_parameters=results[best][2],
        n_starts=n_starts,
        n_converged=sum(1 for r in results if r[3]),
        best_start=results[best][0],
        start_values=values,
    )


def gamma_table(
    id_table: IdTable | Sequence[PauliOperator],
    classes: Sequence[StateClass | str],
    n_starts: int = DEFAULT_STARTS,
    rng_seed: int = 0,
    **kwargs,
) -> list[GammaEstimate]:
    rows = id_table.rows if isinstance(id_table, IdTable) else tuple(id_table)
    n = rows[0].n_qubits
    out = []
    for c in classes:
        sc = class_from_label(c, n) if isinstance(c, str) else c
        out.append(gamma_numeric(rows, sc, n_starts, rng_seed, **kwargs))
    return out


def format_gamma_table(estimates: Sequence[GammaEstimate]) -> str:
    width = max([len("State type")] + [len(e.class_label) for e in estimates])
    lines = [f"{'State type':<{width}} | gamma_C"]
    lines.append("-" * (width + 10))
    for e in estimates:
        lines.append(f"{e.class_label:<{width}} | {e.value:.4f}")
    return "\n".join(lines)
