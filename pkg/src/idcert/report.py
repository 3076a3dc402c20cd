"""Assemble Bell, fidelity, witness and noise-tolerance results for one dataset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import certify as cf
from . import pauli as pl
from . import states as st
from .ids import IdTable, find_ids_in_group
from .measurement import (
    CoverageError,
    Dataset,
    ExactDataset,
    ExperimentDataset,
    linear_inversion_tomography,
    missing_tomography_settings,
    plan_settings,
    poisson_mc,
)
from .pauli import PauliOperator
from .stabilizer import StabilizerError, state_stabilizer
from .states import QuantumState


@dataclass
class WitnessResult:
    class_label: str
    gamma: float
    source: str
    value: float
    sigma: float

    @property
    def excluded(self) -> bool:
        return self.value < 0

    def to_json(self) -> dict:
        return {"class": self.class_label, "gamma": self.gamma, "source": self.source,
                "value": self.value, "sigma": self.sigma}


@dataclass
class CertReport:
    state: str
    id_table: IdTable
    lambdas: tuple[int, ...]
    row_estimates: list
    bell: cf.BellResult
    fidelity: dict  # method -> FidelityBound or None
    witnesses: list[WitnessResult]
    noise_tolerance: cf.NoiseTolerance | None
    settings: list[str]
    tomography_min_eigenvalue: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        fid = {k: (None if v is None else v.to_json()) for k, v in self.fidelity.items()}
        out = {
            "state": self.state,
            "id": self.id_table.to_json(self.lambdas) | {"label": self.id_table.label},
            "alpha": self.bell.to_json(),
            "fidelity": fid,
            "witnesses": [w.to_json() for w in self.witnesses],
            "noise_tolerance": None if self.noise_tolerance is None else self.noise_tolerance.p_max,
            "min_settings": self.settings,
        }
        if self.tomography_min_eigenvalue is not None:
            out["tomography_min_eigenvalue"] = self.tomography_min_eigenvalue
        if self.notes:
            out["notes"] = self.notes
        return out

    def summary(self) -> str:
        b = self.bell
        lines = [f"state {self.state}; {self.id_table.label} "
                 f"({', '.join(pl.format_pauli(r) for r in self.id_table.rows)})"]
        head = f"alpha = {b.alpha_exp:.3f} +- {b.sigma:.3f} (quantum {b.alpha_qm:g}"
        if b.alpha_lhvt is None:
            lines.append(head + "); no LHVT bound for a partial or positive ID")
        else:
            head += f", LHVT {b.alpha_lhvt:g})"
            ns = b.violation_sigmas
            if b.violates:
                tail = f": violation by {ns:.1f}σ" if ns is not None else ": violation"
            else:
                tail = ": no violation"
            lines.append(head + tail)
        for name, fb in self.fidelity.items():
            if fb is None:
                continue
            flag = f" (eigenspace rank {fb.subspace_rank})" if fb.subspace_rank > 1 else ""
            err = f" +- {fb.sigma:.4f}" if name != "tomography" else " (no error estimate)"
            lines.append(f"F_{name} = {fb.value:.4f}{err}{flag}")
        for w in self.witnesses:
            verdict = "excluded" if w.excluded else "not excluded"
            lines.append(f"witness {w.class_label} (gamma {w.gamma:.4g}, {w.source}): "
                         f"<W> = {w.value:+.3f} +- {w.sigma:.3f}, {verdict}")
        if self.noise_tolerance is not None:
            lines.append(f"noise tolerance p < {self.noise_tolerance.p_max:.4f}")
        lines.append(f"settings needed: {len(self.settings)} ({', '.join(self.settings)})")
        lines.extend(self.notes)
        return "\n".join(lines)


def target_lambdas(id_table: IdTable, target: QuantumState, tol: float = 1e-6) -> tuple[int, ...]:
    lam = []
    for r in id_table.rows:
        v = st.expectation(target, r)
        if abs(abs(v) - 1) > tol:
            raise cf.CertificationError(f"target is not an eigenstate of {pl.format_pauli(r)}")
        lam.append(1 if v > 0 else -1)
    return tuple(lam)


def _missing(dataset: Dataset, rows: Sequence[PauliOperator]) -> list[str]:
    return ["".join(c if c != "I" else "*" for c in r.letters)
            for r in rows if not dataset.covers(r)]


def auto_select_id(dataset: Dataset, target: QuantumState, m_max: int | None = None) -> IdTable:
    """Pick the covered entangled ID of the target group with the largest alpha.

    Whole negative IDs (those with a Bell inequality) are preferred.
    """
    n = target.n_qubits
    group = state_stabilizer(target)
    m_max = m_max or n + 1
    cands = find_ids_in_group(group, m_max, entangled=True)
    cands = [t for t in cands if not _missing(dataset, t.rows)]
    if not cands:
        raise CoverageError("no entangled ID of the target is covered by the dataset")
    bell = [t for t in cands if t.is_whole and t.is_negative]
    pool = bell or cands

    def value(r):
        if isinstance(dataset, ExperimentDataset):
            return dataset.raw_expectation(r)
        return dataset.expectation(r).value

    # candidates arrive sorted, and max keeps the first of equal scores
    return max(pool, key=lambda t: sum(l * value(r) for l, r in zip(t.lambdas, t.rows)))


def certification_report(
    dataset: Dataset,
    target: QuantumState,
    id_table: IdTable,
    *,
    state_label: str = "target",
    generators: Sequence[PauliOperator | str] | None = None,
    witnesses: Sequence[Mapping] = (),
    alpha_sigma: float | None = None,
    cycles: int = 100,
    rng_seed: int = 0,
) -> CertReport:
    """Everything the data certify about ``target`` through ``id_table``.

    ``witnesses`` adds cached class bounds (``{"class", "gamma", "source"}``)
    next to the analytic biseparable one.  ``alpha_sigma`` overrides the
    propagated uncertainty of alpha (for published values).
    """
    if id_table.n_qubits != target.n_qubits or dataset.n_qubits != target.n_qubits:
        raise cf.CertificationError("dataset, target and ID disagree on the qubit count")
    missing = _missing(dataset, id_table.rows)
    if missing:
        raise CoverageError(f"dataset does not cover ID rows: {', '.join(missing)}", missing)
    lam = id_table.lambdas or target_lambdas(id_table, target)
    m = id_table.m
    counts = isinstance(dataset, ExperimentDataset)
    ests = [dataset.expectation(r, rng_seed=rng_seed, cycles=cycles) for r in id_table.rows]

    if counts:
        def alpha_of(arrays):
            return sum(l * dataset.raw_expectation(r, arrays) for l, r in zip(lam, id_table.rows))
        sig = poisson_mc(dataset, alpha_of, cycles, rng_seed)
        bell = cf.bell_parameter(id_table, lam, [e.value for e in ests])
        bell = cf.BellResult(bell.m, bell.lambdas, bell.alpha_qm, bell.alpha_lhvt,
                             bell.alpha_exp, sig)
    else:
        bell = cf.bell_parameter(id_table, lam, [e.value for e in ests], [e.sigma for e in ests])
    if alpha_sigma is not None:
        bell = cf.BellResult(bell.m, bell.lambdas, bell.alpha_qm, bell.alpha_lhvt,
                             bell.alpha_exp, float(alpha_sigma))

    notes = []
    fid: dict = {"id": cf.fidelity_bound_id(bell.alpha_exp, m, bell.sigma, id_table.eigenspace_rank)}

    group = None
    try:
        group = state_stabilizer(target)
    except StabilizerError:
        notes.append("target is not a stabilizer state; GoSG and SG bounds skipped")

    fid["gosg"] = None
    if group is not None:
        gens = ([pl.parse_pauli(g) if isinstance(g, str) else g for g in generators]
                if generators else list(group.generators))
        signed = [group.signed(g) for g in gens]
        if any(s is None for s in signed):
            raise cf.CertificationError("GoSG generators must belong to the target group")
        if not _missing(dataset, signed):
            fid["gosg"] = _bound(dataset, signed, counts, cycles, rng_seed,
                                 lambda v: cf.fidelity_bound_gosg(v, n_qubits=target.n_qubits))

    fid["sg"] = None
    if group is not None and not _missing(dataset, group.nonidentity()):
        fid["sg"] = _bound(dataset, list(group.elements), counts, cycles, rng_seed,
                           cf.fidelity_sg)

    tomo_min = None
    if counts and not missing_tomography_settings(dataset) and target.is_pure:
        tomo = linear_inversion_tomography(dataset)
        fid["tomography"] = cf.FidelityBound("tomography", tomo.fidelity(target))
        tomo_min = tomo.min_eigenvalue

    wits = []
    analytic = None
    if id_table.eigenspace_rank == 1:
        analytic = cf.witness_gamma_analytic(id_table, lam)
        wits.append(WitnessResult("biseparable", analytic.gamma, analytic.source,
                                  *cf.witness_value(analytic.gamma, bell.alpha_exp, bell.sigma)))
    for w in witnesses:
        g = float(w["gamma"])
        wits.append(WitnessResult(str(w["class"]), g, str(w.get("source", "given")),
                                  *cf.witness_value(g, bell.alpha_exp, bell.sigma)))

    tol = None
    if analytic is not None:
        tol = cf.noise_tolerance(m, min(analytic.gamma, m), id_table.eigenspace_rank)

    return CertReport(state_label, id_table, tuple(lam), ests, bell, fid, wits, tol,
                      plan_settings(id_table), tomo_min, notes)


def _bound(dataset, signed_rows, counts, cycles, rng_seed, fn) -> cf.FidelityBound:
    ests = [dataset.expectation(r, rng_seed=rng_seed, cycles=cycles) for r in signed_rows]
    fb = fn([e.value for e in ests])
    if counts:
        sig = poisson_mc(dataset,
                         lambda arrays: fn([dataset.raw_expectation(r, arrays)
                                            for r in signed_rows]).value,
                         cycles, rng_seed)
    else:
        scale = {"gosg": 0.5, "sg": 1.0 / len(signed_rows)}[fb.method]
        sig = scale * float(np.sqrt(sum(e.sigma ** 2 for e in ests)))
    return cf.FidelityBound(fb.method, fb.value, sig, fb.subspace_rank, fb.inputs)
