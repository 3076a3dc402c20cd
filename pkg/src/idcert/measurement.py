"""Counts datasets, expectation values with Poisson errors, simulation and tomography.

Outcome strings hold one character per qubit (qubit 1 first); ``"0"`` means
the +1 eigenstate of that qubit's measurement basis was observed.

Two dataset flavours share the estimation interface:

* :class:`ExperimentDataset` holds raw coincidence counts per setting.
* :class:`ExactDataset` holds published expectation values with their errors
  (used when raw counts are unavailable).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import pauli as pl
from . import states as st
from .ids import IdTable, min_settings
from .pauli import PauliOperator
from .stabilizer import StabilizerGroup
from .states import QuantumState

log = logging.getLogger(__name__)

DEFAULT_MC_CYCLES = 100

_S_DAG = np.diag([1, -1j])
# maps the +1 eigenvector of each basis to |0>
BASIS_ROTATION = {
    "Z": st.IDENTITY2,
    "X": st.HADAMARD,
    "Y": st.HADAMARD @ _S_DAG,
}


class MeasurementError(ValueError):
    pass


class CoverageError(MeasurementError):
    """Raised when the data cannot estimate what was asked; ``missing`` lists what is needed."""

    def __init__(self, message: str, missing: Sequence[str] = ()):
        super().__init__(message)
        self.missing = list(missing)


def validate_setting(setting: str, n: int) -> str:
    s = setting.strip().upper()
    if len(s) != n or any(c not in "XYZ" for c in s):
        raise MeasurementError(f"setting {setting!r} must be {n} letters from X, Y, Z")
    return s


def _as_obs(obs: PauliOperator | str) -> PauliOperator:
    p = pl.parse_pauli(obs) if isinstance(obs, str) else obs
    if not p.is_hermitian:
        raise MeasurementError(f"observable {p!r} is not Hermitian")
    return p


def setting_matches(setting: str, obs: PauliOperator) -> bool:
    return all(setting[q] == c for q, c in enumerate(obs.letters) if c != "I")


def _outcome_mask(bits: str) -> int:
    return sum(1 << q for q, c in enumerate(bits) if c == "1")


@dataclass(frozen=True)
class CountsRecord:
    setting: str
    counts: Mapping[str, int]
    seconds: float | None = None

    @property
    def total(self) -> int:
        return int(sum(self.counts.values()))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Outcome masks (bit q = qubit q+1 read 1) and counts."""
        keys = sorted(self.counts)
        return (np.array([_outcome_mask(k) for k in keys], dtype=np.int64),
                np.array([self.counts[k] for k in keys], dtype=float))


def _check_record(rec: CountsRecord, n: int) -> CountsRecord:
    setting = validate_setting(rec.setting, n)
    counts = {}
    for k, v in rec.counts.items():
        if len(k) != n or any(c not in "01" for c in k):
            raise MeasurementError(f"outcome {k!r} in setting {setting} is not an {n}-bit string")
        if int(v) != v or v < 0:
            raise MeasurementError(f"count for {setting}/{k} must be a nonnegative integer")
        if v:
            counts[k] = counts.get(k, 0) + int(v)
    if not counts:
        raise MeasurementError(f"setting {setting} has no counts")
    return CountsRecord(setting, counts, rec.seconds)


@dataclass(frozen=True)
class Estimate:
    value: float
    sigma: float
    method: str  # "poisson_mc", "binomial", "given", "exact"


class ExperimentDataset:
    """Coincidence counts, one record per setting (duplicates merged on ingest)."""

    kind = "counts"

    def __init__(self, n_qubits: int, records: Iterable[CountsRecord], provenance: str = "",
                 *, _checked: bool = False):
        if n_qubits < 1:
            raise MeasurementError("dataset needs at least one qubit")
        merged: dict[str, CountsRecord] = {}
        for rec in records:
            if not _checked:
                rec = _check_record(rec, n_qubits)
            old = merged.get(rec.setting)
            if old is None:
                merged[rec.setting] = rec
                continue
            counts = dict(old.counts)
            for k, v in rec.counts.items():
                counts[k] = counts.get(k, 0) + v
            secs = None if old.seconds is None or rec.seconds is None else old.seconds + rec.seconds
            merged[rec.setting] = CountsRecord(rec.setting, counts, secs)
        self.n_qubits = n_qubits
        self.records = tuple(merged[s] for s in sorted(merged))
        self.provenance = provenance
        self.meta: dict = {}
        self._arrays = {r.setting: r.arrays() for r in self.records}

    @property
    def settings(self) -> list[str]:
        return [r.setting for r in self.records]

    def compatible_settings(self, obs: PauliOperator) -> list[str]:
        return [s for s in self.settings if setting_matches(s, obs)]

    def covers(self, obs: PauliOperator | str) -> bool:
        obs = _as_obs(obs)
        return obs.is_identity or bool(self.compatible_settings(obs))

    def raw_expectation(self, obs: PauliOperator | str,
                        arrays: Mapping[str, tuple[np.ndarray, np.ndarray]] | None = None) -> float:
        """Count-weighted parity average over every compatible setting (sign applied)."""
        obs = _as_obs(obs)
        if obs.n_qubits != self.n_qubits:
            raise MeasurementError("observable width differs from the dataset")
        if obs.is_identity:
            return float(obs.sign)
        arrays = self._arrays if arrays is None else arrays
        mask = obs.support
        num = den = 0.0
        for s in self.compatible_settings(obs):
            outcomes, counts = arrays[s]
            par = np.zeros(outcomes.shape, dtype=np.int64)
            sel = outcomes & mask
            while np.any(sel):
                par ^= sel & 1
                sel = sel >> 1
            num += float(np.dot(1 - 2 * par, counts))
            den += float(counts.sum())
        if den == 0:
            raise CoverageError(
                f"{obs.letters} is unmeasurable with dataset; needs a setting matching "
                f"{_needed_pattern(obs)}",
                [_needed_pattern(obs)],
            )
        return obs.sign * num / den

    def resampled_arrays(self, rng: np.random.Generator):
        return {s: (o, rng.poisson(c).astype(float)) for s, (o, c) in self._arrays.items()}

    def expectation(self, obs: PauliOperator | str, *, error: str = "poisson_mc",
                    cycles: int = DEFAULT_MC_CYCLES, rng_seed: int = 0) -> Estimate:
        return expectation_from_counts(self, obs, error=error, cycles=cycles, rng_seed=rng_seed)

    def to_json(self) -> dict:
        recs = []
        for r in self.records:
            d = {"setting": r.setting, "counts": dict(sorted(r.counts.items()))}
            if r.seconds is not None:
                d["seconds"] = r.seconds
            recs.append(d)
        out = {"n": self.n_qubits, "records": recs}
        if self.provenance:
            out["provenance"] = self.provenance
        out.update(self.meta)
        return out


def _needed_pattern(obs: PauliOperator) -> str:
    return "".join(c if c != "I" else "*" for c in obs.letters)


class ExactDataset:
    """Expectation values supplied directly, keyed by unsigned letter strings."""

    kind = "expectations"

    def __init__(self, n_qubits: int, expectations: Mapping[str, tuple[float, float]],
                 provenance: str = "", meta: Mapping | None = None):
        self.n_qubits = n_qubits
        table = {}
        for k, (v, s) in expectations.items():
            p = pl.parse_pauli(k)
            if p.n_qubits != n_qubits:
                raise MeasurementError(f"observable {k} does not have {n_qubits} letters")
            if not -1 - 1e-9 <= v <= 1 + 1e-9 or s < 0:
                raise MeasurementError(f"bad value or error for {k}: {v} +- {s}")
            table[p.letters] = (float(v) * p.sign, float(s))
        self.values = table
        self.provenance = provenance
        self.meta = dict(meta or {})

    def covers(self, obs: PauliOperator | str) -> bool:
        obs = _as_obs(obs)
        return obs.is_identity or obs.letters in self.values

    def expectation(self, obs: PauliOperator | str, **_ignored) -> Estimate:
        obs = _as_obs(obs)
        if obs.is_identity:
            return Estimate(float(obs.sign), 0.0, "exact")
        if obs.letters not in self.values:
            raise CoverageError(f"{obs.letters} is unmeasurable with dataset", [obs.letters])
        v, s = self.values[obs.letters]
        return Estimate(obs.sign * v, s, "given")

    def to_json(self) -> dict:
        out = {"n": self.n_qubits,
               "expectations": {k: {"value": v, "sigma": s} for k, (v, s) in self.values.items()}}
        if self.provenance:
            out["provenance"] = self.provenance
        out.update(self.meta)
        return out


Dataset = ExperimentDataset | ExactDataset


# -- file formats --------------------------------------------------------------


def dataset_from_json(data: Mapping) -> Dataset:
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError):
        raise MeasurementError("dataset JSON needs an integer 'n'") from None
    if "records" in data:
        recs = []
        for r in data["records"]:
            if not isinstance(r, Mapping) or "setting" not in r or "counts" not in r:
                raise MeasurementError("each record needs 'setting' and 'counts'")
            recs.append(CountsRecord(str(r["setting"]), dict(r["counts"]), r.get("seconds")))
        ds = ExperimentDataset(n, recs, str(data.get("provenance", "")))
        ds.meta = {k: v for k, v in data.items() if k not in ("n", "records", "provenance")}
        return ds
    if "expectations" in data:
        table = {}
        for k, v in data["expectations"].items():
            if isinstance(v, Mapping):
                table[k] = (float(v["value"]), float(v.get("sigma", 0.0)))
            elif isinstance(v, (list, tuple)):
                table[k] = (float(v[0]), float(v[1]) if len(v) > 1 else 0.0)
            else:
                table[k] = (float(v), 0.0)
        meta = {k: v for k, v in data.items() if k not in ("n", "expectations", "provenance")}
        return ExactDataset(n, table, str(data.get("provenance", "")), meta)
    raise MeasurementError("dataset JSON needs 'records' (counts) or 'expectations'")


def load_dataset(path) -> Dataset:
    path = str(path)
    if path.lower().endswith(".csv"):
        with open(path, newline="") as fh:
            return read_counts_csv(fh)
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeasurementError(f"{path}: not valid JSON ({exc})") from None
    return dataset_from_json(data)


def save_dataset(dataset: Dataset, path) -> None:
    with open(path, "w") as fh:
        json.dump(dataset.to_json(), fh, indent=1, sort_keys=False)
        fh.write("\n")


def read_counts_csv(fh, n_qubits: int | None = None) -> ExperimentDataset:
    """Rows of ``setting,outcome,count`` (a header line is optional)."""
    recs = []
    for row in csv.reader(fh):
        if not row or row[0].strip().startswith("#"):
            continue
        if row[0].strip().lower() == "setting":
            continue
        if len(row) < 3:
            raise MeasurementError(f"CSV row {row!r} needs setting, outcome, count")
        setting, outcome, count = (c.strip() for c in row[:3])
        try:
            c = int(count)
        except ValueError:
            raise MeasurementError(f"count {count!r} is not an integer") from None
        recs.append(CountsRecord(setting, {outcome: c}))
    if not recs:
        raise MeasurementError("CSV file has no data rows")
    n = n_qubits or len(recs[0].setting)
    # records with zero counts are legal in CSV; drop them before validation
    by_setting: dict[str, dict[str, int]] = {}
    for r in recs:
        d = by_setting.setdefault(r.setting.upper(), {})
        for k, v in r.counts.items():
            d[k] = d.get(k, 0) + v
    return ExperimentDataset(n, [CountsRecord(s, c) for s, c in by_setting.items()])


# -- estimation ----------------------------------------------------------------


def poisson_mc(dataset: ExperimentDataset, functional: PauliOperator | str | Callable,
               cycles: int = DEFAULT_MC_CYCLES, rng_seed: int = 0) -> float:
    """Standard deviation of a quantity under Poisson resampling of every count.

    ``functional`` is an observable or a callable taking a mapping
    ``setting -> (outcome masks, counts)`` and returning a number; it is
    evaluated via :meth:`ExperimentDataset.raw_expectation` with the
    resampled arrays.
    """
    if cycles < 2:
        log.warning("poisson_mc with %d cycle(s) gives a degenerate zero error", cycles)
        if cycles < 1:
            raise MeasurementError("need at least one Monte Carlo cycle")
    if not callable(functional):
        obs = _as_obs(functional)
        functional = lambda arrays: dataset.raw_expectation(obs, arrays)  # noqa: E731
    vals = np.empty(cycles)
    for c in range(cycles):
        rng = np.random.default_rng([rng_seed, c])
        try:
            vals[c] = functional(dataset.resampled_arrays(rng))
        except CoverageError:
            vals[c] = np.nan  # every resampled count of a needed setting was zero
    if np.all(np.isnan(vals)):
        return 0.0
    return float(np.nanstd(vals))


def expectation_from_counts(dataset: Dataset, obs: PauliOperator | str, *,
                            error: str = "poisson_mc", cycles: int = DEFAULT_MC_CYCLES,
                            rng_seed: int = 0) -> Estimate:
    """Expectation of ``obs`` with an error from Poisson MC or the binomial formula."""
    if isinstance(dataset, ExactDataset):
        return dataset.expectation(obs)
    obs = _as_obs(obs)
    if not obs.is_identity and not dataset.compatible_settings(obs):
        raise CoverageError(
            f"{obs.letters} is unmeasurable with dataset; needs a setting matching "
            f"{_needed_pattern(obs)}",
            [_needed_pattern(obs)],
        )
    value = dataset.raw_expectation(obs)
    if obs.is_identity:
        return Estimate(value, 0.0, "exact")
    if error == "poisson_mc":
        return Estimate(value, poisson_mc(dataset, obs, cycles, rng_seed), "poisson_mc")
    if error == "binomial":
        total = sum(dataset._arrays[s][1].sum() for s in dataset.compatible_settings(obs))
        return Estimate(value, math.sqrt(max(0.0, 1 - value * value) / total), "binomial")
    raise MeasurementError(f"unknown error method {error!r}")


# -- planning, simulation, tomography -------------------------------------------


def plan_settings(target: IdTable | StabilizerGroup | Sequence[PauliOperator | str]) -> list[str]:
    """Smallest list of local settings measuring every row (or group element)."""
    if isinstance(target, IdTable):
        rows = list(target.rows)
    elif isinstance(target, StabilizerGroup):
        rows = target.nonidentity()
    else:
        rows = [pl.parse_pauli(r) if isinstance(r, str) else r for r in target]
    return min_settings(rows)


def all_settings(n: int) -> list[str]:
    return ["".join(s) for s in itertools.product("XYZ", repeat=n)]


def _rotated_probabilities(state: QuantumState, setting: str) -> np.ndarray:
    u = np.ones((1, 1), dtype=complex)
    for c in setting:
        u = np.kron(u, BASIS_ROTATION[c])
    if state.is_pure:
        amp = u @ state.data
        return np.abs(amp) ** 2
    return np.real(np.einsum("ij,jk,ik->i", u, state.data, u.conj()))


def outcome_probabilities(state: QuantumState, setting: str, p: float = 0.0) -> np.ndarray:
    """Born-rule probabilities of all ``2**N`` outcomes (index = outcome bit string)."""
    if not 0.0 <= p <= 1.0:
        raise MeasurementError(f"depolarizing probability {p} outside [0, 1]")
    setting = validate_setting(setting, state.n_qubits)
    probs = (1 - p) * _rotated_probabilities(state, setting) + p / state.dim
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _outcome_strings(n: int) -> list[str]:
    return [format(b, f"0{n}b") for b in range(1 << n)]


def simulate_experiment(state: QuantumState, p_depolarizing: float, settings: Sequence[str],
                        shots_per_setting: int, rng_seed: int,
                        seconds: float | None = None) -> ExperimentDataset:
    """Synthetic counts: Poisson total with mean ``shots`` then a multinomial split."""
    if shots_per_setting < 1:
        raise MeasurementError("shots per setting must be >= 1")
    n = state.n_qubits
    names = _outcome_strings(n)
    recs = []
    for i, s in enumerate(settings):
        probs = outcome_probabilities(state, s, p_depolarizing)
        rng = np.random.default_rng([rng_seed, i])
        total = int(rng.poisson(shots_per_setting))
        counts = rng.multinomial(total, probs)
        d = {names[b]: int(c) for b, c in enumerate(counts) if c}
        if not d:  # a Poisson draw of zero; keep one count so the record stays valid
            d = {names[int(np.argmax(probs))]: 1}
        recs.append(CountsRecord(validate_setting(s, n), d, seconds))
    return ExperimentDataset(n, recs, f"simulated p={p_depolarizing} shots={shots_per_setting} "
                                      f"seed={rng_seed}")


def born_rule_dataset(state: QuantumState, settings: Sequence[str], p: float = 0.0,
                      scale: float = 1e12) -> ExperimentDataset:
    """Noise-free "counts" equal to probabilities times ``scale`` (rounded)."""
    n = state.n_qubits
    names = _outcome_strings(n)
    recs = []
    for s in settings:
        probs = outcome_probabilities(state, s, p)
        d = {names[b]: int(round(v * scale)) for b, v in enumerate(probs) if round(v * scale)}
        recs.append(CountsRecord(s, d))
    return ExperimentDataset(n, recs, f"born rule p={p}")


@dataclass(frozen=True)
class TomographyResult:
    rho: np.ndarray
    min_eigenvalue: float
    method: str = "linear_inversion"
    expectations: dict = field(default_factory=dict, repr=False)

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.rho.shape[0])))

    def fidelity(self, target: QuantumState) -> float:
        if not target.is_pure:
            raise MeasurementError("tomography fidelity needs a pure target")
        t = target.data
        return float(np.vdot(t, self.rho @ t).real)


def missing_tomography_settings(dataset: ExperimentDataset) -> list[str]:
    have = set(dataset.settings)
    return [s for s in all_settings(dataset.n_qubits) if s not in have]


def linear_inversion_tomography(dataset: ExperimentDataset) -> TomographyResult:
    """``rho = 2**-N sum_P <P> P`` over all ``4**N`` Paulis; positivity not enforced."""
    if not isinstance(dataset, ExperimentDataset):
        raise CoverageError("tomography needs a counts dataset covering all 3^N settings")
    missing = missing_tomography_settings(dataset)
    if missing:
        shown = ", ".join(missing[:8]) + (" ..." if len(missing) > 8 else "")
        raise CoverageError(f"tomography is missing {len(missing)} setting(s): {shown}", missing)
    n = dataset.n_qubits
    d = 1 << n
    rho = np.zeros((d, d), dtype=complex)
    exps = {}
    for p in pl.all_paulis(n):
        v = dataset.raw_expectation(p)
        exps[p.letters] = v
        if v:
            rho += v * p.to_matrix()
    rho /= d
    rho = (rho + rho.conj().T) / 2
    return TomographyResult(rho, float(np.linalg.eigvalsh(rho)[0]), "linear_inversion", exps)


# -- plot data ----------------------------------------------------------------


def expectations_csv(rows: Sequence[str], estimates: Sequence[Estimate],
                     ideal: Sequence[float] | None = None) -> str:
    """Bar-chart data: observable, measured value, error and optional ideal value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["observable", "value", "sigma", "ideal"])
    for i, (r, e) in enumerate(zip(rows, estimates)):
        w.writerow([r, f"{e.value:.6g}", f"{e.sigma:.6g}", "" if ideal is None else ideal[i]])
    return buf.getvalue()


def fidelity_methods_csv(bounds: Mapping[str, tuple[float, float] | None]) -> str:
    """Method comparison data: method, value, sigma (rows for missing methods skipped)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "value", "sigma"])
    for name, vs in bounds.items():
        if vs is not None:
            w.writerow([name, f"{vs[0]:.6g}", f"{vs[1]:.6g}"])
    return buf.getvalue()
