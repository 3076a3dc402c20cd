"""Identity products: sets of commuting Pauli rows whose product is +-I.

Rows are :class:`PauliOperator` objects, normally unsigned.  The sign of an
ID is the product of the row signs times the structural phase of the letter
product.  Target eigenvalues ``lambda_i`` of the rows travel separately as
``IdTable.lambdas``; their product must equal the ID sign.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from . import pauli as pl
from ._backend import kernels
from .pauli import PauliOperator
from .stabilizer import StabilizerGroup, gf2_rank

M_MAX_GUARD = 8


class IdError(ValueError):
    pass


@dataclass(frozen=True)
class IdCheck:
    is_id: bool
    sign: int = 0


def _pairwise_commute(rows: Sequence[PauliOperator]) -> bool:
    for i, a in enumerate(rows):
        for b in rows[i + 1:]:
            if pl.symplectic(a, b):
                return False
    return True


def check_id(rows: Sequence[PauliOperator]) -> IdCheck:
    if not rows:
        return IdCheck(False)
    n = rows[0].n_qubits
    if any(r.n_qubits != n for r in rows):
        raise IdError("rows have different widths")
    if not _pairwise_commute(rows):
        return IdCheck(False)
    prod = pl.product(rows)
    if not prod.is_identity or prod.coefficient_exp % 2:
        return IdCheck(False)
    return IdCheck(True, prod.sign)


def _restricted_is_id(rows: Sequence[PauliOperator], mask: int, min_rows: int = 1) -> bool:
    """Whether the rows restricted to ``mask`` (identity rows dropped) form an ID."""
    kept = [pl.restrict(r, mask) for r in rows]
    kept = [r for r in kept if not r.is_identity]
    if len(kept) < min_rows:
        return len(kept) == 0 and min_rows <= 1
    return check_id(kept).is_id


def _column_parity_whole(rows: Sequence[PauliOperator]) -> bool:
    n = rows[0].n_qubits
    for q in range(n):
        counts = {"X": 0, "Y": 0, "Z": 0, "I": 0}
        for r in rows:
            counts[pl.letter(r, q)] += 1
        if counts["X"] % 2 or counts["Y"] % 2 or counts["Z"] % 2:
            return False
    return True


class IdTable:
    """An ``M x N`` identity product with lazily computed classification flags."""

    def __init__(self, rows: Iterable[PauliOperator | str],
                 lambdas: Sequence[int] | None = None):
        rows = tuple(pl.parse_pauli(r) if isinstance(r, str) else r for r in rows)
        if not rows:
            raise IdError("an ID needs at least one row")
        n = rows[0].n_qubits
        if any(r.n_qubits != n for r in rows):
            raise IdError("rows have different widths")
        seen = set()
        for r in rows:
            if not r.is_hermitian:
                raise IdError(f"row {r!r} is not Hermitian")
            if r.is_identity:
                raise IdError("an ID row may not be +-I")
            if (r.x, r.z) in seen:
                raise IdError(f"duplicate row {r.letters}")
            seen.add((r.x, r.z))
        chk = check_id(rows)
        if not chk.is_id:
            raise IdError("rows do not commute or their product is not +-I")
        self.rows = rows
        self.n_qubits = n
        self.sign = chk.sign
        self.lambdas: tuple[int, ...] | None = None
        if lambdas is not None:
            lam = tuple(int(l) for l in lambdas)
            if len(lam) != len(rows) or any(l not in (1, -1) for l in lam):
                raise IdError(f"need {len(rows)} eigenvalues in {{+1, -1}}")
            prod = 1
            for l in lam:
                prod *= l
            if prod != self.sign:
                raise IdError(f"eigenvalue product {prod:+d} differs from the ID sign {self.sign:+d}")
            self.lambdas = lam

    @classmethod
    def from_json(cls, data) -> IdTable:
        """``{"rows": [...], "lambdas": [...]}`` or a bare list of rows."""
        if isinstance(data, list):
            return cls(data)
        if not isinstance(data, dict) or "rows" not in data:
            raise IdError("ID JSON needs a 'rows' list")
        return cls(data["rows"], data.get("lambdas"))

    @property
    def m(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"IdTable({', '.join(map(str, self.rows))})"

    def __eq__(self, other) -> bool:
        return isinstance(other, IdTable) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @cached_property
    def key(self) -> tuple[str, ...]:
        return tuple(sorted(pl.format_pauli(r) for r in self.rows))

    def canonical(self) -> IdTable:
        order = sorted(range(self.m), key=lambda i: self.rows[i].letters)
        lam = None if self.lambdas is None else [self.lambdas[i] for i in order]
        return IdTable([self.rows[i] for i in order], lam)

    @property
    def label(self) -> str:
        kind = "w" if self.is_whole else "p"
        return f"ID{self.m}^{self.n_qubits}_{kind}"

    @cached_property
    def is_whole(self) -> bool:
        return _column_parity_whole(self.rows)

    @property
    def is_negative(self) -> bool:
        return self.sign == -1

    @cached_property
    def is_entangled(self) -> bool:
        return kernels.id_is_entangled(*_pack(self.rows))

    @cached_property
    def is_critical(self) -> bool:
        return kernels.id_is_critical(*_pack(self.rows))

    @cached_property
    def independent_rank(self) -> int:
        return gf2_rank(self.rows)

    @property
    def eigenspace_rank(self) -> int:
        return 1 << (self.n_qubits - self.independent_rank)

    @cached_property
    def support(self) -> int:
        s = 0
        for r in self.rows:
            s |= r.support
        return s

    @property
    def spans_all_qubits(self) -> bool:
        return self.support == (1 << self.n_qubits) - 1

    def min_settings(self) -> list[str]:
        return min_settings(self.rows)

    def classify(self) -> IdClassification:
        return IdClassification(
            sign=self.sign,
            is_whole=self.is_whole,
            is_entangled=self.is_entangled,
            is_critical=self.is_critical if self.is_entangled else False,
            independent_rank=self.independent_rank,
            eigenspace_rank=self.eigenspace_rank,
            min_settings=len(self.min_settings()),
        )

    def format_table(self) -> str:
        lam = self.lambdas or (1,) * self.m
        lines = [" ".join(r.letters) + ("   (-)" if r.sign * l < 0 else "")
                 for r, l in zip(self.rows, lam)]
        c = self.classify()
        flags = [
            "negative" if c.sign < 0 else "positive",
            "whole" if c.is_whole else "partial",
            "entangled" if c.is_entangled else "separable",
        ]
        if c.is_critical:
            flags.append("critical")
        lines.append(f"{self.label}: {', '.join(flags)}; rank r={c.eigenspace_rank}; "
                     f"settings={c.min_settings}")
        return "\n".join(lines)

    def to_json(self, lambdas: Sequence[int] | None = None) -> dict:
        out = {"rows": [pl.format_pauli(r) for r in self.rows]}
        if lambdas is None:
            lambdas = self.lambdas
        if lambdas is not None:
            out["lambdas"] = [int(l) for l in lambdas]
        return out


@dataclass(frozen=True)
class IdClassification:
    sign: int
    is_whole: bool
    is_entangled: bool
    is_critical: bool
    independent_rank: int
    eigenspace_rank: int
    min_settings: int


def _pack(rows: Sequence[PauliOperator]) -> tuple[list[int], list[int], int]:
    return [r.x for r in rows], [r.z for r in rows], rows[0].n_qubits


def _as_table(rows) -> IdTable:
    return rows if isinstance(rows, IdTable) else IdTable(rows)


def is_whole(rows) -> bool:
    return _as_table(rows).is_whole


def is_entangled(rows) -> bool:
    return _as_table(rows).is_entangled


def is_critical(rows) -> bool:
    t = _as_table(rows)
    if not t.is_entangled:
        raise IdError("criticality is defined for entangled IDs only")
    return t.is_critical


def find_ids_in_group(
    group: StabilizerGroup,
    m_max: int,
    *,
    m_min: int = 2,
    whole: bool | None = None,
    negative: bool | None = None,
    entangled: bool | None = None,
    critical: bool | None = None,
    full_support: bool | None = None,
) -> list[IdTable]:
    """All IDs made of nonidentity group elements with ``m_min <= M <= m_max``.

    Rows are the unsigned letter strings; the group signs become the target
    eigenvalues (``lambdas``), so the ID sign is the structural one.  Each filter is ``None`` (ignored), ``True`` or ``False``.  The result is
    sorted by the canonical row strings.
    """
    if not 2 <= m_max <= M_MAX_GUARD:
        raise IdError(f"m_max must be between 2 and {M_MAX_GUARD}")
    elems = sorted(group.nonidentity(), key=lambda e: e.letters)
    keys = [e.x | (e.z << group.n_qubits) for e in elems]
    subsets = kernels.xor_zero_subsets(keys, max(2, m_min), m_max)
    out = []
    for idx in subsets:
        t = IdTable([elems[i].unsigned() for i in idx], [elems[i].sign for i in idx])
        if whole is not None and t.is_whole != whole:
            continue
        if negative is not None and t.is_negative != negative:
            continue
        if full_support is not None and t.spans_all_qubits != full_support:
            continue
        if entangled is not None and t.is_entangled != entangled:
            continue
        if critical is not None and (t.is_entangled and t.is_critical) != critical:
            continue
        out.append(t)
    out.sort(key=lambda t: t.key)
    return out


def setting_covers(setting: str, row: PauliOperator) -> bool:
    return all(
        setting[q] == pl.letter(row, q) for q in range(row.n_qubits) if pl.letter(row, q) != "I"
    )


def _exact_cover_min(universe: int, sets: list[int]) -> list[int]:
    """Smallest list of indices into ``sets`` (bit masks) whose union is ``universe``."""
    best: list[int] | None = None

    def search(uncovered: int, chosen: list[int]):
        nonlocal best
        if not uncovered:
            if best is None or len(chosen) < len(best):
                best = list(chosen)
            return
        if best is not None and len(chosen) + 1 >= len(best):
            return
        # branch on the element with the fewest covering sets
        el, options = None, None
        rest = uncovered
        while rest:
            bit = rest & -rest
            rest ^= bit
            opts = [i for i, s in enumerate(sets) if s & bit]
            if options is None or len(opts) < len(options):
                el, options = bit, opts
        options.sort(key=lambda i: -bin(sets[i] & uncovered).count("1"))
        for i in options:
            chosen.append(i)
            search(uncovered & ~sets[i], chosen)
            chosen.pop()

    search(universe, [])
    return best or []


def min_settings(rows: Sequence[PauliOperator | str]) -> list[str]:
    """Minimum list of local measurement settings covering every row.

    A setting is one basis letter per qubit; a row is covered when each of its
    nonidentity letters matches the setting on that qubit.
    """
    rows = [pl.parse_pauli(r) if isinstance(r, str) else r for r in rows]
    rows = [r for r in rows if not r.is_identity]
    if not rows:
        return []
    n = rows[0].n_qubits
    options = []
    for q in range(n):
        seen = sorted({pl.letter(r, q) for r in rows} - {"I"})
        options.append(seen or ["Z"])
    candidates = ["".join(c) for c in itertools.product(*options)]
    cover = []
    for s in candidates:
        m = 0
        for i, r in enumerate(rows):
            if setting_covers(s, r):
                m |= 1 << i
        cover.append(m)
    # drop settings whose coverage is contained in another's
    uniq: dict[int, str] = {}
    for s, m in zip(candidates, cover):
        uniq.setdefault(m, s)
    masks = [m for m in uniq if m and not any(m != o and m & o == m for o in uniq)]
    chosen = _exact_cover_min((1 << len(rows)) - 1, masks)
    return sorted(uniq[masks[i]] for i in chosen)
