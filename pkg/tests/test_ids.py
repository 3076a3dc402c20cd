import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from idcert import ids
from idcert import pauli as pl
from idcert import states as st
from idcert.ids import IdError, IdTable, check_id, find_ids_in_group
from idcert.pauli import parse_pauli
from idcert.stabilizer import state_stabilizer

MERMIN = ["XXX", "XYY", "YXY", "YYX"]
ID44P = ["ZZZI", "XXIZ", "YIXX", "IYYY"]
C_LIN_ID = ["ZZII", "ZIXX", "IZYY", "YXXY", "YXYX"]
GHZ4_ID = ["ZZII", "ZIZI", "IZIZ", "XYXY", "XYYX"]


def P(rows):
    return [parse_pauli(r) for r in rows]


# -- independent oracles ---------------------------------------------------------


def dense_product_sign(rows):
    """Sign s with prod(rows) = s I, from dense matrices; None when not +-I."""
    m = np.eye(1 << rows[0].n_qubits, dtype=complex)
    for r in rows:
        m = m @ r.to_matrix()
    for s in (1, -1):
        if np.allclose(m, s * np.eye(m.shape[0])):
            return s
    return None


def restricted_is_id(rows, qubits):
    kept = [pl.restrict(r, qubits) for r in rows]
    kept = [r for r in kept if not r.is_identity]
    return len(kept) >= 2 and check_id(kept).is_id


def oracle_entangled(rows):
    n = rows[0].n_qubits
    for k in range(1, n):
        for side in itertools.combinations(range(n), k):
            other = [q for q in range(n) if q not in side]
            a = [pl.restrict(r, list(side)) for r in rows]
            b = [pl.restrict(r, other) for r in rows]
            a = [r for r in a if not r.is_identity]
            b = [r for r in b if not r.is_identity]
            if (not a or check_id(a).is_id) and (not b or check_id(b).is_id):
                return False
    return True


def oracle_critical(rows):
    n, m = rows[0].n_qubits, len(rows)
    for k in range(2, m):
        for sub in itertools.combinations(rows, k):
            if check_id(list(sub)).is_id:
                return False
    for k in range(1, n):
        for cols in itertools.combinations(range(n), k):
            if restricted_is_id(rows, list(cols)):
                return False
    return True


# -- check_id and classification -----------------------------------------------


def test_check_id_examples():
    assert check_id(P(MERMIN)) == ids.IdCheck(True, -1)
    assert check_id(P(ID44P)) == ids.IdCheck(True, 1)
    assert not check_id(P(["XI", "ZI"])).is_id
    assert check_id(P(["-XX", "YY", "ZZ"])).sign == 1  # row sign times structural -1


def test_check_id_sign_matches_dense_product():
    for rows in (MERMIN, ID44P, C_LIN_ID, GHZ4_ID, ["-XXX", "XYY", "YXY", "YYX"]):
        assert check_id(P(rows)).sign == dense_product_sign(P(rows))


def test_classification_examples():
    m = IdTable(MERMIN)
    assert (m.is_whole, m.is_negative, m.is_entangled, m.is_critical) == (True, True, True, True)
    p = IdTable(ID44P)
    assert not p.is_whole and p.is_entangled and not p.is_negative
    assert p.eigenspace_rank == 2
    assert not IdTable(["ZZII", "IIZZ", "ZZZZ"]).is_entangled
    g = IdTable(GHZ4_ID)
    assert g.is_critical and not g.is_whole and g.label == "ID5^4_p"


def test_two_disjoint_mermins_not_critical():
    rows = [r + "III" for r in MERMIN] + ["III" + r for r in MERMIN]
    t = IdTable(rows)
    assert not t.is_entangled
    with pytest.raises(IdError, match="entangled IDs only"):
        ids.is_critical(rows)
    # deleting rows recovers each Mermin factor
    assert not oracle_critical(P(rows))


def test_id_table_validation():
    with pytest.raises(IdError, match="duplicate"):
        IdTable(["XX", "XX"])
    with pytest.raises(IdError, match="not"):
        IdTable(["XI", "ZI"])
    with pytest.raises(IdError, match="differs from the ID sign"):
        IdTable(MERMIN, [1, 1, 1, 1])
    t = IdTable.from_json({"rows": MERMIN, "lambdas": [1, -1, -1, -1]})
    assert t.to_json() == {"rows": MERMIN, "lambdas": [1, -1, -1, -1]}


def test_whole_invariant_under_column_relabel():
    t = IdTable(MERMIN)
    # swap X and Y in column 2
    swapped = [r[0] + {"X": "Y", "Y": "X"}.get(r[1], r[1]) + r[2] for r in MERMIN]
    assert IdTable(swapped).is_whole == t.is_whole


# -- searches ----------------------------------------------------------------------


def test_c_lin_census(c_lin_group):
    ent = find_ids_in_group(c_lin_group, 5, entangled=True)
    assert len(ent) == 196
    wn = find_ids_in_group(c_lin_group, 5, m_min=5, whole=True, negative=True)
    assert len(wn) == 8
    assert all(t.is_entangled and t.is_critical and len(t.min_settings()) == 4 for t in wn)
    assert IdTable(C_LIN_ID) in wn


def test_search_results_are_group_ids(c_lin_group):
    found = find_ids_in_group(c_lin_group, 4)
    assert found == sorted(found, key=lambda t: t.key)
    for t in found:
        assert check_id(t.rows).is_id
        for r, lam in zip(t.rows, t.lambdas):
            assert c_lin_group.signed(r).sign == lam
        assert np.prod(t.lambdas) == t.sign


def test_mermin_found_in_ghz3(ghz3_group):
    found = find_ids_in_group(ghz3_group, 4, whole=True, negative=True)
    assert [t.key for t in found] == [tuple(sorted(MERMIN))]
    assert found[0].is_critical


def test_ghz5_has_no_spanning_whole_negative_id5():
    g = state_stabilizer(st.ghz(5))
    assert find_ids_in_group(g, 5, m_min=5, whole=True, negative=True, entangled=True,
                             full_support=True) == []


def test_m_max_guard(c_lin_group):
    with pytest.raises(IdError):
        find_ids_in_group(c_lin_group, 9)


@pytest.mark.parametrize("name,n", [("ghz", 3), ("c_lin", None), ("c_z", None), ("ghz", 4)])
def test_flags_match_oracles(name, n):
    group = state_stabilizer(st.make_named_state(name, n))
    for t in find_ids_in_group(group, 5):
        assert t.is_entangled == oracle_entangled(list(t.rows))
        if t.is_entangled:
            assert t.is_critical == oracle_critical(list(t.rows))


@settings(max_examples=40, deadline=None)
@given(hst.permutations(range(5)), hst.permutations(range(4)))
def test_flags_invariant_under_row_and_qubit_permutation(row_perm, qubit_perm):
    for base in (C_LIN_ID, GHZ4_ID):
        rows = [base[i] for i in row_perm]
        permuted = ["".join(r[q] for q in qubit_perm) for r in rows]
        a, b = IdTable(base), IdTable(permuted)
        assert a.classify() == b.classify()


# -- settings ----------------------------------------------------------------------


def test_min_settings_examples():
    assert len(ids.min_settings(GHZ4_ID)) == 3
    assert len(ids.min_settings(C_LIN_ID)) == 4
    assert len(ids.min_settings(["ZZII"])) == 1
    assert ids.min_settings([]) == []


def test_min_settings_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(25):
        a = np.triu(rng.integers(0, 2, size=(3, 3)), 1)
        elems = state_stabilizer(st.make_graph_state(a + a.T)).nonidentity()
        k = int(rng.integers(1, 8))
        rows = [elems[i] for i in rng.choice(len(elems), size=k, replace=False)]
        got = ids.min_settings(rows)
        assert all(any(ids.setting_covers(s, r) for s in got) for r in rows)
        assert len(got) == _brute_min_cover(rows)


def _brute_min_cover(rows):
    n = rows[0].n_qubits
    settings_all = ["".join(s) for s in itertools.product("XYZ", repeat=n)]
    for size in range(1, len(rows) + 1):
        for combo in itertools.combinations(settings_all, size):
            if all(any(ids.setting_covers(s, r) for s in combo) for r in rows):
                return size
    raise AssertionError("no cover")
