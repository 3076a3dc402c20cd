import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from idcert import certify as cf
from idcert import states as st
from idcert.ids import IdTable
from idcert.stabilizer import EmptyEigenspaceError, joint_eigenprojector

MERMIN = IdTable(["XXX", "XYY", "YXY", "YYX"], [1, -1, -1, -1])
C_LIN = IdTable(["ZZII", "ZIXX", "IZYY", "YXXY", "YXYX"], [1, 1, -1, 1, 1])
GHZ4 = IdTable(["ZZII", "ZIZI", "IZIZ", "XYXY", "XYYX"], [1, 1, 1, -1, -1])
ID44P = IdTable(["ZZZI", "XXIZ", "YIXX", "IYYY"])


def test_bell_parameter_ghz3_table():
    b = cf.bell_parameter(MERMIN, None, [0.81, -0.61, -0.59, -0.54], [0.07, 0.09, 0.09, 0.10])
    assert b.alpha_exp == pytest.approx(2.55, abs=1e-12)
    assert b.alpha_lhvt == 2 and b.alpha_qm == 4
    assert b.sigma == pytest.approx(np.sqrt(0.0311))
    assert round(b.violation_sigmas, 1) == 3.1


def test_bell_parameter_c_lin_and_ideal():
    b = cf.bell_parameter(C_LIN, None, [0.93, 0.61, -0.58, 0.52, 0.60])
    assert b.alpha_exp == pytest.approx(3.24, abs=1e-12)
    ideal = cf.bell_parameter(C_LIN, None, list(C_LIN.lambdas))
    assert ideal.alpha_exp == 5


def test_bell_parameter_errors():
    with pytest.raises(cf.CertificationError, match="one expectation per ID row"):
        cf.bell_parameter(MERMIN, None, [0.8, 0.8, 0.8])
    with pytest.raises(cf.CertificationError, match="differs from the ID sign"):
        cf.bell_parameter(MERMIN, [1, 1, 1, 1], [1, 1, 1, 1])
    with pytest.raises(cf.CertificationError, match="required"):
        cf.bell_parameter(ID44P, None, [1, 1, 1, 1])


def test_partial_id_has_no_lhvt_bound():
    assert cf.bell_parameter(GHZ4, None, [1] * 5).alpha_lhvt is None
    with pytest.raises(cf.CertificationError, match="whole negative"):
        cf.lhvt_bound(GHZ4)
    assert cf.lhvt_bound(C_LIN) == 3 and cf.lhvt_bound(MERMIN) == 2


def test_lhvt_bruteforce_examples():
    assert cf.lhvt_max_bruteforce(MERMIN, MERMIN.lambdas) == 2
    assert cf.lhvt_max_bruteforce(C_LIN, C_LIN.lambdas) == 3
    assert cf.lhvt_max_bruteforce(GHZ4, GHZ4.lambdas) == 5


def test_lhvt_bruteforce_guard():
    t = IdTable(["XXXXXX", "XXXXYY", "XXYYXX", "XXYYYY"])
    with pytest.raises(cf.CertificationError, match="N <= 5"):
        cf.lhvt_max_bruteforce(t, [1, 1, 1, 1])


def test_fidelity_bound_id_examples():
    assert cf.fidelity_bound_id(3.24, 5).value == pytest.approx(0.56, abs=1e-12)
    assert cf.fidelity_bound_id(2.55, 4).value == pytest.approx(0.6375, abs=1e-12)
    assert cf.fidelity_bound_id(5, 5).value == 1
    low = cf.fidelity_bound_id(0.0, 5)
    assert low.value == pytest.approx(-0.25) and low.clamped == 0
    assert cf.fidelity_bound_id(3.0, 4, rank=2).to_json()["subspace_rank"] == 2


def test_fidelity_bound_gosg_examples():
    assert cf.fidelity_bound_gosg([0.93, 0.78, 0.59, 0.66]).value == pytest.approx(0.48)
    assert cf.fidelity_bound_gosg([0.61, 0.88, 0.81]).value == pytest.approx(0.65)
    assert cf.fidelity_bound_gosg([1, 1, 1]).value == 1
    with pytest.raises(cf.CertificationError, match="expected 4"):
        cf.fidelity_bound_gosg([1, 1, 1], n_qubits=4)


def test_fidelity_sg_c_lin_table():
    # sign-corrected magnitudes of the fifteen nonidentity elements plus the identity
    mags = [0.93, 0.78, 0.61, 0.59, 0.58, 0.58, 0.66, 0.62, 0.65, 0.65,
            0.47, 0.52, 0.52, 0.60, 0.75]
    f = cf.fidelity_sg([1.0] + mags).value
    assert f == pytest.approx(0.656875, abs=1e-12)
    assert 0.629 < f < 1
    with pytest.raises(cf.CertificationError, match="2\\^N"):
        cf.fidelity_sg([1, 1, 1])


def test_fidelity_sg_depolarized():
    from idcert.stabilizer import state_stabilizer
    g = st.ghz(3)
    group = state_stabilizer(g)
    for p in (0.0, 0.3, 1.0):
        rho = st.depolarize(g, p)
        vals = [st.expectation(rho, e) for e in group.elements]
        assert cf.fidelity_sg(vals).value == pytest.approx((1 - p) + p / 8, abs=1e-12)


def test_compare_id_gosg_examples():
    n = 4
    a0 = 0.9
    c = cf.compare_id_gosg([a0] * (n + 1))
    assert c.difference == pytest.approx((n - 1) * (1 - a0) / 4)
    c = cf.compare_id_gosg([1, 1, 1, 1, 0])
    assert c.f_id == pytest.approx(0.75) and c.f_gosg == pytest.approx(1)
    assert c.gosg_better and c.best_method == "gosg:4"
    assert cf.compare_id_gosg([1] * 5).difference == 0


@settings(max_examples=300, deadline=None)
@given(hst.integers(2, 6).flatmap(
    lambda n: hst.lists(hst.floats(-1, 1), min_size=n + 1, max_size=n + 1)),
    hst.integers(0, 10))
def test_compare_identity_holds(a, k):
    k = k % len(a)
    c = cf.compare_id_gosg(a, dependent=k)
    assert c.difference == pytest.approx(c.f_id - c.f_gosg, abs=1e-12)
    e = [1 - v for v in a]
    flip = sum(e) - e[k] < e[k]
    if abs(c.difference) > 1e-12:
        assert (c.difference < 0) == flip == c.gosg_better


def test_witness_gamma_analytic():
    assert cf.witness_gamma_analytic(C_LIN).gamma == pytest.approx(3, abs=1e-9)
    assert cf.witness_gamma_analytic(MERMIN).gamma == pytest.approx(2, abs=1e-9)
    w = cf.witness_gamma_analytic(GHZ4)
    assert w.gamma == pytest.approx(3, abs=1e-9)
    assert w.gamma == max(w.betas.values()) and len(w.betas) == 7
    # the C_lin cuts 13|24 and 14|23 give the smaller bound 2
    b = cf.witness_gamma_analytic(C_LIN).betas
    assert b["13|24"] == pytest.approx(2) and b["14|23"] == pytest.approx(2)
    with pytest.raises(cf.CertificationError, match="rank 2"):
        cf.witness_gamma_analytic(ID44P, [1, 1, 1, 1])


def test_witness_values_and_relation():
    assert cf.witness_value(3, 3.24)[0] == pytest.approx(-0.24)
    assert cf.witness_value(4, 3.24)[0] == pytest.approx(0.76)
    assert cf.witness_value(2.5, 2.5)[0] == 0
    assert cf.witness_fidelity_relation(3, -0.24, 5) == pytest.approx(0.56, abs=1e-12)
    assert cf.witness_fidelity_relation(2, -0.55, 4) == pytest.approx(0.6375, abs=1e-12)
    assert cf.witness_fidelity_relation(3, 3 - 5, 5) == 1


def test_noise_tolerance():
    assert cf.noise_tolerance(5, 3, 1).p_max == pytest.approx(0.4)
    assert cf.noise_tolerance(4, 0, 1).p_max == 1.0
    assert cf.noise_tolerance(4, 4, 2).p_max == 0
    with pytest.raises(cf.CertificationError, match="exceeds"):
        cf.noise_tolerance(4, 4.5)


def test_min_nonlocal_fidelity():
    r = cf.min_nonlocal_fidelity()
    assert r.value == 0.5 and "M - 2" in r.trace
    assert cf.fidelity_bound_id(5, 5).value == 1
    assert cf.fidelity_bound_id(1, 5).value == 0


@pytest.mark.parametrize("table", [MERMIN, C_LIN, GHZ4])
def test_flipped_eigenstates_reach_at_most_m_minus_4(table):
    target = table.lambdas
    seen = 0
    for lam in itertools.product((1, -1), repeat=table.m):
        if lam == target or np.prod(lam) != table.sign:
            continue
        try:
            space = joint_eigenprojector(table.rows, lam)
        except EmptyEigenspaceError:
            continue
        alpha = sum(t * st.expectation(space.state, r) for t, r in zip(target, table.rows))
        assert alpha <= table.m - 4 + 1e-9
        seen += 1
    assert seen > 0


def test_bound_never_exceeds_fidelity_under_depolarizing():
    psi = joint_eigenprojector(C_LIN.rows, C_LIN.lambdas).pure
    for p in np.linspace(0, 1, 41):
        rho = st.depolarize(psi, p)
        alpha = sum(l * st.expectation(rho, r) for l, r in zip(C_LIN.lambdas, C_LIN.rows))
        assert cf.fidelity_bound_id(alpha, 5).value <= st.fidelity(rho, psi) + 1e-12
