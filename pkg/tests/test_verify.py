import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuniform.ffield import field_of_order
from kuniform.oarray import IROA_8_6_2_2, oa_to_qoa
from kuniform.qoa import (
    assemble_state,
    build_qubit_3_3m,
    build_strength2_qubit,
    build_strength2_qud,
    build_qud_4_3m,
    QudParams,
)
from kuniform.qstate import SparseState, basis_ket, bell_state, ghz_state, normalize, reduced_density
from kuniform.verify import (
    appendix_suite,
    certify,
    ghz_rows,
    is_k_uniform,
    m2_counterexample,
    qoa_check,
)
from kuniform.qoa import QuantumOA

from oracles import dense_vector, max_uniform_deviation


@pytest.fixture(scope="module")
def eq3_state():
    return assemble_state(oa_to_qoa(IROA_8_6_2_2))


def perturb(state, eps, which=0):
    amps = state.amps
    ket = list(amps)[which]
    amps[ket] += eps
    return normalize(SparseState(state.d, state.n, amps))


def test_eq3_state_is_2_uniform(eq3_state):
    rep = is_k_uniform(eq3_state, 2)
    assert rep.passed and rep.max_deviation < 1e-9
    assert rep.subsets_checked == 15
    assert max_uniform_deviation(eq3_state.to_dense(), 2, 6, 2) < 1e-12


def test_eq3_state_is_not_3_uniform(eq3_state):
    rep = is_k_uniform(eq3_state, 3)
    assert not rep.passed
    assert rep.max_deviation == pytest.approx(max_uniform_deviation(eq3_state.to_dense(), 2, 6, 3))


def test_product_state_fails():
    rep = is_k_uniform(basis_ket(2, [0, 0, 0, 0]), 1)
    assert not rep.passed
    assert rep.max_deviation == pytest.approx(0.5)
    assert rep.worst_subset == [1]
    assert np.allclose(reduced_density(basis_ket(2, [0, 0, 0, 0]), rep.worst_subset), [[1, 0], [0, 0]])


def test_input_errors():
    with pytest.raises(ValueError, match="normalized"):
        is_k_uniform(2 * bell_state(0, 0), 1)
    with pytest.raises(ValueError, match="at most"):
        is_k_uniform(bell_state(0, 0), 2)
    with pytest.raises(ValueError, match="at most"):
        is_k_uniform(bell_state(0, 0), 0)


def test_qoa_check_examples():
    assert qoa_check(oa_to_qoa(IROA_8_6_2_2)).passed
    rep = qoa_check(build_qubit_3_3m(1))
    assert rep.passed and rep.method == "qoa" and rep.subsets_checked == 20


def test_qoa_check_rejects_unnormalized_rows():
    rows = [2 * r for r in oa_to_qoa(IROA_8_6_2_2).rows]
    with pytest.raises(ValueError):
        qoa_check(QuantumOA(rows, 2, 2))


def test_certify_agreement():
    for q in [oa_to_qoa(IROA_8_6_2_2), build_qubit_3_3m(1), build_strength2_qud(field_of_order(4), "4+2m", 1)]:
        rq, rs = certify(q)
        assert rq.passed == rs.passed
        assert abs(rq.max_deviation - rs.max_deviation) < 1e-12
        assert rq.raw_max_deviation == pytest.approx(rq.max_deviation * q.r, abs=1e-12)


def test_agreement_on_failing_qoa():
    q = QuantumOA(ghz_rows(2), 2, 3)
    rq, rs = certify(q)
    assert not rq.passed and not rs.passed
    assert abs(rq.max_deviation - rs.max_deviation) < 1e-12
    assert rq.worst_subset == rs.worst_subset


def test_m2_counterexample():
    subset, rho, dev = m2_counterexample()
    assert subset == (1, 4, 7)
    assert dev > 0.1
    assert rho.shape == (8, 8)
    # independent dense computation of the same marginal
    psi = sum(dense_vector(r.amps, 2, 9) for r in ghz_rows(2)) / np.sqrt(8)
    from oracles import dense_reduced

    ref = dense_reduced(psi, 2, 9, subset)
    assert np.allclose(rho, ref / np.trace(ref).real, atol=1e-12)


def test_m1_passes_every_subset():
    state = assemble_state(QuantumOA(ghz_rows(1), 2, 3))
    rep = is_k_uniform(state, 3)
    assert rep.passed and rep.subsets_checked == 20


def test_threads_give_identical_report():
    state = assemble_state(QuantumOA(ghz_rows(2), 2, 3))
    a = is_k_uniform(state, 3, workers=1)
    b = is_k_uniform(state, 3, workers=4)
    assert (a.max_deviation, a.worst_subset, a.passed) == (b.max_deviation, b.worst_subset, b.passed)


def test_lower_strengths_pass():
    for q in [build_qubit_3_3m(1), build_strength2_qubit("3+2m", 1)]:
        state = assemble_state(q)
        for k in range(1, q.k + 1):
            assert is_k_uniform(state, k).passed


def test_passing_marginal_eigenvalues():
    state = assemble_state(build_qubit_3_3m(1))
    for S in itertools.combinations(range(1, 7), 3):
        ev = np.linalg.eigvalsh(reduced_density(state, S))
        assert np.allclose(ev, 1 / 8, atol=1e-8)


def test_appendix_suite_passes():
    results = appendix_suite()
    assert len(results) == 24 + 14 + 15
    assert all(r.passed for r in results), [r for r in results if not r.passed]
    assert all(r.cases > 0 for r in results)


def test_appendix_suite_detects_perturbed_ghz():
    def bad_ghz(i, j, k):
        g = ghz_state(i, j, k)
        if (i, j, k) == (0, 1, 1):
            amps = g.amps
            amps[(0, 1, 1)] += 1e-3
            return SparseState(2, 3, amps)
        return g

    results = appendix_suite(ghz=bad_ghz, psi_orders=())
    assert not all(r.passed for r in results)


SMALL = {
    "eq3": lambda: assemble_state(oa_to_qoa(IROA_8_6_2_2)),
    "qubit_3_3m": lambda: assemble_state(build_qubit_3_3m(1)),
    "s2_qubit": lambda: assemble_state(build_strength2_qubit("3+2m", 1)),
    "s2_gf3": lambda: assemble_state(build_strength2_qud(field_of_order(3), "3+2m", 1)),
}
STRENGTH = {"eq3": 2, "qubit_3_3m": 3, "s2_qubit": 2, "s2_gf3": 2}


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(SMALL)), st.sampled_from([1e-3, 1e-6]), st.data())
def test_sensitivity_floor(name, eps, data):
    state = SMALL[name]()
    k = STRENGTH[name]
    which = data.draw(st.integers(0, len(state) - 1))
    rep = is_k_uniform(perturb(state, eps, which), k)
    assert rep.max_deviation >= eps / 10
    if eps == 1e-3:
        assert not rep.passed


def test_perturbed_qudit_state_fails():
    q = build_qud_4_3m(QudParams(field_of_order(7), (1, 2), 5), 1)
    state = assemble_state(q)
    assert not is_k_uniform(perturb(state, 1e-3), 3).passed


def test_report_json():
    rep = is_k_uniform(bell_state(0, 0), 1)
    obj = rep.to_json()
    assert obj["passed"] is True and obj["worst_subset"] == [1]
    assert set(obj) >= {"k", "subsets_checked", "max_deviation", "worst_subset", "passed", "wall_time"}
