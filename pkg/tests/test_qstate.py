import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuniform.ffield import field_of_order
from kuniform.qstate import (
    SparseState,
    basis_ket,
    bell_state,
    character_table,
    cross_reduced,
    gram,
    ghz_state,
    inner,
    normalize,
    phi2_state,
    phi3_state,
    psi_state,
    reduced_density,
    tensor,
    tensor_power,
)

from oracles import dense_cross, dense_reduced, dense_vector

S2 = 1 / math.sqrt(2)


def ghz_family():
    return [ghz_state(*lab) for lab in itertools.product((0, 1), repeat=3)]


def psi_family(d, alpha=2, beta=1):
    f = field_of_order(d)
    return [psi_state(f, i, j, k, alpha, beta) for i, j, k in itertools.product(range(d), repeat=3)]


def assert_identity(g, tol=1e-12):
    assert np.max(np.abs(g - np.eye(len(g)))) < tol


# -- plumbing -------------------------------------------------------------------


def test_tensor_inner_normalize():
    assert tensor(basis_ket(2, [0]), basis_ket(2, [1])).amps == {(0, 1): 1}
    assert inner(bell_state(0, 0), bell_state(0, 1)) == 0
    assert normalize(2 * basis_ket(2, [0])).amps == {(0,): 1}
    with pytest.raises(ValueError):
        normalize(SparseState(2, 1, {}))


def test_shape_errors():
    with pytest.raises(ValueError, match="mismatch"):
        inner(basis_ket(2, [0]), basis_ket(2, [0, 0]))
    with pytest.raises(ValueError, match="mismatch"):
        tensor(basis_ket(2, [0]), basis_ket(3, [0]))
    with pytest.raises(ValueError, match="invalid"):
        SparseState(2, 2, {(0, 2): 1})


def test_drop_tolerance():
    s = SparseState(2, 1, {(0,): 1, (1,): 1e-15})
    assert len(s) == 1
    assert len(basis_ket(2, [0]) - basis_ket(2, [0])) == 0


def test_tensor_site_order_and_dense():
    s = tensor(basis_ket(3, [2]), basis_ket(3, [1]))
    v = s.to_dense()
    assert v[2 * 3 + 1] == 1 and np.count_nonzero(v) == 1
    assert tensor_power(basis_ket(2, [1]), 3).amps == {(1, 1, 1): 1}


def test_json_round_trip():
    s = psi_family(5)[37]
    back = SparseState.from_json(s.to_json())
    assert back == s
    assert [e["ket"] for e in s.to_json()["amps"]] == sorted(e["ket"] for e in s.to_json()["amps"])


# -- families -------------------------------------------------------------------


def test_ghz_examples():
    assert ghz_state(0, 0, 0).close_to(SparseState(2, 3, {(1, 1, 1): -S2, (0, 0, 0): -S2}))
    assert ghz_state(0, 0, 1).close_to(SparseState(2, 3, {(1, 1, 0): S2, (0, 0, 1): -S2}))
    for s in ghz_family():
        assert len(s) == 2 and all(abs(abs(a) - S2) < 1e-15 for _, a in s)
    assert_identity(gram(ghz_family()))


def test_bell_examples():
    assert bell_state(0, 0).close_to(SparseState(2, 2, {(0, 0): S2, (1, 1): S2}))
    assert bell_state(1, 0).close_to(SparseState(2, 2, {(1, 0): -S2, (0, 1): S2}))
    proj = sum(np.outer(b.to_dense(), b.to_dense().conj()) for b in (bell_state(x, y) for x in (0, 1) for y in (0, 1)))
    assert np.allclose(proj, np.eye(4), atol=1e-15)


def test_label_validation():
    with pytest.raises(ValueError):
        ghz_state(0, 2, 0)
    with pytest.raises(ValueError):
        bell_state(2, 0)
    f = field_of_order(5)
    with pytest.raises(ValueError, match="alpha"):
        psi_state(f, 0, 0, 0, 1, 1)
    with pytest.raises(ValueError, match="beta"):
        psi_state(f, 0, 0, 0, 2, 0)
    with pytest.raises(ValueError):
        phi3_state(7, 0, 0, 0)
    with pytest.raises(ValueError):
        phi2_state(field_of_order(2), 0, 0)


@pytest.mark.parametrize("d", [4, 5, 7, 8, 9])
def test_psi_orthonormal_basis(d):
    assert_identity(gram(psi_family(d)))


@pytest.mark.parametrize("d", [3, 4, 5])
def test_phi2_orthonormal_basis(d):
    f = field_of_order(d)
    assert_identity(gram([phi2_state(f, i, j) for i in range(d) for j in range(d)]))


def test_phi3_d5_orthonormal_basis():
    assert_identity(gram([phi3_state(5, *lab) for lab in itertools.product(range(5), repeat=3)]))


def test_phi3_d3_is_not_a_basis():
    # 2j + k = -(j + 2k) mod 3, so (j, k) and (j + c, k + c) give the same kets
    g = gram([phi3_state(3, *lab) for lab in itertools.product(range(3), repeat=3)])
    assert np.max(np.abs(g - np.eye(27))) == pytest.approx(1.0)
    assert phi3_state(3, 0, 1, 1) == phi3_state(3, 0, 0, 0)


def test_phi3_direct_expansion():
    r3 = 1 / math.sqrt(3)
    assert phi3_state(3, 0, 0, 0).close_to(SparseState(3, 3, {(0, 0, 0): r3, (1, 1, 1): r3, (2, 2, 2): r3}))
    # j = 1, k = 0: kets |l+2, l+1, l>
    assert set(phi3_state(3, 1, 1, 0).amps) == {(2, 1, 0), (0, 2, 1), (1, 0, 2)}


def test_psi_i0_has_unit_phases():
    s = psi_family(5)[0]
    assert np.allclose(s.values, 1 / math.sqrt(5))


def test_index_phase_convention_is_not_orthogonal():
    f = field_of_order(4)
    states = [psi_state(f, i, j, k, 2, 1, phase="index") for i, j, k in itertools.product(range(4), repeat=3)]
    g = gram(states)
    assert np.max(np.abs(g - np.eye(64))) > 0.4


@pytest.mark.parametrize("d", [3, 4, 5, 7, 8, 9, 11, 13])
def test_character_sums(d):
    f = field_of_order(d)
    sums = character_table(f).sum(axis=1)
    assert abs(sums[0] - d) < 1e-12
    assert np.max(np.abs(sums[1:])) < 1e-12
    # for prime d the character is omega^(i*l)
    if f.t == 1:
        i, l = np.meshgrid(range(d), range(d), indexing="ij")
        assert np.allclose(character_table(f), np.exp(2j * np.pi * i * l / d))


def test_family_marginals_maximally_mixed():
    for d in (4, 5):
        for s in psi_family(d)[::7]:
            assert np.allclose(reduced_density(s, [1]), np.eye(d) / d, atol=1e-12)
    for d in (3, 5):
        f = field_of_order(d)
        s = phi2_state(f, 1, 2)
        assert np.allclose(reduced_density(s, [1]), np.eye(d) / d, atol=1e-12)
        assert np.allclose(reduced_density(s, [2]), np.eye(d) / d, atol=1e-12)
        assert np.allclose(reduced_density(phi3_state(d, 1, 2, 0), [1]), np.eye(d) / d, atol=1e-12)
    f = field_of_order(7)
    s = phi2_state(f, 0, 0)
    assert s.close_to(SparseState(7, 2, {(l, l): 1 / math.sqrt(7) for l in range(7)}))


def test_unit_norms():
    states = ghz_family() + [bell_state(1, 1)] + psi_family(8)[::11] + [phi3_state(5, 1, 2, 3)]
    for s in states:
        assert abs(s.norm() - 1) < 1e-12


# -- partial traces -----------------------------------------------------------


def test_reduced_density_examples():
    assert np.allclose(reduced_density(bell_state(0, 0), [1]), np.eye(2) / 2)
    assert np.allclose(reduced_density(ghz_state(0, 1, 0), [2]), np.eye(2) / 2)
    assert np.allclose(reduced_density(basis_ket(2, [0, 1]), [1]), [[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        reduced_density(bell_state(0, 0), [])
    with pytest.raises(ValueError):
        reduced_density(bell_state(0, 0), [3])


def test_cross_reduced_examples():
    a = basis_ket(2, [0, 0])
    b = basis_ket(2, [0, 1])
    assert np.all(cross_reduced(a, b, [1]) == 0)
    g = {lab: ghz_state(*lab) for lab in itertools.product((0, 1), repeat=3)}
    for i, k in itertools.product((0, 1), repeat=2):
        total = sum(cross_reduced(g[i, j, k], g[i, j, k], [2, 3]) for j in (0, 1))
        assert np.allclose(total, np.eye(4) / 2, atol=1e-15)
    for j, k, jp, kp in itertools.product((0, 1), repeat=4):
        total = sum(cross_reduced(g[i, j, k], g[i, jp, kp], [1]) for i in (0, 1))
        expected = np.eye(2) * (j == jp and k == kp)
        assert np.allclose(total, expected, atol=1e-15)


def random_state(rng, d, n, nnz):
    kets = {tuple(rng.integers(0, d, n)) for _ in range(nnz)}
    amps = {k: complex(rng.normal(), rng.normal()) for k in kets}
    return SparseState(d, n, amps)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.integers(1, 5), st.integers(0, 2**32 - 1), st.data())
def test_partial_traces_match_dense_oracle(d, n, seed, data):
    rng = np.random.default_rng(seed)
    a = random_state(rng, d, n, 1 + int(rng.integers(0, d**n)))
    b = random_state(rng, d, n, 1 + int(rng.integers(0, d**n)))
    S = data.draw(st.sets(st.integers(1, n), min_size=1))
    va, vb = dense_vector(a.amps, d, n), dense_vector(b.amps, d, n)
    rho = reduced_density(a, S)
    assert np.allclose(rho, dense_reduced(va, d, n, S), atol=1e-12)
    assert np.allclose(cross_reduced(a, b, S), dense_cross(va, vb, d, n, S), atol=1e-12)
    assert np.allclose(cross_reduced(a, a, S), rho)
    # Hermitian, PSD, trace = norm^2
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-10
    assert abs(np.trace(rho).real - a.norm() ** 2) < 1e-9 * max(1.0, a.norm() ** 2)
    assert abs(inner(a, b) - np.vdot(va, vb)) < 1e-9 * max(1.0, a.norm() * b.norm())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tensor_matches_kron(seed):
    rng = np.random.default_rng(seed)
    a, b = random_state(rng, 2, 2, 3), random_state(rng, 2, 3, 4)
    assert np.allclose(tensor(a, b).to_dense(), np.kron(a.to_dense(), b.to_dense()))
    assert np.allclose((a @ b).to_dense(), np.kron(a.to_dense(), b.to_dense()))
