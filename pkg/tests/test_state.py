import numpy as np
import pytest

from triq.errors import NullOutcome, ZeroState
from triq.state import (
    KrausPair,
    LocalUnitary,
    PureState3,
    QubitLabel,
    apply_kraus_outcome,
    apply_local_unitary,
    basis_state,
    completeness_residual,
    haar_unitary,
    make_rng,
    normalize,
    permute_qubits,
    product_state,
    purity,
    random_kraus_pair,
    random_state,
    reduced_density,
)


def test_flat_index_order():
    s = basis_state(1, 0, 1)
    assert s.t[5] == 1
    assert s.amplitude(1, 0, 1) == 1
    assert s.tensor[1, 0, 1] == 1


def test_amplitudes_are_read_only():
    s = random_state(make_rng(0))
    with pytest.raises(ValueError):
        s.t[0] = 1.0


@pytest.mark.parametrize("bad", [np.zeros(7), np.zeros(9), [np.nan] * 8])
def test_constructor_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        PureState3(bad)


def test_zero_state_cannot_normalize():
    with pytest.raises(ZeroState):
        normalize(PureState3(np.zeros(8)))


def test_normalize():
    s = normalize(PureState3(np.arange(8) + 1j))
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("label,axis", [("A", 0), ("b", 1), (2, 2), (QubitLabel.C, 2)])
def test_qubit_label_parse(label, axis):
    assert QubitLabel.parse(label).axis == axis


def test_qubit_label_rejects_unknown():
    with pytest.raises(ValueError):
        QubitLabel.parse("D")


def test_haar_unitary_is_unitary():
    rng = make_rng(3)
    for _ in range(50):
        u = haar_unitary(rng)
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-13)


def test_haar_unitary_first_moment_vanishes():
    # E[U] = 0 and E|U_00|^2 = 1/2 for Haar measure on U(2)
    rng = make_rng(11)
    us = np.array([haar_unitary(rng) for _ in range(20000)])
    assert np.abs(us.mean(axis=0)).max() < 0.02
    assert np.mean(np.abs(us[:, 0, 0]) ** 2) == pytest.approx(0.5, abs=0.01)


def test_local_unitary_validation():
    with pytest.raises(ValueError):
        LocalUnitary(np.array([[1, 1], [0, 1]]), "A")


def test_substreams_are_reproducible_and_distinct():
    a = make_rng(5, 1).standard_normal(4)
    b = make_rng(5, 1).standard_normal(4)
    c = make_rng(5, 2).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_random_kraus_pair_is_complete():
    for i in range(20):
        k = random_kraus_pair(make_rng(2, i), "B")
        assert completeness_residual(k.a1, k.a2) < 1e-13


def test_kraus_pair_rejects_incomplete():
    with pytest.raises(ValueError):
        KrausPair(np.eye(2), np.eye(2))


def test_kraus_outcome_probabilities_sum_to_one():
    rng = make_rng(8)
    s = random_state(rng)
    k = random_kraus_pair(rng, "C")
    _, p1 = apply_kraus_outcome(s, k, 1)
    _, p2 = apply_kraus_outcome(s, k, 2)
    assert p1 + p2 == pytest.approx(1.0, abs=1e-13)


def test_null_outcome():
    proj = np.diag([1.0, 0.0])
    k = KrausPair(proj, np.eye(2) - proj, "A")
    with pytest.raises(NullOutcome) as info:
        apply_kraus_outcome(basis_state(1, 0, 0), k, 1)
    assert info.value.probability == 0.0


def test_apply_local_unitary_acts_on_target_only():
    x = np.array([[0, 1], [1, 0]])
    out = apply_local_unitary(basis_state(0, 0, 0), LocalUnitary(x, "B"))
    assert out.allclose(basis_state(0, 1, 0))


def test_permute_qubits():
    s = basis_state(1, 0, 0)
    assert permute_qubits(s, "BCA").allclose(basis_state(0, 0, 1))
    assert permute_qubits(permute_qubits(s, "BAC"), "BAC").allclose(s)
    with pytest.raises(ValueError):
        permute_qubits(s, "AAB")


def test_reduced_density_of_product():
    s = product_state([1, 1], [1, 0], [0, 1])
    assert np.allclose(reduced_density(s, "A"), 0.5 * np.ones((2, 2)))
    assert purity(reduced_density(s, "C")) == pytest.approx(1.0)
