import itertools

import mpmath
import numpy as np
import pytest
from conftest import random_lu, seeded_states
from hypothesis import given, settings
from hypothesis import strategies as st

from triq.errors import DegreeTooLarge
from triq.invariants import (
    CYCLE123,
    CYCLE132,
    E1,
    I6_SIGMA,
    I6_TAU,
    ID2,
    SWAP12,
    InvariantVector,
    MonotoneVector,
    Permutation,
    epsilon_contraction,
    i5_epsilon,
    i6_value,
    invariants,
    invariants_batch,
    monotones,
    monotones_batch,
    poly_invariant,
    poly_invariant_brute,
    sign_with_tie,
)
from triq.state import (
    PureState3,
    apply_local_unitary,
    basis_state,
    conjugate,
    make_rng,
    normalize,
    permute_qubits,
    random_state,
)


def cayley_hyperdet(s):
    a = s.tensor
    return (
        a[0, 0, 0] ** 2 * a[1, 1, 1] ** 2
        + a[0, 0, 1] ** 2 * a[1, 1, 0] ** 2
        + a[0, 1, 0] ** 2 * a[1, 0, 1] ** 2
        + a[1, 0, 0] ** 2 * a[0, 1, 1] ** 2
        - 2
        * (
            a[0, 0, 0] * a[0, 0, 1] * a[1, 1, 0] * a[1, 1, 1]
            + a[0, 0, 0] * a[0, 1, 0] * a[1, 0, 1] * a[1, 1, 1]
            + a[0, 0, 0] * a[1, 0, 0] * a[0, 1, 1] * a[1, 1, 1]
            + a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 1] * a[1, 1, 0]
            + a[0, 0, 1] * a[1, 0, 0] * a[0, 1, 1] * a[1, 1, 0]
            + a[0, 1, 0] * a[1, 0, 0] * a[0, 1, 1] * a[1, 0, 1]
        )
        + 4 * (a[0, 0, 0] * a[0, 1, 1] * a[1, 0, 1] * a[1, 1, 0] + a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0] * a[1, 1, 1])
    )


def lu_apply(state, us):
    for u in us:
        state = apply_local_unitary(state, u)
    return state


# -- generic evaluator ------------------------------------------------------------

PAIRS = [
    (E1, E1),
    (ID2, SWAP12),
    (SWAP12, ID2),
    (SWAP12, SWAP12),
    (CYCLE123, CYCLE132),
    (CYCLE132, CYCLE123),
    (Permutation.from_cycles(4, (1, 2), (3, 4)), Permutation.from_cycles(4, (1, 3), (2, 4))),
    (I6_SIGMA, I6_TAU),
]


@pytest.mark.parametrize("sigma,tau", PAIRS)
def test_brute_force_matches_einsum(sigma, tau):
    for s in seeded_states(1, 3):
        brute = poly_invariant_brute(s, sigma, tau)
        fast = poly_invariant(s, sigma, tau, method="einsum")
        assert abs(brute - fast) < 1e-13


def test_e1_is_the_norm():
    s = random_state(make_rng(4))
    assert poly_invariant(s, E1, E1) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize(
    "sigma,tau,qubit",
    [(ID2, SWAP12, "C"), (SWAP12, ID2, "B"), (SWAP12, SWAP12, "A")],
)
def test_purities_are_degree_two_invariants(sigma, tau, qubit):
    s = random_state(make_rng(9))
    inv = invariants(s)
    want = {"C": inv.i1, "B": inv.i2, "A": inv.i3}[qubit]
    assert poly_invariant_brute(s, sigma, tau).real == pytest.approx(want, abs=1e-14)


def test_kempe_invariant_high_precision():
    s = random_state(make_rng(21))
    t = [[[mpmath.mpc(complex(s.tensor[i, j, k])) for k in range(2)] for j in range(2)] for i in range(2)]
    total = mpmath.mpc(0)
    for a, b, c, d, e, f, g, h, i in itertools.product(range(2), repeat=9):
        # i-indices (a, d, g), j (b, e, h), k (c, f, i); sigma = (123), tau = (132)
        total += t[a][b][c] * t[d][e][f] * t[g][h][i] * mpmath.conj(t[a][e][i] * t[d][h][c] * t[g][b][f])
    assert abs(float(total.real) - invariants(s).i4) < 1e-14


def test_degree_cap():
    p = Permutation.identity(7)
    with pytest.raises(DegreeTooLarge):
        poly_invariant_brute(random_state(make_rng(0)), p, p)


def test_size_mismatch():
    with pytest.raises(ValueError):
        poly_invariant(random_state(make_rng(0)), ID2, CYCLE123)


def test_unknown_method():
    with pytest.raises(ValueError):
        poly_invariant(random_state(make_rng(0)), ID2, ID2, method="fft")


def test_permutation_validation():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))
    assert Permutation.from_cycles(3, (1, 2, 3)).images == (2, 3, 1)
    assert SWAP12.extended(4).images == (2, 1, 3, 4)


# -- I5 and I6 ------------------------------------------------------------------------


def test_epsilon_contraction_is_minus_twice_the_hyperdeterminant():
    for s in seeded_states(2, 10):
        assert abs(complex(epsilon_contraction(s.tensor)) + 2 * cayley_hyperdet(s)) < 1e-14
        assert i5_epsilon(s) == pytest.approx(4 * abs(cayley_hyperdet(s)) ** 2, abs=1e-14)


def test_i5_is_lu_invariant_only_with_matching_k_pairs():
    # the alternative pairing eps_{k1 i3} eps_{k2 i4} mixes qubits A and C and is not invariant
    e = np.array([[0.0, 1.0], [-1.0, 0.0]])

    def mixed(t):
        return np.einsum("adg,beh,cfk,lmn,ab,gl,de,fm,ck,hn->", t, t, t, t, e, e, e, e, e, e)

    rng = make_rng(5)
    s = random_state(rng)
    u = lu_apply(s, random_lu(rng))
    assert abs(abs(mixed(s.tensor)) - abs(mixed(u.tensor))) > 1e-3
    assert i5_epsilon(s) == pytest.approx(i5_epsilon(u), abs=1e-13)


def test_i6_is_lu_invariant():
    rng = make_rng(6)
    for _ in range(20):
        s = random_state(rng)
        u = lu_apply(s, random_lu(rng))
        assert i6_value(s) == pytest.approx(i6_value(u), abs=1e-13)


def test_i6_flips_under_conjugation():
    flipped = 0
    for s in seeded_states(7, 20):
        a, b = invariants(s), invariants(conjugate(s))
        assert a.max_abs_diff(b) < 1e-13
        if not a.i6_degenerate:
            assert a.i6 == -b.i6
            flipped += 1
    assert flipped > 15


@pytest.mark.parametrize("x,expect", [(0.3, (1, False)), (-0.3, (-1, False)), (1e-12, (1, True)), (-1e-12, (1, True))])
def test_sign_with_tie(x, expect):
    assert sign_with_tie(x) == expect


# -- canonical states ------------------------------------------------------------------


def test_ghz(ghz_state):
    inv = invariants(ghz_state)
    assert np.allclose(inv.continuous(), [0.5, 0.5, 0.5, 0.25, 0.25], atol=1e-12)
    assert inv.i6 == 1
    assert np.allclose(monotones(ghz_state).as_array(), [1, 1, 1, 1, 21 / 8], atol=1e-12)


def test_w(w):
    inv = invariants(w)
    assert np.allclose(inv.continuous(), [5 / 9, 5 / 9, 5 / 9, 2 / 9, 0], atol=1e-12)
    assert inv.i6 == 1
    assert np.allclose(monotones(w).as_array(), [8 / 9, 8 / 9, 8 / 9, 0, 71 / 27], atol=1e-12)


def test_product(zero_state):
    inv = invariants(zero_state)
    assert np.allclose(inv.continuous(), [1, 1, 1, 1, 0], atol=1e-15)
    assert np.allclose(monotones(zero_state).as_array(), 0, atol=1e-15)


def test_monotone_clamp():
    m = MonotoneVector.from_invariants(InvariantVector(1 + 1e-13, 1, 1, 1, 0, 1))
    assert m.tau_ab_c == 0.0


# -- properties ------------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_lu_invariance(seed):
    rng = make_rng(100, seed)
    s = random_state(rng)
    u = lu_apply(s, random_lu(rng))
    a, b = invariants(s), invariants(u)
    assert a.max_abs_diff(b) < 1e-12
    assert a.i6 == b.i6


@pytest.mark.parametrize("order", ["BAC", "CBA", "ACB", "BCA"])
def test_qubit_permutation_permutes_purities(order):
    s = random_state(make_rng(13))
    a, b = invariants(s), invariants(permute_qubits(s, order))
    pur = {"C": a.i1, "B": a.i2, "A": a.i3}
    assert b.i1 == pytest.approx(pur[order[2]], abs=1e-14)
    assert b.i2 == pytest.approx(pur[order[1]], abs=1e-14)
    assert b.i3 == pytest.approx(pur[order[0]], abs=1e-14)
    assert b.i4 == pytest.approx(a.i4, abs=1e-14)
    assert b.i5 == pytest.approx(a.i5, abs=1e-14)


amplitude = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(amplitude, amplitude), min_size=8, max_size=8), st.integers(0, 2**32 - 1))
def test_invariants_in_range_and_lu_stable(pairs, seed):
    t = np.array([complex(a, b) for a, b in pairs])
    if np.vdot(t, t).real < 1e-6:
        return
    s = normalize(PureState3(t))
    inv = invariants(s)
    for p in (inv.i1, inv.i2, inv.i3):
        assert 0.5 - 1e-12 <= p <= 1 + 1e-12
    assert -1e-12 <= inv.i5 <= 0.25 + 1e-12
    u = lu_apply(s, random_lu(make_rng(seed)))
    assert inv.max_abs_diff(invariants(u)) < 1e-11


def test_batch_matches_scalar():
    states = seeded_states(17, 30)
    batch = invariants_batch(np.stack([s.tensor for s in states]))
    mons = monotones_batch(batch)
    for n, s in enumerate(states):
        inv = invariants(s)
        assert np.allclose([batch[k][n] for k in ("i1", "i2", "i3", "i4", "i5")], inv.continuous(), atol=1e-14)
        assert batch["im_p6"][n] == pytest.approx(i6_value(s), abs=1e-14)
        assert mons["sigma_abc"][n] == pytest.approx(monotones(s).sigma_abc, abs=1e-13)


def test_basis_states_all_product():
    for i, j, k in itertools.product(range(2), repeat=3):
        inv = invariants(basis_state(i, j, k))
        assert np.allclose(inv.continuous(), [1, 1, 1, 1, 0])
