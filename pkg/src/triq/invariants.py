"""Polynomial local-unitary invariants and the monotones built from them.

``P_{sigma,tau}`` is the degree-``2n`` contraction

    sum  t[i1,j1,k1] ... t[in,jn,kn] * conj(t[i1, j_sigma(1), k_tau(1)]) ... conj(t[in, j_sigma(n), k_tau(n)])

over all repeated indices.  Two evaluators are provided: an explicit
enumeration of all ``2**(3n)`` index assignments (kept as ground truth) and
an ``einsum`` contraction built from the same permutations (used on hot paths).
"""
from __future__ import annotations

import functools
import itertools
import string
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegreeTooLarge
from .state import PureState3, purity, reduced_density

MAX_DEGREE = 6
SIGN_TIE = 1e-10
CLAMP = 1e-12

LEVI_CIVITA = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class Permutation:
    """Permutation on ``1..n`` given by its images (1-based)."""

    images: tuple

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, *cycles) -> "Permutation":
        images = list(range(1, n + 1))
        for cycle in cycles:
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                images[a - 1] = b
        return cls(tuple(images))

    @property
    def n(self) -> int:
        return len(self.images)

    def zero_based(self) -> tuple:
        return tuple(v - 1 for v in self.images)

    def extended(self, n: int) -> "Permutation":
        """Same permutation acting on ``1..n`` with the extra points fixed."""
        if n < self.n:
            raise ValueError("cannot shrink a permutation")
        return Permutation(self.images + tuple(range(self.n + 1, n + 1)))


E1 = Permutation.identity(1)
SWAP12 = Permutation.from_cycles(2, (1, 2))
ID2 = Permutation.identity(2)
CYCLE123 = Permutation.from_cycles(3, (1, 2, 3))
CYCLE132 = Permutation.from_cycles(3, (1, 3, 2))
# I6 = sign Im P_{(34)(56), (13524)}: the 5-cycle is read on six points with 6 fixed.
I6_SIGMA = Permutation.from_cycles(6, (3, 4), (5, 6))
I6_TAU = Permutation.from_cycles(6, (1, 3, 5, 2, 4))


@dataclass(frozen=True)
class InvariantVector:
    i1: float
    i2: float
    i3: float
    i4: float
    i5: float
    i6: int
    i6_degenerate: bool = False

    def continuous(self) -> np.ndarray:
        return np.array([self.i1, self.i2, self.i3, self.i4, self.i5])

    def max_abs_diff(self, other: "InvariantVector") -> float:
        return float(np.abs(self.continuous() - other.continuous()).max())

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MonotoneVector:
    tau_ab_c: float
    tau_ac_b: float
    tau_bc_a: float
    tau_abc: float
    sigma_abc: float

    @classmethod
    def from_invariants(cls, iv: InvariantVector) -> "MonotoneVector":
        return cls(
            _clamp(2.0 * (1.0 - iv.i1)),
            _clamp(2.0 * (1.0 - iv.i2)),
            _clamp(2.0 * (1.0 - iv.i3)),
            _clamp(2.0 * np.sqrt(max(iv.i5, 0.0))),
            _clamp(3.0 - (iv.i1 + iv.i2 + iv.i3) * iv.i4),
        )

    def as_dict(self) -> dict:
        return asdict(self)

    def as_array(self) -> np.ndarray:
        return np.array(list(asdict(self).values()))


def _clamp(x: float) -> float:
    x = float(x)
    return 0.0 if -CLAMP <= x < 0.0 else x


def _check_pair(sigma: Permutation, tau: Permutation) -> int:
    if sigma.n != tau.n:
        raise ValueError(f"sigma and tau act on different sizes ({sigma.n} vs {tau.n})")
    if sigma.n > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {sigma.n} exceeds the cap of {MAX_DEGREE}")
    return sigma.n


@functools.lru_cache(maxsize=None)
def _assignments(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=3 * n)), dtype=np.int8)


def poly_invariant_brute(state: PureState3, sigma: Permutation, tau: Permutation) -> complex:
    """Enumerate every index assignment of ``P_{sigma,tau}``."""
    n = _check_pair(sigma, tau)
    t = state.tensor
    idx = _assignments(n)
    i, j, k = idx[:, :n], idx[:, n : 2 * n], idx[:, 2 * n :]
    s = list(sigma.zero_based())
    u = list(tau.zero_based())
    plain = np.prod(t[i, j, k], axis=1)
    barred = np.prod(np.conj(t[i, j[:, s], k[:, u]]), axis=1)
    return complex(np.sum(plain * barred))


@functools.lru_cache(maxsize=None)
def _einsum_spec(sigma: tuple, tau: tuple, batched: bool) -> str:
    n = len(sigma)
    letters = string.ascii_letters
    I, J, K = letters[:n], letters[n : 2 * n], letters[2 * n : 3 * n]
    lead = "Z" if batched else ""
    plain = [lead + I[m] + J[m] + K[m] for m in range(n)]
    barred = [lead + I[m] + J[sigma[m]] + K[tau[m]] for m in range(n)]
    return ",".join(plain + barred) + "->" + lead


@functools.lru_cache(maxsize=None)
def _einsum_path(spec: str, n: int, batch: int):
    dummy = np.zeros((batch, 2, 2, 2) if batch else (2, 2, 2), dtype=np.complex128)
    return np.einsum_path(spec, *([dummy] * (2 * n)), optimize="greedy")[0]


def _contract(tensors: np.ndarray, sigma: Permutation, tau: Permutation) -> np.ndarray:
    n = _check_pair(sigma, tau)
    batched = tensors.ndim == 4
    spec = _einsum_spec(sigma.zero_based(), tau.zero_based(), batched)
    path = _einsum_path(spec, n, 1 if batched else 0)
    conj = tensors.conj()
    return np.einsum(spec, *([tensors] * n + [conj] * n), optimize=path)


def poly_invariant(state: PureState3, sigma: Permutation, tau: Permutation, method: str = "brute") -> complex:
    """Evaluate ``P_{sigma,tau}(state)``.

    ``method="brute"`` sums all ``2**(3n)`` terms explicitly;
    ``method="einsum"`` performs the same contraction pairwise.
    """
    if method == "brute":
        return poly_invariant_brute(state, sigma, tau)
    if method == "einsum":
        return complex(_contract(state.tensor, sigma, tau))
    raise ValueError(f"unknown method {method!r}")


def _hyperdet_spec(batched: bool) -> str:
    z = "Z" if batched else ""
    # eps_{i1 i2} eps_{i3 i4} eps_{j1 j2} eps_{j3 j4} eps_{k1 k3} eps_{k2 k4}
    return f"{z}adg,{z}beh,{z}cfk,{z}lmn,ab,cl,de,fm,gk,hn->{z}"


def epsilon_contraction(tensors: np.ndarray) -> np.ndarray:
    """Degree-4 Levi-Civita contraction (minus twice the Cayley hyperdeterminant)."""
    batched = tensors.ndim == 4
    e = LEVI_CIVITA
    return np.einsum(_hyperdet_spec(batched), tensors, tensors, tensors, tensors, e, e, e, e, e, e, optimize=True)


def i5_epsilon(state: PureState3) -> float:
    return float(abs(complex(epsilon_contraction(state.tensor))) ** 2)


def i6_value(state: PureState3, method: str = "einsum") -> float:
    """Imaginary part of the degree-6 invariant whose sign is I6."""
    return poly_invariant(state, I6_SIGMA, I6_TAU, method=method).imag


def sign_with_tie(x: float, tie: float = SIGN_TIE):
    """Return ``(sign, degenerate)`` with sign(x) = +1 for x >= 0.

    Values within ``tie`` of zero are reported as +1 and flagged.
    """
    if abs(x) <= tie:
        return 1, True
    return (1 if x >= 0 else -1), False


def i6_sign(state: PureState3) -> int:
    return sign_with_tie(i6_value(state))[0]


def invariants(state: PureState3) -> InvariantVector:
    """All six LU invariants of a normalized state."""
    i1 = purity(reduced_density(state, "C"))
    i2 = purity(reduced_density(state, "B"))
    i3 = purity(reduced_density(state, "A"))
    i4 = poly_invariant(state, CYCLE123, CYCLE132, method="einsum").real
    i5 = i5_epsilon(state)
    i6, degenerate = sign_with_tie(i6_value(state))
    return InvariantVector(i1, i2, i3, i4, i5, i6, degenerate)


def monotones(state: PureState3) -> MonotoneVector:
    return MonotoneVector.from_invariants(invariants(state))


def invariants_batch(tensors: np.ndarray) -> dict:
    """Vectorized invariants for an array of shape ``(N, 2, 2, 2)``.

    Returns a dict of arrays keyed ``i1`` ... ``i5`` and ``im_p6``.
    """
    t = np.asarray(tensors, dtype=np.complex128)
    tc = t.conj()
    rho_a = np.einsum("zijk,zljk->zil", t, tc)
    rho_b = np.einsum("zijk,zilk->zjl", t, tc)
    rho_c = np.einsum("zijk,zijl->zkl", t, tc)

    def pur(r):
        return np.einsum("zab,zba->z", r, r).real

    return {
        "i1": pur(rho_c),
        "i2": pur(rho_b),
        "i3": pur(rho_a),
        "i4": _contract(t, CYCLE123, CYCLE132).real,
        "i5": np.abs(epsilon_contraction(t)) ** 2,
        "im_p6": _contract(t, I6_SIGMA, I6_TAU).imag,
    }


def monotones_batch(inv: dict) -> dict:
    """Monotone arrays from the output of :func:`invariants_batch`."""
    i1, i2, i3, i4, i5 = (inv[k] for k in ("i1", "i2", "i3", "i4", "i5"))
    return {
        "tau_ab_c": 2.0 * (1.0 - i1),
        "tau_ac_b": 2.0 * (1.0 - i2),
        "tau_bc_a": 2.0 * (1.0 - i3),
        "tau_abc": 2.0 * np.sqrt(np.maximum(i5, 0.0)),
        "sigma_abc": 3.0 - (i1 + i2 + i3) * i4,
    }
