"""Three-qubit pure states, local operations and seeded sampling.

Amplitudes are stored flat in the order ``4*i + 2*j + k`` where ``i``, ``j``
and ``k`` are the computational-basis indices of qubits A, B and C.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NullOutcome, ZeroState

ZERO_NORM = 1e-30
NULL_PROBABILITY = 1e-14


class QubitLabel(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"

    @property
    def axis(self) -> int:
        return "ABC".index(self.value)

    @classmethod
    def parse(cls, value) -> "QubitLabel":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return list(cls)[value]
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown qubit {value!r}; expected A, B or C") from None


@dataclass(frozen=True, eq=False)
class PureState3:
    """Eight complex amplitudes ``t_ijk`` of a three-qubit state."""

    t: np.ndarray

    def __post_init__(self):
        t = np.array(self.t, dtype=np.complex128).reshape(-1)
        if t.shape != (8,):
            raise ValueError(f"a three-qubit state needs 8 amplitudes, got {t.size}")
        if not np.all(np.isfinite(t)):
            raise ValueError("amplitudes must be finite")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_tensor(cls, tensor) -> "PureState3":
        return cls(np.asarray(tensor).reshape(8))

    @property
    def tensor(self) -> np.ndarray:
        """View of the amplitudes with shape ``(2, 2, 2)`` indexed ``[i, j, k]``."""
        return self.t.reshape(2, 2, 2)

    def amplitude(self, i: int, j: int, k: int) -> complex:
        return complex(self.t[4 * i + 2 * j + k])

    def norm_squared(self) -> float:
        return float(np.vdot(self.t, self.t).real)

    def allclose(self, other: "PureState3", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.t, other.t, rtol=0.0, atol=atol))

    def __repr__(self):
        amps = ", ".join(f"{z:.6g}" for z in self.t)
        return f"PureState3([{amps}])"


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    m: np.ndarray
    target: QubitLabel

    def __post_init__(self):
        m = np.array(self.m, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError("a local unitary is a 2x2 matrix")
        if not np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12):
            raise ValueError("matrix is not unitary within 1e-12")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "target", QubitLabel.parse(self.target))


@dataclass(frozen=True, eq=False)
class KrausPair:
    """Two-outcome generalized measurement on one qubit."""

    a1: np.ndarray
    a2: np.ndarray
    target: QubitLabel = QubitLabel.A

    def __post_init__(self):
        a1 = np.array(self.a1, dtype=np.complex128)
        a2 = np.array(self.a2, dtype=np.complex128)
        if a1.shape != (2, 2) or a2.shape != (2, 2):
            raise ValueError("Kraus operators are 2x2 matrices")
        resid = completeness_residual(a1, a2)
        if resid > 1e-10:
            raise ValueError(f"Kraus pair violates completeness (residual {resid:.3g})")
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)
        object.__setattr__(self, "target", QubitLabel.parse(self.target))

    def operator(self, which: int) -> np.ndarray:
        if which == 1:
            return self.a1
        if which == 2:
            return self.a2
        raise ValueError("outcome index must be 1 or 2")


def completeness_residual(a1, a2) -> float:
    a1 = np.asarray(a1)
    a2 = np.asarray(a2)
    return float(np.abs(a1.conj().T @ a1 + a2.conj().T @ a2 - np.eye(2)).max())


def basis_state(i: int, j: int, k: int) -> PureState3:
    t = np.zeros(8, dtype=np.complex128)
    t[4 * i + 2 * j + k] = 1.0
    return PureState3(t)


def product_state(a, b, c) -> PureState3:
    """Tensor product of three single-qubit vectors (normalized)."""
    return normalize(PureState3(np.kron(np.kron(a, b), c)))


def ghz() -> PureState3:
    t = np.zeros(8, dtype=np.complex128)
    t[0] = t[7] = 1 / np.sqrt(2)
    return PureState3(t)


def w_state() -> PureState3:
    t = np.zeros(8, dtype=np.complex128)
    t[1] = t[2] = t[4] = 1 / np.sqrt(3)
    return PureState3(t)


def normalize(state: PureState3) -> PureState3:
    n2 = state.norm_squared()
    if n2 <= ZERO_NORM:
        raise ZeroState(f"cannot normalize a state with squared norm {n2:.3g}")
    return PureState3(state.t / np.sqrt(n2))


def apply_matrix(state: PureState3, m, target) -> PureState3:
    """Contract ``m`` into the index of ``target`` without normalizing."""
    axis = QubitLabel.parse(target).axis
    out = np.tensordot(np.asarray(m, dtype=np.complex128), state.tensor, axes=([1], [axis]))
    return PureState3.from_tensor(np.moveaxis(out, 0, axis))


def apply_local_unitary(state: PureState3, u: LocalUnitary) -> PureState3:
    return apply_matrix(state, u.m, u.target)


def apply_kraus_outcome(state: PureState3, k: KrausPair, which: int):
    """Apply outcome ``which`` of ``k``.

    Returns the normalized post-measurement state and the outcome
    probability (the squared norm of the unnormalized branch).  Raises
    ``NullOutcome`` if that probability is below 1e-14.
    """
    branch = apply_matrix(state, k.operator(which), k.target)
    p = branch.norm_squared()
    if p < NULL_PROBABILITY:
        raise NullOutcome(f"outcome {which} has probability {p:.3g}", probability=p)
    return PureState3(branch.t / np.sqrt(p)), p


def permute_qubits(state: PureState3, order) -> PureState3:
    """Relabel qubits: slot ``n`` of the result holds qubit ``order[n]`` of the input."""
    axes = [QubitLabel.parse(q).axis for q in order]
    if sorted(axes) != [0, 1, 2]:
        raise ValueError(f"not a permutation of A, B, C: {order!r}")
    return PureState3.from_tensor(np.transpose(state.tensor, axes))


def reduced_density(state: PureState3, x) -> np.ndarray:
    """Single-qubit reduced density matrix of qubit ``x``."""
    axis = QubitLabel.parse(x).axis
    t = np.moveaxis(state.tensor, axis, 0).reshape(2, 4)
    rho = t @ t.conj().T
    return 0.5 * (rho + rho.conj().T)


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.einsum("ab,ba->", rho, rho).real)


def conjugate(state: PureState3) -> PureState3:
    return PureState3(state.t.conj())


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for substream ``stream`` of ``seed`` (PCG64 via SeedSequence)."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream)])


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary (QR of a Ginibre matrix with phase fix)."""
    q, r = np.linalg.qr(_complex_normal(rng, (2, 2)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(rng: np.random.Generator) -> PureState3:
    """Uniformly distributed state on the unit sphere of C^8."""
    z = _complex_normal(rng, 8)
    return PureState3(z / np.linalg.norm(z))


def random_isometry_blocks(rng: np.random.Generator):
    q, _ = np.linalg.qr(_complex_normal(rng, (4, 2)))
    return q[:2], q[2:]


def random_kraus_pair(rng: np.random.Generator, target) -> KrausPair:
    """Two-outcome Kraus pair from the stacked blocks of a random 4x2 isometry."""
    a1, a2 = random_isometry_blocks(rng)
    return KrausPair(a1, a2, QubitLabel.parse(target))


def random_local_unitary(rng: np.random.Generator, target=None) -> LocalUnitary:
    if target is None:
        target = list(QubitLabel)[int(rng.integers(3))]
    return LocalUnitary(haar_unitary(rng), QubitLabel.parse(target))
