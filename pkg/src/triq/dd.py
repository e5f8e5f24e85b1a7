"""Diagonalization decomposition (DD) of three-qubit states.

Every state is LU-equivalent to

    sqrt(mu0)|000> + sqrt(mu1) e^{i phi}|100> + sqrt(mu2)|101> + sqrt(mu3)|110> + sqrt(mu4)|111>

with ``0 <= phi <= pi``.  This module computes that form, converts between
it and the polynomial invariants, and propagates two-outcome measurements on
qubit A directly in (mu, phi) coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGamma, NonPhysical, NullOutcome, SingularInversion
from .invariants import InvariantVector, invariants, sign_with_tie
from .state import (
    NULL_PROBABILITY,
    KrausPair,
    PureState3,
    apply_kraus_outcome,
    apply_matrix,
    normalize,
    permute_qubits,
    purity,
    reduced_density,
)

MU_SNAP = 1e-12
PRODUCT_TOL = 1e-12
GAMMA_TOL = 1e-14
UPSILON_TOL = 1e-9
SINGULAR_TOL = 1e-12
COS_CLAMP = 1e-9
PHI_EDGE = 1e-12


@dataclass(frozen=True)
class DDForm:
    mu0: float
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    phi: float = 0.0
    degenerate_phi: bool = False
    degenerate_family: bool = False

    @classmethod
    def from_mu(cls, mu, phi=0.0, **flags) -> "DDForm":
        return cls(*(float(m) for m in mu), phi=float(phi), **flags)

    @property
    def mu(self) -> np.ndarray:
        return np.array([self.mu0, self.mu1, self.mu2, self.mu3, self.mu4])

    @property
    def delta(self) -> float:
        root = math.sqrt(max(self.mu1 * self.mu2 * self.mu3 * self.mu4, 0.0))
        return self.mu1 * self.mu4 + self.mu2 * self.mu3 - 2.0 * root * math.cos(self.phi)

    @property
    def is_canonical(self) -> bool:
        return -PHI_EDGE <= self.phi <= math.pi + PHI_EDGE

    def max_abs_diff(self, other: "DDForm") -> float:
        return float(max(np.abs(self.mu - other.mu).max(), abs(self.phi - other.phi)))


@dataclass(frozen=True)
class JVector:
    j1: float
    j2: float
    j3: float
    j4: float
    j5: float
    upsilon: float


@dataclass(frozen=True)
class MeasurementParams:
    """Two-outcome measurement ``A_i = U_i D_i V`` on qubit A.

    ``D_1 = diag(x, y)``, ``D_2 = diag(sqrt(1-x^2), sqrt(1-y^2))`` and
    ``V = [[alpha, s e^{i theta}], [-s e^{-i theta}, alpha]]`` with
    ``s = sqrt(1 - alpha^2)``.
    """

    x: float
    y: float
    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "alpha"):
            v = float(getattr(self, name))
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", theta)

    def diagonal(self, which: int):
        if which == 1:
            return self.x, self.y
        return math.sqrt(max(1.0 - self.x**2, 0.0)), math.sqrt(max(1.0 - self.y**2, 0.0))

    def gamma(self, which: int) -> float:
        x, y = self.diagonal(which)
        return y * y * self.alpha**2 + x * x * (1.0 - self.alpha**2)

    def v_matrix(self) -> np.ndarray:
        s = math.sqrt(max(1.0 - self.alpha**2, 0.0))
        e = np.exp(1j * self.theta)
        return np.array([[self.alpha, s * e], [-s * np.conj(e), self.alpha]], dtype=np.complex128)


@dataclass(frozen=True)
class MeasurementOutcome:
    dd: DDForm | None
    probability: float

    @property
    def is_null(self) -> bool:
        return self.dd is None


# -- state <-> DD -----------------------------------------------------------


def dd_to_state(dd: DDForm) -> PureState3:
    mu = np.clip(dd.mu, 0.0, None)
    t = np.zeros(8, dtype=np.complex128)
    t[0b000] = math.sqrt(mu[0])
    t[0b100] = math.sqrt(mu[1]) * np.exp(1j * dd.phi)
    t[0b101] = math.sqrt(mu[2])
    t[0b110] = math.sqrt(mu[3])
    t[0b111] = math.sqrt(mu[4])
    return normalize(PureState3(t))


def _finish(mu, phi, degenerate_family=False) -> DDForm:
    """Snap tiny weights, renormalize and decide whether phi is a gauge."""
    mu = np.where(np.asarray(mu, dtype=float) < MU_SNAP, 0.0, mu)
    mu = mu / mu.sum()
    degenerate = bool(np.any(mu[1:] == 0.0)) or mu[0] == 0.0
    if degenerate:
        phi = 0.0
    else:
        phi = float(phi)
        if -1e-9 < phi < 0.0:
            phi = 0.0
        elif phi <= -math.pi + 1e-9:
            phi = math.pi
    return DDForm.from_mu(mu, phi, degenerate_phi=bool(degenerate), degenerate_family=bool(degenerate_family))


def _schmidt_weights(matrix) -> tuple:
    s = np.linalg.svd(np.asarray(matrix), compute_uv=False)
    w = s**2
    return float(w[0]), float(w[-1]) if w.size > 1 else 0.0


def _family_form(factor: str, big: float, small: float) -> DDForm:
    """Canonical DD form of a state in which one qubit factors out.

    ``big >= small`` are the squared Schmidt coefficients of the remaining
    two-qubit state (``small == 0`` means fully product).
    """
    if small < MU_SNAP:
        return _finish([1.0, 0.0, 0.0, 0.0, 0.0], 0.0, degenerate_family=True)
    slot = {"A": (1, 4), "B": (0, 2), "C": (0, 3)}[factor]
    mu = np.zeros(5)
    mu[slot[0]], mu[slot[1]] = big, small
    return _finish(mu, 0.0, degenerate_family=True)


def _factorizing_qubit(state: PureState3):
    """Name of a qubit whose reduction is pure, or None."""
    purities = {q: purity(reduced_density(state, q)) for q in "ABC"}
    for q in "ABC":
        if purities[q] >= 1.0 - PRODUCT_TOL:
            return q
    return None


def _family_decompose(state: PureState3, factor: str) -> DDForm:
    axis = "ABC".index(factor)
    m = np.moveaxis(state.tensor, axis, 0).reshape(2, 4)
    # remove the factor, leaving the two-qubit state of the other qubits
    u, s, vh = np.linalg.svd(m)
    rest = vh[0].reshape(2, 2) * s[0]
    big, small = _schmidt_weights(rest)
    total = big + small
    return _family_form(factor, big / total, small / total)


def _quadratic_rows(t0, t1):
    """Rows ``(u00, u01)`` of A-unitaries making ``u00*T0 + u01*T1`` singular.

    ``det(T0 + r T1) = c + b r + a r^2`` is solved in homogeneous form so
    that a root at infinity (``u00 = 0``) needs no special casing.
    """
    a = np.linalg.det(t1)
    c = np.linalg.det(t0)
    b = t0[0, 0] * t1[1, 1] + t0[1, 1] * t1[0, 0] - t0[0, 1] * t1[1, 0] - t0[1, 0] * t1[0, 1]
    disc = b * b - 4.0 * a * c
    sq = np.sqrt(disc + 0j)
    if (np.conj(b) * sq).real < 0:
        sq = -sq
    q = -(b + sq) / 2.0
    if abs(q) < 1e-300:
        rows = [(1.0, 0.0) if abs(a) >= abs(c) else (0.0, 1.0)] * 2
    else:
        rows = [(a, q), (q, c)]
    out = []
    for u0, u1 in rows:
        n = math.hypot(abs(u0), abs(u1))
        out.append((complex(u0) / n, complex(u1) / n))
    return out, abs(disc) < 1e-12


def _candidate(state: PureState3, row):
    u0, u1 = row
    ua = np.array([[u0, u1], [-np.conj(u1), np.conj(u0)]])
    s = apply_matrix(state, ua, "A").tensor
    w, sv, vh = np.linalg.svd(s[0])
    ub = w.conj().T
    uc = vh.conj()
    s = np.einsum("bj,ck,ajk->abc", ub, uc, s)
    mu = np.abs(np.array([s[0, 0, 0], s[1, 0, 0], s[1, 0, 1], s[1, 1, 0], s[1, 1, 1]])) ** 2
    phi = np.angle(s[1, 0, 0] * s[1, 1, 1] * np.conj(s[1, 0, 1]) * np.conj(s[1, 1, 0]))
    return _finish(mu, phi), s


def dd_candidates(state: PureState3):
    """Both DD forms (one per quadratic root) with their rotated tensors."""
    t = state.tensor
    rows, _ = _quadratic_rows(t[0], t[1])
    return [_candidate(state, row) for row in rows]


def dd_decompose(state: PureState3) -> DDForm:
    """Canonical DD form of ``state``.

    States in which a qubit factors out are sent to a Schmidt-based canonical
    form flagged ``degenerate_family``; the quadratic has no unique root there.
    """
    factor = _factorizing_qubit(state)
    if factor is not None:
        return _family_decompose(state, factor)
    forms = [form for form, _ in dd_candidates(state)]
    canonical = [f for f in forms if f.is_canonical]
    if not canonical:
        # unreachable for physical input; keep the candidate closest to [0, pi]
        return min(forms, key=lambda f: min(abs(f.phi), abs(f.phi - math.pi)))
    return min(canonical, key=_tie_key)


def _tie_key(form: DDForm):
    # both roots can be canonical when phi is 0 or pi; prefer small phi, then large mu0
    return (round(form.phi, 9), -round(form.mu0, 12))


# -- invariants <-> DD --------------------------------------------------------


def _imag_p6_dd(dd: DDForm) -> float:
    m0, m1, m2, m3, m4 = dd.mu
    root = math.sqrt(max(m1 * m2 * m3 * m4, 0.0))
    bracket = dd.delta - m4 * (1.0 - 2.0 * m0 - m1) - m2 * m3
    return math.sin(dd.phi) * m0 * m0 * root * bracket


def invariants_from_dd(dd: DDForm) -> InvariantVector:
    m0, m1, m2, m3, m4 = dd.mu
    delta = dd.delta
    i1 = 1.0 - 2.0 * m0 * (m2 + m4) - 2.0 * delta
    i2 = 1.0 - 2.0 * m0 * (m3 + m4) - 2.0 * delta
    i3 = 1.0 - 2.0 * m0 * (m2 + m3 + m4)
    i4 = 1.0 - 3.0 * (
        (m2 + m3) * (m0 - m4) + m4 * (1.0 - m4) - m2 * m3 * m0 + (1.0 - m0) * (delta - m1 * m4)
    )
    i5 = 4.0 * m0 * m0 * m4 * m4
    i6, degenerate = sign_with_tie(_imag_p6_dd(dd))
    return InvariantVector(i1, i2, i3, i4, i5, i6, degenerate)


def j_from_invariants(iv: InvariantVector) -> JVector:
    r = math.sqrt(max(iv.i5, 0.0))
    j1 = 0.25 * (1.0 - iv.i1 - iv.i2 + iv.i3 - r)
    j2 = 0.25 * (1.0 - iv.i1 + iv.i2 - iv.i3 - r)
    j3 = 0.25 * (1.0 + iv.i1 - iv.i2 - iv.i3 - r)
    j4 = 0.5 * r
    j5 = 0.25 * (5.0 / 3.0 - iv.i1 - iv.i2 - iv.i3 + 4.0 / 3.0 * iv.i4 - r)
    upsilon = (j4 + j5) ** 2 - 4.0 * (j1 + j4) * (j2 + j4) * (j3 + j4)
    return JVector(j1, j2, j3, j4, j5, upsilon)


def _branch(j: JVector, iv: InvariantVector, mu0: float):
    if mu0 <= MU_SNAP:
        return None
    mu = np.array([mu0, 1.0 - mu0 - (j.j2 + j.j3 + j.j4) / mu0, j.j2 / mu0, j.j3 / mu0, j.j4 / mu0])
    if np.any(mu < -UPSILON_TOL):
        return None
    mu = np.clip(mu, 0.0, None)
    mu = np.where(mu < MU_SNAP, 0.0, mu)
    prod = mu[1] * mu[2] * mu[3] * mu[4]
    if prod == 0.0:
        return _finish(mu, 0.0)
    cos_phi = (mu[1] * mu[4] + mu[2] * mu[3] - j.j1) / (2.0 * math.sqrt(prod))
    if abs(cos_phi) > 1.0 + COS_CLAMP:
        return None
    phi = math.acos(min(1.0, max(-1.0, cos_phi)))
    k = mu0 * mu0 * j.j1 - j.j2 * j.j3 - j.j4 * (j.j2 + j.j3 + j.j4 - mu0 * mu0)
    sin_sign = 1 if iv.i6_degenerate else iv.i6 * (1 if k >= 0 else -1)
    if sin_sign < 0 and 0.0 < phi < math.pi:
        phi = 2.0 * math.pi - phi
    return DDForm.from_mu(mu / mu.sum(), phi)


def dd_from_invariants(iv: InvariantVector):
    """Invert the invariants to the ``(+, -)`` pair of DD forms.

    One branch is the canonical form (``0 <= phi <= pi``), the other its dual
    (``pi < phi < 2 pi``) when it exists.  A branch that is not physical is
    returned as ``None``.
    """
    j = j_from_invariants(iv)
    if j.upsilon < -UPSILON_TOL:
        raise NonPhysical(f"Upsilon = {j.upsilon:.3g} < 0")
    den = j.j1 + j.j4
    if den <= SINGULAR_TOL:
        raise SingularInversion(f"J1 + J4 = {den:.3g}")
    root = math.sqrt(max(j.upsilon, 0.0))
    plus = _branch(j, iv, (j.j4 + j.j5 + root) / (2.0 * den))
    minus = _branch(j, iv, (j.j4 + j.j5 - root) / (2.0 * den))
    if plus is None and minus is None:
        raise NonPhysical("neither inversion branch is physical")
    return plus, minus


def canonical_dd(raw: DDForm) -> DDForm:
    """Canonical form of the orbit of an arbitrary DD-template state.

    ``raw`` may carry any phase.  Factorizing orbits go to the Schmidt form;
    a raw phase outside ``[0, pi]`` marks the dual, which is traded for the
    other inversion branch.
    """
    iv = invariants_from_dd(raw)
    for factor, pur in (("A", iv.i3), ("B", iv.i2), ("C", iv.i1)):
        if pur >= 1.0 - PRODUCT_TOL:
            if factor == "A":
                other = min(iv.i1, iv.i2)
            else:
                other = min(iv.i3, iv.i1 if factor == "B" else iv.i2)
            return _family_form(factor, *_weights_from_purity(other))
    phi = math.remainder(raw.phi, 2.0 * math.pi)
    form = _finish(raw.mu, phi)
    if form.is_canonical and not iv.i6_degenerate:
        return form
    try:
        branches = dd_from_invariants(iv)
    except (SingularInversion, NonPhysical):
        branches = ()
    good = [b for b in branches if b is not None and b.is_canonical]
    good = [b for b in good if invariants_from_dd(b).max_abs_diff(iv) < 1e-10]
    if form.is_canonical:
        return min([form] + good, key=_tie_key)
    if good:
        return min(good, key=_tie_key)
    # the inversion is ill-conditioned near Upsilon = 0; fall back to the quadratic
    return dd_decompose(dd_to_state(raw))


def _weights_from_purity(p: float):
    """Squared Schmidt coefficients of a two-qubit state with reduced purity ``p``."""
    prod = max((1.0 - p) / 2.0, 0.0)
    disc = math.sqrt(max(0.25 - prod, 0.0))
    return 0.5 + disc, 0.5 - disc


# -- measurement --------------------------------------------------------------


def _outcome_weight(dd: DDForm, a: np.ndarray) -> float:
    """Squared norm of ``A`` applied on qubit A of ``dd_to_state(dd)``."""
    m0 = dd.mu0
    overlap = math.sqrt(max(m0 * dd.mu1, 0.0)) * np.exp(1j * dd.phi)
    gram = np.array([[m0, overlap], [np.conj(overlap), 1.0 - m0]])
    e = a.conj().T @ a
    return float(np.sum(e * gram).real)


def build_kraus(m: MeasurementParams, target="A") -> KrausPair:
    """Explicit Kraus matrices ``A_i = U_i D_i V``."""
    v = m.v_matrix()
    ops = []
    for which in (1, 2):
        x, y = m.diagonal(which)
        dv = np.diag([x, y]) @ v
        gamma = m.gamma(which)
        if gamma < GAMMA_TOL:
            if np.abs(dv).max() > 1e-7:
                raise DegenerateGamma(f"gamma = {gamma:.3g} for outcome {which}")
            ops.append(np.zeros((2, 2), dtype=np.complex128))
            continue
        s = math.sqrt(max(1.0 - m.alpha**2, 0.0))
        e = np.exp(1j * m.theta)
        u = np.array([[y * m.alpha, -x * s * e], [x * s * np.conj(e), y * m.alpha]]) / math.sqrt(gamma)
        ops.append(u @ dv)
    return KrausPair(ops[0], ops[1], target)


def _measure_one(dd: DDForm, m: MeasurementParams, which: int) -> MeasurementOutcome:
    x, y = m.diagonal(which)
    weight = _outcome_weight(dd, np.diag([x, y]) @ m.v_matrix())
    if weight < NULL_PROBABILITY:
        return MeasurementOutcome(None, max(weight, 0.0))
    gamma = m.gamma(which)
    if gamma < GAMMA_TOL:
        raise DegenerateGamma(f"gamma = {gamma:.3g} for outcome {which} with weight {weight:.3g}")
    s = math.sqrt(max(1.0 - m.alpha**2, 0.0))
    z = np.exp(-1j * m.theta) * (x * x - y * y) * m.alpha * math.sqrt(dd.mu0) * s + np.exp(
        1j * dd.phi
    ) * gamma * math.sqrt(dd.mu1)
    mu = np.array(
        [x * x * y * y * dd.mu0 / gamma, abs(z) ** 2 / gamma, gamma * dd.mu2, gamma * dd.mu3, gamma * dd.mu4]
    )
    p = float(mu.sum())
    raw = DDForm.from_mu(mu / p, float(np.angle(z)) if abs(z) > 0 else 0.0)
    return MeasurementOutcome(canonical_dd(raw), p)


def measure_dd(dd: DDForm, m: MeasurementParams):
    """Propagate the two outcomes of ``m`` (on qubit A) in DD coordinates.

    Returns ``(outcome1, outcome2)``; a null outcome has ``dd = None``.
    """
    return _measure_one(dd, m, 1), _measure_one(dd, m, 2)


def measure_dd_tensor(dd: DDForm, m: MeasurementParams):
    """Reference path: explicit Kraus matrices on the reconstructed tensor."""
    k = build_kraus(m)
    state = dd_to_state(dd)
    out = []
    for which in (1, 2):
        try:
            post, p = apply_kraus_outcome(state, k, which)
        except NullOutcome as exc:
            out.append(MeasurementOutcome(None, exc.probability))
            continue
        out.append(MeasurementOutcome(dd_decompose(post), p))
    return tuple(out)


_SLOT_ORDER = {"A": "ABC", "B": "BAC", "C": "CBA"}


def measure_state(state: PureState3, m: MeasurementParams, qubit="A"):
    """Measure ``qubit`` of an arbitrary state with ``m`` posed in its DD frame.

    The measured qubit is moved to slot A, the DD update applied, and the
    outcome orbits relabelled back.  Returns ``(dd_in, outcome1, outcome2)``
    where ``dd_in`` is the DD form (in the permuted frame) the parameters
    refer to.
    """
    qubit = str(getattr(qubit, "value", qubit)).upper()
    order = _SLOT_ORDER[qubit]
    moved = permute_qubits(state, order)
    dd = dd_decompose(moved)
    outcomes = measure_dd(dd, m)
    if qubit == "A":
        return dd, *outcomes
    back = []
    for o in outcomes:
        if o.is_null:
            back.append(o)
        else:
            back.append(MeasurementOutcome(dd_decompose(permute_qubits(dd_to_state(o.dd), order)), o.probability))
    return dd, *back


def outcome_invariants(outcome: MeasurementOutcome):
    return None if outcome.is_null else invariants_from_dd(outcome.dd)


def state_invariants_via_dd(state: PureState3) -> InvariantVector:
    return invariants_from_dd(dd_decompose(state))


__all__ = [
    "DDForm",
    "JVector",
    "MeasurementParams",
    "MeasurementOutcome",
    "dd_to_state",
    "dd_decompose",
    "dd_candidates",
    "invariants_from_dd",
    "j_from_invariants",
    "dd_from_invariants",
    "canonical_dd",
    "build_kraus",
    "measure_dd",
    "measure_dd_tensor",
    "measure_state",
    "invariants",
]
