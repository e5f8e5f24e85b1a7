"""Maximization decomposition (MD) and the projector-family monotones.

The MD form anchors the state at its closest product state:

    a e^{i phi}|000> + b|011> + c|101> + d|110> + f|111>

where ``a**2`` is the largest overlap with any product state.  The overlap
is maximized by alternating exact single-factor updates (higher-order power
iteration) from many random starts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence
from .invariants import InvariantVector, sign_with_tie
from .state import PureState3, make_rng, normalize, reduced_density

NORM_TOL = 1e-9
RANGE_TOL = 1e-9
POLISH_TOL = 1e-13
POLISH_ITER = 200_000
TIE_VALUE = 1e-10
PHASE_FLOOR = 1e-13


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 64
    tol: float = 1e-12
    max_iter: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if int(self.starts) < 1 or int(self.max_iter) < 1:
            raise ValueError("starts and max_iter must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True, eq=False)
class ProductState:
    """Unit vectors on qubits A, B and C, each defined up to a phase."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in "abc":
            v = np.array(getattr(self, name), dtype=np.complex128).reshape(2)
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"factor {name} is not a unit vector")
            object.__setattr__(self, name, v)

    @property
    def factors(self):
        return self.a, self.b, self.c

    def to_state(self) -> PureState3:
        return PureState3(np.kron(np.kron(self.a, self.b), self.c))

    def overlap(self, state: PureState3) -> float:
        return float(abs(np.vdot(self.to_state().t, state.t)) ** 2)


@dataclass(frozen=True)
class OverlapResult:
    value: float
    argmax: ProductState
    converged: bool
    iterations: int

    def __iter__(self):
        yield self.value
        yield self.argmax


@dataclass(frozen=True)
class MDForm:
    a: float
    b: float
    c: float
    d: float
    f: float
    phi: float = 0.0

    def __post_init__(self):
        vals = [float(getattr(self, k)) for k in "abcdf"]
        for k, v in zip("abcdf", vals):
            object.__setattr__(self, k, v)
        if min(vals) < 0:
            raise ValueError("MD amplitudes must be nonnegative")
        if abs(sum(v * v for v in vals) - 1.0) > NORM_TOL:
            raise ValueError("MD amplitudes must be normalized")
        if max(vals[1:]) > vals[0] + RANGE_TOL:
            raise ValueError("b, c, d, f may not exceed a")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))

    @property
    def params(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.f, self.phi])

    def to_state(self) -> PureState3:
        t = np.zeros(8, dtype=np.complex128)
        t[0b000] = self.a * np.exp(1j * self.phi)
        t[0b011] = self.b
        t[0b101] = self.c
        t[0b110] = self.d
        t[0b111] = self.f
        return PureState3(t)


# -- overlap maximization ------------------------------------------------------


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(n > 0, n, 1.0)


def _sweep(t: np.ndarray, va, vb, vc):
    """One cyclic round of exact single-factor updates (batched over starts)."""
    va = _unit(np.einsum("ijk,sj,sk->si", t, vb.conj(), vc.conj()))
    vb = _unit(np.einsum("ijk,si,sk->sj", t, va.conj(), vc.conj()))
    w = np.einsum("ijk,si,sj->sk", t, va.conj(), vb.conj())
    g = np.sum(np.abs(w) ** 2, axis=-1)
    return va, vb, _unit(w), g


def _random_factors(cfg: OptimizerConfig, n: int):
    out = np.empty((n, 3, 2), dtype=np.complex128)
    for s in range(n):
        rng = make_rng(cfg.seed, s)
        z = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        out[s] = z
    return _unit(out)


def _basis_start(t: np.ndarray) -> np.ndarray:
    i, j, k = np.unravel_index(int(np.argmax(np.abs(t))), t.shape)
    v = np.zeros((1, 3, 2), dtype=np.complex128)
    v[0, 0, i] = v[0, 1, j] = v[0, 2, k] = 1.0
    return v


def _run(t: np.ndarray, starts: np.ndarray, tol: float, max_iter: int):
    va, vb, vc = starts[:, 0], starts[:, 1], starts[:, 2]
    g_old = np.full(len(starts), -1.0)
    done = np.zeros(len(starts), dtype=bool)
    iters = np.zeros(len(starts), dtype=int)
    for it in range(1, max_iter + 1):
        na, nb, nc, g = _sweep(t, va, vb, vc)
        live = ~done
        va = np.where(live[:, None], na, va)
        vb = np.where(live[:, None], nb, vb)
        vc = np.where(live[:, None], nc, vc)
        iters[live] = it
        newly = live & (np.abs(g - g_old) < tol)
        g_old = np.where(live, g, g_old)
        done |= newly
        if done.all():
            break
    return np.stack([va, vb, vc], axis=1), g_old, done, iters


def _residuals(t: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Largest single-excitation amplitude in each frame where ``vs[m]`` is |000>."""
    s = _rotate_batch(t, vs)
    return np.max(np.abs(np.stack([s[:, 1, 0, 0], s[:, 0, 1, 0], s[:, 0, 0, 1]])), axis=0)


def _polish(t: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Iterate a batch of near-stationary points until first-order stationarity."""
    for _ in range(POLISH_ITER // 25):
        if _residuals(t, vs).max() < POLISH_TOL:
            break
        for _ in range(25):
            va, vb, vc, _g = _sweep(t, vs[:, 0], vs[:, 1], vs[:, 2])
            vs = np.stack([va, vb, vc], axis=1)
    return vs


def _rotation(v: np.ndarray) -> np.ndarray:
    return np.array([[np.conj(v[0]), np.conj(v[1])], [-v[1], v[0]]])


def _rotations(vs: np.ndarray) -> np.ndarray:
    """Batched ``_rotation`` over vs of shape (..., 2)."""
    v0, v1 = vs[..., 0], vs[..., 1]
    return np.stack([np.stack([v0.conj(), v1.conj()], -1), np.stack([-v1, v0], -1)], -2)


def _rotate_batch(t: np.ndarray, vs: np.ndarray) -> np.ndarray:
    r = _rotations(vs)
    return np.einsum("mai,mbj,mck,ijk->mabc", r[:, 0], r[:, 1], r[:, 2], t)


def _rotate(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    return _rotate_batch(t, v[None])[0]


def _optimize(state: PureState3, cfg: OptimizerConfig):
    """Run all starts; return the converged local maxima sorted by value."""
    t = state.tensor
    starts = np.concatenate([_basis_start(t), _random_factors(cfg, cfg.starts)])
    vs, g, done, iters = _run(t, starts, cfg.tol, cfg.max_iter)
    if not done.any():
        best = int(np.argmax(g))
        raise NoConvergence(
            f"no start converged within {cfg.max_iter} iterations",
            best=OverlapResult(float(g[best]), _product(vs[best]), False, int(iters[best])),
        )
    order = np.argsort(-np.where(done, g, -1.0))
    return [(vs[i], float(g[i]), int(iters[i])) for i in order if done[i]]


def _product(v: np.ndarray) -> ProductState:
    return ProductState(*_unit(v))


def _value(t: np.ndarray, v: np.ndarray) -> float:
    return float(abs(np.einsum("ijk,i,j,k->", t, v[0].conj(), v[1].conj(), v[2].conj())) ** 2)


def _escape(t: np.ndarray, v: np.ndarray):
    """Climb out of a local maximum whose rotated frame has a larger basis amplitude."""
    for _ in range(16):
        s = _rotate(t, v)
        idx = np.unravel_index(int(np.argmax(np.abs(s))), s.shape)
        if idx == (0, 0, 0):
            return v
        # the basis product at idx, mapped back through the rotations
        nxt = np.stack([_rotation(v[q]).conj().T[:, idx[q]] for q in range(3)])
        v = _run(t, nxt[None], 1e-15, 10_000)[0][0]
    return v


def max_overlap(state: PureState3, cfg: OptimizerConfig = OptimizerConfig()) -> OverlapResult:
    """Largest ``|<a b c|psi>|^2`` over product states ``|a>|b>|c>``."""
    t = state.tensor
    found = _optimize(state, cfg)
    v, _, iters = found[0]
    v = _polish(t, _escape(t, v)[None])[0]
    return OverlapResult(_value(t, v), _product(v), True, iters)


def _md_from_frame(s: np.ndarray) -> MDForm:
    amps = np.array([s[0, 0, 0], s[0, 1, 1], s[1, 0, 1], s[1, 1, 0], s[1, 1, 1]])
    mags = np.where(np.abs(amps) < 1e-15, 0.0, np.abs(amps))
    if np.all(mags > PHASE_FLOOR):
        phi = float(np.angle(amps[0] * amps[4] ** 2 / (amps[1] * amps[2] * amps[3])))
    else:
        # a vanishing amplitude frees one local phase, which absorbs phi
        phi = 0.0
    mags = mags / np.linalg.norm(mags)
    return MDForm(*mags, phi=phi)


def _form_key(form: MDForm):
    return tuple(round(x, 9) for x in form.params)


def md_decompose(state: PureState3, cfg: OptimizerConfig = OptimizerConfig()) -> MDForm:
    """MD form of ``state``.

    Among global maximizers that tie within 1e-10 the lexicographically
    smallest ``(a, b, c, d, f, phi)`` is returned.
    """
    t = state.tensor
    found = _optimize(state, cfg)
    lead = _escape(t, found[0][0])
    near = [lead] + [v for v, g, _ in found[1:] if g >= _value(t, lead) - 1e-6]
    vs = _polish(t, np.stack(near))
    values = np.array([_value(t, v) for v in vs])
    frames = _rotate_batch(t, vs[values >= values.max() - TIE_VALUE])
    return min((_md_from_frame(s) for s in frames), key=_form_key)


def md_frame(state: PureState3, cfg: OptimizerConfig = OptimizerConfig()) -> np.ndarray:
    """Rotated tensor whose |000> component is the optimal product state."""
    res = max_overlap(state, cfg)
    return _rotate(state.tensor, np.stack(res.argmax.factors))


# -- closed forms ----------------------------------------------------------------


def _md_invariants(a, b, c, d, f, phi):
    a2, b2, c2, d2, f2 = a * a, b * b, c * c, d * d, f * f
    i1 = 1.0 - 2.0 * ((a2 + d2) * (b2 + c2) + a2 * f2)
    i2 = 1.0 - 2.0 * ((a2 + c2) * (b2 + d2) + a2 * f2)
    i3 = 1.0 - 2.0 * ((a2 + b2) * (c2 + d2) + a2 * f2)
    pairs = b2 * c2 + b2 * d2 + c2 * d2
    abcd = a * b * c * d
    i4 = 1.0 - 3.0 * (a2 * (1.0 - a2) + pairs * (1.0 - 2.0 * a2) - 2.0 * b2 * c2 * d2 - 2.0 * abcd * f2 * np.cos(phi))
    i5 = 4.0 * a2 * np.abs(a * f2 + 4.0 * b * c * d * np.exp(1j * phi)) ** 2
    im6 = abcd * f2 * np.sin(phi) * (a2 * (1.0 - 2.0 * a2) * (1.0 - 2.0 * a2 - f2) - 4.0 * b2 * c2 * d2 - 2.0 * abcd * f2 * np.cos(phi))
    return i1, i2, i3, i4, i5, im6


def invariants_from_md(md: MDForm) -> InvariantVector:
    i1, i2, i3, i4, i5, im6 = _md_invariants(md.a, md.b, md.c, md.d, md.f, md.phi)
    sign, degenerate = sign_with_tie(float(im6))
    return InvariantVector(float(i1), float(i2), float(i3), float(i4), float(i5), sign, degenerate)


# -- projector monotones -----------------------------------------------------------


def e_projector(state: PureState3, ka: int, kb: int, kc: int, cfg: OptimizerConfig = OptimizerConfig()) -> float:
    """Largest squared norm of ``(G_A x G_B x G_C)|psi>`` over projectors of rank ``k_X``.

    A rank-2 projector on a qubit is the identity.  With one rank-1 slot the
    optimum is the top eigenvalue of that qubit's reduction.  With two or
    three rank-1 slots the optimum is the product-state overlap: the
    remaining free vector is best aligned with the projected state, so the
    third slot may be taken rank-1 at no cost.
    """
    ks = (ka, kb, kc)
    if any(k not in (1, 2) for k in ks):
        raise ValueError("projector ranks must be 1 or 2 for qubits")
    ones = [q for q, k in zip("ABC", ks) if k == 1]
    if not ones:
        return 1.0
    if len(ones) == 1:
        return float(np.linalg.eigvalsh(reduced_density(state, ones[0]))[-1])
    return max_overlap(state, cfg).value


def em_one_minus_a2(state: PureState3, cfg: OptimizerConfig = OptimizerConfig()) -> float:
    v = 1.0 - max_overlap(state, cfg).value
    return 0.0 if -1e-12 <= v < 0.0 else v


def em_batch(tensors: np.ndarray, cfg: OptimizerConfig = OptimizerConfig(starts=16)) -> np.ndarray:
    return np.array([em_one_minus_a2(normalize(PureState3.from_tensor(t)), cfg) for t in tensors])


# -- gradient span -----------------------------------------------------------------


def _span_functions(p: np.ndarray) -> np.ndarray:
    a, b, c, d, f, phi = p
    i1, i2, i3, _i4, i5, _ = _md_invariants(a, b, c, d, f, phi)
    return np.array(
        [
            2.0 * (1.0 - i1),
            2.0 * (1.0 - i2),
            2.0 * (1.0 - i3),
            2.0 * math.sqrt(max(float(i5), 0.0)),
            1.0 - a * a,
            a * a + b * b + c * c + d * d + f * f,
        ]
    )


def gradient_jacobian(point, h: float = 1e-5) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    jac = np.zeros((6, 6))
    for i in range(6):
        e = np.zeros(6)
        e[i] = h
        jac[:, i] = (_span_functions(p + e) - _span_functions(p - e)) / (2.0 * h)
    return jac


def gradient_span_rank(point, h: float = 1e-5) -> int:
    """Numerical rank of the gradients of the three bipartite tangles, the 3-tangle,
    ``1 - a^2`` and the norm, differentiated in unnormalized MD parameters."""
    s = np.linalg.svd(gradient_jacobian(point, h), compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > 1e-6 * s[0]))
