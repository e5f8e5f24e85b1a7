"""LOCC bounds, entanglement classes and the Monte Carlo monotone verifier."""
from __future__ import annotations

import enum
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .invariants import invariants_batch, monotones, monotones_batch
from .state import (
    PureState3,
    haar_unitary,
    make_rng,
    random_isometry_blocks,
    random_state,
    reduced_density,
)

VALUE_FLOOR = 1e-10
VIOLATION_MARGIN = -1e-9
CHUNK = 10_000

PRIMARY_MONOTONES = ("tau_ab_c", "tau_ac_b", "tau_bc_a", "tau_abc", "sigma_abc")
CUT_MONOTONES = ("e1_A", "e1_B", "e1_C")
ALIASES = {"sigma": "sigma_abc", "tau": "tau_abc"}


class ClassLabel(str, enum.Enum):
    FULLY_PRODUCT = "FullyProduct"
    BISEPARABLE_A = "BiseparableA"
    BISEPARABLE_B = "BiseparableB"
    BISEPARABLE_C = "BiseparableC"
    W_CLASS = "WClass"
    GHZ_CLASS = "GHZClass"


# -- cut monotones -------------------------------------------------------------


def e_k_cut(state: PureState3, x) -> float:
    """Smaller eigenvalue of the reduced state of qubit ``x``."""
    return float(max(np.linalg.eigvalsh(reduced_density(state, x))[0], 0.0))


def _lambda_min(purity: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 - np.sqrt(np.clip(2.0 * purity - 1.0, 0.0, 1.0)))


def monotone_values(state: PureState3) -> dict:
    """All bound-relevant monotones of one state keyed by name."""
    out = monotones(state).as_dict()
    for q in "ABC":
        out[f"e1_{q}"] = e_k_cut(state, q)
    return out


# -- classification --------------------------------------------------------------


def classify(state: PureState3, tol: float = 1e-9) -> ClassLabel:
    m = monotones(state)
    cuts = {"A": m.tau_bc_a, "B": m.tau_ac_b, "C": m.tau_ab_c}
    if all(v <= tol for v in cuts.values()):
        return ClassLabel.FULLY_PRODUCT
    for q, label in zip("ABC", (ClassLabel.BISEPARABLE_A, ClassLabel.BISEPARABLE_B, ClassLabel.BISEPARABLE_C)):
        if cuts[q] <= tol:
            return label
    return ClassLabel.GHZ_CLASS if m.tau_abc > tol else ClassLabel.W_CLASS


# -- transformation bound -----------------------------------------------------------


@dataclass(frozen=True)
class BoundEntry:
    name: str
    source: float
    target: float
    ratio: float | None  # None: the target value is zero, so no constraint

    @property
    def constrained(self) -> bool:
        return self.ratio is not None


@dataclass(frozen=True)
class BoundReport:
    entries: tuple
    overall: float
    binding: str | None

    @property
    def constrained(self) -> bool:
        return self.binding is not None

    def entry(self, name: str) -> BoundEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "entries": [
                {"name": e.name, "source": e.source, "target": e.target,
                 "ratio": "Unconstrained" if e.ratio is None else e.ratio}
                for e in self.entries
            ],
            "overall": self.overall,
            "binding": self.binding,
        }


def _ratio(src: float, dst: float):
    if dst <= VALUE_FLOOR:
        return None
    if src <= VALUE_FLOOR:
        return 0.0
    return src / dst


def bound_from_values(src: dict, dst: dict) -> BoundReport:
    """Min-ratio bound from two dicts of monotone values sharing keys."""
    entries = tuple(BoundEntry(k, float(src[k]), float(dst[k]), _ratio(src[k], dst[k])) for k in src)
    live = [e for e in entries if e.constrained]
    if not live:
        # nothing bounds the probability from above
        return BoundReport(entries, 1.0, None)
    best = min(live, key=lambda e: e.ratio)
    return BoundReport(entries, float(min(max(best.ratio, 0.0), 1.0)), best.name)


def transform_bound(src: PureState3, dst: PureState3, include_md: bool = False, cfg=None) -> BoundReport:
    """Upper bound on the LOCC conversion probability ``src -> dst``.

    Uses the ratio of every implemented monotone; ``include_md`` adds
    ``1 - a^2`` from the product-overlap optimizer.
    """
    a, b = monotone_values(src), monotone_values(dst)
    if include_md:
        from .md import OptimizerConfig, em_one_minus_a2

        cfg = cfg or OptimizerConfig()
        a["one_minus_a2"] = em_one_minus_a2(src, cfg)
        b["one_minus_a2"] = em_one_minus_a2(dst, cfg)
    return bound_from_values(a, b)


def composite_bound(src_values: np.ndarray, dst_values: np.ndarray, fs) -> tuple:
    """Raw min-ratio bound and the bound after adding each ``f`` of the monotone vector.

    An f-type ``f`` should leave the bound unchanged.
    """
    x = np.asarray(src_values, dtype=float)
    y = np.asarray(dst_values, dtype=float)
    src = {f"m{n}": v for n, v in enumerate(x)}
    dst = {f"m{n}": v for n, v in enumerate(y)}
    raw = bound_from_values(src, dst)
    for n, f in enumerate(fs):
        src[f"f{n}"] = float(f(x))
        dst[f"f{n}"] = float(f(y))
    return raw.overall, bound_from_values(src, dst).overall


# -- monotone registry --------------------------------------------------------------


def _cut_fn(key):
    return lambda inv: _lambda_min(inv[key])


_CUT_PURITY = {"e1_A": "i3", "e1_B": "i2", "e1_C": "i1"}


def resolve_monotone(m):
    """Return ``(name, fn)`` where ``fn`` maps a batched invariant dict to values.

    ``m`` is a registered name, ``"<name>^<power>"``, or a callable taking the
    dict produced by :func:`invariants_batch` (augmented with the monotone
    arrays) and returning an array.
    """
    if callable(m):
        return getattr(m, "__name__", "custom"), m
    name = str(m)
    power = None
    match = re.fullmatch(r"(.+?)\^([0-9.eE+-]+)", name)
    if match:
        name, power = match.group(1), float(match.group(2))
    name = ALIASES.get(name, name)
    if name in PRIMARY_MONOTONES:
        base = lambda inv, k=name: inv[k]  # noqa: E731
    elif name in _CUT_PURITY:
        base = _cut_fn(_CUT_PURITY[name])
    else:
        raise ValueError(f"unknown monotone {m!r}")
    if power is None:
        return name, base
    return f"{name}^{power:g}", lambda inv: np.maximum(base(inv), 0.0) ** power


def from_invariant_vector(f):
    """Lift a scalar function of an InvariantVector to the batched interface."""
    from .invariants import InvariantVector, sign_with_tie

    def lifted(inv):
        out = np.empty(len(inv["i1"]))
        for n in range(len(out)):
            sign, deg = sign_with_tie(float(inv["im_p6"][n]))
            iv = InvariantVector(*(float(inv[k][n]) for k in ("i1", "i2", "i3", "i4", "i5")), sign, deg)
            out[n] = f(iv)
        return out

    lifted.__name__ = getattr(f, "__name__", "custom")
    return lifted


def _evaluate(tensors: np.ndarray) -> dict:
    inv = invariants_batch(tensors)
    inv.update(monotones_batch(inv))
    return inv


# -- sampling ------------------------------------------------------------------------


def _random_dd_tensor(rng: np.random.Generator, concentration: float = 1.0) -> np.ndarray:
    """Random DD-template state dressed with Haar local unitaries.

    ``mu`` is Dirichlet distributed; a concentration below 1 pushes weight
    towards the faces of the simplex, i.e. towards nearly-separable states.
    """
    mu = rng.dirichlet(np.full(5, concentration))
    phi = rng.uniform(0.0, math.pi)
    t = np.zeros((2, 2, 2), dtype=np.complex128)
    t[0, 0, 0] = math.sqrt(mu[0])
    t[1, 0, 0] = math.sqrt(mu[1]) * np.exp(1j * phi)
    t[1, 0, 1] = math.sqrt(mu[2])
    t[1, 1, 0] = math.sqrt(mu[3])
    t[1, 1, 1] = math.sqrt(mu[4])
    ua, ub, uc = (haar_unitary(rng) for _ in range(3))
    return np.einsum("ai,bj,ck,ijk->abc", ua, ub, uc, t)


SAMPLERS = {
    "haar": lambda rng: random_state(rng).tensor,
    "dd": _random_dd_tensor,
    "dd-sparse": lambda rng: _random_dd_tensor(rng, 0.3),
}


@dataclass(frozen=True)
class Trials:
    """A chunk of Monte Carlo trials: states, outcome branches and probabilities."""

    start: int
    psi: np.ndarray
    out1: np.ndarray
    out2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    qubit: np.ndarray


def _apply_on(t: np.ndarray, a: np.ndarray, qubit: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    for q in range(3):
        sel = qubit == q
        if not sel.any():
            continue
        moved = np.moveaxis(t[sel], q + 1, 1)
        out[sel] = np.moveaxis(np.einsum("nab,nb...->na...", a[sel], moved), 1, q + 1)
    return out


def draw_trials(seed: int, start: int, stop: int, sampler: str = "haar") -> Trials:
    """Trials ``start..stop-1``; trial ``i`` uses substream ``(seed, i)`` only."""
    draw = SAMPLERS[sampler]
    n = stop - start
    psi = np.empty((n, 2, 2, 2), dtype=np.complex128)
    a1 = np.empty((n, 2, 2), dtype=np.complex128)
    a2 = np.empty((n, 2, 2), dtype=np.complex128)
    qubit = np.empty(n, dtype=int)
    for m in range(n):
        rng = make_rng(seed, start + m)
        psi[m] = draw(rng)
        qubit[m] = rng.integers(3)
        a1[m], a2[m] = random_isometry_blocks(rng)
    o1 = _apply_on(psi, a1, qubit)
    o2 = _apply_on(psi, a2, qubit)
    p1 = np.sum(np.abs(o1) ** 2, axis=(1, 2, 3))
    p2 = np.sum(np.abs(o2) ** 2, axis=(1, 2, 3))
    o1 = o1 / np.sqrt(np.where(p1 > 0, p1, 1.0))[:, None, None, None]
    o2 = o2 / np.sqrt(np.where(p2 > 0, p2, 1.0))[:, None, None, None]
    return Trials(start, psi, o1, o2, p1, p2, qubit)


def trial_margins(trials: Trials, fns: dict) -> dict:
    """``E(psi) - sum_k p_k E(psi_k)`` per trial for each named monotone."""
    e0, e1, e2 = _evaluate(trials.psi), _evaluate(trials.out1), _evaluate(trials.out2)
    return {name: fn(e0) - (trials.p1 * fn(e1) + trials.p2 * fn(e2)) for name, fn in fns.items()}


# -- verifier ------------------------------------------------------------------------


@dataclass(frozen=True)
class ViolationReport:
    monotone: str
    trials: int
    violations: int
    worst_margin: float
    worst_trial: int
    seed: int
    sampler: str = "haar"
    violating_trials: tuple = field(default=(), repr=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["violating_trials"] = list(self.violating_trials[:20])
        return d


def worker_count() -> int:
    cap = os.environ.get("TRIQ_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def verify_monotones(ms, trials: int, seed: int, sampler: str = "haar", chunk: int = CHUNK) -> dict:
    """Check ``E(psi) >= sum_k p_k E(psi_k)`` for several monotones on shared trials."""
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; choose from {sorted(SAMPLERS)}")
    fns = dict(resolve_monotone(m) for m in ms)
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]

    def run(b):
        return trial_margins(draw_trials(seed, b[0], b[1], sampler), fns)

    workers = min(worker_count(), len(bounds)) or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    reports = {}
    for name in fns:
        margins = np.concatenate([p[name] for p in parts]) if parts else np.zeros(0)
        bad = np.flatnonzero(margins < VIOLATION_MARGIN)
        worst = int(np.argmin(margins)) if margins.size else -1
        reports[name] = ViolationReport(
            monotone=name,
            trials=int(trials),
            violations=int(bad.size),
            worst_margin=float(margins[worst]) if margins.size else 0.0,
            worst_trial=worst,
            seed=int(seed),
            sampler=sampler,
            violating_trials=tuple(int(i) for i in bad),
        )
    return reports


def verify_monotone(m, trials: int, seed: int, sampler: str = "haar") -> ViolationReport:
    """Monte Carlo test of LOCC monotonicity for one monotone.

    Each trial draws a state, a qubit and a two-outcome Kraus pair from its
    own substream, so reports are reproducible and independent of chunking.
    """
    return next(iter(verify_monotones([m], trials, seed, sampler).values()))


def replay_trial(seed: int, index: int, sampler: str = "haar"):
    """Re-draw single trial ``index`` at full detail (state, qubit, Kraus blocks)."""
    rng = make_rng(seed, index)
    psi = SAMPLERS[sampler](rng)
    qubit = int(rng.integers(3))
    a1, a2 = random_isometry_blocks(rng)
    return PureState3.from_tensor(psi), "ABC"[qubit], a1, a2


__all__ = [
    "ClassLabel",
    "BoundEntry",
    "BoundReport",
    "ViolationReport",
    "e_k_cut",
    "classify",
    "transform_bound",
    "bound_from_values",
    "composite_bound",
    "verify_monotone",
    "verify_monotones",
    "resolve_monotone",
    "from_invariant_vector",
    "draw_trials",
    "replay_trial",
]
