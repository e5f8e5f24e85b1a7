"""``triq`` command-line interface.

Every verb prints one JSON report on stdout.  Exit codes: 0 on success
(including "violations found"), 1 for malformed input, 2 for numerical
failures.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dd import (
    MeasurementParams,
    dd_decompose,
    dd_from_invariants,
    dd_to_state,
    invariants_from_dd,
    measure_dd,
    measure_dd_tensor,
    measure_state,
)
from .errors import DegenerateGamma, NoConvergence, NonPhysical, SingularInversion, ZeroState
from .invariants import InvariantVector, invariants, monotones
from .locc import classify, transform_bound, verify_monotone
from .md import OptimizerConfig, invariants_from_md, md_decompose
from .state import PureState3, make_rng, random_state

SCHEMA = "triq/1"
NORM_WARN = 1e-6


class InputError(Exception):
    pass


NUMERICAL = (NoConvergence, NonPhysical, SingularInversion, DegenerateGamma)


# -- JSON ---------------------------------------------------------------------


def _encode(obj) -> str:
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "value"):
        return _encode(obj.value)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    return _encode(obj)


def _report(kind: str, body: dict) -> dict:
    return {"schema": SCHEMA, "kind": kind, **body}


# -- state files ------------------------------------------------------------------


def state_to_json(state: PureState3) -> dict:
    return {"amplitudes": [{"re": float(z.real), "im": float(z.imag)} for z in state.t]}


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from None


def parse_state(data, source: str = "<input>") -> PureState3:
    if not isinstance(data, dict) or "amplitudes" not in data:
        raise InputError(f"{source}: expected an object with an 'amplitudes' array")
    amps = data["amplitudes"]
    if not isinstance(amps, list) or len(amps) != 8:
        n = len(amps) if isinstance(amps, list) else "no"
        raise InputError(f"{source}: schema error, expected 8 amplitudes, got {n}")
    vals = []
    for n, a in enumerate(amps):
        if not isinstance(a, dict) or set(a) - {"re", "im"} or "re" not in a:
            raise InputError(f"{source}: amplitude {n} must be an object with 're' and 'im'")
        re_, im_ = a.get("re"), a.get("im", 0.0)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re_, im_)):
            raise InputError(f"{source}: amplitude {n} is not numeric")
        vals.append(complex(re_, im_))
    t = np.array(vals)
    if not np.all(np.isfinite(t)):
        raise InputError(f"{source}: amplitudes must be finite")
    n2 = float(np.vdot(t, t).real)
    if n2 <= 1e-30:
        raise InputError(f"{source}: state has zero norm")
    if abs(math.sqrt(n2) - 1.0) > NORM_WARN:
        print(f"warning: {source} has norm {math.sqrt(n2):.9g}; normalizing", file=sys.stderr)
    return PureState3(t / math.sqrt(n2))


def load_state(path: str) -> PureState3:
    return parse_state(_load_json(path), path)


def parse_invariants(data, source: str = "<input>") -> InvariantVector:
    src = data.get("invariants", data) if isinstance(data, dict) else None
    keys = ("i1", "i2", "i3", "i4", "i5")
    if not isinstance(src, dict) or any(k not in src for k in keys):
        raise InputError(f"{source}: expected invariants i1..i5 (and optionally i6)")
    try:
        vals = [float(src[k]) for k in keys]
        i6 = int(src.get("i6", 1))
    except (TypeError, ValueError):
        raise InputError(f"{source}: invariants must be numeric") from None
    if i6 not in (1, -1) or not all(math.isfinite(v) for v in vals):
        raise InputError(f"{source}: i6 must be +1 or -1 and i1..i5 finite")
    return InvariantVector(*vals, i6, bool(src.get("i6_degenerate", False)))


# -- payloads ------------------------------------------------------------------------


def _dd_dict(dd) -> dict | None:
    if dd is None:
        return None
    return {
        "mu": [dd.mu0, dd.mu1, dd.mu2, dd.mu3, dd.mu4],
        "phi": dd.phi,
        "degenerate_phi": dd.degenerate_phi,
        "degenerate_family": dd.degenerate_family,
    }


def _md_dict(md) -> dict:
    return {"a": md.a, "b": md.b, "c": md.c, "d": md.d, "f": md.f, "phi": md.phi}


def _outcome_dict(o) -> dict:
    return {"probability": o.probability, "null": o.is_null, "dd": _dd_dict(o.dd)}


# -- verbs ----------------------------------------------------------------------------


def cmd_invariants(args) -> dict:
    state = load_state(args.state)
    return _report("invariants", {"invariants": invariants(state).as_dict(), "monotones": monotones(state).as_dict()})


def cmd_dd(args) -> dict:
    if args.from_invariants:
        iv = parse_invariants(_load_json(args.state), args.state)
        plus, minus = dd_from_invariants(iv)
        branches = {}
        for name, b in (("plus", plus), ("minus", minus)):
            resid = None if b is None else invariants_from_dd(b).max_abs_diff(iv)
            branches[name] = {"dd": _dd_dict(b), "residual": resid, "canonical": b is not None and b.is_canonical}
        return _report("dd_inversion", {"input": iv.as_dict(), "branches": branches})
    state = load_state(args.state)
    dd = dd_decompose(state)
    resid = invariants(state).max_abs_diff(invariants(dd_to_state(dd)))
    return _report("dd", {"dd": _dd_dict(dd), "residual": resid})


def _cfg(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(starts=args.starts, tol=args.tol, max_iter=args.max_iter, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_md(args) -> dict:
    state = load_state(args.state)
    md = md_decompose(state, _cfg(args))
    resid = invariants(state).max_abs_diff(invariants_from_md(md))
    return _report("md", {"md": _md_dict(md), "a2": md.a**2, "residual": resid})


def cmd_measure(args) -> dict:
    state = load_state(args.state)
    try:
        m = MeasurementParams(args.x, args.y, args.alpha, args.theta)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    # both paths run in the frame where the measured qubit sits in slot A
    dd_in, *relabelled = measure_state(state, m, args.qubit)
    fast = measure_dd(dd_in, m)
    ref = measure_dd_tensor(dd_in, m)
    resid_p = max(abs(a.probability - b.probability) for a, b in zip(fast, ref))
    resid_i = 0.0
    for a, b in zip(fast, ref):
        if a.is_null != b.is_null:
            resid_i = math.inf
        elif not a.is_null:
            resid_i = max(resid_i, invariants_from_dd(a.dd).max_abs_diff(invariants(dd_to_state(b.dd))))
    return _report(
        "measure",
        {
            "qubit": args.qubit.upper(),
            "params": {"x": m.x, "y": m.y, "alpha": m.alpha, "theta": m.theta},
            "input_dd": _dd_dict(dd_in),
            "probabilities": [o.probability for o in fast],
            "outcomes": [_outcome_dict(o) for o in relabelled],
            "tensor_path": [_outcome_dict(o) for o in ref],
            "residual": {"probability": resid_p, "invariants": resid_i},
        },
    )


def cmd_bound(args) -> dict:
    src, dst = load_state(args.src), load_state(args.dst)
    cfg = OptimizerConfig(seed=args.seed) if args.include_md else None
    return _report("bound", transform_bound(src, dst, include_md=args.include_md, cfg=cfg).as_dict())


def cmd_classify(args) -> dict:
    state = load_state(args.state)
    return _report("classify", {"class": classify(state, args.tol).value, "tol": args.tol})


def cmd_verify(args) -> dict:
    if args.trials < 1:
        raise InputError("--trials must be positive")
    try:
        rep = verify_monotone(args.monotone, args.trials, args.seed, sampler=args.sampler)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return _report("verify", rep.as_dict())


def cmd_random(args) -> dict:
    if args.count < 1:
        raise InputError("--count must be positive")
    states = [random_state(make_rng(args.seed, n)) for n in range(args.count)]
    if args.out_dir is None:
        return _report("random", {"seed": args.seed, "states": [state_to_json(s) for s in states]})
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for n, s in enumerate(states):
            p = out / f"state_{n:04d}.json"
            p.write_text(dumps(state_to_json(s)) + "\n")
            paths.append(str(p))
    except OSError as exc:
        raise InputError(f"cannot write to {out}: {exc.strerror}") from None
    return _report("random", {"seed": args.seed, "files": paths})


# -- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="triq", description="Three-qubit entanglement invariants and monotones.")
    p.add_argument("--version", action="version", version=f"triq {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("invariants", help="I1..I6 and the monotones of a state")
    s.add_argument("state", help="state file, or - for stdin")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("dd", help="diagonalization decomposition")
    s.add_argument("state", help="state file (or invariants file with --from-invariants)")
    s.add_argument("--from-invariants", action="store_true", help="invert I1..I6 to the two DD branches")
    s.set_defaults(func=cmd_dd)

    def optimizer_flags(s):
        s.add_argument("--starts", type=int, default=64)
        s.add_argument("--tol", type=float, default=1e-12)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--max-iter", type=int, default=10_000)

    s = sub.add_parser("md", help="maximization decomposition")
    s.add_argument("state")
    optimizer_flags(s)
    s.set_defaults(func=cmd_md)

    s = sub.add_parser("measure", help="two-outcome measurement in the DD frame")
    s.add_argument("state")
    s.add_argument("--qubit", default="A", choices=["A", "B", "C", "a", "b", "c"])
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--theta", type=float, default=0.0)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("bound", help="upper bound on the LOCC conversion probability")
    s.add_argument("src")
    s.add_argument("dst")
    s.add_argument("--include-md", action="store_true", help="also use 1 - a^2")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("classify", help="entanglement class")
    s.add_argument("state")
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("verify", help="Monte Carlo monotonicity check")
    s.add_argument("--monotone", required=True, help="e.g. sigma, tau_ab_c, tau_abc, e1_A, tau_ab_c^1.01")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sampler", default="haar", choices=["haar", "dd", "dd-sparse"])
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("random", help="seeded random state files")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--out-dir", default=None)
    s.set_defaults(func=cmd_random)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse signals usage errors with 2; those are input errors here
        return 0 if exc.code == 0 else 1
    try:
        report = args.func(args)
    except (InputError, ZeroState) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    print(dumps(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
