"""floquet-clifford command line.

Every artifact carries schema, seed, streams and version so a rerun with the
same (seed, streams) reproduces it bit for bit. Exit codes: 0 ok, 1 failed
``--assert``, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import secrets
import sys
from fractions import Fraction

import numpy as np

from . import __version__, designcheck, ergodicity, oracle, walls
from .chain import (
    ChainGeometry,
    DisorderRealization,
    HalfTime,
    PhaseVector,
    build_disorder,
    parse_initial,
    trajectory,
)
from .ergodicity import SCHEMA
from .symplectic import count_subspaces, group_order, order_window, sample_words


class ConfigError(ValueError):
    pass


def _jsonable(o):
    if dataclasses.is_dataclass(o) and not isinstance(o, type):
        return {f.name: _jsonable(getattr(o, f.name)) for f in dataclasses.fields(o)}
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in o]
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "counts") and hasattr(o, "total"):
        return {"total": o.total, "counts": {hex(k): v for k, v in sorted(o.counts.items())}}
    return o


def _stamp(payload: dict, args) -> dict:
    payload = dict(payload)
    payload.update(schema=SCHEMA, version=__version__, seed=args.seed, streams=args.streams, command=args.command_line)
    return payload


def _write(text: str, args) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(payload, args, passed: bool | None = None) -> int:
    data = payload.as_dict() if hasattr(payload, "as_dict") else _jsonable(payload)
    data = _stamp(_jsonable(data), args)
    if passed is not None:
        data.setdefault("pass", passed)
    _write(json.dumps(data, indent=1, sort_keys=True) + "\n", args)
    if args.asserts and passed is False:
        print("assertion failed", file=sys.stderr)
        return 1
    return 0


def _geometry(args) -> ChainGeometry:
    if args.L is None or args.N is None:
        raise ConfigError("--L and --N are required")
    try:
        return ChainGeometry(args.L, args.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _time(args) -> HalfTime:
    if args.t is None:
        raise ConfigError("--t is required")
    try:
        return HalfTime.parse(args.t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _samples(args, default: int) -> int:
    n = default if args.samples is None else args.samples
    if n < 1:
        raise ConfigError("--samples must be positive")
    return n


def _initial(args, g: ChainGeometry) -> PhaseVector:
    try:
        return parse_initial(args.initial or "local:0", g)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# subcommands ---------------------------------------------------------------

def cmd_sample(args) -> int:
    n = args.n or 1
    count = args.samples or 1
    words = sample_words(2 * n, count, np.random.default_rng(args.seed))
    mats = [[format(int(w), f"0{2 * n}b")[::-1] for w in row] for row in words]
    return _emit({"n": n, "matrices": mats}, args)


def cmd_order(args) -> int:
    n = args.n or 1
    lo, approx, hi = order_window(n)
    payload = {
        "n": n,
        "order": str(group_order(n)),
        "window": [str(lo), str(approx), str(hi)],
        "isotropic_subspaces": {k: str(count_subspaces(n, k)) for k in range(n + 1)},
    }
    return _emit(payload, args)


def cmd_evolve(args) -> int:
    g = _geometry(args)
    t = _time(args)
    u0 = _initial(args, g)
    real = build_disorder(g, args.seed)
    path = trajectory(real, u0, t.t2)
    payload = {
        "L": g.L, "N": g.N, "t2": t.t2, "initial": u0.to_pauli(),
        "gates": json.loads(real.to_json())["gates"],
        "trajectory": [v.to_pauli() for v in path],
        "support": [sorted(v.support()) for v in path],
    }
    return _emit(payload, args)


def cmd_ergo(args) -> int:
    g = _geometry(args)
    t = _time(args)
    samples = _samples(args, 100_000)
    method = "exact" if args.exact else "classes"
    kind = args.kind
    if kind == "weak":
        x0 = int((args.initial or "local:0").split(":")[1]) if (args.initial or "local:0").startswith("local:") else None
        if x0 is None:
            raise ConfigError("weak ergodicity takes --initial local:x")
        rep = ergodicity.weak_ergodicity_check(x0, t, g, samples, args.seed, method=method, streams=args.streams)
        return _emit(rep, args, rep.passed)
    if kind == "half":
        rep = ergodicity.halfinteger_ergodicity_check(_initial(args, g), t, g, samples, args.seed, method=method, streams=args.streams)
        return _emit(rep, args, rep.passed)
    if kind == "subsystem":
        Ls = args.Ls or max(1, g.L // 2)
        rep = ergodicity.subsystem_check(_initial(args, g), Ls, t, g, samples, args.seed, method=method, streams=args.streams)
        return _emit(rep, args, rep.passed)
    if kind == "phases":
        Ls = args.Ls or max(1, g.L // 2)
        rep = ergodicity.phase_statistics(_initial(args, g), Ls, t, g, samples, args.seed, streams=args.streams)
        if args.format == "csv":
            _write(rep.distribution.to_csv(), args)
            return 0
        return _emit(rep, args, rep.passed)
    if kind == "zeros":
        cls = "full" if args.initial == "full" else "local"
        rep = ergodicity.zero_site_stats(cls, t, g, samples, args.seed, streams=args.streams)
        if args.format == "csv":
            lines = ["site,frequency,sigma,bound,bound_kind,pass"]
            lines += [f"{r.site},{r.frequency},{r.sigma},{r.bound},{r.bound_kind},{r.passed}" for r in rep.rows]
            _write("\r\n".join(lines) + "\r\n", args)
            return 1 if args.asserts and not rep.passed else 0
        return _emit(rep, args, rep.passed)
    if kind == "twirl":
        rep = ergodicity.twirl_invariance_test("transition", t, g, samples, args.seed, u0=_initial(args, g), streams=args.streams)
        return _emit(rep, args, rep.passed)
    raise ConfigError(f"unknown ergo experiment {kind!r}")


def cmd_walls(args) -> int:
    kind = args.kind
    if kind == "fixture":
        s0, s1 = walls.counterexample_fixture()
        payload = {
            "matrices": [s0.m.to_text(), s1.m.to_text()],
            "is_right_wall": walls.is_right_wall(s0, s1),
            "is_right_wall_k_lt_2": bool(walls.right_wall_mask(s0.row_words()[None], s1.row_words()[None], 2, k_max=2)[0]),
        }
        return _emit(payload, args)
    if kind == "prob":
        N = args.N or 1
        if args.exact:
            if N != 1:
                raise ConfigError("exact wall probability needs --N 1")
            counts = walls.exact_qubit_wall_counts()
            payload = {"N": 1, "counts": counts, "probability": str(counts.right_probability),
                       "rounds_to_0.12": counts.rounds_to_012}
            return _emit(payload, args, counts.rounds_to_012)
        rep = walls.wall_probability(N, _samples(args, 1_000_000), args.seed, args.streams)
        return _emit(rep, args, rep.passed)
    g = _geometry(args)
    real = DisorderRealization.from_json(open(args.realization).read()) if args.realization else build_disorder(g, args.seed)
    found = walls.scan_chain(real)
    if kind == "scan":
        T = args.T or 6 * g.L
        rng = np.random.default_rng([args.seed, 1])
        results = [walls.confinement_test(real, w, T, args.trials, rng) for w in found]
        ok = all(r.passed for r in results)
        return _emit({"L": g.L, "N": g.N, "walls": found, "confinement": results}, args, ok)
    if kind == "lightcone":
        t2max = _time(args).t2 if args.t else 6 * g.L
        grid = walls.lightcone_grid(real, _initial(args, g), t2max, tuple(w.position for w in found))
        fmt = args.format or "svg"
        if fmt == "svg":
            _write(grid.to_svg(), args)
        elif fmt == "pgm":
            _write(grid.to_pgm(), args)
        elif fmt == "csv":
            _write(grid.extents_csv(), args)
        else:
            return _emit({"extents": grid.extents(), "walls": found}, args)
        return 0
    raise ConfigError(f"unknown walls action {kind!r}")


def cmd_design(args) -> int:
    g = _geometry(args)
    t = _time(args)
    inputs = None
    if args.initial == "all-supports":
        inputs = designcheck.support_representatives(g)
    elif args.initial:
        inputs = [_initial(args, g)]
    try:
        rep = designcheck.advantage_estimate(
            g, t, inputs, samples=None if args.exact else _samples(args, 100_000),
            exact=args.exact, rng=args.seed, streams=args.streams,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return _emit(rep, args, rep.p_guess_estimate <= rep.appendix_bound)


def cmd_oracle(args) -> int:
    t2 = _time(args).t2 if args.t else 2
    u0 = _initial(args, ChainGeometry(2, 1)).bits.value
    counts = oracle.transition_counts(t2)[u0]
    if args.format == "csv":
        lines = ["outcome_hex,count,probability"]
        lines += [f"{v:01x},{int(c)},{Fraction(int(c), oracle.REALIZATIONS)}" for v, c in enumerate(counts) if c]
        _write("\r\n".join(lines) + "\r\n", args)
        return 0
    payload = {"L": 2, "N": 1, "t2": t2, "initial": u0, "realizations": oracle.REALIZATIONS,
               "law": {format(v, "x"): str(p) for v, p in oracle.transition_law(u0, t2).items()}}
    return _emit(payload, args)


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--L", type=int)
    common.add_argument("--N", type=int)
    common.add_argument("--n", type=int, help="symplectic half-dimension for sample/order")
    common.add_argument("--t", help="time as 5/2, 2.5 or t2=5")
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int, help="random if omitted; always echoed")
    common.add_argument("--streams", type=int, default=1)
    common.add_argument("--out")
    common.add_argument("--format", choices=["json", "csv", "svg", "pgm"])
    common.add_argument("--initial", help="Pauli string, local:x or full")
    common.add_argument("--exact", action="store_true", help="enumerate instead of sampling")
    common.add_argument("--assert", dest="asserts", action="store_true", help="exit 1 when the check fails")

    p = argparse.ArgumentParser(prog="floquet-clifford", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)
    sub.add_parser("sample", parents=[common]).set_defaults(func=cmd_sample)
    sub.add_parser("order", parents=[common]).set_defaults(func=cmd_order)
    sub.add_parser("evolve", parents=[common]).set_defaults(func=cmd_evolve)
    e = sub.add_parser("ergo", parents=[common])
    e.add_argument("kind", choices=["weak", "half", "subsystem", "phases", "zeros", "twirl"])
    e.add_argument("--Ls", type=int, help="subsystem length")
    e.set_defaults(func=cmd_ergo)
    w = sub.add_parser("walls", parents=[common])
    w.add_argument("kind", choices=["scan", "prob", "lightcone", "fixture"])
    w.add_argument("--realization", help="disorder realization JSON")
    w.add_argument("--trials", type=int, default=100)
    w.add_argument("--T", type=int, help="confinement horizon in half-steps")
    w.set_defaults(func=cmd_walls)
    d = sub.add_parser("design", parents=[common])
    d.add_argument("kind", choices=["check"])
    d.set_defaults(func=cmd_design)
    o = sub.add_parser("oracle", parents=[common])
    o.add_argument("kind", choices=["enumerate"])
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed {args.seed}", file=sys.stderr)
    if args.streams < 1:
        print("error: --streams must be positive", file=sys.stderr)
        return 2
    args.command_line = argv
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
