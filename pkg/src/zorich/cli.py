"""Command-line front end.

Every command writes one JSON document (DOT for ``diagram --format dot``)
that embeds the effective configuration, with keys sorted so identical
configurations give byte-identical files. The worker count only affects
speed and is left out of the embedded configuration.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input
error, 3 a witness search exhausted its budget.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from .errors import InvalidInput, NotFound, ZorichError
from .perm import Permutation
from .rauzy import all_classes, enumerate_class
from .symplectic import genus

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_FOUND = 0, 1, 2, 3

WITNESS_KINDS = ("pinching", "strong_pinching", "twisting", "parabolic")


class UsageError(Exception):
    pass


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use dashes or underscores."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags given explicitly win")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)

    p = argparse.ArgumentParser(prog="zorich", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classes", parents=[common], help="table of all Rauzy classes")
    c.add_argument("--d-max", type=int)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite")
    v.add_argument("--d-max", type=int)

    e = sub.add_parser("exponents", parents=[common], help="estimate Lyapunov exponents")
    e.add_argument("--class", dest="cls")
    e.add_argument("--mode", choices=["restricted", "extended"])
    e.add_argument("--steps", type=int)
    e.add_argument("--burn-in", type=int)
    e.add_argument("--runs", type=int, help="number of seeds, starting at --seed")

    w = sub.add_parser("witness", parents=[common], help="search for a monoid witness")
    w.add_argument("kind", choices=WITNESS_KINDS)
    w.add_argument("--class", dest="cls")
    w.add_argument("--budget", type=int)
    w.add_argument("--constant", type=float, help="pinching constant C")
    w.add_argument("--mode", choices=["restricted", "extended"], help="twisting: act on H or on R^A")
    w.add_argument("--dim", type=int, help="twisting: dimension of F")
    w.add_argument("--obstacles", type=int, help="twisting: number of obstacles")

    dg = sub.add_parser("diagram", parents=[common], help="export a Rauzy diagram")
    dg.add_argument("--class", dest="cls")
    dg.add_argument("--format", choices=["json", "dot"])

    o = sub.add_parser("orbit", parents=[common], help="trace Zorich steps of one orbit")
    o.add_argument("--class", dest="cls")
    o.add_argument("--mode", choices=["exact", "float"])
    o.add_argument("--steps", type=int)
    return p


DEFAULTS = {
    "classes": {"d_max": 5},
    "verify": {"d_max": None, "seed": 0},
    "exponents": {"cls": "ABCD/DCBA", "mode": "restricted", "seed": 0, "steps": 10**6,
                  "burn_in": None, "runs": 1},
    "witness": {"cls": "ABCD/DCBA", "seed": 0, "budget": 2000, "constant": None,
                "mode": "extended", "dim": 2, "obstacles": 2},
    "diagram": {"cls": "ABCD/DCBA", "format": "json"},
    "orbit": {"cls": "ABCD/DCBA", "mode": "float", "seed": 0, "steps": 100},
}

_INT_KEYS = {"d_max", "seed", "steps", "burn_in", "runs", "budget", "dim", "obstacles", "workers"}
_FLOAT_KEYS = {"constant"}


def _merge(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[args.command])
    cfg["workers"] = None
    if args.config:
        for key, value in read_config(args.config).items():
            key = "cls" if key == "class" else key
            if key not in cfg:
                raise UsageError(f"config key {key!r} does not apply to {args.command}")
            try:
                cfg[key] = int(value) if key in _INT_KEYS else float(value) if key in _FLOAT_KEYS else value
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value {value!r}") from None
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command", "out", "suite", "kind"):
            cfg[key] = value
    for key in ("d_max", "steps", "runs", "budget", "dim", "obstacles", "workers", "constant"):
        if cfg.get(key) is not None and cfg[key] <= 0:
            raise UsageError(f"{key.replace('_', '-')} must be positive")
    if cfg.get("burn_in") is not None and cfg["burn_in"] < 0:
        raise UsageError("burn-in must be non-negative")
    return cfg


def _parse_class(text: str) -> Permutation:
    return Permutation.parse(text)


def _workers(cfg: dict) -> int:
    return cfg["workers"] or os.cpu_count() or 1


def _provenance(command: str, cfg: dict, **extra) -> dict:
    out = {k: v for k, v in cfg.items() if k != "workers"}
    out.update(extra)
    out["command"] = command
    return out


# -- commands -----------------------------------------------------------------------------


def cmd_classes(cfg: dict) -> tuple[dict, int]:
    d_max = cfg["d_max"]
    if not 2 <= d_max <= 8:
        raise UsageError("--d-max must be between 2 and 8")
    rows = []
    for d in range(2, d_max + 1):
        for c in all_classes(d):
            g = genus(c.root)
            rows.append({"representative": str(c.root), "d": d, "size": len(c), "genus": g,
                         "minimal": d == 2 * g})
    return {"config": _provenance("classes", cfg), "classes": rows}, EXIT_OK


def cmd_verify(cfg: dict, suite: str) -> tuple[dict, int]:
    from .suites import SUITES, run_suite

    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(sorted(SUITES))}")
    res = run_suite(suite, cfg["d_max"], cfg["seed"])
    return ({"config": _provenance("verify", cfg, suite=suite), "result": res.to_json()},
            EXIT_OK if res.passed else EXIT_FAIL)


def cmd_exponents(cfg: dict) -> tuple[dict, int]:
    from .lyapunov import estimate_many

    p = _parse_class(cfg["cls"])
    seeds = [cfg["seed"] + i for i in range(cfg["runs"])]
    reports = estimate_many(p, seeds, cfg["mode"], cfg["steps"], cfg["burn_in"],
                            workers=min(_workers(cfg), len(seeds)))
    body = [r.to_json() for r in reports]
    code = EXIT_OK if all(r.valid for r in reports) else EXIT_FAIL
    return {"config": _provenance("exponents", cfg), "reports": body}, code


def cmd_witness(cfg: dict, kind: str) -> tuple[dict, int]:
    from . import monoid

    p = _parse_class(cfg["cls"])
    cls = enumerate_class(p)
    workers = _workers(cfg)
    seed, budget, c = cfg["seed"], cfg["budget"], cfg["constant"]
    extra = {}
    if kind == "pinching":
        w = monoid.find_pinching_witness(cls, p, c or 1e3, budget, seed, workers)
    elif kind == "strong_pinching":
        w = monoid.find_strong_pinching_witness(cls, p, c or 2.0, budget, seed, workers)
    elif kind == "parabolic":
        w = monoid.find_parabolic_witness(cls, seed, budget, c or 1.0, workers)
    else:
        restricted = cfg["mode"] == "restricted"
        f, obstacles = monoid.random_twisting_instance(
            p, np.random.default_rng(seed), cfg["dim"], cfg["obstacles"], restricted)
        w = monoid.find_twisting_witness(cls, p, f, obstacles, budget, seed, restricted, workers)
        extra["F"] = [[str(x) for x in v] for v in f.vectors]
        extra["obstacle_bases"] = [[[str(x) for x in v] for v in o.vectors] for o in obstacles]
    out = {"config": _provenance("witness", cfg, kind=kind), "witness": w.to_json()}
    out["witness"].update(extra)
    return out, EXIT_OK


def cmd_diagram(cfg: dict):
    cls = enumerate_class(_parse_class(cfg["cls"]))
    if cfg["format"] == "dot":
        return cls.to_dot(), EXIT_OK
    return {"config": _provenance("diagram", cfg), "diagram": cls.to_json()}, EXIT_OK


def cmd_orbit(cfg: dict) -> tuple[dict, int]:
    from .dynamics import IETState, orbit_trace, sample_lengths

    p = _parse_class(cfg["cls"])
    rng = np.random.default_rng(cfg["seed"])
    exact_mode = cfg["mode"] == "exact"
    lam = sample_lengths(p.d, rng, exact_bits=256 if exact_mode else None)
    records = []
    try:
        for rec in orbit_trace(IETState(lam, p), cfg["steps"]):
            records.append(rec)
    except ZorichError as exc:
        return {"config": _provenance("orbit", cfg), "steps": records,
                "stopped": type(exc).__name__}, EXIT_OK
    return {"config": _provenance("orbit", cfg), "steps": records}, EXIT_OK


def _emit(obj, out: str | None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _merge(args)
        if args.command == "classes":
            obj, code = cmd_classes(cfg)
        elif args.command == "verify":
            obj, code = cmd_verify(cfg, args.suite)
        elif args.command == "exponents":
            obj, code = cmd_exponents(cfg)
        elif args.command == "witness":
            obj, code = cmd_witness(cfg, args.kind)
        elif args.command == "diagram":
            obj, code = cmd_diagram(cfg)
        else:
            obj, code = cmd_orbit(cfg)
    except (UsageError, InvalidInput, OSError) as exc:
        print(f"zorich: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotFound as exc:
        _emit({"config": _provenance(args.command, cfg), "not_found": str(exc), "trials": exc.trials}, args.out)
        print(f"zorich: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    _emit(obj, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
