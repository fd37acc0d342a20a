"""Exhaustive and randomized verification suites behind ``zorich verify``.

Each suite returns a :class:`SuiteResult` counting individual checks and
listing the first few failures verbatim. Scans over "every class" use one
labelled class per Rauzy class up to relabelling (see ``all_classes``);
scans over permutations use every irreducible permutation in reduced form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import exact
from .dynamics import IETState, SuspensionState, in_arrow_cone, invertible_step, sample_lengths, sample_tau
from .errors import ConeViolation, KeaneViolation
from .perm import (
    Alphabet,
    Permutation,
    delete_letter,
    extension_datum,
    find_reducing_letter,
    forget_outer,
    is_degenerate,
    is_good,
    is_irreducible,
    is_standard,
    irreducible_permutations,
    simple_extension,
    simple_reduction,
)
from .rauzy import (
    KINDS,
    all_classes,
    enumerate_class,
    extend_arrow,
    make_arrow,
    random_path,
    theta,
    theta_path,
)
from .symplectic import genus, h_basis, omega, projection_matrix

MAX_FAILURES = 20


@dataclass
class SuiteResult:
    name: str
    params: dict
    checks: int = 0
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures and self.checks > 0

    def check(self, ok: bool, what: Callable[[], str] | str) -> None:
        self.checks += 1
        if not ok:
            if len(self.failures) < MAX_FAILURES:
                self.failures.append(what() if callable(what) else what)
            else:
                self.stats["truncated_failures"] = self.stats.get("truncated_failures", 0) + 1

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "params": self.params,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "stats": self.stats,
        }


@lru_cache(maxsize=None)
def _classes(d: int):
    return all_classes(d)


@lru_cache(maxsize=None)
def _omega(p: Permutation) -> np.ndarray:
    return omega(p)


@lru_cache(maxsize=None)
def _genus(p: Permutation) -> int:
    return genus(p)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


# -- matrices along paths -------------------------------------------------------------


def conjugacy(d_max: int = 6, seed: int = 0, n_paths: int = 1000, max_len: int = 50) -> SuiteResult:
    """``Theta Omega(start) Theta^T == Omega(end)`` on arrows and random paths."""
    res = SuiteResult("conjugacy", {"d_max": d_max, "seed": seed, "n_paths": n_paths, "max_len": max_len})
    rng = _rng(seed)
    for d in range(2, d_max + 1):
        for cls in _classes(d):
            for a in cls.arrows():
                m = theta(a)
                res.check(np.array_equal(m.dot(_omega(a.start)).dot(m.T), _omega(a.end)),
                          lambda: f"arrow {a.kind} at {a.start}")
            for _ in range(n_paths):
                start = cls.vertices[int(rng.integers(0, len(cls)))]
                path = random_path(start, int(rng.integers(1, max_len + 1)), rng)
                m = theta_path(path)
                res.check(np.array_equal(m.dot(_omega(path.start)).dot(m.T), _omega(path.end)),
                          lambda: f"path {path.kinds} at {path.start}")
    return res


def determinant(d_max: int = 6, seed: int = 0, n_paths: int = 1000, max_len: int = 50) -> SuiteResult:
    """``det Theta == 1`` and entries non-negative on the same corpus."""
    res = SuiteResult("determinant", {"d_max": d_max, "seed": seed, "n_paths": n_paths, "max_len": max_len})
    rng = _rng(seed)

    def ok(m):
        return exact.det(m) == 1 and all(v >= 0 for v in m.flat)

    for d in range(2, d_max + 1):
        for cls in _classes(d):
            for a in cls.arrows():
                res.check(ok(theta(a)), lambda: f"arrow {a.kind} at {a.start}")
            for _ in range(n_paths):
                start = cls.vertices[int(rng.integers(0, len(cls)))]
                path = random_path(start, int(rng.integers(1, max_len + 1)), rng)
                res.check(ok(theta_path(path)), lambda: f"path {path.kinds} at {path.start}")
    return res


# -- classes ------------------------------------------------------------------------------


def symmetric_permutation(d: int) -> Permutation:
    a = Alphabet.of_size(d)
    return Permutation(a.letters, a.letters[::-1], a)


def classes(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """Symmetric class sizes ``2^(d-1) - 1`` and two-in/two-out at every vertex."""
    res = SuiteResult("classes", {"d_max": d_max})
    sizes = {}
    for d in range(2, d_max + 1):
        cls = enumerate_class(symmetric_permutation(d))
        sizes[d] = len(cls)
        res.check(len(cls) == 2 ** (d - 1) - 1, lambda: f"d={d}: size {len(cls)}")
        for c in _classes(d):
            indeg = [0] * len(c)
            for i in range(len(c)):
                indeg[c.next_top[i]] += 1
                indeg[c.next_bottom[i]] += 1
            res.check(all(v == 2 for v in indeg), lambda: f"in-degree at class of {c.root}")
    res.stats["symmetric_sizes"] = sizes
    res.stats["class_sizes"] = {d: [len(c) for c in _classes(d)] for d in range(2, d_max + 1)}
    return res


def rauzy(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """Every class contains a standard permutation."""
    res = SuiteResult("rauzy", {"d_max": d_max})
    for d in range(2, d_max + 1):
        for c in _classes(d):
            res.check(any(is_standard(p) for p in c.vertices), lambda: f"class of {c.root}")
    return res


def degenerateorgood(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """Every class with ``d >= 3`` has a good or a degenerate permutation."""
    res = SuiteResult("degenerateorgood", {"d_max": d_max})
    for d in range(3, d_max + 1):
        for c in _classes(d):
            std = [p for p in c.vertices if is_standard(p)]
            found = any(is_degenerate(p) or (d >= 4 and is_good(p)) for p in std)
            res.check(found, lambda: f"class of {c.root}")
    return res


def goodexists(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """Minimal classes of genus at least 2 contain a good permutation."""
    res = SuiteResult("goodexists", {"d_max": d_max})
    for d in range(4, d_max + 1):
        for c in _classes(d):
            if d == 2 * _genus(c.root):
                res.check(any(is_standard(p) and is_good(p) for p in c.vertices),
                          lambda: f"class of {c.root}")
    return res


def minimal(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """Genus is constant on classes, and minimality is ``d == 2g``."""
    res = SuiteResult("minimal", {"d_max": d_max})
    table = []
    for d in range(2, d_max + 1):
        for c in _classes(d):
            gs = {_genus(p) for p in c.vertices}
            res.check(len(gs) == 1, lambda: f"genus varies on class of {c.root}: {gs}")
            g = gs.pop()
            res.check(2 * g <= d, lambda: f"2g > d on class of {c.root}")
            table.append({"rep": str(c.root), "d": d, "genus": g, "minimal": d == 2 * g})
    res.stats["table"] = table
    return res


# -- reductions -------------------------------------------------------------------------


def _five_conditions(p: Permutation, b: str) -> list[bool]:
    q = delete_letter(p, b)
    om = _omega(p)
    letters = p.alphabet.letters
    ib = letters.index(b)
    rank = exact.exact_rank(om)
    others = [j for j in range(p.d) if j != ib]
    om_pstar = om[:, others]
    e_b = [int(i == ib) for i in range(p.d)]
    c1 = _genus(p) == _genus(q)
    c2 = exact.exact_rank(om_pstar) == rank
    c3 = exact.solve(om, e_b) is None
    c4 = exact.solve(om_pstar, e_b) is None
    # P restricted to H(p) is a symplectic isomorphism onto H(q)
    s, t = h_basis(p), h_basis(q)
    images = [[v for k, v in enumerate(vec) if k != ib] for vec in s.basis.vectors]
    c5 = s.dim == t.dim and all(t.contains(v) for v in images)
    if c5:
        for i in range(s.dim):
            for j in range(s.dim):
                if t.form(images[i], images[j]) != s.gram[i][j]:
                    c5 = False
    return [c1, c2, c3, c4, c5]


def simplereduction(d_max: int = 5, seed: int = 0) -> SuiteResult:
    """The five conditions agree and the genus drops by 0 or 1."""
    res = SuiteResult("simplereduction", {"d_max": d_max})
    counts = {"equal_genus": 0, "genus_drop": 0, "not_a_reduction": 0}
    for d in range(3, d_max + 1):
        for p in irreducible_permutations(d):
            for b in p.alphabet:
                q = delete_letter(p, b)
                if not is_irreducible(q):
                    counts["not_a_reduction"] += 1
                    continue
                drop = _genus(p) - _genus(q)
                res.check(drop in (0, 1), lambda: f"{p} minus {b}: genus drop {drop}")
                conds = _five_conditions(p, b)
                res.check(len(set(conds)) == 1, lambda: f"{p} minus {b}: conditions {conds}")
                counts["equal_genus" if drop == 0 else "genus_drop"] += 1
    res.stats.update(counts)
    return res


def _doubled_letter(p: Permutation) -> str:
    return p.top[1] if p.top[1] == p.bottom[1] else p.top[-2]


def degenerate(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """``e_B`` is outside H for the doubled letter of a degenerate permutation."""
    res = SuiteResult("degenerate", {"d_max": d_max})
    for d in range(3, d_max + 1):
        for p in irreducible_permutations(d):
            if is_standard(p) and is_degenerate(p):
                b = _doubled_letter(p)
                e_b = [int(x == b) for x in p.alphabet]
                res.check(not h_basis(p).contains(e_b), lambda: f"{p}, letter {b}")
                res.check(d < 4 or not is_good(p), lambda: f"{p} is degenerate and good")
    return res


def forget_outer_genus(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """``g(p) <= g(p'') + 1`` for good p, so minimality passes to ``p''``."""
    res = SuiteResult("211", {"d_max": d_max})
    for d in range(4, d_max + 1):
        for p in irreducible_permutations(d):
            if is_standard(p) and is_good(p):
                pp = forget_outer(p)
                g, gg = _genus(p), _genus(pp)
                res.check(g <= gg + 1, lambda: f"{p}: g={g}, g''={gg}")
                if d == 2 * g:
                    res.check(d - 2 == 2 * gg, lambda: f"{p}: minimal but {pp} is not")
    return res


def dg(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """Non-minimal classes contain a simple extension that keeps the genus."""
    res = SuiteResult("dg", {"d_max": d_max})
    for d in range(3, d_max + 1):
        for c in _classes(d):
            g = _genus(c.root)
            if d == 2 * g:
                continue
            found = any(extension_datum(p, b) is not None and _genus(delete_letter(p, b)) == g
                        for p in c.vertices for b in p.alphabet)
            res.check(found, lambda: f"class of {c.root}")
    return res


def sex(d_max: int = 6, seed: int = 0) -> SuiteResult:
    """The reducing letter always exhibits the permutation as a simple extension."""
    res = SuiteResult("sex", {"d_max": d_max})
    for d in range(3, d_max + 1):
        for p in irreducible_permutations(d):
            b = find_reducing_letter(p)
            datum = extension_datum(p, b)
            res.check(datum is not None, lambda: f"{p}: letter {b}")
            if datum is not None:
                q = simple_reduction(p, b)
                res.check(simple_extension(q, b, *datum) == p, lambda: f"{p}: round trip via {b}")
    return res


def _extension_data(q: Permutation, new: str):
    for c in q.alphabet:
        for d in q.alphabet:
            if (c, d) != (q.top[0], q.bottom[0]):
                yield new, c, d


def extension(d_max: int = 5, seed: int = 0) -> SuiteResult:
    """Simple extensions are irreducible and reduce back (d' <= d_max)."""
    res = SuiteResult("extension", {"d_max": d_max})
    for d in range(2, d_max + 1):
        for q in irreducible_permutations(d):
            for b, c, dd in _extension_data(q, "Z"):
                p = simple_extension(q, b, c, dd)
                res.check(is_irreducible(p), lambda: f"{q} + ({b},{c},{dd})")
                if p.pos0(b) < p.d - 1 and p.pos1(b) < p.d - 1:
                    res.check(simple_reduction(p, b) == q, lambda: f"{q} + ({b},{c},{dd}) round trip")
    return res


def _int64(m: np.ndarray) -> np.ndarray:
    return np.array(m.tolist(), dtype=np.int64)


def intertwining(d_max: int = 4, seed: int = 0, n_paths: int = 1000, max_len: int = 10) -> SuiteResult:
    """``P Theta(E(g)) == Theta(g) P`` for arrows and random paths.

    Random paths of length at most ``max_len`` extend to at most ``2 max_len``
    arrows, each of which at most doubles the largest entry, so int64 products
    are exact here.
    """
    if 2 * max_len >= 60:
        raise ValueError("max_len too large for exact int64 products")
    res = SuiteResult("intertwining", {"d_max": d_max, "seed": seed, "n_paths": n_paths, "max_len": max_len})
    rng = _rng(seed)
    data = 0
    for d in range(2, d_max + 1):
        for q in irreducible_permutations(d):
            cls = enumerate_class(q)
            for b, c, dd in _extension_data(q, "Z"):
                data += 1
                proj = _int64(projection_matrix(simple_extension(q, b, c, dd), b))
                # per-arrow matrices of the path and of its extension
                base_m, ext_m = {}, {}
                for i, v in enumerate(cls.vertices):
                    for k in KINDS:
                        a = make_arrow(v, k)
                        ea = extend_arrow(a, b, c, dd)
                        tm, te = _int64(theta(a)), _int64(theta_path(ea))
                        base_m[i, k], ext_m[i, k] = tm, te
                        res.check(np.array_equal(proj @ te, tm @ proj),
                                  lambda: f"{q} ({b},{c},{dd}) arrow {k} at {v}")
                for _ in range(n_paths):
                    i = 0
                    mb = np.eye(d, dtype=np.int64)
                    me = np.eye(d + 1, dtype=np.int64)
                    for bit in rng.integers(0, 2, size=int(rng.integers(1, max_len + 1))):
                        k = KINDS[int(bit)]
                        mb = base_m[i, k] @ mb
                        me = ext_m[i, k] @ me
                        i = cls.successor(i, k)
                    res.check(np.array_equal(proj @ me, mb @ proj),
                              lambda: f"{q} ({b},{c},{dd}) random path")
    res.stats["extension_data"] = data
    return res


# -- suspension -------------------------------------------------------------------------


def suspension(d_max: int = 5, seed: int = 0, steps: int = 10**4, bits: int = 256) -> SuiteResult:
    """Invertible steps in exact arithmetic keep tau in the arrow cones and
    recover lengths via ``lambda = Theta^T lambda'``.

    Steps are spread evenly over the classes with ``d <= d_max``; an orbit
    that hits a tie restarts from fresh random data.
    """
    res = SuiteResult("suspension", {"d_max": d_max, "seed": seed, "steps": steps, "bits": bits})
    rng = _rng(seed)
    reps = [c.root for d in range(2, d_max + 1) for c in _classes(d)]
    per = -(-steps // len(reps))
    restarts = 0
    done = 0
    for p in reps:
        ss = None
        for _ in range(per):
            if ss is None:
                lam = sample_lengths(p.d, rng, exact_bits=bits)
                ss = SuspensionState(IETState(lam, p), sample_tau(p, rng, exact_mode=True))
            try:
                nxt = invertible_step(ss)
            except KeaneViolation:
                restarts += 1
                ss = None
                continue
            except ConeViolation as exc:
                res.check(False, f"cone at {ss.perm}: {exc}")
                ss = None
                continue
            a = nxt.arrow
            res.check(nxt.perm == a.end, "arrow end")
            m = theta(a)
            lam_back = [sum(m[j, i] * nxt.state.lengths[j] for j in range(p.d)) for i in range(p.d)]
            res.check(tuple(lam_back) == ss.state.lengths, lambda: f"length recovery at {ss.perm}")
            tau_back = [sum(m[j, i] * nxt.tau[j] for j in range(p.d)) for i in range(p.d)]
            res.check(tuple(Fraction(v) for v in tau_back) == tuple(Fraction(v) for v in ss.tau),
                      lambda: f"tau transport at {ss.perm}")
            res.check(in_arrow_cone(a, nxt.tau), lambda: f"cone after {a.kind} at {a.start}")
            ss = SuspensionState(nxt.state, nxt.tau)
            done += 1
    res.stats.update({"steps": done, "restarts": restarts})
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "conjugacy": conjugacy,
    "determinant": determinant,
    "classes": classes,
    "rauzy": rauzy,
    "degenerateorgood": degenerateorgood,
    "simplereduction": simplereduction,
    "degenerate": degenerate,
    "211": forget_outer_genus,
    "dg": dg,
    "goodexists": goodexists,
    "minimal": minimal,
    "sex": sex,
    "extension": extension,
    "intertwining": intertwining,
    "suspension": suspension,
}


def run_suite(name: str, d_max: int | None = None, seed: int = 0, **kw) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    if d_max is not None:
        kw["d_max"] = d_max
    return fn(seed=seed, **kw)
