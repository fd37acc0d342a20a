"""Witness searches in the monoid of loops at a vertex of a Rauzy diagram.

Every search draws candidate loops from seeded random walks (top or bottom
with probability 1/2) closed by a shortest return to the base vertex.
Trial ``t`` uses the generator ``default_rng([seed, t])`` and a walk length
that doubles every ``GROWTH_EVERY`` trials, so the trial sequence is fixed
by the seed alone and parallel evaluation can return the same winner as the
serial loop: the verified witness with the smallest trial index.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import exact
from .errors import InvalidInput, NotFound
from .lyapunov import int_singular_values, lyapunov_exponents_of_matrix
from .perm import Permutation, delete_letter, extension_datum, is_good, is_standard
from .rauzy import (
    KINDS,
    Path,
    RauzyClass,
    apply_top,
    enumerate_class,
    extension_map,
    make_arrow,
    theta_path,
)
from .symplectic import SubspaceBasis, darboux_basis, genus, h_basis, restricted_matrix, standard_j

START_LENGTH = 4
MAX_LENGTH = 256
GROWTH_EVERY = 8
DEFAULT_BUDGET = 2000


@dataclass
class WitnessResult:
    kind: str
    path: Path
    matrix: np.ndarray
    certificate: dict
    seed: int
    trials: int
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "class": str(self.path.start),
            "kind": self.kind,
            "path": self.path.to_json(),
            "matrix": [[str(int(v)) for v in row] for row in self.matrix.tolist()],
            "certificate": self.certificate,
            "seed": self.seed,
            "trials": self.trials,
            "params": self.params,
        }


def walk_length(trial: int) -> int:
    return min(START_LENGTH << (trial // GROWTH_EVERY), MAX_LENGTH)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _as_class(cls: RauzyClass | Permutation) -> RauzyClass:
    return cls if isinstance(cls, RauzyClass) else enumerate_class(cls)


def _search(make: Callable[[int], object], budget: int, workers: int, what: str):
    """First trial index whose candidate is not None, in trial order."""
    if workers <= 1:
        for t in range(budget):
            out = make(t)
            if out is not None:
                return out, t + 1
        raise NotFound(f"no {what} witness in {budget} trials", trials=budget)
    chunk = workers * 4
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for lo in range(0, budget, chunk):
            ts = list(range(lo, min(budget, lo + chunk)))
            for t, out in zip(ts, pool.map(make, ts)):
                if out is not None:
                    return out, t + 1
    raise NotFound(f"no {what} witness in {budget} trials", trials=budget)


class _LoopSource:
    """Picklable generator of the candidate loop for one trial."""

    def __init__(self, cls: RauzyClass, base: Permutation, seed: int):
        self.cls, self.base, self.seed = cls, base, seed
        self.dist = cls.distances_to(cls.index[base])

    def loop(self, trial: int) -> Path:
        rng = trial_rng(self.seed, trial)
        kinds = ["top" if b else "bottom" for b in rng.integers(0, 2, size=walk_length(trial))]
        walk = Path.from_kinds(self.base, kinds)
        return walk + self.cls._descend(walk.end, self.dist)


# -- singular value certificates ------------------------------------------------------


def _fraction_to_int_matrix(m: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    den = 1
    for row in m:
        for v in row:
            den = den * Fraction(v).denominator // math.gcd(den, Fraction(v).denominator)
    return [[int(Fraction(v) * den) for v in row] for row in m], den


def singular_values_exact(m) -> list[mpmath.mpf]:
    """Singular values of an integer or rational matrix (full relative accuracy)."""
    if isinstance(m, np.ndarray):
        m = m.tolist()
    ints, den = _fraction_to_int_matrix(m)
    return [s / den for s in int_singular_values(ints)]


def _gaps(sigma: Sequence) -> list[float]:
    return [float(sigma[i] / sigma[i + 1]) for i in range(len(sigma) - 1)]


def pinching_certificate(m) -> dict:
    sigma = singular_values_exact(m)
    return {
        "sigma": [mpmath.nstr(s, 17) for s in sigma],
        "log_sigma": [float(mpmath.log(s)) for s in sigma],
        "gaps": _gaps(sigma),
    }


def is_pinching(m, c: float) -> bool:
    return all(g > c for g in pinching_certificate(m)["gaps"])


def strong_pinching_certificate(m_h) -> dict:
    """For a matrix of the restricted action in a Darboux basis."""
    sigma = singular_values_exact(m_h)
    logs = [float(mpmath.log(s)) for s in sigma]
    g = len(sigma) // 2
    return {
        "sigma": [mpmath.nstr(s, 17) for s in sigma],
        "log_sigma": logs,
        "log_ratios": [logs[i] / logs[i + 1] if logs[i + 1] > 0 else None for i in range(g - 1)],
        "genus": g,
    }


def is_strongly_pinching(m_h, c: float) -> bool:
    cert = strong_pinching_certificate(m_h)
    logs, g = cert["log_sigma"], cert["genus"]
    return logs[g - 1] > c and all(logs[i] > c * logs[i + 1] for i in range(g - 1))


def pinching_constant_from_strong(c: float) -> float:
    """A gap every strongly ``c``-pinching symplectic matrix has.

    ``sigma_(2g+1-i) = 1/sigma_i``, so the middle gap is ``sigma_g^2 > e^(2c)``
    and each upper gap satisfies ``ln(sigma_i/sigma_(i+1)) > (c-1) ln sigma_(i+1)
    > (c-1) c``; the lower gaps mirror the upper ones.
    """
    if c <= 1:
        raise InvalidInput("need c > 1")
    return math.exp(min(2 * c, (c - 1) * c))


def isotropy_defect(m_h, k: int) -> float:
    """``max |w(u, v)|`` over unit vectors of the top-``k`` image space.

    ``m_h`` is a restricted matrix in a Darboux basis, where the adapted
    inner product makes the form the standard ``J``. The image space is
    spanned by the ``k`` leading left singular vectors; high precision is
    needed because they are only determined up to ``sigma_(k+1)/sigma_k``.
    """
    rows = m_h.tolist() if isinstance(m_h, np.ndarray) else m_h
    ints, _ = _fraction_to_int_matrix(rows)
    n = len(ints)
    digits = max(abs(v).bit_length() for r in ints for v in r) * 0.302
    with mpmath.workdps(int(n * digits) + 30):
        u, _, _ = mpmath.svd_r(mpmath.matrix(ints))
        j = mpmath.matrix(standard_j(n // 2))
        cols = [u[:, i] for i in range(k)]
        worst = mpmath.mpf(0)
        for a in range(k):
            for b in range(a + 1, k):
                worst = max(worst, abs((cols[a].T * j * cols[b])[0]))
        return float(worst)


# -- pinching -------------------------------------------------------------------------


class _PinchTrial:
    def __init__(self, src: _LoopSource, c: float, strong: bool):
        self.src, self.c, self.strong = src, c, strong
        if strong:
            self.space = h_basis(src.base)
            self.darboux = darboux_basis(self.space)

    def __call__(self, trial: int):
        path = self.src.loop(trial)
        m = theta_path(path)
        if self.strong:
            m_h = restricted_matrix(m, self.space, self.darboux)
            if is_strongly_pinching(m_h, self.c):
                return path, m
        elif is_pinching(m, self.c):
            return path, m
        return None


def find_pinching_witness(cls: RauzyClass | Permutation, base: Permutation | None = None,
                          c: float = 10.0, budget: int = DEFAULT_BUDGET, seed: int = 0,
                          workers: int = 1) -> WitnessResult:
    """Loop at ``base`` whose consecutive singular value ratios all exceed ``c``."""
    if not c > 1:
        raise InvalidInput("pinching constant must exceed 1")
    cls = _as_class(cls)
    base = cls.root if base is None else base
    (path, m), trials = _search(_PinchTrial(_LoopSource(cls, base, seed), c, False),
                                budget, workers, "pinching")
    return WitnessResult("pinching", path, m, pinching_certificate(m), seed, trials,
                         {"C": c, "budget": budget})


def find_strong_pinching_witness(cls: RauzyClass | Permutation, base: Permutation | None = None,
                                 c: float = 2.0, budget: int = DEFAULT_BUDGET, seed: int = 0,
                                 workers: int = 1) -> WitnessResult:
    """Loop whose action on H, in a Darboux basis, is strongly ``c``-pinching."""
    if not c > 1:
        raise InvalidInput("pinching constant must exceed 1")
    cls = _as_class(cls)
    base = cls.root if base is None else base
    (path, m), trials = _search(_PinchTrial(_LoopSource(cls, base, seed), c, True),
                                budget, workers, "strong pinching")
    m_h = restricted_matrix(m, h_basis(base))
    cert = strong_pinching_certificate(m_h)
    return WitnessResult("strong_pinching", path, m, cert, seed, trials,
                         {"C": c, "budget": budget})


# -- twisting -------------------------------------------------------------------------


def _image(m: np.ndarray, f: SubspaceBasis) -> list[list[Fraction]]:
    mf = [[Fraction(int(v)) for v in row] for row in m.tolist()]
    return [exact.matmul(mf, [[x] for x in vec]) for vec in f.vectors]


def transversality_ranks(m: np.ndarray, f: SubspaceBasis,
                         obstacles: Sequence[SubspaceBasis]) -> list[int]:
    img = [[row[0] for row in col] for col in _image(m, f)]
    return [exact.exact_rank(exact.columns_to_matrix(img + [list(v) for v in o.vectors]))
            for o in obstacles]


class _TwistTrial:
    def __init__(self, src: _LoopSource, f, obstacles, target: int):
        self.src, self.f, self.obstacles, self.target = src, f, obstacles, target

    def __call__(self, trial: int):
        # trial 0 is the empty loop: the identity may already be transverse
        path = Path(self.src.base) if trial == 0 else self.src.loop(trial - 1)
        m = theta_path(path)
        if all(r == self.target for r in transversality_ranks(m, self.f, self.obstacles)):
            return path, m
        return None


def find_twisting_witness(cls: RauzyClass | Permutation, base: Permutation | None,
                          f: SubspaceBasis, obstacles: Sequence[SubspaceBasis],
                          budget: int = DEFAULT_BUDGET, seed: int = 0,
                          restricted: bool = False, workers: int = 1) -> WitnessResult:
    """Loop moving ``f`` off every obstacle: ``(Theta f) cap F_i = 0``.

    In restricted mode ``f`` and the obstacles must lie in H(base) and the
    complementary dimension is ``2g``; otherwise it is ``d``.
    """
    cls = _as_class(cls)
    base = cls.root if base is None else base
    n = base.d
    if restricted:
        space = h_basis(base)
        n = space.dim
        for sub in (f, *obstacles):
            if not all(space.contains(v) for v in sub.vectors):
                raise InvalidInput("restricted twisting needs subspaces of H(base)")
    for o in obstacles:
        if f.dim + o.dim != n:
            raise InvalidInput(f"obstacle of dimension {o.dim} does not complement dim F = {f.dim}")
    (path, m), trials = _search(_TwistTrial(_LoopSource(cls, base, seed), f, list(obstacles), n),
                                budget, workers, "twisting")
    cert = {"ranks": transversality_ranks(m, f, obstacles), "target_rank": n}
    return WitnessResult("twisting", path, m, cert, seed, trials,
                         {"budget": budget, "restricted": restricted})


# -- parabolic element ----------------------------------------------------------------


def gamma0_loop(p: Permutation) -> Path:
    """The ``d-1`` top arrows at ``p``, whose last top letter is first in the bottom.

    That letter ``E`` wins every arrow, so the loop's matrix fixes every
    ``e_x`` with ``x != E`` and sends ``e_E`` to the sum of all basis vectors.
    """
    e = p.top[-1]
    if p.bottom[0] != e:
        raise InvalidInput(f"{p}: last top letter must be first in the bottom")
    path = Path.from_kinds(p, ["top"] * (p.d - 1))
    if path.end != p:
        raise InvalidInput(f"{p}: {p.d - 1} top arrows do not return to the start")
    m = theta_path(path)
    ie = p.alphabet.index(e)
    for j in range(p.d):
        col = [int(m[i, j]) for i in range(p.d)]
        want = [1] * p.d if j == ie else [int(i == j) for i in range(p.d)]
        if col != want:
            raise InvalidInput(f"{p}: top-arrow loop does not have the expected matrix")
    return path


@dataclass(frozen=True)
class ParabolicSetup:
    good: Permutation
    base: Permutation
    a: str
    e: str
    c: str
    d: str
    reduced: Permutation
    gamma0: Path


def parabolic_setup(cls: RauzyClass | Permutation) -> ParabolicSetup:
    cls = _as_class(cls)
    p0 = cls.root
    g = genus(p0)
    if p0.d != 2 * g:
        raise InvalidInput(f"class of {p0} is not minimal (d={p0.d}, g={g})")
    if g < 2:
        raise InvalidInput("parabolic construction needs genus >= 2")
    good = next((p for p in cls.vertices if is_standard(p) and is_good(p)), None)
    if good is None:
        raise AssertionError("minimal class without a good permutation")
    base = apply_top(good)
    a, e = base.top[0], base.bottom[0]
    datum = extension_datum(base, a)
    if datum is None:
        raise AssertionError(f"{base} is not a simple extension by {a}")
    return ParabolicSetup(good, base, a, e, datum[0], datum[1], delete_letter(base, a),
                          gamma0_loop(base))


class _StabilizerSource:
    """Random loops at the reduced vertex along which ``E`` never wins."""

    def __init__(self, setup: ParabolicSetup, seed: int):
        self.setup, self.seed = setup, seed
        cls = enumerate_class(setup.reduced)
        self.cls = cls
        n = len(cls)
        allowed = [[make_arrow(p, k).winner != setup.e for k in KINDS] for p in cls.vertices]
        self.allowed = allowed
        preds: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            for k, kind in enumerate(KINDS):
                if allowed[i][k]:
                    preds[cls.successor(i, kind)].append(i)
        dist = [-1] * n
        dist[0] = 0
        frontier = [0]
        while frontier:
            nxt = []
            for v in frontier:
                for u in preds[v]:
                    if dist[u] < 0:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            frontier = nxt
        self.dist = dist

    def _options(self, i: int) -> list[str]:
        return [kind for k, kind in enumerate(KINDS)
                if self.allowed[i][k] and self.dist[self.cls.successor(i, kind)] >= 0]

    def loop(self, trial: int) -> Path:
        rng = trial_rng(self.seed, trial)
        i, kinds = 0, []
        for _ in range(walk_length(trial)):
            opts = self._options(i)
            kind = opts[int(rng.integers(0, len(opts)))] if len(opts) > 1 else opts[0]
            kinds.append(kind)
            i = self.cls.successor(i, kind)
        while self.dist[i] > 0:
            kind = next(k for k in self._options(i)
                        if self.dist[self.cls.successor(i, k)] == self.dist[i] - 1)
            kinds.append(kind)
            i = self.cls.successor(i, kind)
        return Path.from_kinds(self.setup.reduced, kinds)


def _slope(ns: Sequence[int], values: Sequence) -> float:
    x = np.log(np.asarray(ns, dtype=float))
    y = np.array([float(mpmath.log(v)) for v in values])
    return float(np.polyfit(x, y, 1)[0])


def sigma_growth(b: np.ndarray, index: int, exponents=range(4, 11)) -> dict:
    """``sigma_index(B^n)`` at ``n = 2^k`` and the log-log slope."""
    rows = [[int(v) for v in r] for r in b.tolist()]
    power = rows
    ns, vals = [], []
    k = 0
    for target in exponents:
        while k < target:
            power = exact.matmul(power, power)
            k += 1
        ns.append(2**k)
        vals.append(int_singular_values(power)[index - 1])
    return {"n": ns, "sigma": [mpmath.nstr(v, 12) for v in vals], "slope": _slope(ns, vals)}


def parabolic_certificate(b: np.ndarray, g: int, c: float = 1.0) -> dict:
    d = b.shape[0]
    rows = [[int(v) for v in r] for r in b.tolist()]
    b_minus_i = [[rows[i][j] - int(i == j) for j in range(d)] for i in range(d)]
    cp = exact.charpoly(rows)
    theta = lyapunov_exponents_of_matrix(rows)
    positive = [t for t in theta if t > 1e-9]
    return {
        "rank_b_minus_i": exact.exact_rank(b_minus_i),
        "charpoly": [str(v) for v in cp],
        "multiplicity_of_one": exact.root_multiplicity(cp, 1),
        "theta": theta,
        "positive_exponents": len(positive),
        "ratio_gaps_ok": all(positive[i] > c * positive[i + 1] for i in range(len(positive) - 1)),
        "genus": g,
    }


def parabolic_ok(cert: dict, d: int) -> bool:
    return (cert["rank_b_minus_i"] == d - 1
            and cert["multiplicity_of_one"] % 2 == 0
            and cert["positive_exponents"] == cert["genus"] - 1
            and cert["ratio_gaps_ok"])


class _ParabolicTrial:
    def __init__(self, setup: ParabolicSetup, seed: int, c: float):
        self.setup, self.c = setup, c
        self.src = _StabilizerSource(setup, seed)
        self.g0 = theta_path(setup.gamma0)

    def __call__(self, trial: int):
        s = self.setup
        reduced_loop = self.src.loop(trial)
        # the extension appends A to the alphabet; rebuild at base so the
        # matrix uses the same coordinate order as gamma0
        gamma = Path.from_kinds(s.base, extension_map(reduced_loop, s.a, s.c, s.d).kinds)
        t = theta_path(gamma)
        idx = s.base.alphabet.index
        ia, ie = idx(s.a), idx(s.e)
        d = s.base.d
        # cheap structural filter: e_A and e_E fixed, row A zero off the diagonal
        if any(int(t[i, ia]) != int(i == ia) or int(t[i, ie]) != int(i == ie) for i in range(d)):
            return None
        if any(int(t[ia, j]) != 0 for j in range(d) if j != ia):
            return None
        b = self.g0.dot(t)
        cert = parabolic_certificate(b, d // 2, self.c)
        if not parabolic_ok(cert, d):
            return None
        return gamma + s.gamma0, b, cert


def find_parabolic_witness(cls: RauzyClass | Permutation, seed: int = 0,
                           budget: int = DEFAULT_BUDGET, c: float = 1.0,
                           workers: int = 1, slope_range=(0.8, 1.2)) -> WitnessResult:
    """Matrix of a loop with eigenvalue 1 of geometric multiplicity one
    (and even algebraic multiplicity) and ``g-1`` positive exponents.

    The loop is ``E(gamma') + gamma0`` where ``gamma'`` is a random loop at
    the reduced vertex along which ``E`` never wins, ``E`` is the extension
    map inserting ``A`` back, and ``gamma0`` is :func:`gamma0_loop`.
    Candidates whose ``sigma_g(B^n)`` does not grow linearly are rejected.
    """
    setup = parabolic_setup(cls)
    trial_fn = _ParabolicTrial(setup, seed, c)
    g = setup.base.d // 2

    (path, b, cert, growth), trials = _search(_ParabolicAccept(trial_fn, g, slope_range),
                                              budget, workers, "parabolic")
    cert = dict(cert, sigma_growth=growth, good=str(setup.good), base=str(setup.base),
                reduced=str(setup.reduced))
    return WitnessResult("parabolic", path, b, cert, seed, trials, {"C": c, "budget": budget})


class _ParabolicAccept:
    def __init__(self, trial_fn, g, slope_range):
        self.trial_fn, self.g, self.slope_range = trial_fn, g, slope_range

    def __call__(self, t):
        out = self.trial_fn(t)
        if out is None:
            return None
        growth = sigma_growth(out[1], self.g)
        if not self.slope_range[0] <= growth["slope"] <= self.slope_range[1]:
            return None
        return out + (growth,)


# -- re-verification ------------------------------------------------------------------


def reverify(w: WitnessResult, obstacles=None, f=None) -> bool:
    """Recompute the matrix and certificate from the stored path."""
    m = theta_path(w.path)
    if not np.array_equal(m, w.matrix) or not w.path.is_loop():
        return False
    if w.kind == "pinching":
        return is_pinching(m, w.params["C"])
    if w.kind == "strong_pinching":
        return is_strongly_pinching(restricted_matrix(m, h_basis(w.path.start)), w.params["C"])
    if w.kind == "parabolic":
        cert = parabolic_certificate(m, m.shape[0] // 2, w.params["C"])
        return parabolic_ok(cert, m.shape[0])
    if w.kind == "twisting":
        return all(r == w.certificate["target_rank"] for r in transversality_ranks(m, f, obstacles))
    raise InvalidInput(f"unknown witness kind {w.kind!r}")


def random_twisting_instance(p: Permutation, rng: np.random.Generator, k: int = 2,
                             n_obstacles: int = 2, restricted: bool = False):
    """Random ``(F, obstacles)`` where every obstacle meets ``F`` at the identity.

    Each obstacle contains the first vector of ``F``, so the empty loop never
    qualifies and a witness has to move ``F``.
    """
    if restricted:
        space = h_basis(p)
        n = space.dim

        def vec():
            return space.ambient([int(v) for v in rng.integers(-3, 4, size=n)])
    else:
        n = p.d

        def vec():
            return [int(v) for v in rng.integers(-3, 4, size=n)]

    if not 1 <= k < n:
        raise InvalidInput(f"need 1 <= k < {n}")
    while True:
        f_vecs = [vec() for _ in range(k)]
        if exact.exact_rank(exact.columns_to_matrix(f_vecs)) == k:
            break
    obstacles = []
    while len(obstacles) < n_obstacles:
        o_vecs = [f_vecs[0]] + [vec() for _ in range(n - k - 1)]
        if exact.exact_rank(exact.columns_to_matrix(o_vecs)) == n - k:
            obstacles.append(SubspaceBasis(tuple(tuple(v) for v in o_vecs)))
    return SubspaceBasis(tuple(tuple(v) for v in f_vecs)), obstacles
