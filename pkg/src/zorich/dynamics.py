"""Interval exchanges, Rauzy and Zorich induction, suspension data.

Length vectors are tuples in alphabet order. A state is either exact (every
entry an ``int`` or ``Fraction``) or float (every entry a ``float``); the two
are never mixed within one state. Ties are detected by plain equality in
both modes; random real lengths avoid them almost surely, rational lengths
eventually hit one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import exact
from .errors import ConeViolation, DegenerateInput, InvalidInput, KeaneViolation, RunCapExceeded
from .perm import Letter, Permutation, is_irreducible
from .rauzy import Arrow, Kind, Path, int_identity, make_arrow
from .symplectic import SubspaceBasis, h_basis, omega, symplectic_orthogonal

DEFAULT_RUN_CAP = 10**6


def _is_exact(values: Sequence) -> bool:
    kinds = {isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values}
    if len(kinds) != 1:
        raise InvalidInput("exact and float entries cannot be mixed")
    return kinds.pop()


@dataclass(frozen=True)
class IETState:
    lengths: tuple
    perm: Permutation

    def __post_init__(self):
        lam = tuple(self.lengths)
        object.__setattr__(self, "lengths", lam)
        if len(lam) != self.perm.d:
            raise InvalidInput("one length per letter")
        _is_exact(lam)
        if any(not v > 0 for v in lam):
            raise InvalidInput("lengths must be strictly positive")
        if not is_irreducible(self.perm):
            raise InvalidInput(f"{self.perm} is reducible")

    @property
    def exact(self) -> bool:
        return _is_exact(self.lengths)

    def length(self, x: Letter):
        return self.lengths[self.perm.alphabet.index(x)]

    def total(self):
        return sum(self.lengths)

    def normalized(self) -> "IETState":
        s = self.total()
        return IETState(tuple(v / s for v in self.lengths), self.perm)


def translation_vector(s: IETState) -> tuple:
    om = omega(s.perm)
    d = s.perm.d
    return tuple(sum(om[i, j] * s.lengths[j] for j in range(d) if om[i, j]) for i in range(d))


def iet_apply(s: IETState, t):
    """Image of ``t`` under the interval exchange (intervals closed on the left)."""
    if not 0 <= t < s.total():
        raise InvalidInput(f"point {t} outside [0, {s.total()})")
    delta = translation_vector(s)
    idx = s.perm.alphabet.index
    left = 0
    for x in s.perm.top:
        right = left + s.lengths[idx(x)]
        if t < right:
            return t + delta[idx(x)]
        left = right
    raise AssertionError("unreachable")


def rauzy_step(s: IETState) -> tuple[IETState, Arrow]:
    p = s.perm
    idx = p.alphabet.index
    x, y = p.top[-1], p.bottom[-1]
    lx, ly = s.lengths[idx(x)], s.lengths[idx(y)]
    if lx == ly:
        raise KeaneViolation(f"tie between {x} and {y} at {p}")
    arrow = make_arrow(p, "top" if lx > ly else "bottom")
    lam = list(s.lengths)
    lam[idx(arrow.winner)] -= lam[idx(arrow.loser)]
    return IETState(tuple(lam), arrow.end), arrow


@dataclass(frozen=True)
class StepRecord:
    """One Zorich step: ``m`` Rauzy arrows of one kind sharing a winner.

    ``losses`` counts how often each letter lost. The cocycle matrix is
    ``I + sum_z losses[z] E[z, winner]``, which is the product of the ``m``
    single-arrow matrices (they commute because the winner never loses).
    """

    start: Permutation
    kind: Kind
    winner: Letter
    m: int
    losses: tuple[tuple[Letter, int], ...]
    end: Permutation

    @property
    def loser(self) -> Letter:
        """Loser of the first arrow of the run."""
        return self.start.bottom[-1] if self.kind == "top" else self.start.top[-1]

    @property
    def matrix(self) -> np.ndarray:
        idx = self.start.alphabet.index
        mat = int_identity(self.start.d)
        w = idx(self.winner)
        for z, c in self.losses:
            mat[idx(z), w] += c
        return mat

    def path(self, limit: int = 10**5) -> Path:
        if self.m > limit:
            raise InvalidInput(f"run of {self.m} arrows is too long to expand")
        return Path.from_kinds(self.start, [self.kind] * self.m)


def _floor_div(a, b) -> int:
    if isinstance(a, float):
        return int(math.floor(a / b))
    return int(a // b)


def zorich_step(s: IETState, run_cap: int = DEFAULT_RUN_CAP) -> tuple[IETState, StepRecord]:
    """Apply Rauzy induction through one maximal run of same-kind arrows.

    The arrow of the other kind that ends the run is not applied.
    """
    p = s.perm
    idx = p.alphabet.index
    lam = list(s.lengths)
    x, y = p.top[-1], p.bottom[-1]
    if lam[idx(x)] == lam[idx(y)]:
        raise KeaneViolation(f"tie between {x} and {y} at {p}")
    kind: Kind = "top" if lam[idx(x)] > lam[idx(y)] else "bottom"
    w = x if kind == "top" else y
    wi = idx(w)
    # letters that lose in turn: those after the winner in the other row
    other = p.bottom if kind == "top" else p.top
    seg = list(other[other.index(w) + 1 :])
    seg_idx = [idx(z) for z in seg]
    counts = dict.fromkeys(seg, 0)
    m = 0
    total = sum(lam[i] for i in seg_idx)
    q = _floor_div(lam[wi], total) - 1
    if q >= 1:
        # q full cycles return the permutation to p
        lam[wi] -= q * total
        for z in seg:
            counts[z] += q
        m += q * len(seg)
    # finish by single steps; at most about two more cycles
    cur = list(seg)
    while True:
        loser = cur[-1]
        lw, ll = lam[wi], lam[idx(loser)]
        if lw == ll:
            raise KeaneViolation(f"tie between {w} and {loser}")
        if lw < ll:
            break
        lam[wi] = lw - ll
        counts[loser] += 1
        m += 1
        cur = [loser] + cur[:-1]
    if m > run_cap:
        raise RunCapExceeded(f"Zorich run of {m} arrows exceeds cap {run_cap}")
    if kind == "top":
        end = Permutation(p.top, p.bottom[: len(p.bottom) - len(seg)] + tuple(cur), p.alphabet)
    else:
        end = Permutation(p.top[: len(p.top) - len(seg)] + tuple(cur), p.bottom, p.alphabet)
    losses = tuple((z, counts[z]) for z in p.alphabet if counts.get(z))
    rec = StepRecord(p, kind, w, m, losses, end)
    return IETState(tuple(lam), end), rec


# -- suspension data -----------------------------------------------------------------


def cone_contains(p: Permutation, tau: Sequence) -> bool:
    """Top prefix sums positive and bottom prefix sums negative (k < d)."""
    idx = p.alphabet.index
    s0 = s1 = 0
    for k in range(p.d - 1):
        s0 += tau[idx(p.top[k])]
        s1 += tau[idx(p.bottom[k])]
        if not (s0 > 0 and s1 < 0):
            return False
    return True


@dataclass(frozen=True)
class SuspensionState:
    state: IETState
    tau: tuple
    arrow: Arrow | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(self.tau))
        if len(self.tau) != self.state.perm.d:
            raise InvalidInput("one suspension coordinate per letter")
        if not cone_contains(self.state.perm, self.tau):
            raise InvalidInput("suspension vector outside the cone of the permutation")

    @property
    def perm(self) -> Permutation:
        return self.state.perm


def in_arrow_cone(a: Arrow, tau: Sequence) -> bool:
    """Membership in the cone attached to an arrow ending at ``a.end``."""
    if not cone_contains(a.end, tau):
        return False
    s = sum(tau)
    return s < 0 if a.kind == "top" else s > 0


def invertible_step(ss: SuspensionState) -> SuspensionState:
    """Advance lengths by Rauzy induction and push ``tau`` by the inverse adjoint."""
    new_state, arrow = rauzy_step(ss.state)
    idx = ss.perm.alphabet.index
    tau = list(ss.tau)
    # (Theta^{-1})^T = I - E[winner, loser]
    tau[idx(arrow.winner)] -= tau[idx(arrow.loser)]
    if not in_arrow_cone(arrow, tau):
        raise ConeViolation(f"suspension vector left the cone after {arrow}")
    return SuspensionState(new_state, tuple(tau), arrow)


def invariant_lines(ss: SuspensionState) -> tuple[SubspaceBasis, SubspaceBasis, SubspaceBasis]:
    """The unstable line, the stable line and their symplectic complement in H."""
    p = ss.perm
    om = omega(p)
    d = p.d
    lam = [Fraction(v) for v in ss.state.lengths]
    tau = [Fraction(v) for v in ss.tau]
    om_tau = [sum(om[i, j] * tau[j] for j in range(d)) for i in range(d)]
    om_lam = [sum(om[i, j] * lam[j] for j in range(d)) for i in range(d)]
    pairing = sum(a * b for a, b in zip(lam, om_tau))
    if pairing >= 0 or exact.exact_rank(exact.columns_to_matrix([om_tau, om_lam])) < 2:
        raise DegenerateInput("unstable and stable lines are not transverse")
    e_uu = SubspaceBasis((tuple(om_tau),))
    e_ss = SubspaceBasis((tuple(om_lam),))
    e_c = symplectic_orthogonal(SubspaceBasis((tuple(om_tau), tuple(om_lam))), h_basis(p))
    return e_uu, e_ss, e_c


# -- sampling ------------------------------------------------------------------------


def _big_int(rng: np.random.Generator, bits: int) -> int:
    chunks = -(-bits // 62)
    v = 0
    for c in rng.integers(0, 2**62, size=chunks):
        v = (v << 62) | int(c)
    return v | (1 << (bits - 1))


def sample_lengths(d: int, rng: np.random.Generator, exact_bits: int | None = None) -> tuple:
    """Uniform point of the simplex (float), or random big integers if ``exact_bits``."""
    if exact_bits is not None:
        return tuple(_big_int(rng, exact_bits) for _ in range(d))
    e = rng.exponential(1.0, size=d)
    return tuple(float(v) for v in e / e.sum())


def canonical_tau(p: Permutation) -> tuple[int, ...]:
    """Integer point of the cone: bottom position minus top position.

    A prefix of k distinct positions sums to at least 1 + ... + k, with
    equality only if it is exactly {1..k}; irreducibility makes every
    inequality strict.
    """
    return tuple(p.pos1(x) - p.pos0(x) for x in p.alphabet)


def sample_tau(p: Permutation, rng: np.random.Generator, exact_mode: bool = False,
               rejection_cap: int = 1000) -> tuple:
    """Random suspension vector in the cone of ``p``.

    Rejection from the cube ``[-1, 1]^d``; after ``rejection_cap`` misses, a
    random perturbation of :func:`canonical_tau` small enough to stay inside.
    """
    d = p.d
    denom = 2**30
    for _ in range(rejection_cap):
        if exact_mode:
            tau = tuple(Fraction(int(v), denom) for v in rng.integers(-denom, denom + 1, size=d))
        else:
            tau = tuple(float(v) for v in rng.uniform(-1.0, 1.0, size=d))
        if cone_contains(p, tau):
            return tau
    base = canonical_tau(p)
    if exact_mode:
        noise = rng.integers(-denom + 1, denom, size=d)
        return tuple(b + Fraction(int(u), 2 * d * denom) for b, u in zip(base, noise))
    noise = rng.uniform(-1.0, 1.0, size=d) / (2 * d)
    return tuple(b + float(u) for b, u in zip(base, noise))


def orbit_trace(s: IETState, steps: int, run_cap: int = DEFAULT_RUN_CAP) -> Iterator[dict]:
    """JSON-ready records of successive Zorich steps (lengths renormalized)."""
    for _ in range(steps):
        s, rec = zorich_step(s, run_cap)
        s = s.normalized()
        yield {
            "m": rec.m,
            "kind": rec.kind,
            "winner": rec.winner,
            "lambda": [float(v) for v in s.lengths],
            "matrix_norm_log": math.log1p(rec.m),
        }
