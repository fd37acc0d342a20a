"""Rauzy diagrams: top/bottom operations, classes, paths and their matrices.

Matrix convention used everywhere in the package: vectors are columns
indexed by the alphabet order, matrices act on the left, and the matrix of
a concatenation is ``theta(g1 + g2) == theta(g2) @ theta(g1)``.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from .errors import InvalidInput, ResourceLimit
from .perm import (
    Letter,
    Permutation,
    check_extension_datum,
    is_irreducible,
    simple_extension,
)

Kind = Literal["top", "bottom"]
KINDS: tuple[Kind, Kind] = ("top", "bottom")

DEFAULT_CLASS_CAP = 10**6


def apply_top(p: Permutation) -> Permutation:
    """The last top letter wins: move the last bottom letter right after it."""
    x, y = p.top[-1], p.bottom[-1]
    rest = p.bottom[:-1]
    i = rest.index(x)
    return Permutation(p.top, rest[: i + 1] + (y,) + rest[i + 1 :], p.alphabet)


def apply_bottom(p: Permutation) -> Permutation:
    x, y = p.top[-1], p.bottom[-1]
    rest = p.top[:-1]
    i = rest.index(y)
    return Permutation(rest[: i + 1] + (x,) + rest[i + 1 :], p.bottom, p.alphabet)


def apply(p: Permutation, kind: Kind) -> Permutation:
    return apply_top(p) if kind == "top" else apply_bottom(p)


@dataclass(frozen=True)
class Arrow:
    start: Permutation
    end: Permutation
    kind: Kind
    winner: Letter
    loser: Letter

    def to_json(self) -> dict:
        return {
            "start": str(self.start),
            "end": str(self.end),
            "kind": self.kind,
            "winner": self.winner,
            "loser": self.loser,
        }


def make_arrow(p: Permutation, kind: Kind) -> Arrow:
    x, y = p.top[-1], p.bottom[-1]
    if kind == "top":
        return Arrow(p, apply_top(p), "top", x, y)
    if kind == "bottom":
        return Arrow(p, apply_bottom(p), "bottom", y, x)
    raise InvalidInput(f"unknown arrow kind {kind!r}")


@dataclass(frozen=True)
class Path:
    """A path in a Rauzy diagram; the empty path sits at ``start``."""

    start: Permutation
    arrows: tuple[Arrow, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arrows", tuple(self.arrows))
        v = self.start
        for a in self.arrows:
            if a.start != v:
                raise InvalidInput("arrows do not chain")
            v = a.end

    @classmethod
    def from_kinds(cls, start: Permutation, kinds: Iterable[Kind]) -> "Path":
        arrows = []
        v = start
        for k in kinds:
            a = make_arrow(v, k)
            arrows.append(a)
            v = a.end
        return cls(start, tuple(arrows))

    @property
    def end(self) -> Permutation:
        return self.arrows[-1].end if self.arrows else self.start

    @property
    def vertices(self) -> list[Permutation]:
        return [self.start] + [a.end for a in self.arrows]

    @property
    def kinds(self) -> list[Kind]:
        return [a.kind for a in self.arrows]

    def __len__(self) -> int:
        return len(self.arrows)

    def __add__(self, other: "Path") -> "Path":
        if other.start != self.end:
            raise InvalidInput("cannot concatenate: end and start differ")
        return Path(self.start, self.arrows + other.arrows)

    def is_loop(self) -> bool:
        return self.start == self.end

    def to_json(self) -> list[dict]:
        return [a.to_json() for a in self.arrows]


# -- matrices --------------------------------------------------------------------------


def int_identity(d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=object)
    for i in range(d):
        m[i, i] = 1
    return m


def as_int_matrix(rows) -> np.ndarray:
    arr = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            arr[i, j] = int(v)
    return arr


def theta(a: Arrow) -> np.ndarray:
    """Theta(a) e_winner = e_winner + e_loser; every other basis vector is fixed."""
    idx = a.start.alphabet.index
    m = int_identity(a.start.d)
    m[idx(a.loser), idx(a.winner)] += 1
    return m


def theta_path(path: Path) -> np.ndarray:
    m = int_identity(path.start.d)
    idx = path.start.alphabet.index
    for a in path.arrows:
        # left-multiplying by I + E[loser, winner] adds row winner to row loser
        m[idx(a.loser), :] += m[idx(a.winner), :]
    return m


# -- classes -----------------------------------------------------------------------------


@dataclass
class RauzyClass:
    vertices: tuple[Permutation, ...]
    next_top: tuple[int, ...]
    next_bottom: tuple[int, ...]

    def __post_init__(self):
        self.index = {p: i for i, p in enumerate(self.vertices)}

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, p) -> bool:
        return p in self.index

    @property
    def root(self) -> Permutation:
        return self.vertices[0]

    @property
    def d(self) -> int:
        return self.root.d

    def successor(self, i: int, kind: Kind) -> int:
        return self.next_top[i] if kind == "top" else self.next_bottom[i]

    def arrows(self) -> Iterator[Arrow]:
        for p in self.vertices:
            for k in KINDS:
                yield make_arrow(p, k)

    def to_json(self) -> dict:
        arrows = []
        for i, p in enumerate(self.vertices):
            for k in KINDS:
                a = make_arrow(p, k)
                arrows.append(
                    {
                        "start": i,
                        "end": self.successor(i, k),
                        "kind": k,
                        "winner": a.winner,
                        "loser": a.loser,
                    }
                )
        return {"vertices": [str(p) for p in self.vertices], "arrows": arrows}

    def to_dot(self) -> str:
        lines = ["digraph rauzy {"]
        for i, p in enumerate(self.vertices):
            lines.append(f'  v{i} [label="{p}"];')
        for i, p in enumerate(self.vertices):
            for k in KINDS:
                a = make_arrow(p, k)
                lines.append(
                    f'  v{i} -> v{self.successor(i, k)} [label="{k} {a.winner}>{a.loser}"];'
                )
        lines.append("}")
        return "\n".join(lines) + "\n"

    def distances_to(self, target: int) -> list[int]:
        """BFS distance from every vertex to ``target`` along arrows."""
        preds: list[list[int]] = [[] for _ in self.vertices]
        for i in range(len(self)):
            preds[self.next_top[i]].append(i)
            preds[self.next_bottom[i]].append(i)
        dist = [-1] * len(self)
        dist[target] = 0
        queue = deque([target])
        while queue:
            v = queue.popleft()
            for u in preds[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def shortest_path(self, src: Permutation, dst: Permutation) -> Path:
        dist = self.distances_to(self.index[dst])
        return self._descend(src, dist)

    def _descend(self, src: Permutation, dist: Sequence[int]) -> Path:
        i = self.index[src]
        kinds = []
        while dist[i] > 0:
            k = "top" if dist[self.next_top[i]] == dist[i] - 1 else "bottom"
            kinds.append(k)
            i = self.successor(i, k)
        return Path.from_kinds(src, kinds)


def enumerate_class(p: Permutation, cap: int = DEFAULT_CLASS_CAP) -> RauzyClass:
    """Orbit of ``p`` under the two operations, in BFS order from ``p``.

    Children are visited top before bottom, which makes the order a pure
    function of ``p``.
    """
    if not is_irreducible(p):
        raise InvalidInput(f"{p} is reducible")
    order = [p]
    index = {p: 0}
    nxt: dict[int, list[int]] = {}
    queue = deque([p])
    while queue:
        v = queue.popleft()
        ids = []
        for w in (apply_top(v), apply_bottom(v)):
            j = index.get(w)
            if j is None:
                if len(order) >= cap:
                    raise ResourceLimit(f"Rauzy class of {p} exceeds {cap} vertices")
                j = len(order)
                index[w] = j
                order.append(w)
                queue.append(w)
            ids.append(j)
        nxt[index[v]] = ids
    return RauzyClass(
        tuple(order),
        tuple(nxt[i][0] for i in range(len(order))),
        tuple(nxt[i][1] for i in range(len(order))),
    )


def all_classes(d: int, cap: int = DEFAULT_CLASS_CAP) -> list[RauzyClass]:
    """One labelled class per Rauzy class of size-``d`` permutations up to relabelling.

    Representatives are reduced permutations taken in lexicographic order of
    the bottom row; a reduced permutation is covered once any member of an
    already enumerated class relabels to it.
    """
    from .perm import irreducible_permutations

    covered: set = set()
    out = []
    for p in irreducible_permutations(d):
        if p in covered:
            continue
        cls = enumerate_class(p, cap)
        for q in cls.vertices:
            covered.add(q.reduced())
        out.append(cls)
    return out


# -- random paths --------------------------------------------------------------------


def random_path(start: Permutation, length: int, rng: np.random.Generator) -> Path:
    kinds = ["top" if b else "bottom" for b in rng.integers(0, 2, size=length)]
    return Path.from_kinds(start, kinds)


def random_loop(cls: RauzyClass, base: Permutation, length: int, rng: np.random.Generator,
                dist: Sequence[int] | None = None) -> Path:
    """Random walk of ``length`` steps closed by a shortest return to ``base``."""
    walk = random_path(base, length, rng)
    if dist is None:
        dist = cls.distances_to(cls.index[base])
    return walk + cls._descend(walk.end, dist)


# -- extension maps ------------------------------------------------------------------


def extend_arrow(a: Arrow, b: Letter, c: Letter, d: Letter) -> Path:
    """Image of one arrow under the extension map for the datum ``(b, c, d)``.

    A bottom arrow at a vertex whose last top letter is ``c`` becomes two
    bottom arrows, a top arrow at a vertex whose last bottom letter is ``d``
    becomes two top arrows, and any other arrow becomes the single arrow of
    the same kind.
    """
    start = simple_extension(a.start, b, c, d)
    if a.kind == "bottom" and a.start.top[-1] == c:
        kinds = ["bottom", "bottom"]
    elif a.kind == "top" and a.start.bottom[-1] == d:
        kinds = ["top", "top"]
    else:
        kinds = [a.kind]
    out = Path.from_kinds(start, kinds)
    if out.end != simple_extension(a.end, b, c, d):
        raise AssertionError(f"extension of {a} does not end at the extended end vertex")
    return out


def extension_map(path: Path, b: Letter, c: Letter, d: Letter) -> Path:
    check_extension_datum(path.start, b, c, d)
    out = Path(simple_extension(path.start, b, c, d))
    for a in path.arrows:
        out = out + extend_arrow(a, b, c, d)
    return out


def write_json(obj, fh) -> None:
    json.dump(obj, fh, sort_keys=True, indent=2)
    fh.write("\n")
