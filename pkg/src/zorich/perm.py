"""Permutation pairs over a finite alphabet and their combinatorics.

A permutation is stored as two rows (tuples of letters, position -> letter)
plus per-row letter -> position maps. Row positions are 0-based internally;
the docstrings use the usual 1-based language ("first", "last", "second").
"""
from __future__ import annotations

import string
from dataclasses import dataclass, field
from itertools import permutations as _itperms
from typing import Iterator, Sequence

from .errors import InvalidInput, NotAReduction

Letter = str


@dataclass(frozen=True)
class Alphabet:
    """An ordered set of ``d >= 2`` distinct letters.

    The construction order is the canonical order: it fixes coordinates of
    vectors indexed by the alphabet and the order of every enumeration.
    """

    letters: tuple[Letter, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        if len(letters) < 2:
            raise InvalidInput("an alphabet needs at least two letters")
        if len(set(letters)) != len(letters):
            raise InvalidInput(f"duplicate letters in {letters!r}")
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(letters)})

    @classmethod
    def of_size(cls, d: int) -> "Alphabet":
        if d <= 26:
            return cls(tuple(string.ascii_uppercase[:d]))
        return cls(tuple(f"x{i}" for i in range(d)))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __contains__(self, x) -> bool:
        return x in self._index

    def index(self, x: Letter) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise InvalidInput(f"letter {x!r} not in alphabet") from None

    def without(self, x: Letter) -> "Alphabet":
        return Alphabet(tuple(y for y in self.letters if y != x))

    def with_letter(self, x: Letter) -> "Alphabet":
        return Alphabet(self.letters + (x,))


@dataclass(frozen=True)
class Permutation:
    """Combinatorial datum: a top and a bottom row over one alphabet.

    Equality and hashing use the rows only. The alphabet carries the
    coordinate order for vectors and matrices indexed by letters.
    """

    top: tuple[Letter, ...]
    bottom: tuple[Letter, ...]
    alphabet: Alphabet = field(default=None, compare=False, hash=False, repr=False)
    _pos0: dict = field(init=False, repr=False, compare=False, hash=False)
    _pos1: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        top, bottom = tuple(self.top), tuple(self.bottom)
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "bottom", bottom)
        if self.alphabet is None:
            object.__setattr__(self, "alphabet", Alphabet(top))
        alpha = self.alphabet
        if len(top) != len(alpha) or len(bottom) != len(alpha):
            raise InvalidInput("rows must have one entry per letter")
        if set(top) != set(alpha.letters) or set(bottom) != set(alpha.letters):
            raise InvalidInput(f"rows {top}/{bottom} are not bijections onto the alphabet")
        object.__setattr__(self, "_pos0", {x: i for i, x in enumerate(top)})
        object.__setattr__(self, "_pos1", {x: i for i, x in enumerate(bottom)})

    # -- construction / notation -------------------------------------------------

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet | None = None) -> "Permutation":
        """Parse ``"abcd/dcba"`` or ``"a b c/c b a"`` notation."""
        if text.count("/") != 1:
            raise InvalidInput(f"expected TOP/BOTTOM, got {text!r}")
        t, b = text.split("/")
        if any(ch.isspace() for ch in text.strip()):
            top, bottom = tuple(t.split()), tuple(b.split())
        else:
            top, bottom = tuple(t.strip()), tuple(b.strip())
        if len(top) < 2:
            raise InvalidInput(f"expected at least two letters, got {text!r}")
        if alphabet is None:
            alphabet = Alphabet(top) if len(set(top)) == len(top) else None
            if alphabet is None:
                raise InvalidInput(f"duplicate letters in {text!r}")
        return cls(top, bottom, alphabet)

    @classmethod
    def from_json(cls, obj: dict) -> "Permutation":
        try:
            top, bottom = tuple(obj["top"]), tuple(obj["bottom"])
        except (KeyError, TypeError):
            raise InvalidInput("expected an object with 'top' and 'bottom'") from None
        alphabet = Alphabet(tuple(obj["alphabet"])) if "alphabet" in obj else None
        return cls(top, bottom, alphabet)

    def to_json(self) -> dict:
        return {"top": list(self.top), "bottom": list(self.bottom)}

    def __str__(self) -> str:
        if all(len(x) == 1 for x in self.top):
            return "".join(self.top) + "/" + "".join(self.bottom)
        return " ".join(self.top) + "/" + " ".join(self.bottom)

    def __repr__(self) -> str:
        return f"Permutation({str(self)!r})"

    # -- accessors ------------------------------------------------------------------

    @property
    def d(self) -> int:
        return len(self.top)

    def pos0(self, x: Letter) -> int:
        """0-based position of ``x`` in the top row."""
        return self._pos0[x]

    def pos1(self, x: Letter) -> int:
        return self._pos1[x]

    def sort_key(self) -> tuple:
        idx = self.alphabet.index
        return (tuple(idx(x) for x in self.top), tuple(idx(x) for x in self.bottom))

    def relabel(self, alphabet: Alphabet) -> "Permutation":
        """Same rows, different coordinate order."""
        return Permutation(self.top, self.bottom, alphabet)

    def reduced(self) -> "Permutation":
        """Relabel so the top row reads the canonical alphabet in order."""
        canon = Alphabet.of_size(self.d)
        ren = {x: canon.letters[i] for i, x in enumerate(self.top)}
        return Permutation(canon.letters, tuple(ren[x] for x in self.bottom), canon)


# -- predicates -----------------------------------------------------------------------


def is_irreducible(p: Permutation) -> bool:
    seen_top: set = set()
    seen_bot: set = set()
    for k in range(p.d - 1):
        seen_top.add(p.top[k])
        seen_bot.add(p.bottom[k])
        if seen_top == seen_bot:
            return False
    return True


def is_standard(p: Permutation) -> bool:
    return p.top[0] == p.bottom[-1] and p.bottom[0] == p.top[-1]


def is_degenerate(p: Permutation) -> bool:
    """Some letter is second in both rows, or second-to-last in both rows.

    Requires a standard permutation with ``d >= 3``.
    """
    if p.d < 3 or not is_standard(p):
        raise InvalidInput("is_degenerate needs a standard permutation with d >= 3")
    return p.top[1] == p.bottom[1] or p.top[-2] == p.bottom[-2]


def forget_outer(p: Permutation) -> Permutation:
    """Drop the first and last letters of a standard permutation."""
    a, e = p.top[0], p.bottom[0]
    alpha = p.alphabet.without(a).without(e)
    return Permutation(
        tuple(x for x in p.top if x not in (a, e)),
        tuple(x for x in p.bottom if x not in (a, e)),
        alpha,
    )


def is_good(p: Permutation) -> bool:
    if p.d < 4 or not is_standard(p):
        raise InvalidInput("is_good needs a standard permutation with d >= 4")
    return is_irreducible(forget_outer(p))


# -- reduction and extension --------------------------------------------------------


def delete_letter(p: Permutation, b: Letter) -> Permutation:
    if b not in p.alphabet:
        raise InvalidInput(f"letter {b!r} not in alphabet")
    return Permutation(
        tuple(x for x in p.top if x != b),
        tuple(x for x in p.bottom if x != b),
        p.alphabet.without(b),
    )


def simple_reduction(p: Permutation, b: Letter) -> Permutation:
    """Delete ``b`` from both rows; raise :class:`NotAReduction` if reducible."""
    if p.d < 3:
        raise InvalidInput("simple reduction needs d >= 3")
    q = delete_letter(p, b)
    if not is_irreducible(q):
        raise NotAReduction(f"deleting {b!r} from {p} gives reducible {q}")
    return q


def _insert_before(row: Sequence[Letter], new: Letter, before: Letter) -> tuple:
    out = []
    for x in row:
        if x == before:
            out.append(new)
        out.append(x)
    return tuple(out)


def check_extension_datum(p: Permutation, b: Letter, c: Letter, d: Letter) -> None:
    if b in p.alphabet:
        raise InvalidInput(f"new letter {b!r} already in the alphabet")
    if c not in p.alphabet or d not in p.alphabet:
        raise InvalidInput("insertion anchors must belong to the alphabet")
    if (p.top[0], p.bottom[0]) == (c, d):
        raise InvalidInput("(C, D) must differ from (first top, first bottom)")


def simple_extension(p: Permutation, b: Letter, c: Letter, d: Letter) -> Permutation:
    """Insert ``b`` just before ``c`` in the top row and before ``d`` in the bottom."""
    check_extension_datum(p, b, c, d)
    return Permutation(
        _insert_before(p.top, b, c),
        _insert_before(p.bottom, b, d),
        p.alphabet.with_letter(b),
    )


def extension_datum(p: Permutation, b: Letter) -> tuple[Letter, Letter] | None:
    """Recover ``(C, D)`` if ``p`` is a simple extension by inserting ``b``.

    ``C`` and ``D`` are the letters right after ``b`` in the two rows, so ``b``
    must not be last in either row; the reduction must be irreducible and the
    anchor pair must differ from the reduced first letters.
    """
    i0, i1 = p.pos0(b), p.pos1(b)
    if i0 == p.d - 1 or i1 == p.d - 1:
        return None
    c, d = p.top[i0 + 1], p.bottom[i1 + 1]
    q = delete_letter(p, b)
    if not is_irreducible(q) or (q.top[0], q.bottom[0]) == (c, d):
        return None
    return c, d


def find_reducing_letter(p: Permutation) -> Letter:
    """Letter whose deletion exhibits ``p`` as a simple extension.

    Compares the top position of the first bottom letter ``E`` with the
    bottom position of the first top letter ``A``. In the tie case strictly
    inside the rows either choice works; ``A`` is taken.
    """
    if p.d < 3 or not is_irreducible(p):
        raise InvalidInput("find_reducing_letter needs an irreducible permutation, d >= 3")
    a, e = p.top[0], p.bottom[0]
    pe, pa = p.pos0(e), p.pos1(a)
    if pe < pa:
        return e
    if pa < pe:
        return a
    if pe < p.d - 1:
        return a
    return next(x for x in p.alphabet if x not in (a, e))


# -- enumeration ----------------------------------------------------------------------


def irreducible_permutations(d: int) -> Iterator[Permutation]:
    """All irreducible permutations with top row ``A B C ...`` (reduced form)."""
    alpha = Alphabet.of_size(d)
    for bottom in _itperms(alpha.letters):
        p = Permutation(alpha.letters, bottom, alpha)
        if is_irreducible(p):
            yield p
