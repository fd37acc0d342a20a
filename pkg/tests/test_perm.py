import pytest
from hypothesis import given

from conftest import irreducible_perms
from zorich.errors import InvalidInput, NotAReduction
from zorich.perm import (
    Alphabet,
    Permutation,
    extension_datum,
    find_reducing_letter,
    forget_outer,
    irreducible_permutations,
    is_degenerate,
    is_good,
    is_irreducible,
    is_standard,
    simple_extension,
    simple_reduction,
)

P = Permutation.parse


def prefix_irreducible(top, bottom):
    """Independent oracle: compare prefix sets directly on strings."""
    return all(set(top[:k]) != set(bottom[:k]) for k in range(1, len(top)))


def test_parse_forms():
    assert P("abcd/dcba") == P("a b c d/d c b a")
    assert str(P("ABC/CBA")) == "ABC/CBA"
    assert Permutation.from_json(P("ABC/CBA").to_json()) == P("ABC/CBA")
    with pytest.raises(InvalidInput):
        P("ABC")
    with pytest.raises(InvalidInput):
        P("AAB/ABA")
    with pytest.raises(InvalidInput):
        P("ABC/ABD")


def test_alphabet_rules():
    with pytest.raises(InvalidInput):
        Alphabet(("A",))
    with pytest.raises(InvalidInput):
        Alphabet(("A", "A"))
    assert Alphabet.of_size(3).letters == ("A", "B", "C")


@pytest.mark.parametrize("text, expected", [("AB/BA", True), ("ABC/ACB", False), ("ABCD/DABC", True)])
def test_irreducible_examples(text, expected):
    assert is_irreducible(P(text)) is expected


@pytest.mark.parametrize("text, expected", [("AB/BA", True), ("ABCD/DCBA", True), ("ABC/CAB", False)])
def test_standard_examples(text, expected):
    assert is_standard(P(text)) is expected


def test_degenerate_examples():
    assert is_degenerate(P("ABC/CBA"))
    assert not is_degenerate(P("ABCD/DCBA"))
    with pytest.raises(InvalidInput):
        is_degenerate(P("ABC/CAB"))


def test_good_examples():
    assert is_good(P("ABCD/DCBA"))
    with pytest.raises(InvalidInput):
        is_good(P("ABC/CBA"))


def test_degenerate_excludes_good():
    for d in range(4, 7):
        for p in irreducible_permutations(d):
            if is_standard(p):
                assert not (is_degenerate(p) and is_good(p))


def test_forget_outer():
    assert forget_outer(P("ABCD/DCBA")) == P("BC/CB")


def test_simple_reduction_examples():
    assert simple_reduction(P("ABC/CBA"), "B") == P("AC/CA")
    assert simple_reduction(P("ABCD/DABC"), "A") == P("BCD/DBC")
    # the prefix sets {B} and {C} differ, so deleting A is a reduction
    assert simple_reduction(P("ABC/CBA"), "A") == P("BC/CB")
    with pytest.raises(NotAReduction):
        simple_reduction(P("ABCD/DACB"), "D")
    with pytest.raises(InvalidInput):
        simple_reduction(P("ABC/CBA"), "Z")


def test_simple_extension_example():
    assert simple_extension(P("AC/CA"), "B", "C", "C") == P("ABC/BCA")
    with pytest.raises(InvalidInput):
        simple_extension(P("AC/CA"), "B", "A", "C")
    with pytest.raises(InvalidInput):
        simple_extension(P("AC/CA"), "A", "C", "C")


def test_find_reducing_letter_examples():
    assert find_reducing_letter(P("ABC/CBA")) == "B"
    assert find_reducing_letter(P("ABCD/DABC")) == "A"


def test_irreducible_count_matches_oracle():
    from itertools import permutations

    for d in range(2, 7):
        letters = "ABCDEF"[:d]
        oracle = sum(prefix_irreducible(letters, "".join(b)) for b in permutations(letters))
        assert oracle == sum(1 for _ in irreducible_permutations(d))


@given(irreducible_perms())
def test_irreducible_agrees_with_oracle(p):
    assert is_irreducible(p) == prefix_irreducible("".join(p.top), "".join(p.bottom))


@given(irreducible_perms(min_d=3))
def test_reducing_letter_gives_extension(p):
    b = find_reducing_letter(p)
    q = simple_reduction(p, b)
    c, d = extension_datum(p, b)
    assert simple_extension(q, b, c, d) == p


@given(irreducible_perms(min_d=2, max_d=5))
def test_extensions_are_irreducible_and_round_trip(q):
    for c in q.alphabet:
        for d in q.alphabet:
            if (c, d) == (q.top[0], q.bottom[0]):
                continue
            p = simple_extension(q, "Z", c, d)
            assert is_irreducible(p)
            if p.pos0("Z") < p.d - 1 and p.pos1("Z") < p.d - 1:
                assert simple_reduction(p, "Z") == q
