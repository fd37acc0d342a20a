from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import irreducible_perms
from zorich import exact
from zorich.errors import InvalidInput
from zorich.perm import Permutation
from zorich.rauzy import Path, enumerate_class, make_arrow, theta, theta_path
from zorich.symplectic import (
    SubspaceBasis,
    darboux_basis,
    genus,
    h_basis,
    is_isotropic,
    omega,
    restricted_matrix,
    standard_j,
    symplectic_orthogonal,
    verify_conjugacy,
)

P = Permutation.parse


def test_omega_two_letters():
    om = omega(P("AB/BA"))
    # columns are images of e_A, e_B
    assert om[:, 0].tolist() == [0, -1]
    assert om[:, 1].tolist() == [1, 0]


@pytest.mark.parametrize("text, g", [("AB/BA", 1), ("ABCD/DCBA", 2), ("ABCD/DABC", 1), ("ABC/CBA", 1)])
def test_genus_examples(text, g):
    assert genus(P(text)) == g


def test_rank_examples():
    assert exact.exact_rank(omega(P("ABCD/DCBA"))) == 4
    assert exact.exact_rank(omega(P("ABCD/DABC"))) == 2


def test_h_basis_two_letters():
    s = h_basis(P("AB/BA"))
    assert s.dim == 2
    assert s.gram == ((0, 1), (-1, 0))


def test_corrupted_theta_fails_conjugacy():
    a = make_arrow(P("ABCD/DCBA"), "top")
    assert verify_conjugacy(a)
    bad = theta(a)
    bad[0, 1] += 1
    assert not verify_conjugacy(a, bad)


def test_isotropy_examples():
    s = h_basis(P("AB/BA"))
    assert is_isotropic(SubspaceBasis((tuple(s.basis.vectors[0]),)), s)
    assert not is_isotropic(s.basis, s)


def test_orthogonal_of_everything_is_zero():
    s = h_basis(P("ABCD/DCBA"))
    assert symplectic_orthogonal(s.basis, s).dim == 0


def test_coords_outside_h():
    s = h_basis(P("ABCD/DABC"))
    outside = next(v for v in np.identity(4, dtype=int).tolist() if not s.contains(v))
    with pytest.raises(InvalidInput):
        s.coords(outside)


def test_dependent_basis_rejected():
    with pytest.raises(InvalidInput):
        SubspaceBasis(((1, 0), (2, 0)))


def test_isotropic_dimension_bound():
    s = h_basis(P("ABCD/DCBA"))
    vecs = [s.ambient(c) for c in ([1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0])]
    assert not is_isotropic(SubspaceBasis(tuple(tuple(v) for v in vecs)), s)


@given(irreducible_perms(max_d=6))
def test_omega_antisymmetric_even_rank(p):
    om = omega(p)
    assert np.array_equal(om.T, -om)
    assert set(om.flat) <= {-1, 0, 1}
    assert exact.exact_rank(om) % 2 == 0


@given(irreducible_perms(max_d=6))
def test_gram_nondegenerate(p):
    s = h_basis(p)
    assert exact.exact_rank(s.gram) == s.dim == 2 * genus(p)


@given(irreducible_perms(max_d=6))
def test_darboux_basis_gives_standard_form(p):
    s = h_basis(p)
    basis = darboux_basis(s)
    gram = [[s.form(u, v) for v in basis] for u in basis]
    assert gram == [[Fraction(x) for x in row] for row in standard_j(s.genus)]


@given(irreducible_perms(max_d=5), st.lists(st.sampled_from(["top", "bottom"]), max_size=30))
def test_conjugacy_on_paths(p, kinds):
    path = Path.from_kinds(p, kinds)
    assert verify_conjugacy(path)


@given(irreducible_perms(max_d=6))
def test_genus_constant_on_class(p):
    assert {genus(v) for v in enumerate_class(p).vertices} == {genus(p)}


@given(irreducible_perms(min_d=3, max_d=6), st.data())
def test_orthogonal_dimension(p, data):
    s = h_basis(p)
    k = data.draw(st.integers(1, s.dim))
    coeffs = data.draw(st.lists(st.lists(st.integers(-3, 3), min_size=s.dim, max_size=s.dim),
                                min_size=k, max_size=k))
    if exact.exact_rank(coeffs) < k:
        return
    f = SubspaceBasis(tuple(tuple(s.ambient(c)) for c in coeffs))
    orth = symplectic_orthogonal(f, s)
    assert orth.dim == s.dim - k
    if is_isotropic(f, s):
        both = exact.columns_to_matrix(list(orth.vectors) + list(f.vectors))
        assert exact.exact_rank(both) == orth.dim


@given(irreducible_perms(max_d=5), st.lists(st.sampled_from(["top", "bottom"]), max_size=12))
def test_restricted_loop_matrix_is_symplectic(p, kinds):
    c = enumerate_class(p)
    walk = Path.from_kinds(p, kinds)
    loop = walk + c.shortest_path(walk.end, p)
    s = h_basis(p)
    m = restricted_matrix(theta_path(loop), s)
    j = standard_j(s.genus)
    assert exact.matmul(exact.matmul(exact.transpose(m), j), m) == [[Fraction(x) for x in r] for r in j]
