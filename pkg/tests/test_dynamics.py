from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import irreducible_perms
from zorich import exact
from zorich.dynamics import (
    IETState,
    SuspensionState,
    canonical_tau,
    cone_contains,
    iet_apply,
    in_arrow_cone,
    invariant_lines,
    invertible_step,
    orbit_trace,
    rauzy_step,
    sample_lengths,
    sample_tau,
    translation_vector,
    zorich_step,
)
from zorich.errors import InvalidInput, KeaneViolation, RunCapExceeded
from zorich.perm import Permutation
from zorich.rauzy import Path, theta, theta_path
from zorich.symplectic import h_basis

P = Permutation.parse
AB = P("AB/BA")

EXACT_LENGTHS = st.integers(2, 6).flatmap(
    lambda d: st.lists(st.integers(1, 10**12), min_size=d, max_size=d))


def test_translation_vector_example():
    assert translation_vector(IETState((2, 1), AB)) == (1, -2)


def test_iet_apply_example():
    s = IETState((2, 1), AB)
    assert iet_apply(s, 0) == 1
    assert iet_apply(s, 2) == 0
    with pytest.raises(InvalidInput):
        iet_apply(s, 3)


def test_iet_is_a_rearrangement():
    s = IETState((Fraction(3), Fraction(5), Fraction(2), Fraction(7)), P("ABCD/DCBA"))
    images = sorted(iet_apply(s, t) for t in range(17))
    assert images == list(range(17))


def test_rauzy_step_example():
    s, a = rauzy_step(IETState((2, 1), AB))
    assert s.lengths == (1, 1)
    assert (a.kind, a.winner) == ("bottom", "A")
    with pytest.raises(KeaneViolation):
        rauzy_step(s)


def test_zorich_step_examples():
    s, rec = zorich_step(IETState((5, 2), AB))
    assert rec.m == 2 and s.lengths == (1, 2)
    # columns: A -> (1, 2), B -> (0, 1)
    assert rec.matrix.tolist() == [[1, 0], [2, 1]]
    s, rec = zorich_step(IETState((3, 2), AB))
    assert rec.m == 1 and s.lengths == (1, 2)


def test_zorich_run_cap():
    with pytest.raises(RunCapExceeded):
        zorich_step(IETState((2 * 10**9 + 1, 2), AB), run_cap=1000)


def test_zorich_long_run_is_closed_form():
    s, rec = zorich_step(IETState((2 * 10**30 + 1, 2), AB), run_cap=10**31)
    assert rec.m == 10**30 and s.lengths == (1, 2)
    assert rec.matrix.tolist() == [[1, 0], [10**30, 1]]


def test_state_validation():
    with pytest.raises(InvalidInput):
        IETState((1, 0), AB)
    with pytest.raises(InvalidInput):
        IETState((1, 0.5), AB)
    with pytest.raises(InvalidInput):
        IETState((1, 1, 1), P("ABC/ACB"))


def test_cone_examples():
    assert cone_contains(AB, (1, -1))
    assert not cone_contains(AB, (1, 1))
    assert cone_contains(AB, (5, -5))


def test_invariant_lines_two_letters():
    ss = SuspensionState(IETState((Fraction(2), Fraction(1)), AB), (1, -1))
    uu, s_s, c = invariant_lines(ss)
    assert uu.dim == 1 and s_s.dim == 1 and c.dim == 0


def test_orbit_trace_records():
    p = P("ABCD/DCBA")
    lam = sample_lengths(4, np.random.default_rng(0), exact_bits=None)
    recs = list(orbit_trace(IETState(lam, p), 5))
    assert len(recs) == 5
    assert all(r["m"] >= 1 for r in recs)


@given(irreducible_perms(max_d=6), st.integers(0, 2**32))
def test_translation_orthogonal_to_lengths(p, seed):
    lam = sample_lengths(p.d, np.random.default_rng(seed), exact_bits=64)
    delta = translation_vector(IETState(lam, p))
    assert sum(a * b for a, b in zip(lam, delta)) == 0
    assert any(delta)


@given(irreducible_perms(max_d=6), st.integers(0, 2**32))
def test_rauzy_transport_identities(p, seed):
    rng = np.random.default_rng(seed)
    s = IETState(sample_lengths(p.d, rng, exact_bits=64), p)
    h = [int(v) for v in rng.integers(-50, 50, size=p.d)]
    for _ in range(20):
        t, a = rauzy_step(s)
        m = theta(a)
        d = p.d
        assert tuple(sum(m[j, i] * t.lengths[j] for j in range(d)) for i in range(d)) == s.lengths
        delta, delta2 = translation_vector(s), translation_vector(t)
        assert tuple(sum(m[i, j] * delta[j] for j in range(d)) for i in range(d)) == delta2
        h2 = [sum(m[i, j] * h[j] for j in range(d)) for i in range(d)]
        assert sum(x * y for x, y in zip(s.lengths, h)) == sum(x * y for x, y in zip(t.lengths, h2))
        s, h = t, h2


@given(irreducible_perms(max_d=5), st.integers(0, 2**32))
def test_zorich_equals_grouped_rauzy(p, seed):
    s = IETState(sample_lengths(p.d, np.random.default_rng(seed), exact_bits=128), p)
    z, rec = zorich_step(s)
    r, arrows = s, []
    for _ in range(rec.m):
        r, a = rauzy_step(r)
        arrows.append(a)
    assert r == z
    assert {a.kind for a in arrows} == {rec.kind}
    assert np.array_equal(theta_path(Path(p, tuple(arrows))), rec.matrix)
    # the next Rauzy step has the other kind
    _, nxt = rauzy_step(z)
    assert nxt.kind != rec.kind


@given(irreducible_perms(max_d=5), st.integers(0, 2**32))
def test_first_return(p, seed):
    rng = np.random.default_rng(seed)
    s = IETState(sample_lengths(p.d, rng, exact_bits=40), p)
    t, _ = rauzy_step(s)
    cut = t.total()
    for _ in range(20):
        x = Fraction(int(rng.integers(0, 2**40)), 2**40) * cut
        y = iet_apply(s, x)
        while y >= cut:
            y = iet_apply(s, y)
        assert y == iet_apply(t, x)


@given(irreducible_perms(max_d=5), st.integers(0, 2**32))
def test_dilation_commutes(p, seed):
    lam = sample_lengths(p.d, np.random.default_rng(seed), exact_bits=40)
    s = IETState(tuple(Fraction(v) for v in lam), p)
    a, _ = rauzy_step(s)
    b, _ = rauzy_step(s.normalized())
    assert a.normalized() == b.normalized()


@given(irreducible_perms(max_d=5), st.integers(0, 2**32))
def test_invertible_steps_keep_cone(p, seed):
    rng = np.random.default_rng(seed)
    ss = SuspensionState(IETState(sample_lengths(p.d, rng, exact_bits=128), p),
                         sample_tau(p, rng, exact_mode=True))
    for _ in range(30):
        ss = invertible_step(ss)
        assert in_arrow_cone(ss.arrow, ss.tau)
        assert cone_contains(ss.perm, ss.tau)


@given(irreducible_perms(max_d=5), st.integers(0, 2**32))
def test_invariant_lines_equivariant(p, seed):
    rng = np.random.default_rng(seed)
    ss = SuspensionState(IETState(sample_lengths(p.d, rng, exact_bits=64), p),
                         sample_tau(p, rng, exact_mode=True))
    uu, s_s, c = invariant_lines(ss)
    assert c.dim == h_basis(p).dim - 2
    nxt = invertible_step(ss)
    uu2, s_s2, _ = invariant_lines(nxt)
    m = theta(nxt.arrow)
    img = [sum(m[i, j] * uu.vectors[0][j] for j in range(p.d)) for i in range(p.d)]
    assert exact.exact_rank(exact.columns_to_matrix([img, list(uu2.vectors[0])])) == 1
    img = [sum(m[i, j] * s_s.vectors[0][j] for j in range(p.d)) for i in range(p.d)]
    assert exact.exact_rank(exact.columns_to_matrix([img, list(s_s2.vectors[0])])) == 1


@given(irreducible_perms(max_d=6))
def test_canonical_tau_in_cone(p):
    assert cone_contains(p, canonical_tau(p))
