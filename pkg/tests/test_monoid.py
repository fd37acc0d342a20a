import numpy as np
import pytest

from zorich import exact
from zorich.errors import InvalidInput, NotFound
from zorich.monoid import (
    WitnessResult,
    find_parabolic_witness,
    find_pinching_witness,
    find_strong_pinching_witness,
    find_twisting_witness,
    gamma0_loop,
    is_pinching,
    isotropy_defect,
    parabolic_certificate,
    parabolic_setup,
    pinching_certificate,
    pinching_constant_from_strong,
    random_twisting_instance,
    reverify,
    sigma_growth,
    singular_values_exact,
    transversality_ranks,
    walk_length,
)
from zorich.perm import Permutation
from zorich.rauzy import enumerate_class, theta_path
from zorich.symplectic import SubspaceBasis, h_basis, restricted_matrix

P = Permutation.parse
SYM4 = P("ABCD/DCBA")


@pytest.fixture(scope="module")
def sym4():
    return enumerate_class(SYM4)


def test_walk_length_schedule():
    assert [walk_length(t) for t in (0, 7, 8, 16, 10**6)] == [4, 4, 8, 16, 256]


def test_gamma0_matrix():
    p = P("ABCD/DBCA")
    m = theta_path(gamma0_loop(p))
    assert m.tolist() == [[1, 0, 0, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]]
    assert theta_path(gamma0_loop(P("AB/BA"))).tolist() == [[1, 1], [0, 1]]
    with pytest.raises(InvalidInput):
        gamma0_loop(P("ABCD/BADC"))


def test_pinching_certificate_diagonal():
    cert = pinching_certificate([[6, 0, 0], [0, 2, 0], [0, 0, 1]])
    assert cert["gaps"] == pytest.approx([3, 2])
    assert is_pinching([[6, 0, 0], [0, 2, 0], [0, 0, 1]], 1.5)
    assert not is_pinching([[6, 0, 0], [0, 2, 0], [0, 0, 1]], 2.5)


def test_exact_singular_values_match_numpy():
    rng = np.random.default_rng(0)
    m = rng.integers(-9, 10, size=(4, 4))
    got = [float(s) for s in singular_values_exact(m.tolist())]
    assert got == pytest.approx(np.linalg.svd(m.astype(float), compute_uv=False), rel=1e-12)


def test_two_interval_pinching():
    w = find_pinching_witness(P("AB/BA"), c=10, budget=200)
    assert w.certificate["gaps"][0] > 10
    assert reverify(w)


def test_pinching_witness(sym4):
    w = find_pinching_witness(sym4, c=1e3, budget=500, seed=0)
    assert w.path.is_loop() and w.path.start == SYM4
    assert all(g > 1e3 for g in w.certificate["gaps"])
    assert reverify(w)
    js = w.to_json()
    assert js["kind"] == "pinching" and js["trials"] == w.trials


def test_strong_pinching_implies_pinching(sym4):
    c = 2.0
    w = find_strong_pinching_witness(sym4, c=c, budget=500, seed=0)
    assert reverify(w)
    m_h = restricted_matrix(w.matrix, h_basis(SYM4))
    gaps = pinching_certificate(m_h)["gaps"]
    assert min(gaps) > pinching_constant_from_strong(c)


def test_pinching_constant_from_strong():
    assert pinching_constant_from_strong(2.0) == pytest.approx(np.exp(2.0))
    assert pinching_constant_from_strong(5.0) == pytest.approx(np.exp(10.0))
    with pytest.raises(InvalidInput):
        pinching_constant_from_strong(1.0)


def test_isotropy_of_top_image(sym4):
    w = find_pinching_witness(sym4, c=1e6, budget=1000, seed=0)
    m_h = restricted_matrix(w.matrix, h_basis(SYM4))
    assert min(pinching_certificate(m_h)["gaps"]) > 1e6
    assert isotropy_defect(m_h, 2) <= 1e-6


def test_pinching_not_found_reports_budget():
    # the identity is the only loop matrix of length 0; tiny budgets still obey NotFound
    with pytest.raises(NotFound) as err:
        find_pinching_witness(SYM4, c=1e300, budget=3)
    assert err.value.trials == 3


def test_twisting_empty_loop():
    f = SubspaceBasis(((1, 0),))
    w = find_twisting_witness(P("AB/BA"), None, f, [SubspaceBasis(((0, 1),))], budget=10)
    assert w.trials == 1 and len(w.path) == 0


def test_twisting_same_line():
    f = SubspaceBasis(((1, 1),))
    w = find_twisting_witness(P("AB/BA"), None, f, [f], budget=100)
    assert w.trials > 1
    assert transversality_ranks(w.matrix, f, [f]) == [2]
    assert reverify(w, obstacles=[f], f=f)


def test_twisting_dimension_mismatch():
    f = SubspaceBasis(((1, 0, 0, 0),))
    with pytest.raises(InvalidInput):
        find_twisting_witness(SYM4, None, f, [f], budget=10)


@pytest.mark.parametrize("restricted", [False, True])
def test_random_twisting_instances(sym4, restricted):
    rng = np.random.default_rng(11)
    for _ in range(3):
        f, obs = random_twisting_instance(SYM4, rng, 2, 2, restricted)
        ident = np.identity(4, dtype=object)
        assert any(r < (4) for r in transversality_ranks(ident, f, obs))
        w = find_twisting_witness(sym4, None, f, obs, budget=500, restricted=restricted)
        assert reverify(w, obstacles=obs, f=f)


def test_parabolic_setup():
    s = parabolic_setup(SYM4)
    assert s.base.top[0] == s.a and s.base.bottom[0] == s.e
    assert s.reduced.d == 3
    with pytest.raises(InvalidInput):
        parabolic_setup(P("ABC/CBA"))
    with pytest.raises(InvalidInput):
        parabolic_setup(P("AB/BA"))


def test_parabolic_witness(sym4):
    w = find_parabolic_witness(sym4, seed=0, budget=200)
    cert = w.certificate
    assert cert["rank_b_minus_i"] == 3
    assert cert["multiplicity_of_one"] % 2 == 0
    assert cert["positive_exponents"] == 1
    assert 0.8 <= cert["sigma_growth"]["slope"] <= 1.2
    assert reverify(w)
    # the eigenvalue 1 has a single eigenvector
    rows = [[int(v) for v in r] for r in w.matrix.tolist()]
    ker = exact.exact_kernel([[rows[i][j] - (i == j) for j in range(4)] for i in range(4)])
    assert len(ker) == 1


def test_parabolic_deterministic_across_workers(sym4):
    a = find_parabolic_witness(sym4, seed=1, budget=200, workers=1)
    b = find_parabolic_witness(sym4, seed=1, budget=200, workers=2)
    assert a.to_json() == b.to_json()


def test_sigma_growth_of_unipotent():
    b = np.array([[1, 1], [0, 1]], dtype=object)
    assert sigma_growth(b, 1)["slope"] == pytest.approx(1.0, abs=0.01)
    cert = parabolic_certificate(b, 1)
    assert cert["rank_b_minus_i"] == 1 and cert["multiplicity_of_one"] == 2


def test_witness_json_roundtrip_fields(sym4):
    w = find_pinching_witness(sym4, c=10, budget=200)
    assert isinstance(w, WitnessResult)
    js = w.to_json()
    assert set(js) == {"class", "kind", "path", "matrix", "certificate", "seed", "trials", "params"}
    assert all(isinstance(v, str) for row in js["matrix"] for v in row)
