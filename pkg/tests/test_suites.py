import pytest

from zorich.suites import SUITES, SuiteResult, run_suite

SMALL = {"conjugacy": {"n_paths": 50, "max_len": 20}, "determinant": {"n_paths": 50, "max_len": 20},
         "intertwining": {"n_paths": 50}, "suspension": {"steps": 500}}


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes_small(name):
    res = run_suite(name, d_max=4, **SMALL.get(name, {}))
    assert res.checks > 0
    assert res.passed, res.failures


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")


def test_result_records_failures():
    r = SuiteResult("x", {})
    assert not r.passed
    r.check(True, "fine")
    assert r.passed
    r.check(False, lambda: "broken")
    assert not r.passed and r.failures == ["broken"]
    assert r.to_json()["checks"] == 2


def test_suite_json_is_deterministic():
    a = run_suite("conjugacy", d_max=4, seed=3, n_paths=20).to_json()
    b = run_suite("conjugacy", d_max=4, seed=3, n_paths=20).to_json()
    assert a == b
