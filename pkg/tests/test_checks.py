import pytest

from gpwz import checks


def test_all_suites_pass():
    report = checks.run_suite("all")
    assert set(report) == set(checks.SUITES)
    failed = [(s, g.name, g.value) for s, gates in report.items() for g in gates if not g.passed]
    assert failed == []


def test_unknown_suite():
    with pytest.raises(KeyError):
        checks.run_suite("nope")


def test_gate_record():
    g = checks.Gate.at_most("x", 2.0, 1.0)
    assert not g.passed and g.as_dict() == {"name": "x", "value": 2.0, "threshold": 1.0, "passed": False}
