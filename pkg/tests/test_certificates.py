import math

import pytest

from sweepout.certificates import Certificate, all_pass, check, failures
from sweepout.width import width_one_bound, width_one_bound_thick


@pytest.mark.parametrize(
    "lhs,rhs,rel,ok",
    [
        (1.0, 2.0, "<=", True),
        (2.0, 2.0, "<=", True),
        (2.0, 2.0, "<", False),
        (3.0, 2.0, ">=", True),
        (2.0, 2.0, ">", False),
        (1.0 + 1e-14, 1.0, "==", True),
        (1.1, 1.0, "==", False),
        (2.0 + 1e-13, 2.0, "<=", True),
    ],
)
def test_relations(lhs, rhs, rel, ok):
    assert check("c", lhs, rhs, rel).passed is ok


def test_slack_and_dict():
    c = check("area", 1.0, 4.0, constants={"K": 1.0}, note="x")
    assert c.slack == 0.25
    d = c.as_dict()
    assert d["pass"] is True and d["constants"] == {"K": 1.0} and d["note"] == "x"
    assert check("z", 0.0, 0.0).slack == 0.0
    assert check("z", 1.0, 0.0).slack == math.inf


def test_unknown_relation():
    with pytest.raises(ValueError):
        Certificate("bad", 1, 2, "!=")


def test_failures():
    certs = [check("a", 1, 2), check("b", 3, 2)]
    assert not all_pass(certs)
    assert [c.name for c in failures(certs)] == ["b"]


def test_width_bounds():
    assert width_one_bound(4.0, 9.0, 1.0) == pytest.approx(2.0 * (1 + 3.0))
    assert width_one_bound(8.0, 8.0, 2.0, n=3) == pytest.approx(2.0 * 4.0 * 3.0)
    assert width_one_bound_thick(4.0, 3.0) == pytest.approx(6.0)
