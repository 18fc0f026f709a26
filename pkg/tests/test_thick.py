import math

import pytest

from sweepout.certificates import failures
from sweepout.errors import InvalidArgument, NoCutError, PreconditionError
from sweepout.surface import boundary_measure, geodesic_ball, measure
from sweepout.thick import decompose_thick, isoperimetric_cut, tree_nested
from sweepout.trees import validate_tree


def test_torus_cut_is_two_loops(torus):
    cut = isoperimetric_cut(torus, torus.whole())
    # the cheapest balanced cut of the flat unit torus is two parallel loops
    assert cut.sigma_length_g == pytest.approx(2.0, rel=0.05)
    assert cut.balance >= 0.4
    U0, U1 = cut.sides
    assert len(U0 & U1) == 0 and len(U0 | U1) == torus.n_faces
    assert cut.sigma_length_g == pytest.approx(boundary_measure(U0), rel=1e-12)


def test_sphere_cut_is_near_equator(sphere):
    cut = isoperimetric_cut(sphere, sphere.whole())
    assert 2 * math.pi / 1.2 < cut.sigma_length_g < 2 * math.pi * 1.2
    # equator over the square root of the whole area: 2 pi / sqrt(4 pi)
    assert cut.sigma_length_g / math.sqrt(measure(sphere.whole())) == pytest.approx(math.sqrt(math.pi), rel=0.2)
    assert cut.balance > 0.4


def test_disconnected_domain_splits_on_components(torus):
    a = geodesic_ball(torus, 0, 0.1)
    b = geodesic_ball(torus, 820, 0.1)
    cut = isoperimetric_cut(torus, a | b)
    assert cut.family == "components" and cut.sigma_length_g == 0.0
    assert {len(s) for s in cut.sides} == {len(a), len(b)}


def test_tiny_domain_has_no_cut(torus):
    with pytest.raises(NoCutError):
        isoperimetric_cut(torus, torus.domain([0]))


def test_small_k_is_single_leaf(torus, paper2):
    dec = decompose_thick(torus, torus.whole(), 2500, paper2)
    assert len(dec.leaves) == 1 and dec.cuts == []
    assert not failures(dec.certificates)


@pytest.fixture(scope="module")
def thick_run(torus, paper2):
    return decompose_thick(torus, torus.whole(), 10_000, paper2)


def test_thick_certificates(thick_run):
    assert not failures(thick_run.certificates), [c.name for c in failures(thick_run.certificates)]


def test_thick_leaves(thick_run, torus):
    dec = thick_run
    assert all(measure(leaf) < 0.25 for leaf in dec.leaves)
    assert sum(measure(leaf) for leaf in dec.leaves) == pytest.approx(1.0, rel=1e-12)
    assert validate_tree(dec.tree.tree.nodes)[0]
    assert all(c.balance >= 1 / 625 for c in dec.cuts)


def test_thick_tree_dict(thick_run):
    t = tree_nested(thick_run)
    assert t["id"] == "root" and t["k"] == 10_000
    assert sum(c["k"] for c in t["children"]) == pytest.approx(10_000)


def test_thick_input_checks(torus, sphere, paper2):
    with pytest.raises(InvalidArgument):
        decompose_thick(torus, torus.whole(), 0, paper2)
    with pytest.raises(InvalidArgument):
        decompose_thick(torus, torus.domain(), 10, paper2)
    with pytest.raises(PreconditionError):
        decompose_thick(sphere, sphere.whole(), 10, paper2)
