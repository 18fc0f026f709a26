import dataclasses
import math

import numpy as np
import pytest

from sweepout.certificates import failures
from sweepout.constants import assemble_constants, schedule_parameters
from sweepout.errors import InvalidArgument, ResolutionError
from sweepout.pipeline import (
    assemble_upper_bound,
    check_resolution,
    constant_chain,
    spectrum_curve,
    thin_thick_split,
    worker_count,
)
from sweepout.surface import flat_torus, measure, torus_uv
from sweepout.thin import piece_labels


@pytest.fixture(scope="module")
def pinched():
    """Flat torus whose central disk is conformally shrunk, so its g0-balls
    hold much more g-area than elsewhere."""
    s = flat_torus(60)
    uv = torus_uv(60)
    d = np.hypot(uv[:, 0] - 0.5, uv[:, 1] - 0.5)
    return s.with_phi(np.where(d < 0.2, -2.0 * (1 - d / 0.2) ** 2, 0.0))


@pytest.fixture(scope="module")
def pinched_bundle(pinched):
    return assemble_constants(mode="empirical", surface=pinched)


@pytest.fixture(scope="module")
def pinched_report(pinched, pinched_bundle):
    return assemble_upper_bound(pinched, 100, pinched_bundle)


def test_split_finds_heavy_ball(pinched, pinched_bundle):
    sched = schedule_parameters(1.0, 100, pinched_bundle, measure(pinched.whole(), "g0"))
    split = thin_thick_split(pinched, 100, pinched_bundle, sched)
    assert split.m >= 1
    assert not failures(split.certificates)
    for dom, p in split.thick_domains:
        assert measure(dom) >= sched.alpha_k
    assert len(split.thin_remainder) + sum(len(d) for d, _ in split.thick_domains) == pinched.n_faces


def test_report_adds_up(pinched_report, pinched):
    rep = pinched_report
    assert rep.split.m >= 1
    assert rep.total == pytest.approx(sum(rep.addends.values()), rel=1e-15)
    assert rep.addends["k_max_width"] == pytest.approx(100 * max(rep.widths))
    assert (piece_labels(pinched, rep.pieces) >= 0).all()
    assert len(rep.pieces) == len(rep.piece_kind)
    assert not failures(rep.certificates), [c.name for c in failures(rep.certificates)]


def test_theorem_value(pinched_report, pinched_bundle):
    rep = pinched_report
    expected = pinched_bundle.C3 * math.sqrt(rep.area_g) * max(10.0, math.sqrt(rep.area_g0))
    assert rep.theorem_value == pytest.approx(expected)


def test_threads_give_same_report(pinched, pinched_bundle, pinched_report, monkeypatch):
    monkeypatch.setenv("SWEEPOUT_THREADS", "4")
    again = assemble_upper_bound(pinched, 100, pinched_bundle)
    assert again.total == pinched_report.total
    assert [len(p) for p in again.pieces] == [len(p) for p in pinched_report.pieces]


def test_worker_count(monkeypatch):
    monkeypatch.setenv("SWEEPOUT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SWEEPOUT_THREADS", "-1")
    with pytest.raises(InvalidArgument):
        worker_count()
    monkeypatch.setenv("SWEEPOUT_THREADS", "many")
    with pytest.raises(InvalidArgument):
        worker_count()


def test_resolution_error(torus, paper2):
    with pytest.raises(ResolutionError):
        check_resolution(torus, torus.max_edge_length_g0)
    with pytest.raises(ResolutionError):
        assemble_upper_bound(torus, 10, paper2)


def test_assemble_rejects_bad_k(torus, paper2):
    with pytest.raises(InvalidArgument):
        assemble_upper_bound(torus, 0, paper2)


def test_curve_substitutes_below_cutoff(sphere):
    bundle = assemble_constants(mode="empirical", surface=sphere, n_centers=4, n_radii=4)
    bundle = dataclasses.replace(bundle, covering=lambda r: 1)
    curve = spectrum_curve(sphere, [2, 10], bundle)
    assert curve.k_bar == math.floor(measure(sphere.whole()) / 2) + 1
    assert curve.rows[0].substituted and not curve.rows[1].substituted
    assert curve.rows[0].total == curve.reports[curve.k_bar].total


def test_curve_input_checks(torus, paper2):
    with pytest.raises(InvalidArgument):
        spectrum_curve(torus, [], paper2)
    with pytest.raises(InvalidArgument):
        spectrum_curve(torus, [10, 10], paper2)


@pytest.mark.parametrize("n", [2, 3])
def test_constant_chain_hyperbolic(n):
    assert not failures(constant_chain(assemble_constants(n=n)))


def test_constant_chain_detects_tampering(paper2):
    bad = dataclasses.replace(paper2, C3=paper2.C3 * (1 + 1e-6))
    names = [c.name for c in failures(constant_chain(bad))]
    assert names == ["C3 = 4 C2 + 13 C0 C(1) C4"]
