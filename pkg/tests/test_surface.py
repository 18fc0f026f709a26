import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra

from sweepout.errors import InvalidArgument, SurfaceError
from sweepout.surface import (
    Surface,
    approximate_diameter,
    ball_areas,
    boundary_measure,
    curvature_report,
    distances,
    faces_within,
    farthest_point_sample,
    flat_torus,
    generate,
    geodesic_ball,
    incident_faces,
    load_files,
    load_surface,
    measure,
    neighborhood,
    torus_uv,
    write_off,
)


def csgraph_distances(surface, src, metric="g0"):
    indptr, indices, weights = surface.graph(metric)
    n = surface.n_vertices
    return sp_dijkstra(csr_matrix((weights, indices, indptr), shape=(n, n)), indices=src)


def test_generated_topology(torus, sphere, genus2):
    assert torus.euler_characteristic == 0
    assert sphere.euler_characteristic == 2
    assert genus2.euler_characteristic == -2
    assert torus.is_closed and sphere.is_closed and genus2.is_closed


def test_torus_area_is_one(torus):
    assert measure(torus.whole()) == pytest.approx(1.0, rel=1e-12)
    assert measure(torus.whole(), "g0") == pytest.approx(1.0, rel=1e-12)


def test_sphere_area(sphere):
    assert measure(sphere.whole()) == pytest.approx(4 * math.pi, rel=0.02)


def test_gauss_bonnet(torus, sphere, genus2):
    for s in (torus, sphere, genus2):
        rep = curvature_report(s)
        assert rep.total_curvature == pytest.approx(2 * math.pi * s.euler_characteristic, abs=1e-9)
    assert curvature_report(torus).lower_bound_holds


def test_dijkstra_matches_csgraph(torus):
    for src in (0, 17, 333):
        assert np.allclose(distances(torus, [src]), csgraph_distances(torus, src), rtol=0, atol=1e-13)


def test_distance_limit(torus):
    d = distances(torus, [0], limit=0.1)
    full = distances(torus, [0])
    inside = full <= 0.1
    assert np.array_equal(d[inside], full[inside])
    assert np.all(np.isinf(d[~inside]) | (d[~inside] <= 0.1 + 1e-12))


def test_torus_distance_distortion(torus):
    uv = torus_uv(40)
    d = distances(torus, [0], "g")
    diff = uv - uv[0]
    diff -= np.round(diff)
    euclid = np.hypot(diff[:, 0], diff[:, 1])
    assert np.all(d >= euclid - 1e-12)
    h = torus.max_edge_length_g0
    assert np.all(d <= (1 + torus.distortion) * euclid + h)


def test_incident_and_within(torus):
    d = distances(torus, [5])
    mask = faces_within(torus, d, 0.08)
    brute = (d[torus.faces] <= 0.08).all(axis=1)
    assert np.array_equal(mask, brute)
    inc = incident_faces(torus, [5])
    assert len(inc) == 6
    assert len(incident_faces(torus, np.array([], dtype=np.int64))) == 0


def test_ball_areas_brute_force(torus):
    centers = np.array([0, 40, 700])
    areas = ball_areas(torus, 0.1, centers)
    for c, a in zip(centers, areas):
        assert a == pytest.approx(measure(geodesic_ball(torus, int(c), 0.1)), rel=1e-12)
    assert 0.6 * math.pi * 0.01 < areas[0] < 1.1 * math.pi * 0.01


def test_neighborhood_contains_domain(torus):
    ball = geodesic_ball(torus, 0, 0.05)
    nb = neighborhood(torus, ball, 0.05)
    assert ball.issubset(nb)
    assert measure(nb) > measure(ball)
    with pytest.raises(InvalidArgument):
        neighborhood(torus, torus.domain(), 0.1)


def test_domain_algebra(torus):
    a = torus.domain(np.arange(10))
    b = torus.domain(np.arange(5, 15))
    assert len(a | b) == 15 and len(a & b) == 5 and len(a - b) == 5
    assert (a & b).issubset(a)
    assert torus.domain().is_empty()
    with pytest.raises(InvalidArgument):
        a | flat_torus(5).domain()


def test_boundary_of_ball(torus):
    ball = geodesic_ball(torus, 0, 0.15)
    length = boundary_measure(ball)
    assert 2 * math.pi * 0.15 * 0.9 < length < 2 * math.pi * 0.15 * 1.3
    assert boundary_measure(torus.whole()) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.floats(-2.0, 2.0))
def test_constant_phi_scales_metric(c):
    s = flat_torus(8)
    t = s.with_phi(np.full(s.n_vertices, c))
    assert np.allclose(t.edge_len_g0, math.exp(c) * s.edge_len_g, rtol=1e-12)
    assert np.allclose(t.face_area_g0, math.exp(2 * c) * s.face_area_g, rtol=1e-12)


def test_fps_and_diameter(torus):
    pts = farthest_point_sample(torus, 4)
    assert len(set(pts.tolist())) == 4 and pts[0] == 0
    assert np.array_equal(pts, farthest_point_sample(torus, 4))
    diam, a, b = approximate_diameter(torus)
    # flat unit torus: farthest point sits at (1/2, 1/2), distance sqrt(2)/2
    assert diam == pytest.approx(math.sqrt(2) / 2, rel=0.05)


def test_off_roundtrip(tmp_path, sphere):
    path = tmp_path / "s.off"
    write_off(path, sphere.positions, sphere.faces)
    phi = tmp_path / "phi.txt"
    phi.write_text("\n".join("0.5" for _ in range(sphere.n_vertices)))
    s = load_files(path, phi)
    assert np.allclose(s.edge_len_g, sphere.edge_len_g)
    assert np.allclose(s.phi, 0.5)


def test_invalid_surfaces(tmp_path):
    with pytest.raises(SurfaceError):
        Surface([[0, 1, 2]], [[1.0, 1.0, 3.0]], np.zeros(3))
    with pytest.raises(SurfaceError):
        Surface([[0, 0, 1]], [[1.0, 1.0, 1.0]], np.zeros(2))
    with pytest.raises(SurfaceError):
        Surface([[0, 1, 5]], [[1.0, 1.0, 1.0]], np.zeros(3))
    with pytest.raises(SurfaceError):
        load_surface(np.eye(3), [[0, 1, 2]], phi=[0.0, 0.0])
    faces = [[0, 1, 2], [0, 1, 3], [0, 1, 4]]
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]], float)
    with pytest.raises(SurfaceError, match="non-manifold"):
        load_surface(verts, faces)
    bad = tmp_path / "bad.off"
    bad.write_text("PLY\n")
    with pytest.raises(SurfaceError):
        load_files(bad)


def test_generate_rejects():
    with pytest.raises(InvalidArgument):
        generate("cube:3")
    with pytest.raises(InvalidArgument):
        generate("torus:x")
