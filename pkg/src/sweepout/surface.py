"""Triangulated surfaces carrying a base metric g and a conformal metric g0.

The base metric is given intrinsically by edge lengths; ``g0 = exp(2 phi) g``
with ``phi`` sampled at vertices. Conformal edge lengths use the midpoint rule
``len0(u, v) = len(u, v) * exp((phi[u] + phi[v]) / 2)`` and conformal face
areas scale by ``exp(2 * mean(phi over the face))``.

Domains are face-granular: a face is either in or out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

from . import _kernels
from .errors import InvalidArgument, SurfaceError

METRICS = ("g", "g0")

DEGENERATE_AREA = 1e-12


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise InvalidArgument(f"unknown metric tag {metric!r}; expected 'g' or 'g0'")


def _heron(a, b, c):
    # Kahan's stable form, sides sorted descending
    s = np.sort(np.stack([a, b, c], axis=-1), axis=-1)[..., ::-1]
    a, b, c = s[..., 0], s[..., 1], s[..., 2]
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.clip(prod, 0.0, None))


def _angle(opposite, s1, s2):
    cos = (s1 * s1 + s2 * s2 - opposite * opposite) / (2.0 * s1 * s2)
    return np.arccos(np.clip(cos, -1.0, 1.0))


class Surface:
    """Immutable triangle mesh with intrinsic edge lengths and a conformal factor.

    Parameters
    ----------
    faces : (F, 3) int array
        Vertex ids per triangle.
    lengths : (F, 3) float array
        g-lengths of the edges ``(f0, f1)``, ``(f1, f2)``, ``(f2, f0)`` of each
        face. Shared edges must be given the same length by both faces.
    phi : (V,) float array
        Log conformal factor per vertex.
    positions : (V, 3) float array, optional
        Display coordinates; only used for export.
    """

    def __init__(self, faces, lengths, phi, positions=None):
        faces = np.asarray(faces, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.float64)
        phi = np.asarray(phi, dtype=np.float64).ravel()
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise SurfaceError("faces must be an (F, 3) array of triangles")
        if lengths.shape != faces.shape:
            raise SurfaceError("lengths must have the same shape as faces")
        n_vertices = phi.shape[0]
        if faces.size and (faces.min() < 0 or faces.max() >= n_vertices):
            raise SurfaceError(
                f"phi count mismatch: {n_vertices} values but faces reference "
                f"vertex {faces.max()}"
            )
        if np.any(faces[:, 0] == faces[:, 1]) or np.any(faces[:, 1] == faces[:, 2]) or np.any(
            faces[:, 0] == faces[:, 2]
        ):
            raise SurfaceError("degenerate triangle: repeated vertex")
        if not np.all(np.isfinite(phi)):
            raise SurfaceError("phi must be finite")
        if positions is not None:
            positions = np.asarray(positions, dtype=np.float64)
            if positions.shape[0] != n_vertices:
                raise SurfaceError("phi count mismatch with vertex positions")

        self.faces = faces
        self.phi = phi
        self.positions = positions
        self.n_vertices = n_vertices
        self.n_faces = faces.shape[0]
        self._build_edges(lengths)
        self._check_triangles()
        for arr in (self.faces, self.phi, self.edges, self.edge_faces, self.face_edges, self.edge_len_g):
            arr.flags.writeable = False

    # construction ---------------------------------------------------------

    def _build_edges(self, lengths):
        f = self.faces
        half = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        half_len = np.concatenate([lengths[:, 0], lengths[:, 1], lengths[:, 2]])
        half_face = np.tile(np.arange(self.n_faces), 3)
        key = np.sort(half, axis=1)
        edges, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        if np.any(counts > 2):
            bad = edges[np.argmax(counts > 2)]
            raise SurfaceError(f"non-manifold edge ({bad[0]}, {bad[1]}) lies in more than two faces")
        order = np.argsort(inverse, kind="stable")
        edge_len = np.empty(len(edges))
        edge_len[inverse[order]] = half_len[order]
        if not np.allclose(edge_len[inverse], half_len, rtol=1e-9, atol=0.0):
            raise SurfaceError("faces disagree on the length of a shared edge")
        if np.any(edge_len <= 0) or not np.all(np.isfinite(edge_len)):
            raise SurfaceError("edge lengths must be positive and finite")
        edge_faces = np.full((len(edges), 2), -1, dtype=np.int64)
        slot = np.zeros(len(edges), dtype=np.int64)
        for h in order:
            e = inverse[h]
            edge_faces[e, slot[e]] = half_face[h]
            slot[e] += 1
        self.edges = edges.astype(np.int64)
        self.edge_faces = edge_faces
        self.face_edges = inverse.reshape(3, self.n_faces).T.copy()
        self.edge_len_g = edge_len

    def _check_triangles(self):
        a, b, c = (self.edge_len_g[self.face_edges[:, i]] for i in range(3))
        if np.any(a >= b + c) or np.any(b >= a + c) or np.any(c >= a + b):
            raise SurfaceError("triangle inequality violated by edge lengths")
        area = _heron(a, b, c)
        if np.any(area < DEGENERATE_AREA):
            raise SurfaceError(f"degenerate triangle {int(np.argmin(area))}: area < {DEGENERATE_AREA}")

    @classmethod
    def from_positions(cls, positions, faces, phi=None):
        positions = np.asarray(positions, dtype=np.float64)
        faces = np.asarray(faces, dtype=np.int64)
        if phi is None:
            phi = np.zeros(len(positions))
        p = positions[faces]
        lengths = np.stack(
            [
                np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
                np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
                np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
            ],
            axis=1,
        )
        return cls(faces, lengths, phi, positions=positions)

    def with_phi(self, phi) -> "Surface":
        """Same triangulation and base metric with a new conformal factor."""
        lengths = self.edge_len_g[self.face_edges]
        return Surface(self.faces, lengths, phi, positions=self.positions)

    # derived geometry -----------------------------------------------------

    @cached_property
    def face_lengths_g(self):
        return self.edge_len_g[self.face_edges]

    @cached_property
    def face_area_g(self):
        fl = self.face_lengths_g
        return _heron(fl[:, 0], fl[:, 1], fl[:, 2])

    @cached_property
    def face_area_g0(self):
        mean_phi = self.phi[self.faces].sum(axis=1) / 3.0
        return self.face_area_g * np.exp(2.0 * mean_phi)

    @cached_property
    def edge_len_g0(self):
        return self.edge_len_g * np.exp(0.5 * (self.phi[self.edges[:, 0]] + self.phi[self.edges[:, 1]]))

    def face_area(self, metric: str):
        _check_metric(metric)
        return self.face_area_g if metric == "g" else self.face_area_g0

    def edge_len(self, metric: str):
        _check_metric(metric)
        return self.edge_len_g if metric == "g" else self.edge_len_g0

    @cached_property
    def corner_angles_g(self):
        """(F, 3) interior angles at f0, f1, f2 in the base metric."""
        fl = self.face_lengths_g
        # side opposite vertex i is the edge (i+1, i+2), stored at column (i+1) % 3
        return np.stack(
            [
                _angle(fl[:, 1], fl[:, 0], fl[:, 2]),
                _angle(fl[:, 2], fl[:, 0], fl[:, 1]),
                _angle(fl[:, 0], fl[:, 1], fl[:, 2]),
            ],
            axis=1,
        )

    @cached_property
    def is_closed(self) -> bool:
        return bool(np.all(self.edge_faces[:, 1] >= 0))

    @cached_property
    def max_edge_length_g0(self) -> float:
        return float(self.edge_len_g0.max()) if len(self.edges) else 0.0

    @cached_property
    def vertex_faces(self):
        """CSR (indptr, face ids) listing faces incident to each vertex."""
        rows = self.faces.ravel()
        cols = np.repeat(np.arange(self.n_faces), 3)
        order = np.argsort(rows, kind="stable")
        indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), cols[order].astype(np.int64)

    @cached_property
    def _chords(self):
        """One-ring chords across interior edges of convex face pairs.

        Returns ``(pairs, length_g, corners, pieces)``: ``corners`` holds the
        flat corner ids (``3 * face + local``) the chord leaves from at each
        end, ``pieces`` the wider of the two sub-angles it cuts each into.
        """
        interior = np.nonzero(self.edge_faces[:, 1] >= 0)[0]
        if len(interior) == 0:
            return np.empty((0, 2), np.int64), np.empty(0), np.empty((0, 2), np.int64), np.empty((0, 2))
        u = self.edges[interior, 0]
        v = self.edges[interior, 1]
        f0 = self.edge_faces[interior, 0]
        f1 = self.edge_faces[interior, 1]
        fa = self.faces[f0]
        fb = self.faces[f1]
        a = fa.sum(axis=1) - u - v
        b = fb.sum(axis=1) - u - v
        lookup = self._edge_lookup
        L = self.edge_len_g[interior]
        ua = self.edge_len_g[lookup(u, a)]
        va = self.edge_len_g[lookup(v, a)]
        ub = self.edge_len_g[lookup(u, b)]
        vb = self.edge_len_g[lookup(v, b)]
        xa = (L * L + ua * ua - va * va) / (2 * L)
        ya = np.sqrt(np.clip(ua * ua - xa * xa, 0.0, None))
        xb = (L * L + ub * ub - vb * vb) / (2 * L)
        yb = np.sqrt(np.clip(ub * ub - xb * xb, 0.0, None))
        chord = np.hypot(xa - xb, ya + yb)
        xcross = xa + (xb - xa) * ya / (ya + yb)
        tol = 1e-9 * L
        keep = (a != b) & (xcross > tol) & (xcross < L - tol)
        keep &= ~self._edge_exists(a, b)
        corner_a = 3 * f0 + np.argmax(fa == a[:, None], axis=1)
        corner_b = 3 * f1 + np.argmax(fb == b[:, None], axis=1)
        pieces = np.stack(
            [
                np.maximum(_angle(ub, ua, chord), _angle(vb, va, chord)),
                np.maximum(_angle(ua, ub, chord), _angle(va, vb, chord)),
            ],
            axis=1,
        )
        pairs = np.sort(np.stack([a, b], axis=1), axis=1)[keep]
        corners = np.stack([corner_a, corner_b], axis=1)[keep]
        return pairs, chord[keep], corners, pieces[keep]

    @cached_property
    def _edge_index(self):
        key = self.edges[:, 0] * self.n_vertices + self.edges[:, 1]
        order = np.argsort(key)
        return key[order], order

    def _edge_lookup(self, x, y):
        lo, hi = np.minimum(x, y), np.maximum(x, y)
        keys, order = self._edge_index
        pos = np.searchsorted(keys, lo * self.n_vertices + hi)
        return order[pos]

    def _edge_exists(self, x, y):
        lo, hi = np.minimum(x, y), np.maximum(x, y)
        keys, _ = self._edge_index
        q = lo * self.n_vertices + hi
        pos = np.clip(np.searchsorted(keys, q), 0, len(keys) - 1)
        return keys[pos] == q

    @cached_property
    def distortion(self) -> float:
        """Graph-distance distortion constant eps_h of the edge+chord graph.

        Taken from the widest angular gap between consecutive path directions
        at any vertex: a straight segment bisecting a gap of width ``theta`` is
        followed by graph paths with stretch at most ``1 / cos(theta / 2)``.
        """
        if self.n_faces == 0:
            return 0.0
        gaps = self.corner_angles_g.ravel().copy()
        _, _, corners, pieces = self._chords
        gaps[corners.ravel()] = pieces.ravel()
        widest = min(float(gaps.max()), math.pi * 0.999)
        return 1.0 / math.cos(widest / 2.0) - 1.0

    @cached_property
    def _graph_g(self):
        pairs, chord, _, _ = self._chords
        ends = np.concatenate([self.edges, pairs])
        w = np.concatenate([self.edge_len_g, chord])
        return ends, w

    def graph(self, metric: str):
        """CSR arrays ``(indptr, indices, weights)`` of the edge+chord graph."""
        _check_metric(metric)
        return self._csr_g if metric == "g" else self._csr_g0

    def _to_csr(self, ends, w):
        n = self.n_vertices
        rows = np.concatenate([ends[:, 0], ends[:, 1]])
        cols = np.concatenate([ends[:, 1], ends[:, 0]])
        data = np.concatenate([w, w])
        # keep the shortest of duplicate connections
        order = np.lexsort((data, cols, rows))
        rows, cols, data = rows[order], cols[order], data[order]
        first = np.ones(len(rows), dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        rows, cols, data = rows[first], cols[first], data[first]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return np.cumsum(indptr), cols.astype(np.int64), data.astype(np.float64)

    @cached_property
    def _csr_g(self):
        ends, w = self._graph_g
        return self._to_csr(ends, w)

    @cached_property
    def _csr_g0(self):
        ends, w = self._graph_g
        w0 = w * np.exp(0.5 * (self.phi[ends[:, 0]] + self.phi[ends[:, 1]]))
        return self._to_csr(ends, w0)

    # domains --------------------------------------------------------------

    def domain(self, faces=None) -> "Domain":
        mask = np.zeros(self.n_faces, dtype=bool)
        if faces is not None:
            faces = np.asarray(faces)
            if faces.dtype == bool:
                if faces.shape != (self.n_faces,):
                    raise InvalidArgument("face mask has the wrong length")
                mask = faces.copy()
            else:
                if faces.size and (faces.min() < 0 or faces.max() >= self.n_faces):
                    raise InvalidArgument("face id out of range")
                mask[faces.astype(np.int64)] = True
        return Domain(self, mask)

    def whole(self) -> "Domain":
        return Domain(self, np.ones(self.n_faces, dtype=bool))

    @cached_property
    def euler_characteristic(self) -> int:
        return int(self.n_vertices - len(self.edges) + self.n_faces)


class Domain:
    """A set of faces of a :class:`Surface`; a value object."""

    __slots__ = ("surface", "mask")

    def __init__(self, surface: Surface, mask):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (surface.n_faces,):
            raise InvalidArgument("domain mask length does not match face count")
        mask = mask.copy()
        mask.flags.writeable = False
        self.surface = surface
        self.mask = mask

    @property
    def faces(self):
        return np.flatnonzero(self.mask)

    def vertices(self):
        return np.unique(self.surface.faces[self.mask])

    def __len__(self):
        return int(self.mask.sum())

    def is_empty(self) -> bool:
        return not self.mask.any()

    def _other(self, other):
        if other.surface is not self.surface:
            raise InvalidArgument("domains belong to different surfaces")
        return other.mask

    def __or__(self, other):
        return Domain(self.surface, self.mask | self._other(other))

    def __and__(self, other):
        return Domain(self.surface, self.mask & self._other(other))

    def __sub__(self, other):
        return Domain(self.surface, self.mask & ~self._other(other))

    def issubset(self, other) -> bool:
        return not np.any(self.mask & ~self._other(other))

    def __eq__(self, other):
        if not isinstance(other, Domain):
            return NotImplemented
        return other.surface is self.surface and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((id(self.surface), self.mask.tobytes()))

    def __repr__(self):
        return f"Domain({len(self)} of {self.surface.n_faces} faces)"


@dataclass(frozen=True)
class DistanceField:
    seed: tuple
    metric: str
    dist: np.ndarray

    def __post_init__(self):
        self.dist.flags.writeable = False


# operations ---------------------------------------------------------------


def load_surface(vertices, faces, phi=None) -> Surface:
    """Build a surface from vertex positions and triangles, checking validity."""
    vertices = np.asarray(vertices, dtype=np.float64)
    if phi is not None and len(np.ravel(phi)) != len(vertices):
        raise SurfaceError(f"phi count mismatch: {len(np.ravel(phi))} values for {len(vertices)} vertices")
    return Surface.from_positions(vertices, faces, phi)


def measure(domain: Domain, metric: str = "g") -> float:
    return float(domain.surface.face_area(metric)[domain.mask].sum())


def cut_edges(domain: Domain, relative_to: Domain | None = None):
    """Edge ids separating ``domain`` from the rest of ``relative_to``."""
    s = domain.surface
    rel = np.ones(s.n_faces, dtype=bool) if relative_to is None else relative_to.mask
    ef = s.edge_faces
    both = ef[:, 1] >= 0
    f0, f1 = ef[:, 0], np.where(both, ef[:, 1], 0)
    in0 = domain.mask[f0]
    in1 = domain.mask[f1] & both
    inside = both & rel[f0] & rel[f1]
    return np.flatnonzero(inside & (in0 != in1))


def boundary_measure(domain: Domain, metric: str = "g", relative_to: Domain | None = None) -> float:
    """Length of the part of the domain's boundary interior to ``relative_to``.

    Boundary edges that lie on the boundary of ``relative_to`` (or of the
    surface) are sealed and not counted.
    """
    _check_metric(metric)
    if relative_to is not None and not domain.issubset(relative_to):
        raise InvalidArgument("domain is not contained in relative_to")
    edges = cut_edges(domain, relative_to)
    return float(domain.surface.edge_len(metric)[edges].sum())


def _seed_vertices(surface: Surface, seed) -> np.ndarray:
    if isinstance(seed, Domain):
        verts = seed.vertices()
    else:
        verts = np.unique(np.atleast_1d(np.asarray(seed, dtype=np.int64)))
    if len(verts) == 0:
        raise InvalidArgument("distance seed is empty")
    if verts.min() < 0 or verts.max() >= surface.n_vertices:
        raise InvalidArgument("seed vertex out of range")
    return verts


def distances(surface: Surface, seed, metric: str = "g0", limit: float = np.inf) -> np.ndarray:
    """Graph distance on edges plus one-ring chords; ``inf`` beyond ``limit``."""
    verts = _seed_vertices(surface, seed)
    indptr, indices, weights = surface.graph(metric)
    return _kernels.dijkstra(indptr, indices, weights, verts, float(limit))


def distance_field(surface: Surface, seed, metric: str = "g0", limit: float = np.inf) -> DistanceField:
    verts = _seed_vertices(surface, seed)
    dist = distances(surface, verts, metric, limit)
    return DistanceField(tuple(int(v) for v in verts), metric, dist)


def incident_faces(surface: Surface, verts) -> np.ndarray:
    """Sorted ids of faces touching any of ``verts``."""
    indptr, idx = surface.vertex_faces
    verts = np.asarray(verts, dtype=np.int64)
    starts = indptr[verts]
    counts = indptr[verts + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    return np.unique(idx[np.arange(total) + offsets])


def faces_within(surface: Surface, dist: np.ndarray, r: float) -> np.ndarray:
    """Face mask: all three vertices at distance ``<= r``."""
    cand = incident_faces(surface, np.flatnonzero(dist <= r))
    mask = np.zeros(surface.n_faces, dtype=bool)
    mask[cand[(dist[surface.faces[cand]] <= r).all(axis=1)]] = True
    return mask


def geodesic_ball(surface: Surface, p: int, r: float, metric: str = "g0") -> Domain:
    if r < 0:
        raise InvalidArgument("radius must be nonnegative")
    dist = distances(surface, [p], metric, r)
    return Domain(surface, faces_within(surface, dist, r))


def neighborhood(surface: Surface, domain: Domain, r: float, metric: str = "g0") -> Domain:
    if domain.is_empty():
        raise InvalidArgument("neighborhood of an empty domain")
    dist = distances(surface, domain, metric, r)
    return Domain(surface, faces_within(surface, dist, r) | domain.mask)


def ball_areas(surface: Surface, r: float, centers=None, within: Domain | None = None,
               ball_metric: str = "g0", area_metric: str = "g") -> np.ndarray:
    """Area of ``B_r(p) ∩ within`` for each center ``p`` (all vertices by default)."""
    indptr, indices, weights = surface.graph(ball_metric)
    weight = surface.face_area(area_metric)
    if within is not None:
        weight = np.where(within.mask, weight, 0.0)
    if centers is None:
        centers = np.arange(surface.n_vertices, dtype=np.int64)
    centers = np.asarray(centers, dtype=np.int64)
    vf_ptr, vf_idx = surface.vertex_faces
    return _kernels.ball_weights(indptr, indices, weights, float(r), centers, surface.faces, vf_ptr, vf_idx, weight)


@dataclass
class CurvatureReport:
    curvature: np.ndarray
    min_curvature: float
    max_curvature: float
    total_curvature: float
    euler_characteristic: int
    lower_bound_holds: bool


def curvature_report(surface: Surface) -> CurvatureReport:
    """Angle-defect Gaussian curvature of g0 per unit barycentric dual area.

    Advisory only: compares the minimum against the lower bound -1.
    """
    fl0 = surface.edge_len_g0[surface.face_edges]
    ang = np.stack(
        [
            _angle(fl0[:, 1], fl0[:, 0], fl0[:, 2]),
            _angle(fl0[:, 2], fl0[:, 0], fl0[:, 1]),
            _angle(fl0[:, 0], fl0[:, 1], fl0[:, 2]),
        ],
        axis=1,
    )
    n = surface.n_vertices
    angle_sum = np.bincount(surface.faces.ravel(), weights=ang.ravel(), minlength=n)
    area0 = _heron(fl0[:, 0], fl0[:, 1], fl0[:, 2])
    dual = np.bincount(surface.faces.ravel(), weights=np.repeat(area0 / 3.0, 3), minlength=n)
    on_boundary = np.zeros(n, dtype=bool)
    bnd = surface.edges[surface.edge_faces[:, 1] < 0]
    on_boundary[bnd.ravel()] = True
    full = np.where(on_boundary, math.pi, 2 * math.pi)
    defect = full - angle_sum
    used = dual > 0
    curv = np.zeros(n)
    curv[used] = defect[used] / dual[used]
    return CurvatureReport(
        curvature=curv,
        min_curvature=float(curv[used].min()) if used.any() else 0.0,
        max_curvature=float(curv[used].max()) if used.any() else 0.0,
        total_curvature=float(defect[used].sum()),
        euler_characteristic=surface.euler_characteristic,
        lower_bound_holds=bool(curv[used].min() >= -1.0) if used.any() else True,
    )


# generators ---------------------------------------------------------------


def _torus_lattice(n: int):
    """Near-equilateral periodic lattice on the unit square torus."""
    if n < 3:
        raise InvalidArgument("torus resolution must be at least 3")
    m = max(4, 2 * round(n / math.sqrt(3)))
    idx = lambda i, j: (j % m) * n + (i % n)  # noqa: E731
    faces = []
    for j in range(m):
        for i in range(n):
            if j % 2 == 0:
                faces.append((idx(i, j), idx(i + 1, j), idx(i, j + 1)))
                faces.append((idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)))
            else:
                faces.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
                faces.append((idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)))
    faces = np.array(faces, dtype=np.int64)
    jj, ii = np.divmod(np.arange(n * m), n)
    uv = np.stack([(ii + 0.5 * (jj % 2)) / n, jj / m], axis=1)
    return faces, uv, n, m


def _wrapped_lengths(faces, uv):
    p = uv[faces]
    out = np.empty(faces.shape)
    for c, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        d = p[:, j] - p[:, i]
        d -= np.round(d)
        out[:, c] = np.hypot(d[:, 0], d[:, 1])
    return out


def _ring_positions(uv, big=1.0, small=0.35, shift=0.0):
    a = 2 * math.pi * uv[:, 0]
    b = 2 * math.pi * uv[:, 1]
    return np.stack(
        [(big + small * np.cos(b)) * np.cos(a) + shift, (big + small * np.cos(b)) * np.sin(a), small * np.sin(b)],
        axis=1,
    )


def flat_torus(n: int, phi=None) -> Surface:
    """Flat unit-area square torus with about ``n`` vertices per row.

    The metric is the flat one (edge lengths from the periodic lattice);
    vertex positions are a ring-torus embedding used only for display.
    """
    faces, uv, _, _ = _torus_lattice(n)
    lengths = _wrapped_lengths(faces, uv)
    if phi is None:
        phi = np.zeros(len(uv))
    return Surface(faces, lengths, phi, positions=_ring_positions(uv))


def torus_uv(n: int) -> np.ndarray:
    """Flat coordinates in ``[0, 1)^2`` of the vertices of :func:`flat_torus`."""
    return _torus_lattice(n)[1]


def icosphere(level: int, phi=None) -> Surface:
    """Unit round sphere by ``level`` midpoint subdivisions of the icosahedron."""
    t = (1 + math.sqrt(5)) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    pos = np.array(verts)
    return Surface.from_positions(pos, np.array(faces), phi)


def genus_two(n: int, hole: float = 0.1, phi=None) -> Surface:
    """Two flat unit tori joined along a hexagonal hole (flat with cone points).

    ``hole`` is the hexagon's circumradius in torus units.
    """
    faces, uv, n_cols, _ = _torus_lattice(n)
    lengths = _wrapped_lengths(faces, uv)
    nv = len(uv)
    rows = np.concatenate([faces[:, 0], faces[:, 1], faces[:, 2]])
    cols = np.concatenate([faces[:, 1], faces[:, 2], faces[:, 0]])
    adj = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(nv, nv)).tocsr()
    adj = adj + adj.T
    from scipy.sparse.csgraph import shortest_path

    center = int(np.argmin(np.hypot(uv[:, 0] - 0.5, uv[:, 1] - 0.5)))
    hops = shortest_path(adj, unweighted=True, indices=center)
    radius = max(2, round(hole * n_cols))
    removed = (hops[faces] <= radius).all(axis=1)
    inside = hops < radius
    rim = hops == radius
    keep_faces = faces[~removed]
    keep_len = lengths[~removed]
    # copy A keeps original ids minus interior vertices; copy B shares rim vertices
    a_ids = np.full(nv, -1, dtype=np.int64)
    a_ids[~inside] = np.arange(int((~inside).sum()))
    b_ids = np.full(nv, -1, dtype=np.int64)
    b_ids[rim] = a_ids[rim]
    fresh = ~inside & ~rim
    start = int((~inside).sum())
    b_ids[fresh] = start + np.arange(int(fresh.sum()))
    fa = a_ids[keep_faces]
    fb = b_ids[keep_faces][:, ::-1]
    la = keep_len
    lb = keep_len[:, [1, 0, 2]]  # reversed winding: edges (c,b), (b,a), (a,c)
    all_faces = np.concatenate([fa, fb])
    all_len = np.concatenate([la, lb])
    total = start + int(fresh.sum())
    pos = np.zeros((total, 3))
    ring = _ring_positions(uv)
    pos[a_ids[~inside]] = ring[~inside]
    mirrored = _ring_positions(uv, shift=2.8)
    mirrored[:, 1] *= -1
    pos[b_ids[fresh]] = mirrored[fresh]
    if phi is None:
        phi = np.zeros(total)
    return Surface(all_faces, all_len, phi, positions=pos)


def generate(spec: str) -> Surface:
    """Build a surface from ``torus:<n>``, ``sphere:<level>`` or ``genus2:<n>``."""
    kind, _, arg = spec.partition(":")
    try:
        value = int(arg)
    except ValueError:
        raise InvalidArgument(f"bad generator spec {spec!r}") from None
    if kind == "torus":
        return flat_torus(value)
    if kind == "sphere":
        return icosphere(value)
    if kind == "genus2":
        return genus_two(value)
    raise InvalidArgument(f"unknown generator {kind!r}")


# file formats -------------------------------------------------------------


def read_off(path) -> tuple[np.ndarray, np.ndarray]:
    """Read vertices and triangles from an OFF file."""
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.append(line)
    if not tokens or not tokens[0].startswith("OFF"):
        raise SurfaceError(f"{path}: missing OFF header")
    head = tokens[0][3:].split() or tokens.pop(1).split()
    try:
        nv, nf = int(head[0]), int(head[1])
    except (IndexError, ValueError):
        raise SurfaceError(f"{path}: bad OFF counts line") from None
    body = tokens[1:]
    if len(body) < nv + nf:
        raise SurfaceError(f"{path}: truncated OFF file")
    verts = np.array([[float(x) for x in body[i].split()[:3]] for i in range(nv)])
    faces = []
    for i in range(nv, nv + nf):
        parts = body[i].split()
        if int(parts[0]) != 3:
            raise SurfaceError(f"{path}: only triangles are supported")
        faces.append([int(x) for x in parts[1:4]])
    return verts, np.array(faces, dtype=np.int64).reshape(-1, 3)


def write_off(path, vertices, faces) -> None:
    with open(path, "w") as fh:
        fh.write(f"OFF\n{len(vertices)} {len(faces)} 0\n")
        for v in vertices:
            fh.write(" ".join(repr(float(x)) for x in v) + "\n")
        for f in faces:
            fh.write("3 " + " ".join(str(int(x)) for x in f) + "\n")


def read_phi(path) -> np.ndarray:
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            values.append(float(line))
    return np.array(values)


def load_files(mesh_path, phi_path=None) -> Surface:
    verts, faces = read_off(mesh_path)
    phi = read_phi(phi_path) if phi_path is not None else None
    return load_surface(verts, faces, phi)


def farthest_point_sample(surface: Surface, count: int, metric: str = "g0", within: Domain | None = None,
                          start: int | None = None) -> np.ndarray:
    """Deterministic farthest-point sample of vertices (ties to lowest id)."""
    if within is None:
        candidates = np.arange(surface.n_vertices)
    else:
        candidates = within.vertices()
    if len(candidates) == 0:
        return np.empty(0, dtype=np.int64)
    first = int(candidates[0]) if start is None else int(start)
    picked = [first]
    best = distances(surface, [first], metric)[candidates]
    while len(picked) < min(count, len(candidates)):
        finite = np.where(np.isfinite(best), best, -1.0)
        if finite.max() <= 0:
            break
        nxt = int(candidates[int(np.argmax(finite))])
        picked.append(nxt)
        best = np.minimum(best, distances(surface, [nxt], metric)[candidates])
    return np.array(picked, dtype=np.int64)


def approximate_diameter(surface: Surface, metric: str = "g0", within: Domain | None = None):
    """Double-sweep diameter estimate; returns ``(length, end_a, end_b)``."""
    cand = np.arange(surface.n_vertices) if within is None else within.vertices()
    d = distances(surface, [int(cand[0])], metric)[cand]
    d = np.where(np.isfinite(d), d, -1.0)
    a = int(cand[int(np.argmax(d))])
    d = distances(surface, [a], metric)[cand]
    d = np.where(np.isfinite(d), d, -1.0)
    i = int(np.argmax(d))
    return float(d[i]), a, int(cand[i])
