"""Greedy decomposition of a conformally thin domain into pieces sandwiched
between concentric g0-balls of radii 3r and 4r."""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .certificates import check
from .constants import ConstantBundle
from .errors import InvalidArgument, PreconditionError
from .length_area import SliceCertificate, slice, slice_tolerance
from .surface import Domain, Surface, distances, faces_within
from .width import width_one_bound

logger = logging.getLogger(__name__)


@dataclass
class GreedyStep:
    center: int
    piece: Domain
    slice_cert: SliceCertificate
    ball_area_g: float
    ball4_area_g: float
    ball4_area_g0: float
    ball4_full_area_g0: float
    ball4_residual_area_g: float
    sandwich_violations: int
    forced: bool


@dataclass
class GreedyRun:
    steps: list
    residual: Domain
    separation: float
    rball_overlap: int
    vertex_multiplicity: np.ndarray
    max_residual_ball: float


class GreedyState:
    """Residual domain plus an exact max-heap of residual r-ball g-areas.

    Residual ball areas only decrease as pieces are removed, so heap keys are
    upper bounds. A vertex is marked dirty when a removed face lies in its
    r-ball; a clean top entry is exact, a dirty one is recomputed and pushed
    back until the top is exact. Ties go to the lowest vertex id.

    The state can be run several times; the pipeline continues its split
    loop into the thin decomposition this way without recomputing balls.
    """

    def __init__(self, surface: Surface, N: Domain, r: float):
        if not r > 0:
            raise InvalidArgument("radius must be positive")
        self.surface = surface
        self.N = N
        self.r = float(r)
        self.residual = N.mask.copy()
        self.weight = np.where(self.residual, surface.face_area_g, 0.0)
        indptr, indices, weights = surface.graph("g0")
        vf_ptr, vf_idx = surface.vertex_faces
        self._ws = _kernels.BallWorkspace(indptr, indices, weights, surface.faces, vf_ptr, vf_idx)
        self.initial_areas = self._ws.areas(self.r, np.arange(surface.n_vertices), self.weight)
        self._heap = [(-float(a), v) for v, a in enumerate(self.initial_areas.tolist()) if a > 0]
        heapq.heapify(self._heap)
        self._dirty = np.zeros(surface.n_vertices, dtype=bool)

    def peek(self) -> tuple[int | None, float]:
        """Vertex with the largest residual r-ball area and that area."""
        heap = self._heap
        while heap:
            key, v = heap[0]
            if not self._dirty[v]:
                return v, -key
            cur = float(self._ws.areas(self.r, np.array([v]), self.weight)[0])
            self._dirty[v] = False
            if cur == -key:
                return v, cur
            if cur > 0:
                heapq.heapreplace(heap, (-cur, v))
            else:
                heapq.heappop(heap)
        return None, 0.0

    def _remove(self, piece: Domain) -> None:
        self.residual &= ~piece.mask
        self.weight[piece.mask] = 0.0
        near = distances(self.surface, piece.vertices(), "g0", self.r)
        self._dirty |= np.isfinite(near)

    def run(self, stop_below: float | None = None) -> "GreedyRun":
        """Slice around the current argmax until the residual is empty or,
        with ``stop_below``, until the largest residual r-ball area drops
        below it."""
        surface, r, N = self.surface, self.r, self.N
        steps, centers = [], []
        separation = math.inf
        rball_count = np.zeros(surface.n_faces, dtype=np.int64)
        multiplicity = np.zeros(surface.n_vertices, dtype=np.int64)
        max_left = 0.0
        while self.residual.any():
            chosen, top = self.peek()
            if stop_below is not None and top < stop_below:
                max_left = top
                break
            forced = chosen is None
            if forced:
                chosen = int(surface.faces[self.residual].min())
                logger.warning("no residual r-ball has positive area; forcing a step at vertex %d", chosen)
            dist = distances(surface, [chosen], "g0", 4 * r)
            for q in centers:
                if np.isfinite(dist[q]):
                    separation = min(separation, float(dist[q]))
            residual = self.residual
            ball3 = faces_within(surface, dist, 3 * r) & residual
            if not ball3.any():
                ball3 = residual & (surface.faces == chosen).any(axis=1)
                forced = True
            piece, cert = slice(surface, Domain(surface, residual), Domain(surface, ball3), r)
            ball4 = faces_within(surface, dist, 4 * r)
            violations = int((ball3 & ~piece.mask).sum() + (piece.mask & ~ball4).sum())
            rball_count += faces_within(surface, dist, r)
            multiplicity += dist <= 4 * r
            steps.append(GreedyStep(
                chosen, piece, cert, top,
                float(surface.face_area_g[ball4 & N.mask].sum()),
                float(surface.face_area_g0[ball4 & N.mask].sum()),
                float(surface.face_area_g0[ball4].sum()),
                float(surface.face_area_g[ball4 & residual].sum()),
                violations, forced,
            ))
            centers.append(chosen)
            self._remove(piece)
        return GreedyRun(steps, Domain(surface, self.residual), separation, int(rball_count.max(initial=0)),
                         multiplicity, max_left)


def greedy_slices(surface: Surface, N: Domain, r: float, stop_below: float | None = None) -> GreedyRun:
    """One run of :class:`GreedyState` on ``N``."""
    return GreedyState(surface, N, r).run(stop_below)


def ball_areas_all(surface: Surface, r: float, weight: np.ndarray) -> np.ndarray:
    indptr, indices, weights = surface.graph("g0")
    vf_ptr, vf_idx = surface.vertex_faces
    centers = np.arange(surface.n_vertices, dtype=np.int64)
    return _kernels.ball_weights(indptr, indices, weights, float(r), centers, surface.faces, vf_ptr, vf_idx, weight)


def verify_thin_hypothesis(surface: Surface, N: Domain, r: float, alpha: float, areas=None):
    """Check that every g0-ball of radius ``r`` meets ``N`` in g-area at most
    ``alpha``; returns ``(ok, worst_vertex, worst_area)``."""
    if not r > 0 or not alpha > 0:
        raise InvalidArgument("r and alpha must be positive")
    if N.is_empty():
        return True, -1, 0.0
    if areas is None:
        weight = np.where(N.mask, surface.face_area_g, 0.0)
        areas = ball_areas_all(surface, r, weight)
    worst = int(np.argmax(areas))
    return bool(areas[worst] <= alpha), worst, float(areas[worst])


@dataclass
class ThinDecomposition:
    pieces: list
    per_piece: list
    boundary_total_g: float
    boundary_bound: float
    width_bounds: list
    alpha: float
    r: float
    multiplicity_max: int
    multiplicity_bound: int
    area_g: float
    area_g0: float
    forced_steps: int = 0
    certificates: list = field(default_factory=list)

    @property
    def domains(self) -> list:
        return [d for d, _ in self.pieces]


def piece_labels(surface: Surface, domains) -> np.ndarray:
    """Face labels (``-1`` outside every piece); raises if pieces overlap."""
    labels = np.full(surface.n_faces, -1, dtype=np.int64)
    for i, d in enumerate(domains):
        if (labels[d.mask] >= 0).any():
            raise AssertionError("pieces overlap")
        labels[d.mask] = i
    return labels


def partition_boundary(surface: Surface, labels: np.ndarray, within: np.ndarray, metric: str = "g") -> float:
    """Length of edges inside ``within`` whose two faces carry different labels."""
    ef = surface.edge_faces
    both = ef[:, 1] >= 0
    f1 = np.where(both, ef[:, 1], 0)
    inside = both & within[ef[:, 0]] & within[f1]
    cut = inside & (labels[ef[:, 0]] != labels[f1])
    return float(surface.edge_len(metric)[cut].sum())


def decompose_thin(surface: Surface, N: Domain, r: float, alpha: float, bundle: ConstantBundle,
                   state: GreedyState | None = None) -> ThinDecomposition:
    """Cover ``N`` by disjoint pieces ``V_j`` with
    ``B_3r(p_j) ∩ residual ⊆ V_j ⊆ B_4r(p_j) ∩ residual``.

    ``state`` may carry a :class:`GreedyState` whose residual is ``N`` at
    radius ``r``; the decomposition then continues it. Raises
    :class:`PreconditionError` if some r-ball meets ``N`` in more than
    ``alpha`` of g-area.
    """
    if bundle.mode == "paper" and r >= 1:
        raise InvalidArgument("the ball-volume comparison needs r < 1")
    if state is not None and (state.r != r or not np.array_equal(state.residual, N.mask)):
        raise InvalidArgument("greedy state does not match the domain and radius")
    if state is None and not N.is_empty():
        state = GreedyState(surface, N, r)
    if N.is_empty():
        worst, worst_area = -1, 0.0
    else:
        worst, worst_area = state.peek()
    if not worst_area <= alpha:
        raise PreconditionError(f"thin hypothesis fails at vertex {worst}: ball area {worst_area:.6g} > {alpha:.6g}")
    n = bundle.n
    a_g = float(surface.face_area_g[N.mask].sum())
    a_g0 = float(surface.face_area_g0[N.mask].sum())
    mult_bound = int(bundle.C_of(r / 2) * bundle.C_of(2 * r))
    C1 = float(bundle.C1_of(r))
    bound = C1 / r * math.sqrt(a_g0) * math.sqrt(a_g)
    if N.is_empty():
        return ThinDecomposition([], [], 0.0, bound, [], alpha, r, 0, mult_bound, 0.0, 0.0)

    run = state.run()
    steps = run.steps
    cuts = [s.slice_cert.cut_length_g for s in steps]
    total = float(sum(cuts))
    widths = []
    for s in steps:
        piece_g = float(surface.face_area_g[s.piece.mask].sum())
        b0 = bundle.C0 * (4 * r) ** n if bundle.mode == "paper" else s.ball4_full_area_g0
        widths.append(width_one_bound(piece_g, b0, bundle.K, n))
    J = int(run.vertex_multiplicity.max())

    certs = [check("thin hypothesis: max r-ball area", worst_area, alpha, "<=", constants={"r": r})]
    certs += [s.slice_cert.certificate(f"slice {j}") for j, s in enumerate(steps)]
    labels = piece_labels(surface, [s.piece for s in steps])
    uncovered = int(((labels < 0) & N.mask).sum())
    certs.append(check("pieces cover N", uncovered, 0, "==", note="faces of N in no piece"))
    certs.append(check("sandwich between 3r- and 4r-balls", sum(s.sandwich_violations for s in steps), 0, "=="))
    sep = run.separation if math.isfinite(run.separation) else 4 * r
    certs.append(check("center separation", sep, 2 * r, ">",
                       note="" if math.isfinite(run.separation) else "all center pairs farther than 4r"))
    certs.append(check("r-balls pairwise disjoint", run.rball_overlap, 1, "<="))
    certs.append(check("boundary accounting", total, partition_boundary(surface, labels, N.mask), "==", rtol=1e-9))

    # Hoelder aggregation, recomputed with the measured multiplicity
    tol = slice_tolerance(surface, r)
    ann = sum(math.sqrt(s.slice_cert.annulus_area_g0 * s.slice_cert.annulus_area_g) for s in steps)
    b4 = sum(math.sqrt(s.ball4_area_g0 * s.ball4_area_g) for s in steps)
    sum_g = sum(s.ball4_area_g for s in steps)
    sum_g0 = sum(s.ball4_area_g0 for s in steps)
    certs.append(check("aggregate slices", total, (1 + tol) * ann / r, "<=", rtol=1e-9))
    certs.append(check("annulus inside 4r-ball", ann, b4, "<=", rtol=1e-9))
    certs.append(check("Cauchy-Schwarz", b4, math.sqrt(sum_g0 * sum_g), "<=", rtol=1e-9))
    certs.append(check("4r-ball overlap, g", sum_g, J * a_g, "<=", rtol=1e-9, constants={"J": J}))
    certs.append(check("4r-ball overlap, g0", sum_g0, J * a_g0, "<=", rtol=1e-9, constants={"J": J}))
    certs.append(check("boundary sum, measured multiplicity", total,
                       (1 + tol) * J / r * math.sqrt(a_g0) * math.sqrt(a_g), "<=", constants={"J": J}))
    certs.append(check("multiplicity vs covering bound", J, mult_bound, "<=",
                       constants={"C(r/2)": bundle.C_of(r / 2), "C(2r)": bundle.C_of(2 * r)}))
    certs.append(check("boundary sum vs C1", total, (1 + tol) * bound, "<=", constants={"C1": C1, "tol_slice": tol}))
    cover_bound = bundle.C_of(r) * alpha
    C0 = bundle.C0
    certs.append(check("piece area vs covering", max(s.ball4_area_g for s in steps), cover_bound, "<=",
                       constants={"C(r)": bundle.C_of(r)}))
    certs.append(check("width bound vs C1", max(widths), C1 * math.sqrt(alpha), "<=",
                       constants={"C1": C1, "C0": C0}))

    forced = sum(s.forced for s in steps)
    if forced:
        certs.append(check("no forced steps", forced, 0, "=="))
    return ThinDecomposition(
        pieces=[(s.piece, s.center) for s in steps],
        per_piece=[s.slice_cert for s in steps],
        boundary_total_g=total,
        boundary_bound=bound,
        width_bounds=widths,
        alpha=alpha,
        r=r,
        multiplicity_max=J,
        multiplicity_bound=mult_bound,
        area_g=a_g,
        area_g0=a_g0,
        forced_steps=forced,
        certificates=certs,
    )


def multiplicity_profile(decomposition: ThinDecomposition, surface: Surface, bundle: ConstantBundle | None = None):
    """Largest number of 4r-balls around piece centers containing one vertex,
    and the covering bound ``C(r/2) C(2r)``."""
    r = decomposition.r
    count = np.zeros(surface.n_vertices, dtype=np.int64)
    for _, p in decomposition.pieces:
        count += distances(surface, [p], "g0", 4 * r) <= 4 * r
    bound = decomposition.multiplicity_bound
    if bundle is not None:
        bound = int(bundle.C_of(r / 2) * bundle.C_of(2 * r))
    return int(count.max(initial=0)), bound
