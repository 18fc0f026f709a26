"""Length-area slicing: pick a level set of the g0-distance to a domain whose
g-length is controlled by the swept annulus."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import Certificate
from .errors import InvalidArgument
from .surface import Domain, Surface, distances, incident_faces

# Floor for the discretization allowance of the discrete bound.
SLICE_TOL = 0.1


def slice_tolerance(surface: Surface, r: float | None = None) -> float:
    """Allowance for face-granular level sets on ``surface`` at radius ``r``.

    A cut made of mesh edges follows a straight curve with overshoot at most
    ``1 / cos(theta / 2)``, ``theta`` the widest corner angle, and distances
    carry the graph distortion on top. A face joins the sweep only once its
    farthest vertex is reached, so the swept annulus lags the level sets by
    at most one g0 edge ``h``, costing a factor ``1 / (1 - h / r)`` (capped
    at 2). The result never drops below :data:`SLICE_TOL`.
    """
    stair = 1.0 / math.cos(float(surface.corner_angles_g.max()) / 2.0)
    lag = 1.0
    if r is not None:
        lag = 1.0 / (1.0 - min(surface.max_edge_length_g0 / r, 0.5))
    return max(SLICE_TOL, stair * (1.0 + surface.distortion) * lag - 1.0)


@dataclass
class SliceCertificate:
    annulus_area_g: float
    annulus_area_g0: float
    chosen_t: float
    cut_length_g: float
    bound: float
    ratio: float
    distortion: float
    n_candidates: int
    tol: float = SLICE_TOL

    def certificate(self, name: str = "length-area slice", tol: float | None = None) -> Certificate:
        tol = self.tol if tol is None else tol
        return Certificate(
            name,
            self.cut_length_g,
            self.bound * (1.0 + tol),
            constants={"tol_slice": tol, "distortion": self.distortion, "t": self.chosen_t},
        )


def entry_times(surface: Surface, N: Domain, D: Domain, r: float, dist=None) -> np.ndarray:
    """Threshold at which each face joins the slice family (``inf`` if never)."""
    if dist is None:
        dist = distances(surface, D, "g0", r)
    cand = incident_faces(surface, np.flatnonzero(dist <= r))
    cand = cand[N.mask[cand]]
    fmax = dist[surface.faces[cand]].max(axis=1)
    te = np.full(surface.n_faces, np.inf)
    keep = fmax <= r
    te[cand[keep]] = fmax[keep]
    te[D.mask] = 0.0
    return te


def _active_edges(surface: Surface, N: Domain, te: np.ndarray):
    """Edges interior to ``N`` whose faces enter at different times, with the
    entry times of their earlier and later face."""
    ef = surface.edge_faces
    e = np.unique(surface.face_edges[np.flatnonzero(np.isfinite(te))].ravel())
    e = e[ef[e, 1] >= 0]
    e = e[N.mask[ef[e, 0]] & N.mask[ef[e, 1]]]
    ta = te[ef[e, 0]]
    tb = te[ef[e, 1]]
    lo = np.minimum(ta, tb)
    hi = np.maximum(ta, tb)
    active = lo < hi
    return e[active], lo[active], hi[active]


def cut_profile(surface: Surface, N: Domain, te: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """g-length of the cut of ``{te <= t}`` inside ``N`` for each ``t`` in ``ts``."""
    e, lo, hi = _active_edges(surface, N, te)
    i_lo = np.searchsorted(ts, lo, side="left")
    i_hi = np.searchsorted(ts, hi, side="left")
    diff = np.zeros(len(ts) + 1)
    np.add.at(diff, i_lo, surface.edge_len_g[e])
    np.add.at(diff, i_hi, -surface.edge_len_g[e])
    return np.cumsum(diff)[:-1]


def _cut_length(surface: Surface, N: Domain, te: np.ndarray, t: float) -> float:
    """Cut length of ``{te <= t}`` summed directly (no running-sum roundoff)."""
    e, lo, hi = _active_edges(surface, N, te)
    return float(surface.edge_len_g[e[(lo <= t) & (hi > t)]].sum())


def slice(surface: Surface, N: Domain, D: Domain, r: float) -> tuple[Domain, SliceCertificate]:
    """Domain ``V`` with ``D ⊆ V ⊆ N ∩ N_r(D)`` of least cut length.

    Candidates are ``V_t = D ∪ {faces of N with all vertices within t of D}``
    for every distinct vertex distance ``t`` in ``[0, r]``; the cut length is
    constant between consecutive values, so the search is exhaustive over
    face-granular slices. Ties go to the smallest ``t``.
    """
    if not r > 0:
        raise InvalidArgument("slice radius must be positive")
    if D.is_empty():
        raise InvalidArgument("slice seed domain is empty")
    if not D.issubset(N):
        raise InvalidArgument("seed domain is not contained in N")
    te = entry_times(surface, N, D, r)
    annulus = np.isfinite(te) & ~D.mask
    a_g = float(surface.face_area_g[annulus].sum())
    a_g0 = float(surface.face_area_g0[annulus].sum())
    bound = math.sqrt(a_g0) * math.sqrt(a_g) / r
    if not annulus.any():
        V = Domain(surface, D.mask)
        cut = _cut_length(surface, N, te, 0.0)
        cert = SliceCertificate(a_g, a_g0, 0.0, cut, bound, _ratio(cut, bound), surface.distortion, 1,
                               slice_tolerance(surface, r))
        return V, cert
    ts = np.unique(np.concatenate([[0.0], te[annulus]]))
    profile = cut_profile(surface, N, te, ts)
    best = int(np.argmin(profile))
    t = float(ts[best])
    V = Domain(surface, te <= t)
    cut = _cut_length(surface, N, te, t)
    cert = SliceCertificate(a_g, a_g0, t, cut, bound, _ratio(cut, bound), surface.distortion, len(ts),
                           slice_tolerance(surface, r))
    return V, cert


def _ratio(cut: float, bound: float) -> float:
    if bound > 0:
        return cut / bound
    return 0.0 if cut == 0 else math.inf
