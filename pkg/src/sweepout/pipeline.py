"""Whole-surface assembly: split into thick and thin parts, decompose each,
and add up the cut lengths and widths into an upper bound for the k-th width.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .certificates import Certificate, check
from .constants import (
    ConstantBundle,
    Schedule,
    c0_constant,
    covering_constant,
    euclidean_ball_volume,
    hyperbolic_ball_volume,
    lambda_tilde,
    schedule_parameters,
)
from .errors import InvalidArgument, ResolutionError
from .length_area import slice_tolerance
from .surface import Domain, Surface, curvature_report
from .thick import ThickDecomposition, decompose_thick
from .thin import GreedyState, ThinDecomposition, decompose_thin, partition_boundary, piece_labels
from .width import width_one_bound

logger = logging.getLogger(__name__)

__all__ = [
    "SplitResult",
    "BoundReport",
    "thin_thick_split",
    "width_one_bound",
    "assemble_upper_bound",
    "spectrum_curve",
    "constant_chain",
    "worker_count",
]


def worker_count() -> int:
    """Thread cap from ``SWEEPOUT_THREADS`` (0 or unset: one per CPU)."""
    raw = os.environ.get("SWEEPOUT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidArgument(f"SWEEPOUT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidArgument("SWEEPOUT_THREADS must be nonnegative")
    return n or (os.cpu_count() or 1)


@dataclass
class SplitResult:
    thick_domains: list
    thin_remainder: Domain
    m: int
    boundary_total_g: float
    cut_lengths: list
    certificates: list = field(default_factory=list)
    state: GreedyState | None = field(default=None, repr=False)


def check_resolution(surface: Surface, r: float) -> None:
    h = surface.max_edge_length_g0
    if r < 2 * h:
        raise ResolutionError(
            f"radius {r:.4g} is below the mesh resolution (2 x max g0 edge = {2 * h:.4g}); "
            "use empirical mode, a finer mesh or a smaller k"
        )


def thin_thick_split(surface: Surface, k: int, bundle: ConstantBundle, schedule: Schedule,
                     N: Domain | None = None) -> SplitResult:
    """Carve out pieces around r-balls of g-area at least ``alpha_k``.

    Each step slices around the vertex with the largest residual r-ball,
    starting from its 3r-ball; the loop stops once every residual r-ball has
    g-area below ``alpha_k``.
    """
    N = surface.whole() if N is None else N
    r, alpha = schedule.r_k, schedule.alpha_k
    check_resolution(surface, r)
    state = GreedyState(surface, N, r)
    run = state.run(stop_below=alpha)
    steps = run.steps
    n = bundle.n
    A = float(surface.face_area_g[N.mask].sum())
    cuts = [s.slice_cert.cut_length_g for s in steps]
    total = float(sum(cuts))
    tol = slice_tolerance(surface, r)
    m = len(steps)
    certs = [
        check("split: piece count m <= k - 1", m, k - 1, "<="),
        check("split: residual r-balls below alpha_k", run.max_residual_ball, alpha, "<",
              note="largest residual r-ball area when the loop stopped"),
        check("split: boundary total", total,
              (1 + tol) * 4 * bundle.C0 * bundle.C_of(1.0) * A ** ((n - 1) / n) * k ** (1.0 / n), "<=",
              constants={"C0": bundle.C0, "C(1)": bundle.C_of(1.0), "tol_slice": tol}),
    ]
    if steps:
        certs.append(check("split: pieces have g-area >= alpha_k",
                           min(float(surface.face_area_g[s.piece.mask].sum()) for s in steps), alpha, ">="))
        certs.append(check("split: sandwich between 3r- and 4r-balls", sum(s.sandwich_violations for s in steps), 0, "=="))
        worst = max(s.ball4_residual_area_g / (bundle.C_of(r) * s.ball_area_g) for s in steps)
        certs.append(check("split: 4r-ball covered by C(r) r-balls", worst, 1.0, "<=",
                           constants={"C(r_k)": bundle.C_of(r)},
                           note="max over steps of |B_4r ∩ residual| / (C(r) |B_r ∩ residual|)"))
        certs += [s.slice_cert.certificate(f"split: slice {j}") for j, s in enumerate(steps)]
        if bundle.mode == "paper":
            certs.append(check("split: pieces have g0-area < 1",
                               max(float(surface.face_area_g0[s.piece.mask].sum()) for s in steps), 1.0, "<"))
    return SplitResult(
        thick_domains=[(s.piece, s.center) for s in steps],
        thin_remainder=run.residual,
        m=m,
        boundary_total_g=total,
        cut_lengths=cuts,
        certificates=certs,
        state=state,
    )


@dataclass
class ThickPart:
    domain: Domain
    center: int
    k_j: float
    budget: int
    decomposition: ThickDecomposition | None
    widths: list


@dataclass
class BoundReport:
    k: int
    mode: str
    schedule: Schedule
    area_g: float
    area_g0: float
    constants: dict
    split: SplitResult
    thick: list
    thin: ThinDecomposition | None
    pieces: list
    piece_kind: list
    widths: list
    addends: dict
    total: float
    theorem_value: float
    curvature: dict
    certificates: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)


def _thick_part(surface, domain, center, k, A, bundle) -> ThickPart:
    k_j = k * float(surface.face_area_g[domain.mask].sum()) / A
    if k_j < 1:
        a = float(surface.face_area_g[domain.mask].sum())
        a0 = float(surface.face_area_g0[domain.mask].sum())
        return ThickPart(domain, center, k_j, 1, None, [width_one_bound(a, a0, bundle.K, bundle.n)])
    budget = int(math.floor(k_j)) + 1
    dec = decompose_thick(surface, domain, budget, bundle)
    widths = [
        width_one_bound(float(surface.face_area_g[leaf.mask].sum()), float(surface.face_area_g0[leaf.mask].sum()),
                        bundle.K, bundle.n)
        for leaf in dec.leaves
    ]
    return ThickPart(domain, center, k_j, budget, dec, widths)


def assemble_upper_bound(surface: Surface, k: int, bundle: ConstantBundle) -> BoundReport:
    """Decompose the whole surface for the k-th bound and add up the parts.

    Raises :class:`ResolutionError` when the schedule radius is below the
    mesh resolution (typical in ``paper`` mode on desk-scale meshes).
    """
    if int(k) != k or k < 1:
        raise InvalidArgument("k must be a positive integer")
    k = int(k)
    n = bundle.n
    M = surface.whole()
    A = float(surface.face_area_g.sum())
    A0 = float(surface.face_area_g0.sum())
    schedule = schedule_parameters(A, k, bundle, A0)
    if bundle.mode == "paper" and schedule.r_k >= 1:
        raise InvalidArgument("schedule radius must be below 1")
    split = thin_thick_split(surface, k, bundle, schedule)

    jobs = split.thick_domains
    workers = min(worker_count(), max(1, len(jobs)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            thick = list(pool.map(lambda job: _thick_part(surface, job[0], job[1], k, A, bundle), jobs))
    else:
        thick = [_thick_part(surface, d, p, k, A, bundle) for d, p in jobs]

    thin = None
    if not split.thin_remainder.is_empty():
        thin = decompose_thin(surface, split.thin_remainder, schedule.r_k, schedule.alpha_k, bundle,
                              state=split.state)

    pieces, kinds, widths = [], [], []
    for j, part in enumerate(thick):
        leaves = [part.domain] if part.decomposition is None else part.decomposition.leaves
        pieces += leaves
        kinds += [f"thick {j}"] * len(leaves)
        widths += part.widths
    if thin is not None:
        pieces += thin.domains
        kinds += ["thin"] * len(thin.domains)
        widths += thin.width_bounds

    thick_sum = float(sum(p.decomposition.boundary_total_g for p in thick if p.decomposition is not None))
    thin_sum = thin.boundary_total_g if thin is not None else 0.0
    width_term = k * max(widths)
    addends = {
        "thick_boundary": thick_sum,
        "split_boundary": split.boundary_total_g,
        "thin_boundary": thin_sum,
        "k_max_width": width_term,
    }
    total = thick_sum + split.boundary_total_g + thin_sum + width_term
    theorem_value = bundle.C3 * A ** ((n - 1) / n) * max(k ** (1.0 / n), A0 ** (1.0 / n))

    certs = list(split.certificates)
    for j, part in enumerate(thick):
        if part.decomposition is not None:
            certs += [_prefixed(c, f"thick {j}: ") for c in part.decomposition.certificates]
            certs.append(check(f"thick {j}: budget doubling", (1 + part.budget) ** (1.0 / n),
                               2 * part.k_j ** (1.0 / n), "<=", constants={"k_j": part.k_j}))
    if thin is not None:
        certs += [_prefixed(c, "thin: ") for c in thin.certificates]
    labels = piece_labels(surface, pieces)
    certs.append(check("pieces partition the surface", int((labels < 0).sum()), 0, "=="))
    certs.append(check("boundary accounting", thick_sum + split.boundary_total_g + thin_sum,
                       partition_boundary(surface, labels, M.mask), "==", rtol=1e-9))
    certs.append(check("upper bound vs theorem value", total, theorem_value, "<=",
                       constants={"C3": bundle.C3}, note=f"{bundle.mode} constants"))

    curv = curvature_report(surface)
    curvature = {
        "min": curv.min_curvature,
        "max": curv.max_curvature,
        "lower_bound_holds": curv.lower_bound_holds,
        "note": "advisory; the curvature lower bound is a user assertion",
    }
    return BoundReport(
        k=k,
        mode=bundle.mode,
        schedule=schedule,
        area_g=A,
        area_g0=A0,
        constants=bundle.as_dict(),
        split=split,
        thick=thick,
        thin=thin,
        pieces=pieces,
        piece_kind=kinds,
        widths=widths,
        addends=addends,
        total=total,
        theorem_value=theorem_value,
        curvature=curvature,
        certificates=certs,
    )


def _prefixed(cert: Certificate, prefix: str) -> Certificate:
    return Certificate(prefix + cert.name, cert.lhs, cert.rhs, cert.relation, dict(cert.constants), cert.note, cert.rtol)


@dataclass
class CurveRow:
    k: int
    total: float
    theorem_value: float
    substituted: bool


@dataclass
class SpectrumCurve:
    rows: list
    slope: float
    k_bar: int
    reports: dict


def spectrum_curve(surface: Surface, k_list, bundle: ConstantBundle) -> SpectrumCurve:
    """Bounds for each ``k`` and the least-squares slope of log(total) against
    log(k). Values of ``k`` below the cutoff reuse the cutoff's bound."""
    k_list = [int(k) for k in k_list]
    if not k_list:
        raise InvalidArgument("k list is empty")
    if any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise InvalidArgument("k list must be strictly ascending")
    A = float(surface.face_area_g.sum())
    k_bar = schedule_parameters(A, 1, bundle).k_bar
    reports = {}
    rows = []
    for k in k_list:
        kk = max(k, k_bar)
        if kk not in reports:
            reports[kk] = assemble_upper_bound(surface, kk, bundle)
        rep = reports[kk]
        rows.append(CurveRow(k, rep.total, rep.theorem_value, kk != k))
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log([r.k for r in rows]), np.log([r.total for r in rows]), 1)[0])
    else:
        slope = math.nan
    return SpectrumCurve(rows, slope, k_bar, reports)


def constant_chain(bundle: ConstantBundle) -> list:
    """Recompute every derived constant independently and check the
    relations among them."""
    n, K, c = bundle.n, bundle.K, bundle.c
    C = bundle.C_of
    certs = []
    if bundle.mode == "paper":
        C0 = hyperbolic_ball_volume(10.0, n) / 10.0**n
        certs.append(check("C0 = v(10)/10^n", bundle.C0, C0, "==", rtol=1e-9))
        certs.append(check("C0 recomputed", bundle.C0, c0_constant(n), "==", rtol=1e-9))
        certs.append(check("C0 >= Euclidean unit ball", bundle.C0, euclidean_ball_volume(n), ">="))
        for r in (0.5, 1.0):
            certs.append(check(f"C({r:g}) recomputed", C(r), covering_constant(r, n), "=="))
            certs.append(check(f"C({r:g}) >= 1 + floor(v(9r/2)/v(r/2))", C(r),
                               1 + math.floor(hyperbolic_ball_volume(4.5 * r, n) / hyperbolic_ball_volume(0.5 * r, n)),
                               ">="))
    certs.append(check("C(1/2) <= C(1)", C(0.5), C(1.0), "<="))
    lt = lambda_tilde(1.0 / 50**n, n)
    p = (n - 1) / n
    certs.append(check("lambda_tilde(1/50^n)", bundle.lambda_tilde_50,
                       1.0 / ((1 / 50**n) ** p + (1 - 1 / 50**n) ** p - 1), "==", rtol=1e-9))
    certs.append(check("lambda_tilde positive", lt, 0.0, ">"))
    K1 = 2 * c * (1 + lt)
    C2 = 50**n * K + K1
    C4 = 5 * bundle.C0 * (K + C(0.5)) * C(1.0)
    C3 = 4 * C2 + 13 * bundle.C0 * C(1.0) * C4
    C1 = C(0.5) * C(1.0) + (4 * bundle.C0 + 1) * K * C(1.0)
    certs.append(check("K1 = 2c(1 + lambda_tilde)", bundle.K1, K1, "==", rtol=1e-9))
    certs.append(check("C2 = 50^n K + K1", bundle.C2, C2, "==", rtol=1e-9))
    certs.append(check("C4 = 5 C0 (K + C(1/2)) C(1)", bundle.C4, C4, "==", rtol=1e-9))
    certs.append(check("C3 = 4 C2 + 13 C0 C(1) C4", bundle.C3, C3, "==", rtol=1e-9))
    certs.append(check("C1(1) = C(1/2)C(1) + (4C0+1)K C(1)", bundle.C1_of(1.0), C1, "==", rtol=1e-9))
    certs.append(check("C3 >= 4 C2", bundle.C3, 4 * bundle.C2, ">="))
    certs.append(check("C3 >= 13 C0 C(1) C4", bundle.C3, 13 * bundle.C0 * C(1.0) * bundle.C4, ">="))
    certs.append(check("C2 >= K1", bundle.C2, bundle.K1, ">="))
    certs.append(check("C1(1) >= C(1/2) C(1)", bundle.C1_of(1.0), C(0.5) * C(1.0), ">="))
    return certs
