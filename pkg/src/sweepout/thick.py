"""Recursive balanced subdivision of a domain into pieces of small g-area,
with the tree bookkeeping that bounds the total cut length."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .certificates import check
from .constants import ConstantBundle, lambda_tilde
from .errors import InvalidArgument, NoCutError, PreconditionError
from .surface import Domain, Surface, approximate_diameter, distances, farthest_point_sample
from .thin import partition_boundary, piece_labels
from .trees import DecompositionWitness, interior_cost, validate_decomposition
from .width import width_one_bound_thick

logger = logging.getLogger(__name__)

N_SEEDS = 8
N_EIGEN = 3
MAX_DEPTH = 10_000


@dataclass
class CutResult:
    sigma_length_g: float
    sides: tuple
    balance: float
    c_ratio: float
    family: str = ""


def _interior_edges(surface: Surface, mask: np.ndarray) -> np.ndarray:
    ef = surface.edge_faces
    both = ef[:, 1] >= 0
    return np.flatnonzero(both & mask[ef[:, 0]] & mask[np.where(both, ef[:, 1], 0)])


def _c_ratio(sigma: float, area_g: float, area_g0: float, n: int) -> float:
    return sigma / (area_g ** ((n - 1) / n) * max(1.0, area_g0 ** (1.0 / n)))


def _components(surface: Surface, faces: np.ndarray, edges: np.ndarray):
    local = np.full(surface.n_faces, -1, dtype=np.int64)
    local[faces] = np.arange(len(faces))
    a = local[surface.edge_faces[edges, 0]]
    b = local[surface.edge_faces[edges, 1]]
    adj = sp.coo_matrix((np.ones(len(a)), (a, b)), shape=(len(faces), len(faces)))
    return connected_components(adj, directed=False)


def _sweep(order_values: np.ndarray, faces: np.ndarray, edges_local: tuple, area: np.ndarray,
           min_side: float):
    """Best balanced prefix of the faces sorted by ``order_values``.

    Returns ``(score, prefix_size, sigma, order)`` or ``None``; the score is
    cut length over the square root of the smaller side's area.
    """
    ea, eb, elen = edges_local
    order = np.argsort(order_values, kind="stable")
    pos = np.empty(len(order), dtype=np.int64)
    pos[order] = np.arange(len(order))
    pa, pb = pos[ea], pos[eb]
    lo, hi = np.minimum(pa, pb), np.maximum(pa, pb)
    diff = np.zeros(len(order) + 1)
    np.add.at(diff, lo + 1, elen)
    np.add.at(diff, hi + 1, -elen)
    sigma = np.cumsum(diff)[1:-1]  # prefix sizes 1 .. n-1
    prefix = np.cumsum(area[order])[:-1]
    total = area.sum()
    small = np.minimum(prefix, total - prefix)
    ok = small >= min_side
    if not ok.any():
        return None
    score = np.where(ok, sigma / np.sqrt(np.where(ok, small, 1.0)), np.inf)
    m = int(np.argmin(score))
    return float(score[m]), m + 1, float(sigma[m]), order


def _laplacian_modes(surface: Surface, faces: np.ndarray, count: int):
    """Lowest nonconstant eigenvectors of the cotangent Laplacian (metric g)
    on the vertices of ``faces``, with lumped mass and free boundary."""
    tri = surface.faces[faces]
    verts, local = np.unique(tri, return_inverse=True)
    local = local.reshape(-1, 3)
    nv = len(verts)
    if nv <= count + 2:
        return []
    ang = surface.corner_angles_g[faces]
    rows, cols, vals = [], [], []
    for c in range(3):
        i, j = local[:, (c + 1) % 3], local[:, (c + 2) % 3]
        w = 0.5 / np.tan(ang[:, c])
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-w, -w, w, w]
    L = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nv, nv))
    mass = np.bincount(local.ravel(), weights=np.repeat(surface.face_area_g[faces] / 3.0, 3), minlength=nv)
    M = sp.diags(mass).tocsc()
    v0 = np.random.default_rng(0).random(nv)
    try:
        _, vecs = eigsh(L, k=count + 1, M=M, sigma=-1e-2 / mass.sum(), which="LM", v0=v0)
    except (ArpackError, ArpackNoConvergence, RuntimeError) as exc:
        logger.warning("eigen solve failed (%s); using distance sweeps only", exc)
        return []
    modes = []
    for j in range(1, vecs.shape[1]):
        v = vecs[:, j]
        v = v * np.sign(v[int(np.argmax(np.abs(v)))])
        modes.append(v[local].mean(axis=1))
    return modes


def isoperimetric_cut(surface: Surface, U: Domain, n: int = 2, n_seeds: int = N_SEEDS,
                      n_eigen: int = N_EIGEN) -> CutResult:
    """Balanced two-way split of ``U`` with a short cut.

    Candidates are prefixes of the faces ordered by g0-distance from
    farthest-point seeds and from both ends of an approximate diameter, and
    by low Laplacian modes. Among candidates whose smaller side has at least
    ``25^-n`` of the g-area, the one minimizing cut length over the square
    root of the smaller side is returned. A disconnected ``U`` is first split
    along its components when that split is balanced.
    """
    faces = U.faces
    area = surface.face_area_g[faces]
    total = float(area.sum())
    if len(faces) < 2 or not total > 0:
        raise NoCutError("domain too small to split")
    min_side = total * 25.0 ** (-n)
    a0 = float(surface.face_area_g0[faces].sum())
    edges = _interior_edges(surface, U.mask)
    ncomp, comp = _components(surface, faces, edges)
    if ncomp > 1:
        carea = np.bincount(comp, weights=area, minlength=ncomp)
        side = np.zeros(ncomp, dtype=bool)
        acc = [0.0, 0.0]
        for c in np.argsort(-carea, kind="stable"):
            s = int(acc[1] < acc[0])
            side[c] = bool(s)
            acc[s] += carea[c]
        if min(acc) >= min_side:
            m1 = np.zeros(surface.n_faces, dtype=bool)
            m1[faces[side[comp]]] = True
            U1 = Domain(surface, m1)
            U0 = U - U1
            return CutResult(0.0, (U0, U1), min(acc) / total, 0.0, "components")

    local = np.full(surface.n_faces, -1, dtype=np.int64)
    local[faces] = np.arange(len(faces))
    ef = surface.edge_faces
    edges_local = (local[ef[edges, 0]], local[ef[edges, 1]], surface.edge_len_g[edges])

    families = []
    seeds = list(farthest_point_sample(surface, n_seeds, "g0", within=U))
    _, a, b = approximate_diameter(surface, "g0", within=U)
    for p in seeds + [a, b]:
        d = distances(surface, [int(p)], "g0")
        fv = d[surface.faces[faces]].mean(axis=1)
        families.append((f"distance from {int(p)}", np.where(np.isfinite(fv), fv, np.inf)))
    if ncomp == 1:
        for j, mode in enumerate(_laplacian_modes(surface, faces, n_eigen)):
            families.append((f"mode {j + 1}", mode))

    best = None
    for name, values in families:
        res = _sweep(values, faces, edges_local, area, min_side)
        if res is not None and (best is None or res[0] < best[0]):
            best = res + (name,)
    if best is None:
        raise NoCutError("no balanced sweep cut")
    _, m, sigma, order, name = best
    m0 = np.zeros(surface.n_faces, dtype=bool)
    m0[faces[order[:m]]] = True
    U0 = Domain(surface, m0)
    U1 = U - U0
    side0 = float(area[order[:m]].sum())
    balance = min(side0, total - side0) / total
    return CutResult(sigma, (U0, U1), balance, _c_ratio(sigma, total, a0, n), name)


@dataclass
class ThickDecomposition:
    tree: DecompositionWitness
    leaves: list
    leaf_ids: list
    cuts: list
    cut_ids: list
    boundary_total_g: float
    c_emp: float
    claim_bound: float
    width_bounds: list
    k: int
    area_g: float
    area_g0: float
    normalization: float
    unsplittable: list = field(default_factory=list)
    certificates: list = field(default_factory=list)


def decompose_thick(surface: Surface, N: Domain, k: int, bundle: ConstantBundle) -> ThickDecomposition:
    """Split ``N`` recursively until every piece has ``k |N_a|_g / |N|_g``
    below ``50^n``; nothing is cut when ``k <= 50^n``."""
    if int(k) != k or k < 1:
        raise InvalidArgument("k must be a positive integer")
    if N.is_empty():
        raise InvalidArgument("domain is empty")
    k = int(k)
    n = bundle.n
    p = (n - 1) / n
    A = float(surface.face_area_g[N.mask].sum())
    A0 = float(surface.face_area_g0[N.mask].sum())
    if A0 > 1.0 * (1 + 1e-12):
        if bundle.mode == "paper":
            raise PreconditionError(f"g0-area {A0:.6g} exceeds 1")
        logger.warning("g0-area %.6g exceeds 1; the thick bound is not guaranteed", A0)
    limit = 50.0**n
    scale = k / A  # k_alpha = scale * |N_alpha|_g

    values = {}
    leaves, leaf_ids, cuts, cut_ids, unsplittable = [], [], [], [], []
    node_area = {"": (A, A0)}
    stack = [("", N)]
    while stack:
        alpha, U = stack.pop()
        a_g = node_area[alpha][0]
        if k <= limit or scale * a_g < limit:
            leaves.append(U)
            leaf_ids.append(alpha)
            continue
        if len(alpha) >= MAX_DEPTH:
            raise NoCutError(f"recursion depth exceeded at node {alpha[:32]}...")
        try:
            cut = isoperimetric_cut(surface, U, n)
        except NoCutError as exc:
            logger.warning("node %r left uncut: %s", alpha, exc)
            leaves.append(U)
            leaf_ids.append(alpha)
            unsplittable.append(alpha)
            continue
        cuts.append(cut)
        cut_ids.append(alpha)
        for bit, side in zip("01", cut.sides):
            child = alpha + bit
            sa = float(surface.face_area_g[side.mask].sum())
            node_area[child] = (sa, float(surface.face_area_g0[side.mask].sum()))
            values[child] = scale * sa
        stack.append((alpha + "1", cut.sides[1]))
        stack.append((alpha + "0", cut.sides[0]))

    order = sorted(range(len(leaves)), key=lambda i: (len(leaf_ids[i]), leaf_ids[i]))
    leaves = [leaves[i] for i in order]
    leaf_ids = [leaf_ids[i] for i in order]

    total = float(sum(c.sigma_length_g for c in cuts))
    c_emp = max((c.c_ratio for c in cuts), default=0.0)
    lt = lambda_tilde(1.0 / limit, n)
    claim = 2.0 * c_emp * (1.0 + lt) * k ** (1.0 / n) * A**p
    widths = [width_one_bound_thick(float(surface.face_area_g[leaf.mask].sum()), bundle.K, n) for leaf in leaves]

    witness = validate_decomposition(float(k), values, 1.0 / 25.0**n)
    loose = validate_decomposition(float(k), values, 1.0 / limit, strict_root=True)
    certs = []
    leaf_k = [scale * node_area[a][0] for a in leaf_ids]
    if k <= limit:
        certs.append(check("single leaf when k <= 50^n", max(leaf_k), limit, "<="))
    else:
        certs.append(check("leaf k-values below 50^n", max(leaf_k), limit, "<"))
        produced = [v for a, v in zip(leaf_ids, leaf_k) if a]
        if produced:
            certs.append(check("cut-produced leaves have k-value >= 2^n", min(produced), 2.0**n, ">="))
    if cuts:
        certs.append(check("cut balance >= 25^-n", min(c.balance for c in cuts), 25.0 ** (-n), ">="))
    certs.append(check("tree is a (1/25^n)-decomposition", sum(not c.passed for c in witness.checks), 0, "=="))
    certs.append(check("tree is a (1/50^n)-decomposition, strict root", sum(not c.passed for c in loose.checks), 0, "=="))

    labels = piece_labels(surface, leaves)
    certs.append(check("leaves cover N", int(((labels < 0) & N.mask).sum()), 0, "=="))
    certs.append(check("boundary accounting", total, partition_boundary(surface, labels, N.mask), "==", rtol=1e-9))

    cut_sum = sum(node_area[a][0] ** p * max(1.0, node_area[a][1] ** (1.0 / n)) for a in cut_ids)
    step1 = c_emp * cut_sum
    certs.append(check("cut lengths vs isoperimetric ratio", total, step1, "<=", rtol=1e-9, constants={"c_emp": c_emp}))
    cost = interior_cost(witness, n) if cuts else 0.0
    certs.append(check("interior cost vs linear growth", cost, (1.0 + lt) * k, "<=",
                       constants={"lambda_tilde": lt}))
    certs.append(check("isoperimetric sum vs tree bound", step1, claim, "<=", rtol=1e-9,
                       constants={"c_emp": c_emp, "lambda_tilde": lt}))
    certs.append(check("thick boundary total", total, claim, "<=", rtol=1e-9,
                       constants={"c_emp": c_emp, "lambda_tilde": lt, "k": k}))
    certs.append(check("k times leaf width", k * max(widths), limit * bundle.K * k ** (1.0 / n) * A**p, "<=",
                       rtol=1e-9, constants={"K": bundle.K}))
    return ThickDecomposition(
        tree=witness,
        leaves=leaves,
        leaf_ids=leaf_ids,
        cuts=cuts,
        cut_ids=cut_ids,
        boundary_total_g=total,
        c_emp=c_emp,
        claim_bound=claim,
        width_bounds=widths,
        k=k,
        area_g=A,
        area_g0=A0,
        normalization=1.0 / A,
        unsplittable=unsplittable,
        certificates=certs,
    )


def tree_nested(decomposition: ThickDecomposition) -> dict:
    """Nested ``{"k": value, "children": [...]}`` view of the tree."""
    t = decomposition.tree.tree

    def node(alpha):
        out = {"id": alpha or "root", "k": t.value(alpha)}
        if alpha + "0" in t.nodes:
            out["children"] = [node(alpha + "0"), node(alpha + "1")]
        return out

    return node("")
