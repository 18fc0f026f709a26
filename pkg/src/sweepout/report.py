"""JSON reports and colored PLY export."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

SCHEMA_VERSION = "1.0"
DIGITS = 12


def _num(x: float):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return float(f"{x:.{DIGITS}g}")


def normalize(obj):
    """Round floats to 12 significant digits and turn containers into plain
    JSON types (non-finite floats become strings)."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [normalize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def certificates_dict(certs) -> list:
    return [c.as_dict() for c in certs]


def slice_dict(cert) -> dict:
    return {
        "annulus_area_g": cert.annulus_area_g,
        "annulus_area_g0": cert.annulus_area_g0,
        "chosen_t": cert.chosen_t,
        "cut_length_g": cert.cut_length_g,
        "bound": cert.bound,
        "ratio": cert.ratio,
        "distortion": cert.distortion,
        "tol_slice": cert.tol,
        "candidates": cert.n_candidates,
    }


def thin_dict(dec) -> dict:
    return {
        "r": dec.r,
        "alpha": dec.alpha,
        "pieces": len(dec.pieces),
        "centers": [int(p) for _, p in dec.pieces],
        "piece_faces": [len(d) for d, _ in dec.pieces],
        "boundary": dec.boundary_total_g,
        "boundary_bound": dec.boundary_bound,
        "multiplicity": dec.multiplicity_max,
        "multiplicity_bound": dec.multiplicity_bound,
        "max_width_bound": max(dec.width_bounds, default=0.0),
        "forced_steps": dec.forced_steps,
        "area_g": dec.area_g,
        "area_g0": dec.area_g0,
    }


def thick_dict(dec) -> dict:
    from .thick import tree_nested

    return {
        "k": dec.k,
        "tree": tree_nested(dec),
        "c_emp": dec.c_emp,
        "boundary": dec.boundary_total_g,
        "claim_bound": dec.claim_bound,
        "leaves": len(dec.leaves),
        "leaf_ids": [a or "root" for a in dec.leaf_ids],
        "cuts": [
            {"id": a or "root", "sigma": c.sigma_length_g, "balance": c.balance, "c_ratio": c.c_ratio,
             "family": c.family}
            for a, c in zip(dec.cut_ids, dec.cuts)
        ],
        "normalization": dec.normalization,
        "unsplittable": [a or "root" for a in dec.unsplittable],
        "area_g": dec.area_g,
        "area_g0": dec.area_g0,
    }


def surface_dict(surface) -> dict:
    return {
        "vertices": surface.n_vertices,
        "faces": surface.n_faces,
        "area_g": float(surface.face_area_g.sum()),
        "area_g0": float(surface.face_area_g0.sum()),
        "max_edge_g0": surface.max_edge_length_g0,
        "distortion": surface.distortion,
        "euler_characteristic": surface.euler_characteristic,
    }


def bound_report_dict(report, surface=None) -> dict:
    """Fixed-schema dictionary for a :class:`~sweepout.pipeline.BoundReport`."""
    thick = []
    for part in report.thick:
        entry = {"center": part.center, "k_j": part.k_j, "budget": part.budget}
        if part.decomposition is None:
            entry.update({"tree": None, "c_emp": 0.0, "boundary": 0.0, "leaves": 1})
        else:
            entry.update(thick_dict(part.decomposition))
        thick.append(entry)
    d = {
        "schema_version": SCHEMA_VERSION,
        "k": report.k,
        "mode": report.mode,
        "constants": report.constants,
        "schedule": {"r_k": report.schedule.r_k, "alpha_k": report.schedule.alpha_k, "k_bar": report.schedule.k_bar},
        "area_g": report.area_g,
        "area_g0": report.area_g0,
        "curvature": report.curvature,
        "split": {"m": report.split.m, "boundary": report.split.boundary_total_g,
                  "cut_lengths": report.split.cut_lengths},
        "thick": thick,
        "thin": thin_dict(report.thin) if report.thin is not None else None,
        "pieces": len(report.pieces),
        "addends": [report.addends[k] for k in ("thick_boundary", "split_boundary", "thin_boundary", "k_max_width")],
        "addend_names": ["thick_boundary", "split_boundary", "thin_boundary", "k_max_width"],
        "total": report.total,
        "theorem_value": report.theorem_value,
        "certificates": certificates_dict(report.certificates),
        "pass": report.passed,
    }
    if surface is not None:
        d["surface"] = surface_dict(surface)
    return normalize(d)


def dumps(d: dict) -> str:
    return json.dumps(normalize(d), sort_keys=True, indent=1, allow_nan=False) + "\n"


def export_json(d: dict, path) -> None:
    path = Path(path)
    try:
        path.write_text(dumps(d))
    except OSError as exc:
        raise InvalidArgument(f"cannot write {path}: {exc}") from exc


def export_report(report, path, surface=None) -> dict:
    d = bound_report_dict(report, surface)
    export_json(d, path)
    return d


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def region_ids(n_faces: int, pieces) -> np.ndarray:
    """Dense region id per face in piece order; uncovered faces share one
    extra id after the pieces."""
    ids = np.full(n_faces, -1, dtype=np.int64)
    for i, piece in enumerate(pieces):
        mask = piece.mask if hasattr(piece, "mask") else np.asarray(piece)
        if (ids[mask] >= 0).any():
            raise InvalidArgument("pieces overlap")
        ids[mask] = i
    if (ids < 0).any():
        ids[ids < 0] = len(pieces)
    _, dense = np.unique(ids, return_inverse=True)
    return dense.astype(np.int64)


PALETTE = [
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40), (148, 103, 189), (140, 86, 75),
    (227, 119, 194), (127, 127, 127), (188, 189, 34), (23, 190, 207), (174, 199, 232), (255, 187, 120),
]


def export_colored_mesh(surface, pieces, path) -> np.ndarray:
    """Write an ASCII PLY with a ``region`` id and a color per face."""
    ids = region_ids(surface.n_faces, pieces)
    pos = surface.positions
    if pos is None:
        pos = np.zeros((surface.n_vertices, 3))
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {surface.n_vertices}",
        "property float x",
        "property float y",
        "property float z",
        f"element face {surface.n_faces}",
        "property list uchar int vertex_indices",
        "property int region",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "end_header",
    ]
    lines += [f"{x:.9g} {y:.9g} {z:.9g}" for x, y, z in pos]
    for (a, b, c), rid in zip(surface.faces.tolist(), ids.tolist()):
        r, g, bl = PALETTE[rid % len(PALETTE)]
        lines.append(f"3 {a} {b} {c} {rid} {r} {g} {bl}")
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise InvalidArgument(f"cannot write {path}: {exc}") from exc
    return ids


def read_ply_regions(path) -> tuple[int, np.ndarray]:
    """Face count and region ids from a PLY written by :func:`export_colored_mesh`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    nv = nf = 0
    for i, line in enumerate(lines):
        if line.startswith("element vertex"):
            nv = int(line.split()[-1])
        elif line.startswith("element face"):
            nf = int(line.split()[-1])
        elif line == "end_header":
            body = lines[i + 1:]
            break
    faces = body[nv:nv + nf]
    return nf, np.array([int(f.split()[4]) for f in faces], dtype=np.int64)
