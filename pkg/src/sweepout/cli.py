"""Command-line front end.

Exit codes: 0 every certificate passed, 1 some certificate failed, 2 usage or
input error, 3 resolution error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import report as rep
from .certificates import failures
from .constants import assemble_constants
from .errors import InvalidArgument, NoCutError, ResolutionError
from .length_area import slice
from .pipeline import assemble_upper_bound, constant_chain, spectrum_curve
from .surface import generate, geodesic_ball, load_files
from .thick import decompose_thick
from .thin import decompose_thin
from .trees import check_linear_growth

EXIT_OK, EXIT_CERT, EXIT_INPUT, EXIT_RES = 0, 1, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    mesh_path: str | None = None
    phi_path: str | None = None
    generate: str | None = None
    k: int | None = None
    k_list: list | None = None
    mode: str = "empirical"
    K: float = 1.0
    c: float = 1.0
    seed: int = 0


def _surface_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--mesh", help="triangle mesh in OFF format")
    src.add_argument("--generate", metavar="SPEC", help="built-in mesh: torus:N, sphere:L or genus2:N")
    p.add_argument("--phi", help="conformal factor, one value per vertex")
    p.add_argument("--phi-const", type=float, help="constant conformal factor")


def _bundle_args(p, default_mode="empirical"):
    p.add_argument("--mode", choices=["paper", "empirical"], default=default_mode)
    p.add_argument("--K", type=float, default=1.0, help="first-width constant")
    p.add_argument("--c", type=float, default=1.0, help="isoperimetric constant")
    p.add_argument("--centers", type=int, default=16, help="sample centers for measured constants")
    p.add_argument("--radii", type=int, default=8, help="sample radii for measured constants")


def _out_args(p, ply=False):
    p.add_argument("--out", help="output directory for report.json")
    if ply:
        p.add_argument("--ply", help="write the pieces as a colored PLY mesh")
    p.add_argument("--seed", type=int, default=0, help="reserved; every algorithm is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sweepout", description="Certified upper bounds for widths of surfaces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("constants", help="print the constant bundle and check its relations")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    _out_args(p)

    p = sub.add_parser("tree-verify", help="linear growth sweep of the supremal tree cost")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--xmin", type=float, default=1.0)
    p.add_argument("--xmax", type=float, default=20.0)
    p.add_argument("--step", type=float, default=0.5)
    p.add_argument("--resolution", type=float, default=0.01)
    p.add_argument("--strict-root", action="store_true")
    _out_args(p)

    p = sub.add_parser("slice", help="length-area slice around a geodesic disk")
    _surface_args(p)
    p.add_argument("--center", type=int, default=0)
    p.add_argument("--disk", type=float, required=True, help="g0-radius of the seed disk")
    p.add_argument("-r", type=float, required=True, help="slice radius")
    _out_args(p, ply=True)

    p = sub.add_parser("thin", help="decompose a conformally thin surface")
    _surface_args(p)
    p.add_argument("-r", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    _bundle_args(p)
    _out_args(p, ply=True)

    p = sub.add_parser("thick", help="recursive balanced subdivision")
    _surface_args(p)
    p.add_argument("-k", type=int, required=True)
    _bundle_args(p, default_mode="paper")
    _out_args(p, ply=True)

    p = sub.add_parser("decompose", help="full upper bound for one k")
    _surface_args(p)
    p.add_argument("-k", type=int, required=True)
    _bundle_args(p)
    _out_args(p, ply=True)

    p = sub.add_parser("curve", help="upper bounds over a list of k and the fitted exponent")
    _surface_args(p)
    p.add_argument("--k-list", required=True, help="comma-separated ascending integers")
    _bundle_args(p)
    _out_args(p)
    return parser


def _load_surface(args):
    if args.generate:
        surface = generate(args.generate)
        if args.phi:
            surface = surface.with_phi(np.loadtxt(args.phi, ndmin=1))
    else:
        if not Path(args.mesh).is_file():
            raise InvalidArgument(f"mesh file not found: {args.mesh}")
        if args.phi and not Path(args.phi).is_file():
            raise InvalidArgument(f"phi file not found: {args.phi}")
        surface = load_files(args.mesh, args.phi)
    if args.phi_const is not None:
        if args.phi:
            raise InvalidArgument("--phi and --phi-const are exclusive")
        surface = surface.with_phi(np.full(surface.n_vertices, args.phi_const))
    return surface


def _bundle(args, surface=None, n=2):
    kw = {}
    if args.mode == "empirical":
        kw = {"n_centers": args.centers, "n_radii": args.radii}
    return assemble_constants(n=n, K=args.K, c=args.c, mode=args.mode, surface=surface, **kw)


def _config(args) -> dict:
    cfg = RunConfig(args.subcommand)
    for name in ("mesh", "phi", "generate"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, {"mesh": "mesh_path", "phi": "phi_path"}.get(name, name), str(val))
    cfg.k = getattr(args, "k", None)
    if getattr(args, "k_list", None):
        cfg.k_list = [int(x) for x in args.k_list.split(",")]
    cfg.mode = getattr(args, "mode", "paper")
    cfg.K = getattr(args, "K", 1.0)
    cfg.c = getattr(args, "c", 1.0)
    cfg.seed = args.seed
    d = asdict(cfg)
    if getattr(args, "phi_const", None) is not None:
        d["phi_const"] = args.phi_const
    return d


def _emit(args, payload: dict, certs) -> int:
    payload = dict(payload)
    payload["schema_version"] = rep.SCHEMA_VERSION
    payload["config"] = _config(args)
    payload.setdefault("certificates", rep.certificates_dict(certs))
    payload["pass"] = not failures(certs)
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise InvalidArgument(f"cannot create {out}: {exc}") from exc
        rep.export_json(payload, out / "report.json")
    else:
        sys.stdout.write(rep.dumps(payload))
    failed = failures(certs)
    if failed:
        names = ", ".join(c.name for c in failed[:5])
        more = f" (+{len(failed) - 5} more)" if len(failed) > 5 else ""
        print(f"CERT-FAIL: {len(failed)} certificate(s) failed: {names}{more}", file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def _cmd_constants(args) -> int:
    bundle = assemble_constants(n=args.n, K=args.K, c=args.c, mode="paper")
    certs = constant_chain(bundle)
    return _emit(args, {"constants": bundle.as_dict()}, certs)


def _cmd_tree_verify(args) -> int:
    if args.step <= 0 or args.xmax < args.xmin:
        raise InvalidArgument("need step > 0 and xmax >= xmin")
    xs = np.arange(args.xmin, args.xmax + 0.5 * args.step, args.step)
    certs = [check_linear_growth(float(x), args.lam, args.n, args.resolution, args.strict_root) for x in xs]
    return _emit(args, {"lambda": args.lam, "n": args.n, "points": len(certs)}, certs)


def _cmd_slice(args) -> int:
    surface = _load_surface(args)
    if not 0 <= args.center < surface.n_vertices:
        raise InvalidArgument("center vertex out of range")
    D = geodesic_ball(surface, args.center, args.disk)
    if D.is_empty():
        raise InvalidArgument("seed disk contains no face; increase --disk")
    V, cert = slice(surface, surface.whole(), D, args.r)
    certs = [cert.certificate()]
    if args.ply:
        rep.export_colored_mesh(surface, [V], args.ply)
    return _emit(args, {"slice": rep.slice_dict(cert), "surface": rep.surface_dict(surface)}, certs)


def _cmd_thin(args) -> int:
    surface = _load_surface(args)
    bundle = _bundle(args, surface)
    dec = decompose_thin(surface, surface.whole(), args.r, args.alpha, bundle)
    if args.ply:
        rep.export_colored_mesh(surface, dec.domains, args.ply)
    payload = {"thin": rep.thin_dict(dec), "constants": bundle.as_dict(), "surface": rep.surface_dict(surface)}
    return _emit(args, payload, dec.certificates)


def _cmd_thick(args) -> int:
    surface = _load_surface(args)
    bundle = _bundle(args, surface)
    dec = decompose_thick(surface, surface.whole(), args.k, bundle)
    if args.ply:
        rep.export_colored_mesh(surface, dec.leaves, args.ply)
    payload = {"thick": rep.thick_dict(dec), "constants": bundle.as_dict(), "surface": rep.surface_dict(surface)}
    return _emit(args, payload, dec.certificates)


def _cmd_decompose(args) -> int:
    surface = _load_surface(args)
    bundle = _bundle(args, surface)
    try:
        report = assemble_upper_bound(surface, args.k, bundle)
    except ResolutionError:
        if bundle.mode == "paper":
            # the constants still compose; record that before reporting the error
            certs = constant_chain(bundle)
            _emit(args, {"constants": bundle.as_dict(), "k": args.k, "mode": bundle.mode,
                         "surface": rep.surface_dict(surface)}, certs)
        raise
    if args.ply:
        rep.export_colored_mesh(surface, report.pieces, args.ply)
    payload = rep.bound_report_dict(report, surface)
    return _emit(args, payload, report.certificates)


def _cmd_curve(args) -> int:
    surface = _load_surface(args)
    bundle = _bundle(args, surface)
    try:
        ks = [int(x) for x in args.k_list.split(",")]
    except ValueError:
        raise InvalidArgument("--k-list must be comma-separated integers") from None
    curve = spectrum_curve(surface, ks, bundle)
    certs = [c for r in curve.reports.values() for c in r.certificates]
    payload = {
        "rows": [{"k": r.k, "total": r.total, "theorem_value": r.theorem_value, "substituted": r.substituted}
                 for r in curve.rows],
        "slope": curve.slope,
        "k_bar": curve.k_bar,
        "constants": bundle.as_dict(),
        "surface": rep.surface_dict(surface),
        "certificates": [],
    }
    payload["certificates"] = rep.certificates_dict(certs)
    return _emit(args, payload, certs)


COMMANDS = {
    "constants": _cmd_constants,
    "tree-verify": _cmd_tree_verify,
    "slice": _cmd_slice,
    "thin": _cmd_thin,
    "thick": _cmd_thick,
    "decompose": _cmd_decompose,
    "curve": _cmd_curve,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.subcommand](args)
    except ResolutionError as exc:
        print(f"RES-ERR: {exc}", file=sys.stderr)
        return EXIT_RES
    except (InvalidArgument, OSError, ValueError) as exc:
        print(f"INPUT-ERR: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoCutError as exc:
        print(f"CERT-FAIL: {exc}", file=sys.stderr)
        return EXIT_CERT


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
