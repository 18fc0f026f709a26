"""Explicit constants: hyperbolic ball volumes, covering constants and the
per-k schedule.

Every constant is a pure function of its inputs. ``K`` (first-width constant)
and ``c`` (isoperimetric constant) have no published numeric values, so they
are configuration inputs defaulting to 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidArgument

logger = logging.getLogger(__name__)

QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-14
GRID_POINTS = 10_000
NEAR_INTEGER = 1e-9


def sphere_area(n: int) -> float:
    """Area of the unit (n-1)-sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def euclidean_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float, max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with Richardson correction.

    ``tol`` is an absolute tolerance on the whole interval; it is split in half
    at each bisection.
    """

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(lo, hi, fa, fm, fb, whole, tol, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(lo, mid, fa, flm, fm, left, tol / 2, depth + 1) + recurse(
            mid, hi, fm, frm, fb, right, tol / 2, depth + 1
        )

    if b == a:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


def _check_dim(n: int) -> None:
    if int(n) != n or n < 2:
        raise InvalidArgument(f"dimension must be an integer >= 2, got {n}")


@lru_cache(maxsize=None)
def hyperbolic_ball_volume(r: float, n: int) -> float:
    """Volume of a radius-``r`` geodesic ball in hyperbolic n-space.

    ``sphere_area(n) * int_0^r sinh(t)^(n-1) dt`` by adaptive Simpson. The
    tolerance is absolute 1e-12 or relative 1e-14, whichever is looser, since
    the integrand grows like exp((n-1) r).
    """
    _check_dim(n)
    if r < 0:
        raise InvalidArgument("radius must be nonnegative")
    if r == 0:
        return 0.0
    p = n - 1
    # crude magnitude for the relative tolerance: integral <= r * sinh(r)^p
    scale = r * math.sinh(r) ** p
    tol = max(QUAD_ABS_TOL, QUAD_REL_TOL * scale)
    return sphere_area(n) * adaptive_simpson(lambda t: math.sinh(t) ** p, 0.0, float(r), tol)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _volumes_vectorized(radii: np.ndarray, n: int, panels: int = 16) -> np.ndarray:
    """Composite Gauss-Legendre volumes for many radii (grid spot checks)."""
    radii = np.asarray(radii, dtype=float)
    u = (_GL_NODES + 1.0) / 2.0
    w = _GL_WEIGHTS / 2.0
    edges = np.linspace(0.0, 1.0, panels + 1)
    total = np.zeros_like(radii)
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = lo + (hi - lo) * u
        vals = np.sinh(radii[:, None] * x[None, :]) ** (n - 1)
        total += (hi - lo) * (vals @ w)
    return sphere_area(n) * radii * total


def volume_ratio(t: float, n: int) -> float:
    return hyperbolic_ball_volume(4.5 * t, n) / hyperbolic_ball_volume(0.5 * t, n)


@dataclass(frozen=True)
class CoveringValue:
    value: int
    ratio_at_endpoint: float
    near_integer: bool
    monotone_on_grid: bool


@lru_cache(maxsize=None)
def covering_detail(r: float, n: int) -> CoveringValue:
    """Covering constant with the diagnostics recorded by certificates."""
    _check_dim(n)
    if not r > 0:
        raise InvalidArgument("covering radius must be positive")
    grid = np.geomspace(r * 1e-8, r, GRID_POINTS)
    ratios = _volumes_vectorized(4.5 * grid, n) / _volumes_vectorized(0.5 * grid, n)
    monotone = bool(np.all(np.diff(ratios) >= -1e-9 * ratios[1:]))
    end = volume_ratio(r, n)
    best = max(int(math.floor(end)), int(np.floor(ratios.max() * (1 - 1e-12))))
    near = abs(end - round(end)) < NEAR_INTEGER * max(1.0, end)
    if near:
        logger.warning("covering ratio %.15g at r=%g is within %g of an integer", end, r, NEAR_INTEGER)
    if not monotone:
        logger.warning("volume ratio not monotone on the grid for r=%g, n=%d", r, n)
    return CoveringValue(1 + best, end, near, monotone)


def covering_constant(r: float, n: int) -> int:
    """Number of radius-s balls covering any radius-4s ball, for all s <= r,
    under Ricci >= -(n-1): ``max_{0<t<=r} 1 + floor(v(9t/2)/v(t/2))``.
    """
    return covering_detail(float(r), int(n)).value


@lru_cache(maxsize=None)
def c0_constant(n: int) -> float:
    """``sup_{0<r<10} v(r, n) / r^n``; the ratio increases, so the sup is the
    limit at r = 10. The grid check certifies the monotonicity numerically.
    """
    _check_dim(n)
    grid = np.linspace(1e-3, 10.0, 2001)
    ratios = _volumes_vectorized(grid, n) / grid**n
    if not np.all(np.diff(ratios) > 0):
        logger.warning("v(r,%d)/r^%d not increasing on the grid", n, n)
    return hyperbolic_ball_volume(10.0, n) / 10.0**n


def lambda_tilde(lam: float, n: int) -> float:
    """``1 / (lam^p + (1-lam)^p - 1)`` with ``p = (n-1)/n``."""
    _check_dim(n)
    if not 0 < lam <= 0.5:
        raise InvalidArgument(f"lambda must lie in (0, 1/2], got {lam}")
    p = (n - 1) / n
    return 1.0 / (lam**p + (1 - lam) ** p - 1.0)


@dataclass
class ConstantBundle:
    n: int
    K: float
    c: float
    mode: str
    C0: float
    lambda_tilde_50: float
    K1: float
    C2: float
    C3: float
    C4: float
    covering: Callable[[float], int] = field(repr=False)
    measured: dict = field(default_factory=dict)

    def C_of(self, r: float) -> int:
        return self.covering(r)

    def C1_of(self, r: float) -> float:
        """Thin-part constant ``C(r/2) C(r) + (4 C0 + 1) K C(r)``."""
        return self.C_of(r / 2) * self.C_of(r) + (4 * self.C0 + 1) * self.K * self.C_of(r)

    def as_dict(self) -> dict:
        out = {
            "n": self.n,
            "K": self.K,
            "c": self.c,
            "mode": self.mode,
            "C0": self.C0,
            "C(1/2)": self.C_of(0.5),
            "C(1)": self.C_of(1.0),
            "C1(1)": float(self.C1_of(1.0)),
            "lambda_tilde_50": self.lambda_tilde_50,
            "K1": self.K1,
            "C2": self.C2,
            "C3": self.C3,
            "C4": self.C4,
        }
        out.update({f"measured.{k}": v for k, v in sorted(self.measured.items())})
        return out


def _chain(n, K, c, C0, covering, mode, measured=None) -> ConstantBundle:
    lt = lambda_tilde(1.0 / 50**n, n)
    K1 = 2.0 * c * (1.0 + lt)
    C2 = 50**n * K + K1
    C4 = 5.0 * C0 * (K + covering(0.5)) * covering(1.0)
    C3 = 4.0 * C2 + 13.0 * C0 * covering(1.0) * C4
    return ConstantBundle(n, K, c, mode, float(C0), lt, K1, C2, float(C3), float(C4), covering, measured or {})


def assemble_constants(n: int = 2, K: float = 1.0, c: float = 1.0, mode: str = "paper",
                       surface=None, **measure_kw) -> ConstantBundle:
    """Build the constant bundle.

    In ``empirical`` mode C0 and C(r) are measured on ``surface`` (see
    :func:`sweepout.empirical.measure_constants`); otherwise the hyperbolic
    comparison formulas are used.
    """
    _check_dim(n)
    if not K > 0 or not c > 0:
        raise InvalidArgument("K and c must be positive")
    if mode == "paper":
        return _chain(n, float(K), float(c), c0_constant(n), lambda r: covering_constant(r, n), mode)
    if mode == "empirical":
        if surface is None:
            raise InvalidArgument("empirical mode requires a surface")
        if n != 2:
            raise InvalidArgument("empirical constants are measured on surfaces (n = 2)")
        from .empirical import measure_constants

        m = measure_constants(surface, **measure_kw)
        return _chain(n, float(K), float(c), m.C0, m.covering, mode, m.summary())
    raise InvalidArgument(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class Schedule:
    r_k: float
    alpha_k: float
    k_bar: int


def schedule_parameters(area_g: float, k: int, bundle: ConstantBundle, area_g0: float | None = None) -> Schedule:
    """Radius, area threshold and small-k cutoff for the k-th bound.

    ``paper`` mode: ``r_k = (area / (2 k C0 C(1)))^(1/n) / 4``. Empirical mode
    picks the radius whose comparison ball has g0-area ``area_g0 / k``:
    ``r_k = (area_g0 / (k C0))^(1/n)``.
    """
    if k < 1 or int(k) != k:
        raise InvalidArgument("k must be a positive integer")
    if not area_g > 0:
        raise InvalidArgument("area must be positive")
    n = bundle.n
    C1 = bundle.C_of(1.0)
    if bundle.mode == "paper":
        r_k = 0.25 * (area_g / (2.0 * k * bundle.C0 * C1)) ** (1.0 / n)
    else:
        a0 = area_g if area_g0 is None else area_g0
        r_k = (a0 / (k * bundle.C0)) ** (1.0 / n)
    alpha_k = area_g / k
    k_bar = int(math.floor(area_g / (2.0 * C1))) + 1
    return Schedule(r_k, alpha_k, k_bar)
