"""Upper bound for the first width of a domain."""

from __future__ import annotations

import math

from .errors import InvalidArgument


def width_one_bound(area_g: float, area_g0: float, K: float, n: int = 2) -> float:
    """``K * area_g^((n-1)/n) * (1 + area_g0^(1/n))``."""
    if area_g < 0 or area_g0 < 0:
        raise InvalidArgument("areas must be nonnegative")
    if not K > 0:
        raise InvalidArgument("K must be positive")
    return K * area_g ** ((n - 1) / n) * (1.0 + area_g0 ** (1.0 / n))


def width_one_bound_thick(area_g: float, K: float, n: int = 2) -> float:
    """``K * area_g^((n-1)/n)``, valid for domains of g0-area at most one."""
    if area_g < 0:
        raise InvalidArgument("areas must be nonnegative")
    return K * math.pow(area_g, (n - 1) / n)
