"""Admissible binary trees, (tree, lambda)-decompositions and the supremal
cost functional.

Nodes are binary strings; the root is the empty string and is implicit, so
its children are ``"0"`` and ``"1"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import Certificate, check
from .constants import lambda_tilde
from .errors import InvalidArgument

SUM_RTOL = 1e-12


def children(alpha: str) -> tuple[str, str]:
    return alpha + "0", alpha + "1"


def validate_tree(nodes) -> tuple[bool, list[str]]:
    """Check prefix-closure and the sibling rule; returns ``(ok, violations)``."""
    nodes = set(nodes)
    violations = []
    for alpha in sorted(nodes, key=lambda a: (len(a), a)):
        if not alpha or set(alpha) - {"0", "1"}:
            violations.append(f"{alpha!r}: not a nonempty binary string")
            continue
        for j in range(1, len(alpha)):
            if alpha[:j] not in nodes:
                violations.append(f"{alpha}: prefix {alpha[:j]} missing")
                break
        sibling = alpha[:-1] + ("1" if alpha[-1] == "0" else "0")
        if sibling not in nodes:
            violations.append(f"{alpha}: sibling {sibling} missing")
    return not violations, violations


@dataclass(frozen=True)
class AdmissibleTree:
    nodes: frozenset
    values: dict
    root_value: float

    @property
    def leaves(self) -> list[str]:
        """Boundary nodes: members with no children (the root if empty)."""
        return sorted((a for a in self.nodes if a + "0" not in self.nodes), key=lambda a: (len(a), a))

    @property
    def interior(self) -> list[str]:
        return sorted((a for a in self.nodes if a + "0" in self.nodes), key=lambda a: (len(a), a))

    def value(self, alpha: str) -> float:
        return self.root_value if alpha == "" else self.values[alpha]


@dataclass
class DecompositionWitness:
    tree: AdmissibleTree
    lam: float
    checks: list[Certificate] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks)


def validate_decomposition(X: float, values: dict, lam: float, strict_root: bool = False) -> DecompositionWitness:
    """Check every (tree, lambda)-decomposition rule, one certificate per rule
    per node.

    The root's children must exceed ``lam * X`` strictly when
    ``strict_root`` is set; by default the root uses the same ``>=`` rule as
    interior nodes.
    """
    ok, violations = validate_tree(values.keys())
    if not ok:
        raise InvalidArgument("tree is not admissible: " + "; ".join(violations))
    if not 0 < lam <= 0.5:
        raise InvalidArgument("lambda must lie in (0, 1/2]")
    tree = AdmissibleTree(frozenset(values), dict(values), float(X))
    checks = [check("root >= 1", X, 1.0, ">=")]
    for alpha in [""] + tree.interior:
        if alpha + "0" not in tree.nodes:
            continue
        parent = tree.value(alpha)
        a0, a1 = children(alpha)
        x0, x1 = values[a0], values[a1]
        label = alpha or "root"
        checks.append(check(f"{label}: sum of children", x0 + x1, parent, "==", rtol=SUM_RTOL))
        rel = ">" if (alpha == "" and strict_root) else ">="
        checks.append(check(f"{a0}: balance", x0, lam * parent, rel))
        checks.append(check(f"{a1}: balance", x1, lam * parent, rel))
    for alpha in sorted(tree.nodes, key=lambda a: (len(a), a)):
        checks.append(check(f"{alpha}: value >= 1", values[alpha], 1.0, ">=", rtol=0.0))
    return DecompositionWitness(tree, lam, checks)


def decomposition_cost(witness: DecompositionWitness, n: int) -> float:
    """``X^p + sum over all nodes X_alpha^p`` with ``p = (n-1)/n``."""
    p = (n - 1) / n
    t = witness.tree
    return t.root_value**p + sum(v**p for v in t.values.values())


def interior_cost(witness: DecompositionWitness, n: int) -> float:
    """Root plus interior nodes only (leaves excluded)."""
    p = (n - 1) / n
    t = witness.tree
    return t.root_value**p + sum(t.values[a] ** p for a in t.interior)


# supremal cost ------------------------------------------------------------

_TABLES: dict = {}


def _table(lam: float, n: int, h: float, m_max: int) -> np.ndarray:
    """Best subtree cost for node value ``m * h`` (interior ``>=`` rule).

    Entries below the value-1 threshold are ``-inf``. Every entry is realised
    by an actual decomposition on the grid, so it is a lower bound.
    """
    key = (lam, n, h)
    table = _TABLES.get(key)
    if table is not None and len(table) > m_max:
        return table
    p = (n - 1) / n
    m1 = math.ceil(1.0 / h - 1e-9)
    start = 0 if table is None else len(table)
    new = np.full(m_max + 1, -np.inf)
    if table is not None:
        new[:start] = table
    for m in range(start, m_max + 1):
        if m < m1:
            continue
        best = (m * h) ** p
        lo = max(math.ceil(lam * m - 1e-12), m1)
        hi = m - lo
        if lo <= hi:
            a = np.arange(lo, hi + 1)
            best += max(0.0, float(np.max(new[a] + new[m - a])))
        new[m] = best
    _TABLES[key] = new
    return new


def supremal_cost(X: float, lam: float, n: int, resolution: float = 0.01, strict_root: bool = False) -> float:
    """Certified lower approximation of the supremal decomposition cost.

    Dynamic programming over node values on the grid ``resolution * Z``.
    The root keeps its exact value; its second child is evaluated at the grid
    point below it, which never overstates because the cost functional is
    nondecreasing (scaling a decomposition up preserves every rule).
    """
    if not resolution > 0:
        raise InvalidArgument("resolution must be positive")
    if X < 1:
        raise InvalidArgument("X must be at least 1")
    if not 0 < lam <= 0.5:
        raise InvalidArgument("lambda must lie in (0, 1/2]")
    p = (n - 1) / n
    h = float(resolution)
    m_x = math.floor(X / h + 1e-9)
    if m_x * h > X:
        m_x -= 1
    table = _table(float(lam), int(n), h, m_x)
    m1 = math.ceil(1.0 / h - 1e-9)
    best = 0.0
    for a in range(m1, m_x + 1):
        first = a * h
        second = X - first
        if second < 1.0:
            break
        if strict_root:
            if not (first > lam * X and second > lam * X):
                continue
        elif not (first >= lam * X * (1 - 1e-15) and second >= lam * X * (1 - 1e-15)):
            continue
        j = m_x - a
        other = second**p
        if j >= m1:
            other = max(other, table[j])
        best = max(best, table[a] + other)
    return X**p + best


def check_linear_growth(X: float, lam: float, n: int, resolution: float = 0.01,
                        strict_root: bool = False) -> Certificate:
    """Certificate for ``cost(X) + lt * X^p <= (1 + lt) X``."""
    lt = lambda_tilde(lam, n)
    p = (n - 1) / n
    cost = supremal_cost(X, lam, n, resolution, strict_root)
    return Certificate(
        f"linear growth X={X:g} lambda={lam:g} n={n}",
        cost + lt * X**p,
        (1 + lt) * X,
        "<=",
        constants={"lambda": lam, "lambda_tilde": lt, "n": n, "resolution": resolution, "cost": cost},
        rtol=1e-12,
    )
