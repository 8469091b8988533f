"""Geometry of the directed square lattice.

Sites are plain ``(a, b)`` integer tuples in unrotated coordinates.  The
model is usually drawn rotated by +45 degrees, so instead of rotating
anything we work with two derived integers: the height ``a + b`` (points
"up" in the rotated picture) and the horizontal deviation ``b - a``.
Directed edges go from a lower vertex to an upper vertex one height level
above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Site = tuple[int, int]
# A directed edge, stored as (lower, upper) with upper - lower in UP_STEPS.
Edge = tuple[Site, Site]

UP_STEPS = ((1, 0), (0, 1))

# Comparison slack used when a cone parameter is a non-integral float.
FLOAT_CONE_TOL = 1e-12


def height(p: Site) -> int:
    return p[0] + p[1]


def deviation(p: Site) -> int:
    return p[1] - p[0]


def up_neighbors(p: Site) -> tuple[Site, Site]:
    """The two upper endpoints of the edges whose lower vertex is ``p``."""
    a, b = p
    return (a + 1, b), (a, b + 1)


def down_neighbors(p: Site) -> tuple[Site, Site]:
    a, b = p
    return (a - 1, b), (a, b - 1)


def is_edge(lower: Site, upper: Site) -> bool:
    return (upper[0] - lower[0], upper[1] - lower[1]) in UP_STEPS


def edge(lower: Site, upper: Site) -> Edge:
    if not is_edge(lower, upper):
        raise ValueError(f"not a directed edge: {lower} -> {upper}")
    return (lower, upper)


@dataclass(frozen=True)
class ConeWedgeParams:
    """Parameters of the cone/wedge geometry used for cluster flatness checks.

    ``a`` is the cone slope of the separation assumption, ``K`` the offset,
    and ``b`` a generic cone parameter defaulting to ``a``.
    """

    a: float | Fraction
    K: float | Fraction = 0
    b: float | Fraction | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("cone slope a must be positive")
        if self.K < 0:
            raise ValueError("offset K must be nonnegative")
        if self.b is None:
            object.__setattr__(self, "b", self.a)
        if not self.b > 0:
            raise ValueError("cone parameter b must be positive")


def _cone_ge(lhs: int, b, rhs: int) -> bool:
    """Exact test of ``lhs >= b * rhs`` for integer lhs/rhs, rational-aware b."""
    if isinstance(b, float) and not b.is_integer():
        return lhs >= b * rhs - FLOAT_CONE_TOL
    b = Fraction(b)
    return lhs * b.denominator >= b.numerator * rhs


def in_cone(q: Site, apex: Site, b) -> bool:
    """Whether ``q`` lies in the closed double cone of parameter ``b`` at ``apex``.

    The cone opens along the height axis: |height| >= b * |deviation| for the
    separation q - apex.  Large ``b`` means a narrow, nearly vertical cone.
    """
    da, db = q[0] - apex[0], q[1] - apex[1]
    return _cone_ge(abs(da + db), b, abs(db - da))


def in_wedge(q: Site, apex: Site, b) -> bool:
    """Whether ``q`` lies on the wedge of parameter ``b`` based at ``apex``.

    The wedge is the pair of rays |height| = (b+1) * (-deviation) with
    nonpositive deviation, i.e. a "V" opening to the right of the apex.
    """
    da, db = q[0] - apex[0], q[1] - apex[1]
    h, d = da + db, db - da
    if d > 0:
        return False
    bp = b + 1 if not isinstance(b, float) else b + 1.0
    if isinstance(bp, float) and not bp.is_integer():
        return abs(abs(h) - bp * (-d)) <= FLOAT_CONE_TOL
    bp = Fraction(bp)
    return abs(h) * bp.denominator == bp.numerator * (-d)


def left_of_wedge(q: Site, apex: Site, b) -> bool:
    """Whether ``q`` is in the same component as apex + (-1, 1) w.r.t. the wedge.

    Everything except the open interior of the rightward "V" counts as left.
    """
    da, db = q[0] - apex[0], q[1] - apex[1]
    h, d = da + db, db - da
    if d >= 0:
        return True
    bp = b + 1
    if isinstance(bp, float) and not bp.is_integer():
        return abs(h) >= bp * (-d) - FLOAT_CONE_TOL
    bp = Fraction(bp)
    return abs(h) * bp.denominator >= bp.numerator * (-d)


def cluster_assumption_holds(sites, params: ConeWedgeParams) -> bool:
    """Check the cone-separation assumption on a finite set of sites.

    For every ordered pair of distinct sites P, Q the separation Q - P,
    shifted down by (K, K), must avoid the upward branch of the a-cone.
    Running over ordered pairs covers the point-reflected condition as well.
    """
    pts = list(sites)
    if not pts:
        raise ValueError("cluster must be non-empty")
    a, k = params.a, params.K
    inexact = any(isinstance(v, float) and not v.is_integer() for v in (a, k))
    if not inexact:
        a, k = Fraction(a), Fraction(k)
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            if i == j:
                continue
            h = height(q) - height(p)
            d = abs(deviation(q) - deviation(p))
            # violation: h - 2K >= a * |d|  (Q in the shifted upward cone of P)
            if inexact:
                if h - 2 * k >= a * d - FLOAT_CONE_TOL:
                    return False
            elif h - 2 * k >= a * d:
                return False
    return True
