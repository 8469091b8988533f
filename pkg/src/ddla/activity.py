"""Exact escape probabilities, site activities, and line-sum identities.

The activity of a vacant site is the rate at which the growth dynamics adds
it: the probability that an upward symmetric walk started there (starting
point included) avoids the cluster forever, times the number of cluster
edges pointing into the site.  Everything here is computed by finite
level-by-level sweeps; path mass halves at each step, so all quantities are
dyadic rationals and are kept as exact ``Fraction`` values while the
cluster height stays at or below ``EXACT_HEIGHT_LIMIT``.  Above that the
same sweeps run in floating point (denominators grow as 2**height) and
comparisons should allow a 1e-12 tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cluster import Cluster
from .exceptions import FrozenClusterError
from .lattice import Site, down_neighbors, height, up_neighbors

EXACT_HEIGHT_LIMIT = 64
FLOAT_TOL = 1e-12


def _as_cluster(c) -> Cluster:
    return c if isinstance(c, Cluster) else Cluster.from_sites(c)


def _unit(*heights: int):
    exact = max(heights) <= EXACT_HEIGHT_LIMIT
    return (Fraction(1) if exact else 1.0), exact


def edge_multiplicity(p: Site, cluster: Cluster) -> int:
    """Number of cluster edges whose upper vertex is ``p`` (0, 1 or 2)."""
    return sum(1 for q in down_neighbors(p) if q in cluster.sites)


def escape_probability(p: Site, cluster) -> Fraction | float:
    """Probability that an upward walk from ``p`` never lands in the cluster.

    Forward sweep: propagate path mass from height(p) up to one level above
    the cluster top, halving towards each upper neighbor and killing mass
    that lands on occupied sites.  An occupied starting point escapes with
    probability zero; a vacant start above the cluster top escapes surely.
    """
    c = _as_cluster(cluster)
    one, _ = _unit(c.hmax)
    if p in c.sites:
        return one * 0
    if height(p) > c.hmax:
        return one
    masses = {p: one}
    for _lev in range(height(p), c.hmax + 1):
        nxt: dict[Site, Fraction | float] = {}
        for q, m in masses.items():
            half = m / 2
            for u in up_neighbors(q):
                if u not in c.sites:
                    nxt[u] = nxt.get(u, 0) + half
        masses = nxt
        if not masses:
            break
    return sum(masses.values(), one * 0)


def escape_table(cluster) -> dict[Site, Fraction | float]:
    """Escape probabilities of all growth-edge upper vertices, in one sweep.

    Backward recursion on the deficit 1 - escape, which is supported on the
    componentwise down-set of the cluster: deficit is 1 on occupied sites
    and averages over the two upper neighbors elsewhere.
    """
    c = _as_cluster(cluster)
    one, _ = _unit(c.hmax)
    wanted = set(c.growth)
    out: dict[Site, Fraction | float] = {}
    by_level: dict[int, list[Site]] = {}
    for p in c.sites:
        by_level.setdefault(height(p), []).append(p)
    wanted_by_level: dict[int, list[Site]] = {}
    lowest = c.hmax + 1
    for p in wanted:
        h = height(p)
        if h > c.hmax:
            out[p] = one
        else:
            wanted_by_level.setdefault(h, []).append(p)
            lowest = min(lowest, h)
    deficit: dict[Site, Fraction | float] = {}
    for lev in range(c.hmax, lowest - 1, -1):
        cands = set(by_level.get(lev, ()))
        for q in deficit:
            cands.update(down_neighbors(q))
        nxt: dict[Site, Fraction | float] = {}
        for q in cands:
            if q in c.sites:
                nxt[q] = one
            else:
                u1, u2 = up_neighbors(q)
                v = (deficit.get(u1, 0) + deficit.get(u2, 0)) / 2
                if v:
                    nxt[q] = v
        deficit = nxt
        for p in wanted_by_level.get(lev, ()):
            out[p] = one - deficit.get(p, 0)
    return out


def site_activity(p: Site, cluster) -> Fraction | float:
    """Escape probability times the number of cluster edges into ``p``."""
    c = _as_cluster(cluster)
    mult = edge_multiplicity(p, c)
    if mult == 0:
        one, _ = _unit(c.hmax)
        return one * 0
    return escape_probability(p, c) * mult


@dataclass
class ActivityDistribution:
    """Per-site activities, their total, and the normalized next-site law."""

    entries: dict[Site, Fraction | float]
    total: Fraction | float
    law: dict[Site, Fraction | float]
    exact: bool


def activity_distribution(cluster) -> ActivityDistribution:
    c = _as_cluster(cluster)
    one, exact = _unit(c.hmax)
    table = escape_table(c)
    entries: dict[Site, Fraction | float] = {}
    for site in sorted(c.growth):
        act = table[site] * edge_multiplicity(site, c)
        if act:
            entries[site] = act
    total = sum(entries.values(), one * 0)
    if not total > 0:
        raise FrozenClusterError("frozen cluster: total activity is zero")
    law = {s: v / total for s, v in entries.items()}
    return ActivityDistribution(entries=entries, total=total, law=law, exact=exact)


def _hit_probs_at_level(cluster, k: int) -> dict[Site, Fraction | float]:
    """P[a downward walk from the site ever lands in the cluster], at height k.

    Upward recursion with absorption: probability 1 on occupied sites,
    average of the two lower neighbors elsewhere; the support is the
    componentwise up-set of the cluster, where hitting is possible at all.
    """
    c = _as_cluster(cluster)
    one, _ = _unit(max(c.hmax, k))
    by_level: dict[int, list[Site]] = {}
    for p in c.sites:
        by_level.setdefault(height(p), []).append(p)
    probs: dict[Site, Fraction | float] = {}
    for lev in range(c.hmin, k + 1):
        cands = set(by_level.get(lev, ()))
        for q in probs:
            cands.update(up_neighbors(q))
        nxt: dict[Site, Fraction | float] = {}
        for q in cands:
            if q in c.sites:
                nxt[q] = one
            else:
                d1, d2 = down_neighbors(q)
                v = (probs.get(d1, 0) + probs.get(d2, 0)) / 2
                if v:
                    nxt[q] = v
        probs = nxt
    return probs


def line_activity(cluster) -> Fraction | float:
    """Total cluster activity computed by the line formula.

    Twice the summed probability, over the sites of the top line of the
    cluster, that a downward walk from the site ever lands in the cluster.
    Independent route to ``activity_distribution(...).total``.
    """
    c = _as_cluster(cluster)
    one, _ = _unit(c.hmax)
    probs = _hit_probs_at_level(c, c.hmax)
    return 2 * sum(probs.values(), one * 0)


def line_hit_sum(cluster, k: int) -> Fraction | float:
    """Summed downward hit probability over the reachable sites of height k."""
    c = _as_cluster(cluster)
    if k < c.hmax:
        raise ValueError("line not above cluster")
    one, _ = _unit(max(c.hmax, k))
    probs = _hit_probs_at_level(c, k)
    return sum(probs.values(), one * 0)


def next_site_law_from_line(cluster, k: int | None = None) -> dict[Site, Fraction | float]:
    """Exact law of the next added site for launches from the line of height k.

    Uniform downward launches from the quadrant part of the line; mass
    absorbed on the step into the cluster is credited to the previous walk
    position, then normalized.  The law does not depend on k, which is a
    checked identity of the dynamics.
    """
    c = _as_cluster(cluster)
    if not c.origin_seeded():
        raise ValueError("line launches require an origin-seeded cluster")
    if k is None:
        k = c.hmax + 1
    if k <= c.hmax:
        raise ValueError("line not above cluster")
    one, _ = _unit(max(c.hmax, k))
    mass: dict[Site, Fraction | float] = {(x, k - x): one for x in range(k + 1)}
    absorbed: dict[Site, Fraction | float] = {}
    for _lev in range(k, c.hmin, -1):
        nxt: dict[Site, Fraction | float] = {}
        for q, m in mass.items():
            half = m / 2
            for r in down_neighbors(q):
                if r in c.sites:
                    absorbed[q] = absorbed.get(q, 0) + half
                elif r[0] >= 0 and r[1] >= 0:
                    nxt[r] = nxt.get(r, 0) + half
                # mass leaving the quadrant can never hit the cluster
        mass = nxt
    total = sum(absorbed.values(), one * 0)
    if not total > 0:
        raise FrozenClusterError("frozen cluster: no line launch can land")
    return {q: v / total for q, v in sorted(absorbed.items())}


def activity_rows(cluster) -> list[dict]:
    """Activity table rows for CSV export, exact numerators/denominators."""
    c = _as_cluster(cluster)
    table = escape_table(c)
    rows = []
    for site in sorted(c.growth):
        esc = table[site]
        mult = edge_multiplicity(site, c)
        fesc = esc if isinstance(esc, Fraction) else Fraction(esc)
        fact = fesc * mult
        rows.append(
            {
                "site_a": site[0],
                "site_b": site[1],
                "edge_multiplicity": mult,
                "escape_num": fesc.numerator,
                "escape_den": fesc.denominator,
                "activity_num": fact.numerator,
                "activity_den": fact.denominator,
            }
        )
    return rows
