"""Growing occupancy sets with incrementally maintained aggregates."""

from __future__ import annotations

from .lattice import Site, deviation, down_neighbors, height, up_neighbors


class Cluster:
    """A finite set of occupied sites plus derived growth structure.

    Maintained incrementally under single additions: site count, height and
    deviation suprema, and the growth-edge index.  The index maps each
    vacant upper vertex to the number of cluster edges pointing into it
    (1 or 2), so its weighted total is the number of growth edges.
    """

    __slots__ = (
        "sites",
        "order",
        "hmax",
        "hmin",
        "dmax",
        "dabs",
        "growth",
        "growth_total",
    )

    def __init__(self):
        self.sites: set[Site] = set()
        self.order: list[Site] = []
        self.hmax = 0
        self.hmin = 0
        self.dmax = 0
        self.dabs = 0
        self.growth: dict[Site, int] = {}
        self.growth_total = 0

    @classmethod
    def from_sites(cls, sites) -> "Cluster":
        c = cls()
        for p in sites:
            if p not in c.sites:
                c.add(p)
        return c

    @classmethod
    def seed(cls) -> "Cluster":
        """The origin-seeded singleton cluster."""
        return cls.from_sites([(0, 0)])

    def __contains__(self, p: Site) -> bool:
        return p in self.sites

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def count(self) -> int:
        return len(self.sites)

    def add(self, p: Site) -> None:
        if p in self.sites:
            raise ValueError(f"site already occupied: {p}")
        self.sites.add(p)
        self.order.append(p)
        h, d = height(p), deviation(p)
        if len(self.sites) == 1:
            self.hmax = self.hmin = h
            self.dmax = d
            self.dabs = abs(d)
        else:
            self.hmax = max(self.hmax, h)
            self.hmin = min(self.hmin, h)
            self.dmax = max(self.dmax, d)
            self.dabs = max(self.dabs, abs(d))
        was = self.growth.pop(p, 0)
        self.growth_total -= was
        for u in up_neighbors(p):
            if u not in self.sites:
                self.growth[u] = self.growth.get(u, 0) + 1
                self.growth_total += 1

    def copy(self) -> "Cluster":
        c = Cluster()
        c.sites = set(self.sites)
        c.order = list(self.order)
        c.hmax, c.hmin = self.hmax, self.hmin
        c.dmax, c.dabs = self.dmax, self.dabs
        c.growth = dict(self.growth)
        c.growth_total = self.growth_total
        return c

    def growth_edges(self):
        """Iterate growth edges as (lower, upper) pairs, with multiplicity."""
        for upper in self.growth:
            for lower in down_neighbors(upper):
                if lower in self.sites:
                    yield (lower, upper)

    def origin_seeded(self) -> bool:
        """Occupied subset of the nonnegative quadrant containing the origin."""
        return (0, 0) in self.sites and all(
            a >= 0 and b >= 0 for (a, b) in self.sites
        )

    def recomputed_aggregates(self) -> dict:
        """Aggregates recomputed from scratch, for consistency checks."""
        heights = [height(p) for p in self.sites]
        devs = [deviation(p) for p in self.sites]
        growth: dict[Site, int] = {}
        for p in self.sites:
            for u in up_neighbors(p):
                if u not in self.sites:
                    growth[u] = growth.get(u, 0) + 1
        return {
            "count": len(self.sites),
            "hmax": max(heights),
            "hmin": min(heights),
            "dmax": max(devs),
            "dabs": max(abs(d) for d in devs),
            "growth": growth,
            "growth_total": sum(growth.values()),
        }

    def aggregates(self) -> dict:
        return {
            "count": self.count,
            "hmax": self.hmax,
            "hmin": self.hmin,
            "dmax": self.dmax,
            "dabs": self.dabs,
            "growth": dict(self.growth),
            "growth_total": self.growth_total,
        }
