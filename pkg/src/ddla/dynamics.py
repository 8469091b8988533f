"""Growth dynamics: rejection samplers, exact sampler, and clock-driven engines.

Three equivalent single-step constructions grow a cluster by one site:

* line launch: uniform start on the line just above the cluster, downward
  walk, repeat until it lands on the cluster, add the pre-landing site;
* edge launch: uniform edge with occupied lower vertex, upward walk from
  its upper vertex, add it when the walk avoids the cluster entirely;
* exact: sample the added site directly from the normalized activity law.

The continuous-time engines either thin a growth-edge-rate Poisson clock
with exact escape Bernoullis (gillespie) or replay per-edge clocks and
per-edge walks from a shared Harris system (harris).  The activation
dynamics that accepts every growth-edge ring is exposed both as directed
first-passage percolation and as the local monotone baseline.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .activity import activity_distribution, escape_probability
from .cluster import Cluster
from .exceptions import RejectionOverflowError
from .harris import HarrisSystem
from .lattice import Site, deviation, height, up_neighbors

DEFAULT_ATTEMPT_CAP = 10**6
_BATCH = 8


def as_rng(source) -> np.random.Generator:
    if isinstance(source, np.random.Generator):
        return source
    return np.random.default_rng(source)


@dataclass
class GrowthTrace:
    """Ordered record of one growth trajectory.

    ``additions`` holds (time, site, edge_lower) triples; ``edge_lower`` is
    the lower vertex of the growth edge used, or None when the sampler does
    not go through an edge (exact sampling).  Discrete traces use the step
    index as time.
    """

    mode: str
    initial: tuple[Site, ...]
    additions: list[tuple[float, Site, Site | None]]
    attempts: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def jump_times(self) -> list[float]:
        return [t for t, _, _ in self.additions]

    @property
    def size(self) -> int:
        return len(self.initial) + len(self.additions)

    def final_cluster(self) -> Cluster:
        c = Cluster.from_sites(self.initial)
        for _, site, _ in self.additions:
            c.add(site)
        return c

    def height_profile(self) -> np.ndarray:
        """Max height of the cluster after 0, 1, ..., n additions."""
        base = max(height(p) for p in self.initial)
        if not self.additions:
            return np.array([base])
        hs = np.fromiter(
            (height(s) for _, s, _ in self.additions), dtype=np.int64
        )
        return np.concatenate(([base], np.maximum.accumulate(np.maximum(hs, base))))

    def abs_dev_profile(self) -> np.ndarray:
        """Max |deviation| of the cluster after 0, 1, ..., n additions."""
        base = max(abs(deviation(p)) for p in self.initial)
        if not self.additions:
            return np.array([base])
        ds = np.fromiter(
            (abs(deviation(s)) for _, s, _ in self.additions), dtype=np.int64
        )
        return np.concatenate(([base], np.maximum.accumulate(np.maximum(ds, base))))


def validate_connectivity(trace: GrowthTrace) -> bool:
    """Every addition touches the cluster from above and times increase."""
    occupied = set(trace.initial)
    last_t = -np.inf
    for t, site, edge_lower in trace.additions:
        if not t > last_t:
            return False
        last_t = t
        a, b = site
        if (a - 1, b) not in occupied and (a, b - 1) not in occupied:
            return False
        if edge_lower is not None and edge_lower not in occupied:
            return False
        occupied.add(site)
    return True


class _Grid:
    """Growable boolean occupancy over the nonnegative quadrant."""

    __slots__ = ("a",)

    def __init__(self, cap: int = 256):
        self.a = np.zeros((cap, cap), dtype=bool)

    def ensure(self, need: int) -> None:
        cap = self.a.shape[0]
        if need < cap:
            return
        while cap <= need:
            cap *= 2
        bigger = np.zeros((cap, cap), dtype=bool)
        old = self.a.shape[0]
        bigger[:old, :old] = self.a
        self.a = bigger

    def fill(self, sites) -> None:
        for a, b in sites:
            self.ensure(max(a, b) + 1)
            self.a[a, b] = True


def _line_batch(grid: _Grid, hmax: int, rng, batch: int):
    """Run a batch of line launches; return ((site, lower), attempts_used).

    ``site`` is None when every attempt in the batch missed the cluster.
    Starts are uniform on the quadrant part of the line of height hmax + 1;
    a walk leaving the quadrant can never land (origin-seeded clusters).
    """
    k = hmax + 1
    starts = rng.integers(0, k + 1, size=batch)
    bits = rng.integers(0, 2, size=(batch, k))  # 1 encodes a step of (-1, 0)
    sx = np.cumsum(bits, axis=1)
    xs = starts[:, None] - sx
    ys = (k - starts)[:, None] - (np.arange(1, k + 1)[None, :] - sx)
    valid = (xs >= 0) & (ys >= 0)
    occ = np.zeros(valid.shape, dtype=bool)
    occ[valid] = grid.a[xs[valid], ys[valid]]
    hit = occ.any(axis=1)
    if not hit.any():
        return None, batch
    row = int(np.argmax(hit))
    i = int(np.argmax(occ[row]))
    if i == 0:
        site = (int(starts[row]), int(k - starts[row]))
    else:
        site = (int(xs[row, i - 1]), int(ys[row, i - 1]))
    lower = (int(xs[row, i]), int(ys[row, i]))
    return (site, lower), row + 1


def _line_step(cluster: Cluster, grid: _Grid, rng, max_attempts: int):
    grid.ensure(cluster.hmax + 2)
    attempts = 0
    while attempts < max_attempts:
        found, used = _line_batch(grid, cluster.hmax, rng, _BATCH)
        attempts += used
        if found is not None:
            return found, attempts
    raise RejectionOverflowError(
        f"line launch failed {attempts} times; cluster size {cluster.count}"
    )


def step_line_launch(cluster: Cluster, rng, max_attempts: int = DEFAULT_ATTEMPT_CAP):
    """One line-launch growth step; returns the mutated cluster and new site."""
    if not cluster.origin_seeded():
        raise ValueError("line launches require an origin-seeded cluster")
    rng = as_rng(rng)
    grid = _Grid()
    grid.fill(cluster.sites)
    (site, _lower), _ = _line_step(cluster, grid, rng, max_attempts)
    cluster.add(site)
    return cluster, site


def _edge_step(cluster: Cluster, rng, max_attempts: int):
    c = cluster
    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        i = int(rng.integers(0, 2 * c.count))
        lower = c.order[i >> 1]
        upper = (lower[0] + 1, lower[1]) if i & 1 == 0 else (lower[0], lower[1] + 1)
        if upper in c.sites:
            continue  # the walk starts on the cluster and always fails
        steps_needed = c.hmax - height(upper) + 1
        if steps_needed > 0:
            bits = rng.integers(0, 2, size=steps_needed)
            x, y = upper
            hit = False
            for bval in bits:
                if bval:
                    x += 1
                else:
                    y += 1
                if (x, y) in c.sites:
                    hit = True
                    break
            if hit:
                continue
        return (upper, lower), attempts
    raise RejectionOverflowError(
        f"edge launch failed {attempts} times; cluster size {c.count}"
    )


def step_edge_launch(cluster: Cluster, rng, max_attempts: int = DEFAULT_ATTEMPT_CAP):
    """One edge-launch growth step; returns the mutated cluster and new site."""
    rng = as_rng(rng)
    (site, _lower), _ = _edge_step(cluster, rng, max_attempts)
    cluster.add(site)
    return cluster, site


def _exact_step(cluster: Cluster, rng):
    law = activity_distribution(cluster).law
    sites = list(law)
    probs = np.array([float(p) for p in law.values()])
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return sites[min(idx, len(sites) - 1)]


def step_exact(cluster: Cluster, rng):
    """One exact-law growth step; returns the mutated cluster and new site."""
    rng = as_rng(rng)
    site = _exact_step(cluster, rng)
    cluster.add(site)
    return cluster, site


def run_discrete(
    c0: Cluster | None,
    n: int,
    sampler: str = "line",
    rng=None,
    max_attempts: int = DEFAULT_ATTEMPT_CAP,
) -> GrowthTrace:
    """Grow ``n`` sites sequentially with the chosen sampler."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if sampler not in ("line", "edge", "exact"):
        raise ValueError(f"unknown sampler: {sampler!r}")
    rng = as_rng(rng)
    c = c0.copy() if c0 is not None else Cluster.seed()
    initial = tuple(sorted(c.sites))
    if sampler == "line" and not c.origin_seeded():
        raise ValueError("line launches require an origin-seeded cluster")
    grid = None
    if sampler == "line":
        grid = _Grid()
        grid.fill(c.sites)
    additions: list[tuple[float, Site, Site | None]] = []
    attempts = 0
    for step in range(1, n + 1):
        if sampler == "line":
            (site, lower), used = _line_step(c, grid, rng, max_attempts)
            attempts += used
        elif sampler == "edge":
            (site, lower), used = _edge_step(c, rng, max_attempts)
            attempts += used
        else:
            site = _exact_step(c, rng)
            lower = None
            attempts += 1
        c.add(site)
        if grid is not None:
            grid.ensure(max(site) + 1)
            grid.a[site[0], site[1]] = True
        additions.append((step, site, lower))
    return GrowthTrace(
        mode="discrete",
        initial=initial,
        additions=additions,
        attempts=attempts,
        meta={"sampler": sampler, "n": n},
    )


def random_animal(size: int, seed) -> Cluster:
    """A cluster grown from the origin to the requested site count."""
    if size < 1:
        raise ValueError("animals have at least one site")
    return run_discrete(None, size - 1, "line", as_rng(seed)).final_cluster()


def _dyadic_bernoulli(p, rng) -> bool:
    """Bernoulli(p) draw, exact when p is a dyadic rational."""
    if isinstance(p, Fraction):
        if p >= 1:
            return True
        if p <= 0:
            return False
        den = p.denominator
        m = den.bit_length() - 1
        if den == (1 << m) and m <= 63:
            return int(rng.integers(0, den)) < p.numerator
        return rng.random() < float(p)
    return rng.random() < p


def _run_gillespie(c: Cluster, T: float, rng) -> tuple[list, int]:
    additions = []
    attempts = 0
    t = 0.0
    while c.growth_total > 0:
        t += rng.exponential(1.0 / c.growth_total)
        if t > T:
            break
        attempts += 1
        # uniform growth edge: weight vacant uppers by edge multiplicity
        sites = sorted(c.growth)
        mults = np.fromiter((c.growth[s] for s in sites), dtype=np.int64)
        slot = int(rng.integers(0, c.growth_total))
        idx = int(np.searchsorted(np.cumsum(mults), slot, side="right"))
        upper = sites[idx]
        if _dyadic_bernoulli(escape_probability(upper, c), rng):
            lowers = [
                q
                for q in ((upper[0] - 1, upper[1]), (upper[0], upper[1] - 1))
                if q in c.sites
            ]
            within = slot - int(np.concatenate(([0], np.cumsum(mults)))[idx])
            lower = lowers[within]
            c.add(upper)
            additions.append((t, upper, lower))
    return additions, attempts


def _walk_hits(H: HarrisSystem, e, k, start, nsteps, contains) -> bool:
    """Whether the k-th walk at edge e, run from ``start``, lands on the cluster."""
    if nsteps <= 0:
        return False
    bits = H.walk_bits(e, k, nsteps)
    x, y = start
    for bval in bits:
        if bval:
            x += 1
        else:
            y += 1
        if contains((x, y)):
            return True
    return False


def _run_harris(c: Cluster, T: float, H: HarrisSystem) -> tuple[list, int]:
    use_grid = c.origin_seeded()
    grid = None
    if use_grid:
        grid = _Grid()
        grid.fill(c.sites)

    cursors = {}
    heap: list = []

    def arm(lower: Site, upper: Site, t_from: float) -> None:
        e = (lower, upper)
        cur = H.clock_cursor(e)
        cursors[e] = cur
        rt, idx = cur.first_after(t_from)
        if rt <= T:
            heapq.heappush(heap, (rt, e, idx))

    for lower, upper in c.growth_edges():
        arm(lower, upper, 0.0)

    additions = []
    attempts = 0
    while heap:
        t, e, k = heapq.heappop(heap)
        lower, upper = e
        if upper in c.sites:
            continue  # filled since arming; never a growth edge again
        attempts += 1
        nsteps = c.hmax - height(upper) + 1
        if use_grid:
            if nsteps > 0:
                grid.ensure(max(upper) + nsteps + 1)
                bits = H.walk_bits(e, k, nsteps).astype(np.int64)
                sx = np.cumsum(bits)
                xs = upper[0] + sx
                ys = upper[1] + np.arange(1, nsteps + 1) - sx
                hit = bool(grid.a[xs, ys].any())
            else:
                hit = False
        else:
            hit = _walk_hits(H, e, k, upper, nsteps, c.sites.__contains__)
        if hit:
            rt, idx = cursors[e].next()
            if rt <= T:
                heapq.heappush(heap, (rt, e, idx))
            continue
        c.add(upper)
        if use_grid:
            grid.ensure(max(upper) + 1)
            grid.a[upper[0], upper[1]] = True
        additions.append((t, upper, lower))
        for v in up_neighbors(upper):
            if v not in c.sites:
                arm(upper, v, t)
    return additions, attempts


def run_continuous(
    c0: Cluster | None,
    T: float,
    mode: str = "gillespie",
    source=None,
) -> GrowthTrace:
    """Continuous-time growth up to horizon ``T``.

    gillespie: events at the growth-edge count rate, exact escape Bernoulli
    acceptance.  harris: replay of per-edge clocks with explicit walks from
    the given HarrisSystem; required for couplings between dynamics.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    c = c0.copy() if c0 is not None else Cluster.seed()
    initial = tuple(sorted(c.sites))
    if mode == "gillespie":
        additions, attempts = _run_gillespie(c, T, as_rng(source))
    elif mode == "harris":
        if not isinstance(source, HarrisSystem):
            raise ValueError("harris mode needs a HarrisSystem")
        additions, attempts = _run_harris(c, T, source)
    else:
        raise ValueError(f"unknown mode: {mode!r}")
    return GrowthTrace(
        mode="continuous",
        initial=initial,
        additions=additions,
        attempts=attempts,
        meta={"engine": mode, "T": T},
    )


def _run_activation(c: Cluster, T: float, H: HarrisSystem) -> list:
    heap: list = []

    def relax(p: Site, tp: float) -> None:
        for u in up_neighbors(p):
            if u not in c.sites:
                rt, _ = H.clock_cursor((p, u)).first_after(tp)
                if rt <= T:
                    heapq.heappush(heap, (rt, u, p))

    for p in sorted(c.sites):
        relax(p, 0.0)
    additions = []
    while heap:
        t, u, lower = heapq.heappop(heap)
        if u in c.sites:
            continue
        c.add(u)
        additions.append((t, u, lower))
        relax(u, t)
    return additions


def run_dfpp(c0: Cluster | None, T: float, H: HarrisSystem) -> GrowthTrace:
    """Directed first-passage percolation: activate on every growth-edge ring.

    A site activates as soon as an upward path from the cluster rings its
    edges in increasing time order; under a shared Harris system this
    dominates the aggregation dynamics at every instant.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    c = c0.copy() if c0 is not None else Cluster.seed()
    initial = tuple(sorted(c.sites))
    additions = _run_activation(c, T, H)
    return GrowthTrace(
        mode="continuous",
        initial=initial,
        additions=additions,
        attempts=len(additions),
        meta={"engine": "dfpp", "T": T},
    )


def run_local_baseline(c0: Cluster | None, T: float, H: HarrisSystem) -> GrowthTrace:
    """Local monotone deposition baseline: same rule as activation dynamics.

    Accepts every growth-edge ring with no walk filter; exposed separately
    as the comparison dynamics for interface studies.
    """
    trace = run_dfpp(c0, T, H)
    trace.meta["engine"] = "local-baseline"
    return trace
