"""Tracking the area of potential influence of a finite perturbation.

Grow the aggregation dynamics from a flat initial interface while coloring
sites: black sites are certainly part of the cluster no matter which subset
of the perturbation set is toggled in the initial condition; red sites are
those whose state may differ between the coupled dynamics.  Walks are
absorbed by black sites only; a walk that survives black and either starts
from a red lower vertex or passes through a red site makes the new site
red, otherwise black.  Under a shared Harris system, two plain dynamics
whose initial conditions differ inside the perturbation set agree outside
the red area at every instant, and that is checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cluster import Cluster
from .dynamics import GrowthTrace, run_continuous
from .exceptions import WindowBreachError
from .harris import HarrisSystem
from .lattice import Site, deviation, height, up_neighbors

import heapq

DEFAULT_WINDOW = 64
BREACH_MARGIN = 2


def flat_line(window: int) -> list[Site]:
    """Sites of height zero with |deviation| <= window, sorted."""
    half = window // 2
    return [(a, -a) for a in range(-half, half + 1)]


@dataclass(frozen=True)
class ColoredState:
    black: frozenset
    red: frozenset
    window: int

    def __post_init__(self):
        if self.black & self.red:
            raise ValueError("black and red sets must be disjoint")


@dataclass
class ColoredTrace:
    """Time-indexed record of a colored run."""

    window: int
    initial_black: tuple[Site, ...]
    initial_red: tuple[Site, ...]
    events: list[tuple[float, Site, str]]
    red_stats: list[tuple[float, int, int]]  # (time, red height, red |dev|)
    attempts: int = 0
    meta: dict = field(default_factory=dict)

    def red_events(self) -> list[tuple[float, Site]]:
        return [(t, s) for t, s, color in self.events if color == "red"]

    def red_extent_at(self, t: float):
        """(max height, max |deviation|) of the red set at time ``t``."""
        if not self.initial_red:
            return None, None
        h = max(height(p) for p in self.initial_red)
        d = max(abs(deviation(p)) for p in self.initial_red)
        for et, eh, ed in self.red_stats:
            if et > t:
                break
            h, d = eh, ed
        return h, d

    def final_state(self) -> ColoredState:
        black = set(self.initial_black)
        red = set(self.initial_red)
        for _, s, color in self.events:
            (red if color == "red" else black).add(s)
        return ColoredState(frozenset(black), frozenset(red), self.window)


def run_colored(
    F, T: float, H: HarrisSystem, window: int = DEFAULT_WINDOW
) -> ColoredTrace:
    """Colored growth from the truncated flat interface, red seeded on ``F``.

    Raises WindowBreachError as soon as a red site lands within
    BREACH_MARGIN of the lateral boundary; such a run must be discarded and
    retried with a larger window.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    F = set(F)
    line = flat_line(window)
    colored = Cluster.from_sites(line)
    for p in F:
        if p not in colored.sites:
            colored.add(p)
    red = set(F)
    red_h = max((height(p) for p in red), default=None)
    red_d = max((abs(deviation(p)) for p in red), default=None)
    for p in red:
        if abs(deviation(p)) >= window - BREACH_MARGIN:
            raise WindowBreachError(p, 0.0, window)

    cursors = {}
    heap: list = []

    def arm(lower: Site, upper: Site, t_from: float) -> None:
        e = (lower, upper)
        cur = H.clock_cursor(e)
        cursors[e] = cur
        rt, idx = cur.first_after(t_from)
        if rt <= T:
            heapq.heappush(heap, (rt, e, idx))

    for lower, upper in colored.growth_edges():
        arm(lower, upper, 0.0)

    events: list[tuple[float, Site, str]] = []
    red_stats: list[tuple[float, int, int]] = []
    attempts = 0
    while heap:
        t, e, k = heapq.heappop(heap)
        lower, upper = e
        if upper in colored.sites:
            continue  # rings on edges with colored upper vertex are ignored
        attempts += 1
        nsteps = colored.hmax - height(upper) + 1
        passed_red = upper in red  # start counts; vacuous while upper uncolored
        hit_black = False
        if nsteps > 0:
            bits = H.walk_bits(e, k, nsteps)
            x, y = upper
            for bval in bits:
                if bval:
                    x += 1
                else:
                    y += 1
                pos = (x, y)
                if pos in red:
                    passed_red = True
                elif pos in colored.sites:
                    hit_black = True
                    break
        if hit_black:
            rt, idx = cursors[e].next()
            if rt <= T:
                heapq.heappush(heap, (rt, e, idx))
            continue
        make_red = (lower in red) or passed_red
        colored.add(upper)
        color = "red" if make_red else "black"
        if make_red:
            red.add(upper)
            h, d = height(upper), abs(deviation(upper))
            red_h = h if red_h is None else max(red_h, h)
            red_d = d if red_d is None else max(red_d, d)
            red_stats.append((t, red_h, red_d))
            if d >= window - BREACH_MARGIN:
                raise WindowBreachError(upper, t, window)
        events.append((t, upper, color))
        for v in up_neighbors(upper):
            if v not in colored.sites:
                arm(upper, v, t)
    return ColoredTrace(
        window=window,
        initial_black=tuple(sorted(set(line) - F)),
        initial_red=tuple(sorted(F)),
        events=events,
        red_stats=red_stats,
        attempts=attempts,
        meta={"T": T, "seed": H.master_seed},
    )


def verify_coupling(
    F, G, T: float, H: HarrisSystem, window: int = DEFAULT_WINDOW
) -> bool:
    """Exact coupling check: clusters agree outside the red area.

    Runs the plain dynamics from the flat interface and from the interface
    with ``G`` toggled (G a subset of F), plus the colored run seeded on F,
    all on the same Harris system, and verifies at every event time that
    the two plain clusters differ only on currently red sites.
    """
    F, G = set(F), set(G)
    if not G <= F:
        raise ValueError("G must be a subset of F")
    line = set(flat_line(window))
    colored = run_colored(F, T, H, window)
    trace1 = run_continuous(Cluster.from_sites(line), T, "harris", H)
    trace2 = run_continuous(Cluster.from_sites(line ^ G), T, "harris", H)

    # merge events; at equal times apply coloring first, then the clusters
    merged = []
    for t, s, color in colored.events:
        merged.append((t, 0, s, color))
    for t, s, _ in trace1.additions:
        merged.append((t, 1, s, None))
    for t, s, _ in trace2.additions:
        merged.append((t, 2, s, None))
    merged.sort(key=lambda ev: (ev[0], ev[1]))

    in1 = set(line)
    in2 = set(line ^ G)
    red = set(F)
    diff = in1 ^ in2
    if not diff <= red:
        return False
    for _t, which, site, color in merged:
        if which == 0:
            if color == "red":
                red.add(site)
            continue
        target, other = (in1, in2) if which == 1 else (in2, in1)
        target.add(site)
        if site in other:
            diff.discard(site)
        else:
            diff.add(site)
            if site not in red:
                return False
    return True


def _scaling_replica(args):
    seed, T_max, T_grid, window0, certify = args
    window = window0
    while True:
        H = HarrisSystem(seed)
        try:
            trace = run_colored({(0, 0)}, T_max, H, window)
            if certify:
                doubled = run_colored({(0, 0)}, T_max, H, 2 * window)
                if trace.red_events() != doubled.red_events():
                    window *= 2
                    continue
        except WindowBreachError:
            window *= 2
            continue
        break
    extents = [trace.red_extent_at(t) for t in T_grid]
    return window, extents


def red_scaling_experiment(
    T_grid,
    replicas: int,
    seed0: int = 0,
    window0: int = DEFAULT_WINDOW,
    certify: bool = True,
    workers: int | None = None,
) -> dict:
    """Red-extent statistics across replicas with adaptive certified windows.

    Each replica doubles its window until the run both avoids a boundary
    breach and is bit-identical (red event sequence) under one further
    doubling.  Reports per-time means of the red height and |deviation| and
    the fitted slope of (height/t) against ln t.
    """
    T_grid = sorted(T_grid)
    if any(t2 <= t1 for t1, t2 in zip(T_grid, T_grid[1:])):
        raise ValueError("T_grid must be strictly increasing")
    T_max = T_grid[-1]
    from ._pool import pmap

    results = pmap(
        _scaling_replica,
        [(seed0 + i, T_max, tuple(T_grid), window0, certify) for i in range(replicas)],
        workers=workers,
    )
    windows = [w for w, _ in results]
    rows = []
    for j, t in enumerate(T_grid):
        hs = [ext[j][0] for _, ext in results]
        ds = [ext[j][1] for _, ext in results]
        rows.append(
            {
                "T": t,
                "mean_red_height": float(np.mean(hs)),
                "mean_red_dev": float(np.mean(ds)),
                "replicas": replicas,
                "window": max(windows),
            }
        )
    ts = np.array([r["T"] for r in rows], dtype=float)
    ratio = np.array([r["mean_red_height"] for r in rows]) / ts
    slope = float(np.polyfit(np.log(ts), ratio, 1)[0]) if len(ts) > 1 else 0.0
    return {
        "rows": rows,
        "rate_vs_logt_slope": slope,
        "windows": windows,
        "certified": certify,
    }
