"""Desk-scale quantitative analysis of growth traces.

Growth-exponent fits, continuous-time rate tables, activation-decay
profiles, and estimators for the geometry of large clusters.  All
estimators are pure functions of traces or of (seed, parameters), so
rerunning them reproduces outputs exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._pool import pmap
from .cluster import Cluster
from .dynamics import GrowthTrace, as_rng, run_dfpp, run_discrete
from .harris import HarrisSystem
from .influence import flat_line
from .lattice import Site, deviation, height, in_cone

WILSON_Z = 1.959963984540054  # two-sided 95%


def assert_height_floor(trace: GrowthTrace) -> None:
    """Counting bound for origin-seeded growth: (h+1)(h+2)/2 >= sites.

    Implies height >= sqrt(2 n) - 2 after n additions, at every step.
    """
    if tuple(trace.initial) != ((0, 0),):
        raise ValueError("height floor applies to origin-seeded runs")
    hs = trace.height_profile()
    counts = np.arange(1, len(hs) + 1)
    if not np.all((hs + 1) * (hs + 2) >= 2 * counts):
        bad = int(np.argmin((hs + 1) * (hs + 2) >= 2 * counts))
        raise AssertionError(f"height floor violated at step {bad}")


@dataclass
class GrowthCurve:
    """Sampled growth profile with fitted power-law exponents."""

    n_or_t: np.ndarray
    h: np.ndarray
    dabs: np.ndarray
    beta_h: float
    beta_h_se: float
    beta_d: float
    beta_d_se: float
    fit_window: tuple[float, float]
    meta: dict = field(default_factory=dict)


def _loglog_fit(xs, ys) -> tuple[float, float]:
    lx, ly = np.log(xs), np.log(np.maximum(ys, 1))
    coef, cov = np.polyfit(lx, ly, 1, cov=True)
    return float(coef[0]), float(math.sqrt(max(cov[0][0], 0.0)))


def growth_exponents(trace: GrowthTrace, sample_points=None) -> GrowthCurve:
    """Fit height and width exponents of a discrete trace.

    Samples the profiles geometrically and fits log-log least squares over
    the last two decades of the sampled range.
    """
    if trace.mode != "discrete":
        raise ValueError("growth exponents need a discrete trace")
    n = len(trace.additions)
    if sample_points is None:
        lo = min(100, max(10, n // 100))
        sample_points = np.unique(
            np.round(np.geomspace(lo, n, 48)).astype(np.int64)
        )
    pts = np.asarray(sorted(set(int(p) for p in sample_points)), dtype=np.int64)
    pts = pts[(pts >= 1) & (pts <= n)]
    if len(pts) < 10:
        raise ValueError("too few sample points for an exponent fit")
    if tuple(trace.initial) == ((0, 0),):
        assert_height_floor(trace)
    hs = trace.height_profile()[pts]
    ds = trace.abs_dev_profile()[pts]
    window_lo = pts[-1] / 100.0
    mask = pts >= window_lo
    if mask.sum() < 10:
        mask = np.ones(len(pts), dtype=bool)
    beta_h, se_h = _loglog_fit(pts[mask], hs[mask])
    beta_d, se_d = _loglog_fit(pts[mask], np.maximum(ds[mask], 1))
    return GrowthCurve(
        n_or_t=pts,
        h=hs,
        dabs=ds,
        beta_h=beta_h,
        beta_h_se=se_h,
        beta_d=beta_d,
        beta_d_se=se_d,
        fit_window=(float(pts[mask][0]), float(pts[-1])),
        meta=dict(trace.meta),
    )


def _profiles_at(trace: GrowthTrace, t_grid) -> tuple[np.ndarray, np.ndarray]:
    jt = np.asarray(trace.jump_times, dtype=float)
    hs = trace.height_profile()
    ds = trace.abs_dev_profile()
    idx = np.searchsorted(jt, np.asarray(t_grid, dtype=float), side="right")
    return hs[idx], ds[idx]


def continuous_rates(traces, t_grid) -> dict:
    """Mean height/t and width/t across continuous traces, with linear fits."""
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    if t_grid[0] <= 0:
        raise ValueError("t_grid must be positive")
    hs = []
    ds = []
    for trace in traces:
        if trace.mode != "continuous":
            raise ValueError("continuous_rates needs continuous traces")
        h, d = _profiles_at(trace, t_grid)
        hs.append(h)
        ds.append(d)
    mh = np.mean(np.array(hs, dtype=float), axis=0)
    md = np.mean(np.array(ds, dtype=float), axis=0)
    coef = np.polyfit(t_grid, mh, 1)
    resid = mh - np.polyval(coef, t_grid)
    ss_tot = float(np.sum((mh - mh.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    d_const = float(np.max(np.sqrt(t_grid) / np.maximum(md, 1e-12)))
    rows = [
        {
            "t": float(t),
            "mean_height": float(h),
            "height_rate": float(h / t),
            "mean_abs_dev": float(d),
            "dev_rate": float(d / t),
        }
        for t, h, d in zip(t_grid, mh, md)
    ]
    return {
        "rows": rows,
        "height_slope": float(coef[0]),
        "height_intercept": float(coef[1]),
        "height_r2": r2,
        "dev_floor_constant": d_const,
    }


def _decay_replica(args):
    seed, T0, heights, line_window, bulk = args
    H = HarrisSystem(seed)
    c0 = Cluster.from_sites(flat_line(line_window))
    trace = run_dfpp(c0, T0, H)
    activated = {}
    for _, site, _ in trace.additions:
        h = height(site)
        if abs(deviation(site)) <= bulk:
            activated[h] = activated.get(h, 0) + 1
    return [activated.get(h, 0) for h in heights]


def activation_decay(
    T0: float,
    heights=None,
    replicas: int = 1000,
    seed0: int = 0,
    line_window: int = 32,
    bulk_window: int = 16,
    workers: int | None = None,
) -> dict:
    """Per-height activation frequency of the activation dynamics at time T0.

    Starts from a truncated flat interface and averages, over inner sites
    at each height, the fraction of replicas that activated them; fits an
    exponential decay rate on the positive entries.
    """
    if T0 <= 0:
        raise ValueError("T0 must be positive")
    if heights is None:
        heights = list(range(1, 7))
    heights = sorted(heights)
    counts = pmap(
        _decay_replica,
        [(seed0 + i, T0, tuple(heights), line_window, bulk_window) for i in range(replicas)],
        workers=workers,
    )
    totals = np.sum(np.array(counts, dtype=float), axis=0)
    sites_per_height = [
        sum(1 for d in range(-bulk_window, bulk_window + 1) if (d - h) % 2 == 0)
        for h in heights
    ]
    probs = totals / (replicas * np.asarray(sites_per_height, dtype=float))
    rows = [
        {"height": h, "probability": float(p)} for h, p in zip(heights, probs)
    ]
    pos = [(h, p) for h, p in zip(heights, probs) if p > 0]
    slope = r2 = float("nan")
    if len(pos) >= 3:
        xs = np.array([h for h, _ in pos], dtype=float)
        ys = np.log(np.array([p for _, p in pos], dtype=float))
        coef = np.polyfit(xs, ys, 1)
        resid = ys - np.polyval(coef, xs)
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        slope = float(coef[0])
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {"rows": rows, "log_slope": slope, "r2": r2, "T0": T0}


def wilson_interval(successes: int, total: int, z: float = WILSON_Z):
    if total == 0:
        return 0.0, 1.0
    phat = successes / total
    denom = 1 + z * z / total
    centre = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _never_added_replica(args):
    seed, n_steps = args
    trace = run_discrete(None, n_steps, "line", as_rng(seed))
    first = trace.additions[0][1]
    added_step = None
    for t, site, _ in trace.additions:
        if site == (1, 0):
            added_step = int(t)
            break
    return first, added_step


def never_added_estimator(
    n_max: int,
    replicas: int,
    seed0: int = 0,
    workers: int | None = None,
) -> dict:
    """Estimate the probability that (1, 0) stays out of the cluster.

    Conditions on the first added site being (0, 1) and reports, at
    n_max/4, n_max/2 and n_max total additions, the fraction of kept runs
    with (1, 0) still absent, with Wilson 95% intervals.  ``n_max = 0``
    degenerates to the cluster right after the conditioning addition.
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    n_steps = max(1, n_max)
    checkpoints = sorted({max(1, n_max // 4), max(1, n_max // 2), n_steps})
    results = pmap(
        _never_added_replica,
        [(seed0 + i, n_steps) for i in range(replicas)],
        workers=workers,
    )
    kept = [added for first, added in results if first == (0, 1)]
    out = {}
    for cp in checkpoints:
        absent = sum(1 for added in kept if added is None or added > cp)
        est = absent / len(kept) if kept else float("nan")
        lo, hi = wilson_interval(absent, len(kept))
        out[cp] = {"estimate": est, "low": lo, "high": hi}
    return {
        "n_max": n_max,
        "checkpoints": out,
        "kept": len(kept),
        "replicas": replicas,
    }


def row_occupancy(trace: GrowthTrace, rows) -> list[dict]:
    """Cluster-site count and last addition step per horizontal lattice row."""
    wanted = set(int(r) for r in rows)
    counts = {r: 0 for r in wanted}
    last = {r: None for r in wanted}
    for p in trace.initial:
        if p[1] in wanted:
            counts[p[1]] += 1
            last[p[1]] = 0
    for i, (_, site, _) in enumerate(trace.additions, start=1):
        if site[1] in wanted:
            counts[site[1]] += 1
            last[site[1]] = i
    return [
        {"row": r, "count": counts[r], "last_step": last[r]} for r in sorted(wanted)
    ]


def cone_occupation(trace: GrowthTrace, apexes, b) -> list[dict]:
    """Whether (and when) the trace enters the cone based at each apex."""
    out = []
    for apex in apexes:
        first_hit = None
        for p in trace.initial:
            if in_cone(p, apex, b):
                first_hit = 0
                break
        if first_hit is None:
            for i, (_, site, _) in enumerate(trace.additions, start=1):
                if in_cone(site, apex, b):
                    first_hit = i
                    break
        out.append(
            {
                "apex": tuple(apex),
                "intersects": first_hit is not None,
                "first_hit": first_hit,
            }
        )
    return out


def _speed_replica(args):
    alpha, width, T, seed = args
    rng = as_rng(seed)
    W = width + (width % 2)  # even width keeps deviation parity consistent
    slope = math.tan(alpha)
    shift = 2 * round(W * slope / 2.0)

    def canon_up(col, hc):
        c1, h1 = col - 1, hc + 1
        if c1 < 0:
            c1 += W
            h1 += shift
        c2, h2 = col + 1, hc + 1
        if c2 >= W:
            c2 -= W
            h2 -= shift
        return (c1, h1), (c2, h2)

    def line_height(col):
        raw = slope * (col - W // 2)
        parity = col & 1
        return int(round((raw - parity) / 2.0)) * 2 + parity

    occupied = set()
    tops = {}
    for col in range(W):
        h0 = line_height(col)
        occupied.add((col, h0))
        tops[col] = h0
    base = dict(tops)
    growth: dict[tuple[int, int], int] = {}
    for site in occupied:
        for u in canon_up(*site):
            if u not in occupied:
                growth[u] = growth.get(u, 0) + 1
    total = sum(growth.values())
    hmax = max(tops.values())

    def mean_top():
        return sum(tops[c] - base[c] for c in tops) / W

    t = 0.0
    mid_mean = None
    while True:
        t += rng.exponential(1.0 / total)
        if mid_mean is None and t > T / 2.0:
            mid_mean = mean_top()
        if t > T:
            break
        slot = int(rng.integers(0, total))
        upper = None
        for site, mult in growth.items():
            slot -= mult
            if slot < 0:
                upper = site
                break
        # explicit upward walk; escape once safely above every canonical top
        x = upper
        hit = False
        limit = hmax + abs(shift) + 2
        while x[1] <= limit:
            u1, u2 = canon_up(*x)
            x = u1 if rng.integers(0, 2) else u2
            if x in occupied:
                hit = True
                break
        if hit:
            continue
        occupied.add(upper)
        was = growth.pop(upper, 0)
        total -= was
        for u in canon_up(*upper):
            if u not in occupied:
                growth[u] = growth.get(u, 0) + 1
                total += 1
        col, hc = upper
        tops[col] = max(tops[col], hc)
        hmax = max(hmax, hc)
    if mid_mean is None:
        mid_mean = mean_top()
    return (mean_top() - mid_mean) / (T / 2.0)


def speed_estimate(
    alpha: float,
    width: int,
    T: float,
    replicas: int = 8,
    seed0: int = 0,
    workers: int | None = None,
) -> tuple[float, float]:
    """Exploratory vertical growth speed from a sloped line, periodic strip.

    Lateral periodicity is a modelling shortcut (helical identification of
    the strip edges); excluded from acceptance checks by design.
    """
    if not abs(alpha) < math.pi / 4:
        raise ValueError("|alpha| must be below pi/4")
    if width < 64:
        raise ValueError("width must be at least 64")
    vals = pmap(
        _speed_replica,
        [(alpha, width, T, seed0 + i) for i in range(replicas)],
        workers=workers,
    )
    vals = np.asarray(vals, dtype=float)
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return float(vals.mean()), se
