"""Exact-identity verification suite behind the ``verify`` command.

Each check returns (name, passed, detail).  They are exact or coupled
checks with zero statistical tolerance, so any failure indicates a bug (or
deliberately injected fault) rather than noise.
"""

from __future__ import annotations

from . import activity
from .dynamics import random_animal, run_continuous, run_dfpp
from .harris import HarrisSystem
from .influence import verify_coupling

CHECK_NAMES = ("eq1", "linesum", "linechoice", "domination", "coupling")


def _animals(seeds, max_size: int):
    for seed in seeds:
        size = 2 + seed % max_size
        yield seed, random_animal(size, seed)


def check_eq1(seeds, max_size: int = 25):
    """Line-formula total equals summed per-site activity, exactly."""
    for seed, animal in _animals(seeds, max_size):
        total = activity.activity_distribution(animal).total
        via_line = activity.line_activity(animal)
        if total != via_line:
            return False, f"seed {seed}: {via_line} != {total}"
    return True, f"{len(list(seeds))} animals"


def check_linesum(seeds, max_size: int = 25):
    """Summed hit probability is the same on every line above the cluster."""
    for seed, animal in _animals(seeds, max_size):
        h = animal.hmax
        sums = {k: activity.line_hit_sum(animal, k) for k in (h, h + 1, h + 5)}
        if len(set(sums.values())) != 1:
            return False, f"seed {seed}: {sums}"
    return True, f"{len(list(seeds))} animals, lines h/h+1/h+5"


def check_linechoice(seeds, max_size: int = 18):
    """The exact next-site law does not depend on the launch line."""
    for seed, animal in _animals(seeds, max_size):
        h = animal.hmax
        law1 = activity.next_site_law_from_line(animal, h + 1)
        law5 = activity.next_site_law_from_line(animal, h + 5)
        law_act = activity.activity_distribution(animal).law
        if law1 != law5 or law1 != law_act:
            return False, f"seed {seed}: laws differ"
    return True, f"{len(list(seeds))} animals, lines h+1 vs h+5 vs activity law"


def check_domination(seeds, T: float = 5.0):
    """Aggregation stays inside activation under one Harris system."""
    for seed in seeds:
        H = HarrisSystem(seed)
        ddla = run_continuous(None, T, "harris", H)
        dfpp = run_dfpp(None, T, H)
        act_time = {s: t for t, s, _ in dfpp.additions}
        for p in dfpp.initial:
            act_time[p] = 0.0
        for t, site, _ in ddla.additions:
            if site not in act_time or act_time[site] > t:
                return False, f"seed {seed}: {site} at t={t:.4f} not dominated"
    return True, f"{len(list(seeds))} seeds, T={T}"


def check_coupling(seeds, T: float = 4.0, window: int = 64):
    """Coupled dynamics agree outside the red area, exactly."""
    import numpy as np

    for seed in seeds:
        rng = np.random.default_rng(seed)
        size = int(rng.integers(1, 4))
        F = set()
        while len(F) < size:
            a = int(rng.integers(-4, 5))
            h = int(rng.integers(0, 3))
            # site from (height, deviation) with matching parity
            d = 2 * a + (h % 2)
            F.add(((h - d) // 2, (h + d) // 2))
        k = int(rng.integers(0, len(F) + 1))
        G = set(sorted(F)[:k])
        if not verify_coupling(F, G, T, HarrisSystem(seed), window):
            return False, f"seed {seed}: F={sorted(F)} G={sorted(G)}"
    return True, f"{len(list(seeds))} random (F, G) instances, T={T}"


def run_checks(only=None, seeds=None) -> list[tuple[str, bool, str]]:
    if seeds is None:
        seeds = range(12)
    seeds = list(seeds)
    wanted = list(only) if only else list(CHECK_NAMES)
    for name in wanted:
        if name not in CHECK_NAMES:
            raise ValueError(f"unknown check: {name!r}")
    table = {
        "eq1": lambda: check_eq1(seeds),
        "linesum": lambda: check_linesum(seeds),
        "linechoice": lambda: check_linechoice(seeds),
        "domination": lambda: check_domination(seeds[: max(4, len(seeds) // 2)]),
        "coupling": lambda: check_coupling(seeds),
    }
    results = []
    for name in wanted:
        ok, detail = table[name]()
        results.append((name, ok, detail))
    return results
