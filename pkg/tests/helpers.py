"""Random complex generators shared by the unit and acceptance suites."""
from __future__ import annotations

import random

from cubemorse.cubical import CubicalComplex
from cubemorse.hypercube import HypercubeComplex


def random_hypercube_members(rng: random.Random, n: int) -> frozenset[int]:
    """Downward-closed cell set of H_n: every submask of a seed is kept."""
    seeds = rng.sample(range(1 << n), rng.randint(1, min(6, 1 << n)))
    members: set[int] = set()
    for s in seeds:
        sub = s
        while True:
            members.add(sub)
            if sub == 0:
                break
            sub = (sub - 1) & s
    return frozenset(members)


def random_hypercube_complex(rng: random.Random, n: int) -> HypercubeComplex:
    return HypercubeComplex(n, random_hypercube_members(rng, n))


def random_cubical_complex(rng: random.Random, d: int, m: int = 3) -> CubicalComplex:
    """Face closure of a few random seed cells inside C(m; d)."""
    base = 2 * m + 1
    total = base**d
    seeds = rng.sample(range(total), rng.randint(1, min(15, total)))
    return CubicalComplex.from_cells(m, d, seeds)


def strip_zeros(betti: list[int]) -> list[int]:
    out = list(betti)
    while out and out[-1] == 0:
        out.pop()
    return out
