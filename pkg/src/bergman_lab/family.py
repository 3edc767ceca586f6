"""The committed test family of holomorphic functions.

Monomials with |J| <= 4, normalized kernel functions
(1-|a|^2)^b / (1-<z,a>)^b with |a| in {0.5, 0.9, 0.99} and
b in {n+1, n+2, 2n+2} (|a| = 0 gives the constant, already present as
J = 0), and seeded random 5-term combinations of those members.
"""
from __future__ import annotations

import math

import numpy as np

from .holo import HoloFunc, multi_indices

POLE_RADII = (0.5, 0.9, 0.99)


def _direction(n: int, j: int) -> np.ndarray:
    th = 0.7 * j + 0.3
    if n == 1:
        return np.array([np.exp(1j * th)])
    ph = 0.45 + 0.25 * j
    return np.array([math.cos(ph) * np.exp(1j * th), math.sin(ph) * np.exp(-0.5j * th)])


def base_members(n: int):
    """(name, HoloFunc) pairs for the monomial and kernel parts."""
    out = []
    for J in multi_indices(n, 4):
        out.append(("mono" + "".join(map(str, J)), HoloFunc.monomial(J)))
    j = 0
    for r in POLE_RADII:
        for b in (n + 1, n + 2, 2 * n + 2):
            a = r * _direction(n, j)
            out.append((f"ker_r{r}_b{b}", HoloFunc.kernel(a, b, s=b)))
            j += 1
    return out


def random_members(n: int, seed: int, count: int, terms: int = 5):
    """Seeded combinations of nonconstant base members with complex normal coefficients."""
    pool = [m for m in base_members(n) if m[0] != "mono" + "0" * n]
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, 77)))
    out = []
    for i in range(count):
        idx = rng.choice(len(pool), size=terms, replace=False)
        c = (rng.normal(size=terms) + 1j * rng.normal(size=terms)) / math.sqrt(2 * terms)
        f = HoloFunc.zero(n)
        for ci, k in zip(c, sorted(idx)):
            f = f + ci * pool[k][1]
        out.append((f"mix{seed}_{i}", f))
    return out


def fixture_family(n: int = 1, seed: int = 0, random_count: int | None = None, max_degree: int = 4):
    """Names and functions of the fixture family (about 25 members for n = 1)."""
    base = [m for m in base_members(n) if sum(_degree(m[1])) <= max_degree]
    if random_count is None:
        random_count = max(0, 25 - len(base)) if n == 1 else 6
    members = base + random_members(n, seed, random_count)
    return [m[0] for m in members], [m[1] for m in members]


def _degree(f: HoloFunc):
    return [t.degree for t in f.monomials] or [0]


def family_id(n: int, seed: int, random_count: int | None = None, max_degree: int = 4) -> str:
    rc = "auto" if random_count is None else random_count
    return f"fixture-n{n}-s{seed}-r{rc}-d{max_degree}"
