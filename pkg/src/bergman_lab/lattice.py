"""Separated covering lattices in the Bergman metric.

A greedy maximal gamma/2-separated subset of a hyperbolically equi-dense
candidate grid restricted to ``|z| <= rmax``. Maximality makes the
gamma-balls around the chosen points cover the truncated ball up to the grid
resolution; the covering is then certified on seeded probe points.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import as_point, norm2, random_ball_points

CERT_PROBES = 4000


@dataclass(frozen=True)
class Lattice:
    points: np.ndarray
    gamma: float
    separation: float
    overlap_bound: int
    rmax: float = 0.0
    covered: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return int(self.points.shape[1])

    def __len__(self):
        return int(self.points.shape[0])

    def to_dict(self):
        return {
            "n": self.n,
            "gamma": self.gamma,
            "separation": self.separation,
            "overlap_bound": self.overlap_bound,
            "rmax": self.rmax,
            "covered": self.covered,
            "points": [[[c.real, c.imag] for c in p] for p in self.points],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "Lattice":
        d = json.loads(s)
        pts = np.array([[complex(*c) for c in p] for p in d["points"]],
                       dtype=np.complex128).reshape(-1, d["n"])
        return cls(pts, d["gamma"], d["separation"], d["overlap_bound"], d["rmax"],
                   d["covered"], d.get("meta", {}))


def _phi2_matrix(A, B):
    """|phi_a(b)|^2 for all pairs, shape (len(A), len(B))."""
    ra = norm2(A)[:, None]
    rb = norm2(B)[None, :]
    d = np.abs(1.0 - A @ np.conj(B).T) ** 2
    return 1.0 - (1.0 - ra) * (1.0 - rb) / d


def _shell_points(n, r, step):
    """Points on the sphere of radius r spaced about ``step`` in the Bergman metric."""
    tang = r / math.sqrt(1.0 - r * r)   # complex-tangential scale
    norm = r / (1.0 - r * r)            # scale of the phase direction i z
    if n == 1:
        m = max(1, math.ceil(2 * math.pi * norm / step))
        return (r * np.exp(2j * math.pi * np.arange(m) / m))[:, None]
    if n != 2:
        raise NotImplementedError("lattices are built for n <= 2")
    # Hopf coordinates zeta = e^{i psi} (cos th, sin th e^{i chi})
    pts = []
    n_th = max(1, math.ceil(0.5 * math.pi * tang / step))
    n_psi = max(1, math.ceil(2 * math.pi * norm / step))
    for i in range(n_th + 1):
        th = 0.5 * math.pi * i / n_th
        n_chi = max(1, math.ceil(2 * math.pi * tang * math.sin(th) * math.cos(th) / step))
        for j in range(n_chi):
            chi = 2 * math.pi * j / n_chi
            psi = 2 * math.pi * np.arange(n_psi) / n_psi + (i % 2) * math.pi / n_psi
            e = np.exp(1j * psi)
            pts.append(np.stack([e * math.cos(th), e * math.sin(th) * np.exp(1j * chi)], axis=1))
    return r * np.concatenate(pts)


def random_unitary(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(g)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def candidate_grid(n: int, gamma: float, rmax: float, grid_density: int, grid_seed=None):
    """Hyperbolic shells at tanh of equispaced Bergman radii, in order of modulus.

    ``grid_seed`` applies one random unitary to the whole grid, so lattices
    built from different seeds are exact rotations of each other.
    """
    step = gamma / grid_density
    rho_max = math.atanh(rmax)
    shells = max(1, math.ceil(rho_max / step))
    pts = [np.zeros((1, n), dtype=np.complex128)]
    for j in range(1, shells + 1):
        pts.append(_shell_points(n, math.tanh(rho_max * j / shells), step))
    out = np.concatenate(pts)
    if grid_seed is not None:
        out = out @ random_unitary(np.random.default_rng(grid_seed), n).T
    return np.ascontiguousarray(out)


def build_lattice(n: int, gamma: float, rmax: float, grid_density: int = 4,
                  grid_seed=None, probes: int = CERT_PROBES, probe_seed: int = 0,
                  sep_factor: float = 0.5) -> Lattice:
    """Greedy (sep_factor * gamma)-separated lattice covering ``|z| <= rmax`` by gamma-balls.

    The overlap bound is the largest number of balls D(a_k, 3 gamma) found
    over the probes and the lattice points themselves.
    """
    if not 0 < gamma <= 2:
        raise ValueError("gamma must lie in (0, 2]")
    if not 0 < rmax <= 0.99:
        raise ValueError("rmax must lie in (0, 0.99]")
    if grid_density < 1:
        raise ValueError("grid_density must be a positive integer")
    if not 0 < sep_factor < 1:
        raise ValueError("sep_factor must lie in (0, 1) for the balls to cover")
    cands = candidate_grid(n, gamma, rmax, grid_density, grid_seed)
    idx = kernels.greedy_separated(cands, math.tanh(sep_factor * gamma) ** 2)
    pts = cands[idx]
    sep = min_separation(pts)
    rng = np.random.default_rng(probe_seed)
    pr = probe_points(rng, probes, n, rmax)
    defect = covering_defect_points(pts, gamma, pr)
    over = int(overlap_counts(pts, gamma, np.concatenate([pr, pts]), 3.0).max()) if len(pts) else 0
    meta = {"candidates": int(len(cands)), "grid_density": grid_density, "sep_factor": sep_factor,
            "grid_seed": grid_seed, "probes": probes, "probe_seed": probe_seed,
            "covering_defect": defect}
    return Lattice(pts, float(gamma), sep, over, float(rmax), defect == 0.0, meta)


def probe_points(rng, m, n, rmax):
    """Probes in |z| <= rmax, half uniform in Bergman radius (so the rim is well sampled)."""
    half = m // 2
    p1 = random_ball_points(rng, half, n, rmax)
    rho = rng.uniform(0, math.atanh(rmax), size=m - half)
    g = rng.normal(size=(m - half, n)) + 1j * rng.normal(size=(m - half, n))
    p2 = g / np.linalg.norm(g, axis=1)[:, None] * np.tanh(rho)[:, None]
    return np.concatenate([p1, p2])


def min_separation(points) -> float:
    """Minimum pairwise Bergman distance (inf for fewer than two points)."""
    m = len(points)
    if m < 2:
        return float("inf")
    best = 1.0
    for s in range(0, m, 512):
        P = _phi2_matrix(points[s:s + 512], points)
        for k in range(P.shape[0]):
            P[k, s + k] = 1.0
        best = min(best, float(P.min()))
    return float(math.atanh(math.sqrt(max(best, 0.0))))


def covering_defect_points(points, gamma, probes) -> float:
    probes = as_point(probes).reshape(-1, points.shape[1] if len(points) else as_point(probes).shape[-1])
    if len(probes) == 0:
        return 0.0
    if len(points) == 0:
        return 1.0
    t2 = math.tanh(gamma) ** 2
    hit = np.zeros(len(probes), dtype=bool)
    for s in range(0, len(probes), 2048):
        hit[s:s + 2048] = (_phi2_matrix(probes[s:s + 2048], points) < t2).any(axis=1)
    return float(1.0 - hit.mean())


def overlap_counts(points, gamma, z, factor=3.0) -> np.ndarray:
    z = as_point(z).reshape(-1, as_point(z).shape[-1])
    if len(points) == 0:
        return np.zeros(len(z), dtype=np.int64)
    t2 = math.tanh(factor * gamma) ** 2
    out = np.empty(len(z), dtype=np.int64)
    for s in range(0, len(z), 2048):
        out[s:s + 2048] = (_phi2_matrix(z[s:s + 2048], points) < t2).sum(axis=1)
    return out


def covering_defect(lat: Lattice, probes) -> float:
    """Fraction of probes lying in no D(a_k, gamma)."""
    return covering_defect_points(lat.points, lat.gamma, probes)


def overlap_count(lat: Lattice, z, factor: float = 3.0) -> int:
    """Number of k with beta(z, a_k) < factor * gamma."""
    return int(overlap_counts(lat.points, lat.gamma, z, factor)[0])


def rotate(lat: Lattice, U) -> Lattice:
    """Image of the lattice under a unitary map (Bergman distances unchanged)."""
    return Lattice(lat.points @ np.asarray(U).T, lat.gamma, lat.separation, lat.overlap_bound,
                   lat.rmax, lat.covered, dict(lat.meta))


__all__ = ["Lattice", "build_lattice", "covering_defect", "overlap_count", "candidate_grid",
           "min_separation", "probe_points", "random_unitary", "rotate"]
