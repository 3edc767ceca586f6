"""Quadrature rules on the ball, Bergman balls and Carleson tubes.

A :class:`Rule` is a set of nodes in C^n with real weights. Deterministic
rules carry no error model; randomized rules carry ``group``/``stratum``
labels so an unbiased standard error can be formed (see
:func:`rule_estimate`).

Coordinates used throughout: ``t = |z|^2`` so that normalized volume is
``dv = n t^(n-1) dt dsigma`` and ``dv_alpha = c_alpha n t^(n-1) (1-t)^alpha dt dsigma``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from . import kernels
from .geometry import as_point, norm2, unitary_completion


@dataclass(frozen=True)
class Rule:
    nodes: np.ndarray
    weights: np.ndarray
    random: bool = False
    group: np.ndarray | None = None
    stratum: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    def scaled(self, factor) -> "Rule":
        return Rule(self.nodes, self.weights * factor, self.random, self.group,
                    self.stratum, self.meta)

    def reweighted(self, w) -> "Rule":
        return Rule(self.nodes, self.weights * w, self.random, self.group,
                    self.stratum, self.meta)


def concat_rules(rules) -> Rule:
    rules = [r for r in rules if len(r)]
    nodes = np.concatenate([r.nodes for r in rules])
    weights = np.concatenate([r.weights for r in rules])
    rnd = any(r.random for r in rules)
    if not rnd:
        return Rule(nodes, weights)
    groups, strata = [], []
    goff = soff = 0
    for r in rules:
        g = r.group if r.group is not None else np.arange(len(r))
        s = r.stratum if r.stratum is not None else np.zeros(len(r), dtype=np.int64)
        groups.append(g + goff)
        strata.append(s + soff)
        goff += int(g.max()) + 1
        soff += int(s.max()) + 1
    return Rule(nodes, weights, True, np.concatenate(groups), np.concatenate(strata))


def rule_estimate(rule: Rule, values):
    """Weighted sum and its standard error (0 for deterministic rules).

    For randomized rules, contributions are first summed per group (one
    group per independent base sample), then the stratified variance
    sum_h var(m_h * Y_i) / m_h is formed.
    """
    values = np.asarray(values)
    contrib = rule.weights * values
    total = contrib.sum()
    if not rule.random:
        return total, 0.0
    G = int(rule.group.max()) + 1
    gsum = np.zeros(G, dtype=contrib.dtype)
    np.add.at(gsum, rule.group, contrib)
    gstrat = np.zeros(G, dtype=np.int64)
    gstrat[rule.group] = rule.stratum
    var = 0.0
    for h in np.unique(gstrat):
        y = gsum[gstrat == h]
        m = y.shape[0]
        if m > 1:
            var += float(np.var(m * y, ddof=1)) / m
    return total, float(np.sqrt(var))


# ---------------------------------------------------------------- 1-D rules

@lru_cache(maxsize=256)
def gauss_jacobi01(order: int, a: float, b: float):
    """Nodes/weights on [0, 1] for the weight (1-t)^a t^b."""
    if order < 1:
        raise ValueError("order must be positive")
    if a <= -1 or b <= -1:
        raise ValueError("Jacobi exponents must exceed -1")
    x, w = special.roots_jacobi(order, a, b)
    t = 0.5 * (1.0 + x)
    w = w * 2.0 ** (-a - b - 1.0)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_legendre(order: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(order)
    return lo + (hi - lo) * 0.5 * (x + 1.0), w * 0.5 * (hi - lo)


# ------------------------------------------------------------ sphere rules

@lru_cache(maxsize=64)
def sphere_rule(n: int, order: int):
    """Product rule for normalized surface measure on S_n (n = 1, 2).

    n = 1: equispaced angles. n = 2: |zeta_1|^2 = u is uniform on [0, 1]
    and both phases are uniform, so Gauss-Legendre in u times two
    equispaced angle sets.
    """
    if n == 1:
        th = 2 * np.pi * (np.arange(order) + 0.5) / order
        nodes = np.exp(1j * th)[:, None]
        w = np.full(order, 1.0 / order)
    elif n == 2:
        nu = max(2, order // 2)
        u, wu = gauss_legendre(nu, 0.0, 1.0)
        th = 2 * np.pi * (np.arange(order) + 0.5) / order
        U, T1, T2 = np.meshgrid(u, th, th + np.pi / order, indexing="ij")
        W = np.broadcast_to(wu[:, None, None], U.shape) / order ** 2
        nodes = np.stack([np.sqrt(U) * np.exp(1j * T1),
                          np.sqrt(1.0 - U) * np.exp(1j * T2)], axis=-1).reshape(-1, 2)
        w = W.reshape(-1)
    else:
        raise NotImplementedError("product sphere rules are provided for n <= 2")
    nodes.setflags(write=False)
    w = np.ascontiguousarray(w)
    w.setflags(write=False)
    return nodes, w


def sample_sphere(rng, m, n):
    g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    return g / np.linalg.norm(g, axis=1)[:, None]


# -------------------------------------------------------------- ball rules

@lru_cache(maxsize=128)
def _ball_product(n: int, alpha: float, radial: int, angular: int):
    t, wt = gauss_jacobi01(radial, alpha, n - 1)
    wt = wt / wt.sum()
    s_nodes, s_w = sphere_rule(n, angular)
    nodes = (np.sqrt(t)[:, None, None] * s_nodes[None, :, :]).reshape(-1, n)
    w = (wt[:, None] * s_w[None, :]).reshape(-1)
    return nodes, w


def ball_product_rule(n: int, alpha: float, radial: int, angular: int) -> Rule:
    """Deterministic rule for the probability measure dv_alpha on B_n."""
    nodes, w = _ball_product(n, float(alpha), radial, angular)
    return Rule(nodes, w.copy(), meta={"kind": "product", "alpha": alpha})


def ball_mc_rule(n: int, alpha: float, samples: int, rng, strata: int = 16) -> Rule:
    """Stratified Monte Carlo rule for dv_alpha.

    |z|^2 follows Beta(n, alpha+1); its CDF is split into equal-probability
    strata with ``samples // strata`` draws each.
    """
    strata = max(1, min(strata, samples))
    per = samples // strata
    m = per * strata
    k = np.repeat(np.arange(strata), per)
    u = (k + rng.random(m)) / strata
    t = special.betaincinv(n, alpha + 1.0, u)
    nodes = np.sqrt(t)[:, None] * sample_sphere(rng, m, n)
    return Rule(nodes, np.full(m, 1.0 / m), True, np.arange(m), k,
                meta={"kind": "mc", "alpha": alpha})


def pushforward_density(y, center, alpha):
    """Density of phi_a(x), x ~ dv_alpha, with respect to dv_alpha at y."""
    n = y.shape[-1]
    aa = norm2(center)
    d = np.abs(1.0 - y @ np.conj(center)) ** 2
    return ((1.0 - aa) / d) ** (n + 1 + alpha)


def adapt_rule(base: Rule, centers, alpha: float) -> Rule:
    """Balance-heuristic mixture of ``base`` and its Mobius pushforwards.

    Nodes phi_{a_k}(x_i) for every center (plus the identity), weight
    w_i / sum_j p_j(node), where p_0 = 1 and p_j is the pushforward density.
    Exact for any integrable function in the limit of the base rule, and
    unbiased when the base rule is Monte Carlo.
    """
    centers = [as_point(c) for c in centers]
    centers = [c for c in centers if norm2(c) > 0]
    if not centers:
        return base
    n = base.n
    C = np.array(centers, dtype=np.complex128).reshape(-1, n)
    moved = kernels.mobius_transport(C, base.nodes)  # (K, m, n)
    all_nodes = np.concatenate([base.nodes[None], moved]).reshape(-1, n)
    dens = np.ones(all_nodes.shape[0])
    for c in C:
        dens += pushforward_density(all_nodes, c, alpha)
    reps = C.shape[0] + 1
    w = np.tile(base.weights, reps) / dens
    if base.random:
        return Rule(all_nodes, w, True, np.tile(base.group, reps), np.tile(base.stratum, reps),
                    meta=dict(base.meta, centers=len(C)))
    return Rule(all_nodes, w, meta=dict(base.meta, centers=len(C)))


# ------------------------------------------------------- Bergman-ball rules

@lru_cache(maxsize=64)
def _bergman_ball_product(n, rho, radial, angular):
    t, wt = gauss_jacobi01(radial, 0.0, n - 1)
    wt = wt / wt.sum()
    s_nodes, s_w = sphere_rule(n, angular)
    u = (rho * np.sqrt(t)[:, None, None] * s_nodes[None]).reshape(-1, n)
    # dtau = dv / (1-|u|^2)^(n+1); dv(rho x) = rho^(2n) dv(x)
    w = (wt[:, None] * s_w[None, :]).reshape(-1) * rho ** (2 * n)
    w = w / (1.0 - norm2(u)) ** (n + 1)
    return u, w


def bergman_ball_rule(n: int, gamma: float, radial: int = 12, angular: int = 24,
                      rng=None, samples: int = 0) -> Rule:
    """Rule for dtau over D(0, gamma) = {|u| < tanh gamma}.

    Transport to D(c, gamma) with ``mobius_transport``; dtau is invariant,
    so the weights are unchanged.
    """
    rho = float(np.tanh(gamma))
    if rho >= 1.0:
        raise ValueError("gamma too large: tanh(gamma) rounds to 1")
    if rng is None:
        u, w = _bergman_ball_product(n, rho, radial, angular)
        return Rule(u, w.copy())
    base = ball_mc_rule(n, 0.0, samples, rng)
    u = rho * base.nodes
    w = base.weights * rho ** (2 * n) / (1.0 - norm2(u)) ** (n + 1)
    return Rule(u, w, True, base.group, base.stratum)


def ellipsoid_mc_rule(center, gamma, samples: int, rng) -> Rule:
    """Monte Carlo rule for normalized volume dv restricted to D(a, gamma).

    Uses the Euclidean ellipsoid description of the Bergman ball, so it is
    independent of the Mobius transport used by :func:`bergman_ball_rule`.
    """
    from .geometry import bergman_ball_ellipsoid

    a = as_point(center)
    n = a.shape[0]
    c, along, across = bergman_ball_ellipsoid(a, gamma)
    base = ball_mc_rule(n, 0.0, samples, rng)
    x = base.nodes
    aa = float(norm2(a))
    if aa > 0:
        e = a / np.sqrt(aa)
        par = (x @ np.conj(e))[:, None] * e[None, :]
        z = c + along * par + across * (x - par)
    else:
        z = c + along * x
    vol = along ** 2 * across ** (2 * (n - 1))
    return Rule(z, base.weights * vol, True, base.group, base.stratum)


# ------------------------------------------------------------ tube rules

def _lens_pieces(rho0, rho1):
    """theta intervals for {rho0 <= |1-lam| < rho1, |lam| < 1}, lam = 1 - rho e^{i theta}.

    Returns (lo, hi, upper_is_circle) triples; on circle pieces the radial
    upper limit is 2 cos(theta) (the unit circle), otherwise rho1.
    """
    th0 = np.arccos(min(1.0, rho0 / 2.0)) if rho0 > 0 else np.pi / 2
    if rho1 >= 2.0:
        return [(-th0, th0, True)]
    th1 = np.arccos(rho1 / 2.0)
    pieces = [(-th1, th1, False)]
    if th0 > th1:
        pieces += [(th1, th0, True), (-th0, -th1, True)]
    return pieces


def lens_rule(beta: float, rho0: float, rho1: float, n_theta: int, n_rho: int):
    """Nodes lam and weights for (1-|lam|^2)^beta dA(lam)/pi on the lens region.

    In polar coordinates around 1, 1 - |lam|^2 = rho (2 cos theta - rho).
    Endpoint singularities in rho are absorbed into Gauss-Jacobi weights.
    """
    lam_all, w_all = [], []
    for lo, hi, circ in _lens_pieces(rho0, rho1):
        if hi - lo <= 0:
            continue
        th, wth = gauss_legendre(n_theta, lo, hi)
        c2 = 2.0 * np.cos(th)
        if circ:
            U = c2
        else:
            U = np.full_like(th, rho1)
        L = U - rho0
        keep = L > 0
        th, wth, c2, U, L = th[keep], wth[keep], c2[keep], U[keep], L[keep]
        a_exp = beta if circ else 0.0
        b_exp = beta + 1.0 if rho0 == 0 else 0.0
        s, ws = gauss_jacobi01(n_rho, a_exp, b_exp)
        S = s[None, :]
        rho = rho0 + L[:, None] * S
        # integrand rho^(beta+1) (c2 - rho)^beta; divide out the Jacobi weight
        f = np.ones_like(rho)
        if rho0 == 0:
            f = f * L[:, None] ** (beta + 1.0)
        else:
            f = f * rho ** (beta + 1.0)
        if circ:
            f = f * L[:, None] ** beta
        else:
            f = f * (c2[:, None] - rho) ** beta
        w = wth[:, None] * L[:, None] * ws[None, :] * f / np.pi
        lam = 1.0 - rho * np.exp(1j * th)[:, None]
        lam_all.append(lam.reshape(-1))
        w_all.append(w.reshape(-1))
    if not lam_all:
        return np.zeros(0, dtype=np.complex128), np.zeros(0)
    return np.concatenate(lam_all), np.concatenate(w_all)


def tube_region_rule(zeta, alpha: float, rho0: float, rho1: float,
                     n_theta: int = 24, n_rho: int = 16, inner: tuple = (6, 12)) -> Rule:
    """Rule for dv_alpha on {z in B_n : rho0 <= |1 - <z, zeta>| < rho1}.

    Writes z = lam zeta + sqrt(1-|lam|^2) x with x in B_{n-1}; the lam
    factor carries (n+alpha)/pi (1-|lam|^2)^(n-1+alpha) dA and x carries
    dv_alpha on B_{n-1}. Q_r(zeta) is rho in [0, r^2).
    """
    zeta = as_point(zeta)
    n = zeta.shape[0]
    lam, wl = lens_rule(n - 1 + alpha, rho0, min(rho1, 2.0), n_theta, n_rho)
    wl = wl * (n + alpha)
    if n == 1:
        return Rule((lam * zeta[0])[:, None], wl)
    Ucomp = unitary_completion(zeta)
    xr = ball_product_rule(n - 1, alpha, inner[0], inner[1])
    R = np.sqrt(np.clip(1.0 - np.abs(lam) ** 2, 0.0, None))
    perp = xr.nodes @ Ucomp[:, 1:].T  # (mx, n)
    z = lam[:, None, None] * zeta[None, None, :] + R[:, None, None] * perp[None, :, :]
    w = wl[:, None] * xr.weights[None, :]
    return Rule(z.reshape(-1, n), w.reshape(-1))


def tube_rule(tube, alpha: float, **kw) -> Rule:
    return tube_region_rule(tube.apex, alpha, 0.0, tube.radius ** 2, **kw)


def dyadic_annuli_rule(zeta, alpha: float, r: float, **kw) -> Rule:
    """dv_alpha over all of B_n, split into Q_{2r} and dyadic annuli 2^k r <= d < 2^(k+1) r."""
    pieces = [tube_region_rule(zeta, alpha, 0.0, min(4 * r * r, 2.0), **kw)]
    lo = 4 * r * r
    while lo < 2.0:
        hi = min(4 * lo, 2.0)
        pieces.append(tube_region_rule(zeta, alpha, lo, hi, **kw))
        lo = hi
    return concat_rules(pieces)
