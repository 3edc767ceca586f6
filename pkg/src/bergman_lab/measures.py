"""Weighted measures on the ball and the integration front end.

``dv_alpha = c_alpha (1-|z|^2)^alpha dv`` (a probability measure for
alpha > -1), the invariant measure ``dtau = dv / (1-|z|^2)^(n+1)`` and
normalized surface measure ``dsigma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from . import quadrature as qd
from .geometry import BergmanBall, CarlesonTube, as_point, norm2
from . import kernels

MODES = ("auto", "product", "monte-carlo")


@dataclass(frozen=True)
class QuadSpec:
    """Integration configuration.

    ``mode="auto"`` picks the product rule for n = 1 and Monte Carlo
    otherwise. ``inner_*`` fields size the per-node Bergman-ball rule used
    by area functions and other nested integrals.
    """

    n: int = 1
    mode: str = "auto"
    radial_order: int = 24
    angular_order: int = 48
    sample_count: int = 20000
    seed: int = 0
    strata: int = 16
    inner_radial: int = 10
    inner_angular: int = 20
    inner_samples: int = 512
    adapt: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.radial_order < 4:
            raise ValueError("radial_order must be at least 4")
        if self.resolved_mode == "monte-carlo" and self.sample_count < 1000:
            raise ValueError("monte-carlo needs sample_count >= 1000")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def resolved_mode(self) -> str:
        if self.mode == "auto":
            return "product" if self.n == 1 else "monte-carlo"
        return self.mode

    @property
    def deterministic(self) -> bool:
        return self.resolved_mode == "product"

    def rng(self, *stream):
        """Independent generator for a named sub-stream of this spec's seed."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=tuple(stream)))

    def with_(self, **kw) -> "QuadSpec":
        return replace(self, **kw)


@dataclass(frozen=True)
class Estimate:
    value: complex | float
    stderr: float = 0.0
    samples_used: int = 0
    divergent: bool = False
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    def agrees_with(self, other, k=3.0, floor=0.0) -> bool:
        tol = k * math.hypot(self.stderr, getattr(other, "stderr", 0.0)) + floor
        return abs(self.value - getattr(other, "value", other)) <= tol


@dataclass(frozen=True)
class WeightedMeasure:
    kind: str = "v_alpha"
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in ("v_alpha", "tau", "sigma"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "v_alpha" and self.alpha <= -1:
            raise ValueError("v_alpha needs alpha > -1 to be normalizable")


def c_alpha(n: int, alpha: float) -> float:
    """Gamma(n+alpha+1) / (n! Gamma(alpha+1))."""
    if alpha <= -1:
        raise ValueError("c_alpha is only a normalizing constant for alpha > -1")
    return math.exp(special.gammaln(n + alpha + 1) - special.gammaln(n + 1)
                    - special.gammaln(alpha + 1))


def monomial_norm_exact(J, n: int, alpha: float) -> float:
    """Closed form of int |z^J|^2 dv_alpha = J! Gamma(n+alpha+1) / Gamma(n+|J|+alpha+1)."""
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    J = tuple(int(j) for j in J)
    if len(J) != n:
        raise ValueError("multi-index length must equal n")
    k = sum(J)
    lg = sum(special.gammaln(j + 1) for j in J)
    return math.exp(lg + special.gammaln(n + alpha + 1) - special.gammaln(n + k + alpha + 1))


def kernel_power_integral_exact(znorm: float, lam: float, n: int, alpha: float,
                                tol: float = 1e-15, max_terms: int = 200000) -> float:
    """Series for int |1 - <z,w>|^(-2 lam) dv_alpha(w) with |z| = znorm < 1.

    Expands (1-<z,w>)^(-lam) = sum (lam)_k/k! <z,w>^k and uses orthogonality
    of homogeneous parts: int |<z,w>^k|^2 dv_alpha = |z|^(2k) k! Gamma(n+alpha+1)/Gamma(n+k+alpha+1).
    """
    x = znorm * znorm
    total = 0.0
    lg0 = special.gammaln(n + alpha + 1)
    for k in range(max_terms):
        lt = (2 * (special.gammaln(lam + k) - special.gammaln(lam) - special.gammaln(k + 1))
              + special.gammaln(k + 1) + lg0 - special.gammaln(n + k + alpha + 1))
        term = math.exp(lt) * x ** k if x > 0 or k == 0 else 0.0
        total += term
        if k > 10 and term < tol * total:
            break
    return total


def bergman_ball_volume_alpha_series(w, gamma: float, alpha: float, tol: float = 1e-16):
    """v_alpha(D(w, gamma)) from a power series, vectorized over points ``w``.

    Pulling back by phi_w gives
    c_alpha (1-|w|^2)^lam int_{|x|<R} (1-|x|^2)^alpha |1-<x,w>|^(-2 lam) dv(x),
    lam = n+1+alpha, R = tanh(gamma). Expanding the kernel, the k-th term is
    ((lam)_k/k!)^2 |w|^(2k) k!(n-1)!/(n-1+k)! n B(n+k, alpha+1) I_{R^2}(n+k, alpha+1),
    which decays like (R|w|)^(2k).
    """
    w = as_point(w)
    batch = w.reshape(-1, w.shape[-1])
    n = batch.shape[1]
    ww = norm2(batch)
    R2 = math.tanh(gamma) ** 2
    lam = n + 1 + alpha
    kmax = int(math.ceil(math.log(tol) / math.log(R2))) + 20 if R2 > 0 else 1
    k = np.arange(kmax, dtype=float)
    lcoef = (2 * (special.gammaln(lam + k) - special.gammaln(lam) - special.gammaln(k + 1))
             + special.gammaln(k + 1) + special.gammaln(n) - special.gammaln(n + k)
             + math.log(n) + special.betaln(n + k, alpha + 1))
    coef = np.exp(lcoef) * special.betainc(n + k, alpha + 1, R2)
    lw = np.log(np.where(ww > 0, ww, 1.0))
    terms = np.exp(np.clip(lw[:, None] * k[None, :], -745, 0)) * coef[None, :]
    terms[ww == 0, 1:] = 0.0
    val = c_alpha(n, alpha) * (1.0 - ww) ** lam * terms.sum(axis=1)
    return val.reshape(w.shape[:-1]) if w.ndim > 1 else float(val[0])


def tau_ball_volume(n: int, gamma: float) -> float:
    """tau(D(z, gamma)) = sinh(gamma)^(2n) for every center."""
    return math.sinh(gamma) ** (2 * n)


# ------------------------------------------------------------------ rules

def ball_rule(spec: QuadSpec, alpha: float, centers=(), stream=(0,)) -> qd.Rule:
    """Rule for dv_alpha on B_n per ``spec``, Mobius-adapted to ``centers``."""
    if spec.deterministic:
        base = qd.ball_product_rule(spec.n, alpha, spec.radial_order, spec.angular_order)
    else:
        base = qd.ball_mc_rule(spec.n, alpha, spec.sample_count, spec.rng(*stream), spec.strata)
    if spec.adapt and len(centers):
        return qd.adapt_rule(base, centers, alpha)
    return base


def inner_ball_rule(spec: QuadSpec, gamma: float) -> qd.Rule:
    """Deterministic dtau rule on D(0, gamma) used for nested (per-node) integrals.

    n = 1 uses ``inner_radial x inner_angular`` nodes. For n = 2 the sphere
    rule is fixed at order 6 (108 nodes) and the radial order is chosen so
    the total is about ``inner_samples``. A deterministic inner rule keeps
    every random error inside the outer stderr.
    """
    if spec.n == 1:
        return qd.bergman_ball_rule(1, gamma, spec.inner_radial, spec.inner_angular)
    order = 6
    per = (order // 2) * order ** (spec.n)
    return qd.bergman_ball_rule(spec.n, gamma, max(3, spec.inner_samples // per), order)


def _call(f, nodes):
    vals = np.asarray(f(nodes))
    if vals.shape != (nodes.shape[0],):
        vals = np.broadcast_to(vals, (nodes.shape[0],))
    return vals


def integrate_rule(f, rule: qd.Rule) -> Estimate:
    vals = _call(f, rule.nodes)
    val, se = qd.rule_estimate(rule, vals)
    if not np.isfinite(val):
        return Estimate(val, 0.0, len(rule), divergent=True, notes=("non-finite integrand",))
    if not np.iscomplexobj(vals):
        val = float(val)
    return Estimate(val, se, len(rule))


def integrate_ball(f, measure: WeightedMeasure, spec: QuadSpec, centers=(),
                   integrable: bool | None = None) -> Estimate:
    """Integrate a scalar field over B_n (or S_n for ``sigma``).

    ``f`` maps an ``(m, n)`` array of points to ``m`` values. For ``tau``
    over the whole ball the integral is built from partial sums over
    D(0, k), k = 1, 2, ...; growth beyond an overflow guard or failure to
    settle flags the estimate as divergent. ``integrable=False`` is
    rejected outright for ``tau``.
    """
    if measure.kind == "v_alpha":
        return integrate_rule(f, ball_rule(spec, measure.alpha, centers))
    if measure.kind == "sigma":
        if spec.deterministic:
            nodes, w = qd.sphere_rule(spec.n, spec.angular_order)
            rule = qd.Rule(nodes, w.copy())
        else:
            m = spec.sample_count
            rule = qd.Rule(qd.sample_sphere(spec.rng(2), m, spec.n), np.full(m, 1.0 / m),
                           True, np.arange(m), np.zeros(m, dtype=np.int64))
        return integrate_rule(f, rule)
    # tau over the whole ball
    if integrable is False:
        raise ValueError("global tau-integrals of non-integrable data are rejected")
    guard = 1e12
    prev = None
    total = 0.0
    var = 0.0
    used = 0
    for k in range(1, 13):
        shell = _tau_shell_rule(spec, k - 1.0, float(k))
        est = integrate_rule(f, shell)
        total += est.value
        var += est.stderr ** 2
        used += est.samples_used
        if not np.isfinite(total) or abs(total) > guard:
            return Estimate(float("inf"), 0.0, used, divergent=True,
                            notes=("partial sums exceeded overflow guard",))
        if prev is not None and abs(est.value) <= 1e-10 * max(abs(total), 1e-300):
            return Estimate(total, math.sqrt(var), used)
        prev = total
    return Estimate(total, math.sqrt(var), used, divergent=True,
                    notes=("partial sums did not settle",))


def _tau_shell_rule(spec, g0, g1):
    """dtau over the shell g0 <= beta(0, u) < g1 (difference of two ball rules)."""
    n = spec.n
    r0, r1 = np.tanh(g0), np.tanh(g1)
    # u = sqrt(t) zeta with t in [r0^2, r1^2]; dtau = n t^(n-1) (1-t)^(-n-1) dt dsigma
    t, wt = qd.gauss_legendre(spec.radial_order, r0 ** 2, r1 ** 2)
    wt = wt * n * t ** (n - 1) / (1.0 - t) ** (n + 1)
    s_nodes, s_w = qd.sphere_rule(n, spec.angular_order) if n <= 2 else (None, None)
    if s_nodes is None:
        raise NotImplementedError("tau shells need n <= 2")
    nodes = (np.sqrt(t)[:, None, None] * s_nodes[None]).reshape(-1, n)
    return qd.Rule(nodes, (wt[:, None] * s_w[None]).reshape(-1))


def integrate_bergman_ball(g, ball: BergmanBall, spec: QuadSpec, inner: bool = False) -> Estimate:
    """int_{D(c, gamma)} g dtau, computed as int_{|u| < tanh gamma} g(phi_c(u)) dtau(u)."""
    rho = math.tanh(ball.radius)
    if rho >= 1.0:
        raise ValueError("gamma too large: tanh(gamma) == 1 in floating point")
    if inner:
        rule = inner_ball_rule(spec, ball.radius)
    elif spec.deterministic:
        rule = qd.bergman_ball_rule(ball.n, ball.radius, spec.radial_order, spec.angular_order)
    else:
        rule = qd.bergman_ball_rule(ball.n, ball.radius, rng=spec.rng(3), samples=spec.sample_count)
    nodes = kernels.mobius_transport(ball.center.reshape(1, -1), rule.nodes)[0]
    return integrate_rule(g, qd.Rule(nodes, rule.weights, rule.random, rule.group, rule.stratum))


def bergman_ball_volume_alpha(center, gamma, alpha, spec: QuadSpec) -> float:
    """v_alpha(D(c, gamma)) = int_{D} c_alpha (1-|w|^2)^(alpha+n+1) dtau(w)."""
    c = as_point(center)
    n = c.shape[0]
    ca = c_alpha(n, alpha)
    est = integrate_bergman_ball(lambda w: ca * (1.0 - norm2(w)) ** (alpha + n + 1),
                                 BergmanBall(c, gamma), spec)
    return est.value


def tube_volume(tube: CarlesonTube, alpha: float, spec: QuadSpec) -> Estimate:
    """v_alpha(Q_r(zeta)).

    Product mode integrates the lens rule in <z, zeta> exactly-weighted;
    Monte Carlo mode samples a Mobius-adapted proposal concentrated at the
    apex and counts tube membership (importance-weighted rejection).
    """
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    r2 = tube.radius ** 2
    if r2 >= 2.0:
        return Estimate(1.0, 0.0, 0)
    if spec.deterministic:
        rule = qd.tube_rule(tube, alpha, n_theta=max(spec.radial_order, 16),
                            n_rho=max(spec.radial_order // 2, 8))
        return Estimate(float(min(1.0, rule.weights.sum())), 0.0, len(rule))
    center = max(0.0, 1.0 - r2) * tube.apex
    base = qd.ball_mc_rule(tube.n, alpha, spec.sample_count, spec.rng(4), spec.strata)
    rule = qd.adapt_rule(base, [center], alpha)
    ind = (np.abs(1.0 - rule.nodes @ np.conj(tube.apex)) < r2).astype(float)
    val, se = qd.rule_estimate(rule, ind)
    return Estimate(float(val), se, len(rule))


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(coef[0]), float(coef[1])
