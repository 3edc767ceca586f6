"""Norms, maximal and area functions, Bloch/BMO quantities and equivalence ratios.

Pointwise operators are evaluated in batches: every outer node ``z`` gets
the same inner rule on D(0, gamma) transported by phi_z, so a whole outer
integral costs one vectorized function evaluation per chunk.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize

from . import kernels
from . import quadrature as qd
from .geometry import CarlesonTube, as_point, norm2
from .holo import HoloFunc, invariant_gradient_sq, radial_derivative_k
from .measures import Estimate, QuadSpec, ball_rule, c_alpha, inner_ball_rule

AREA_KINDS = ("radial", "gradient", "invariant")
CHUNK = 1 << 20


@dataclass(frozen=True)
class SpaceParams:
    n: int = 1
    p: float = 2.0
    q: float = 2.0
    alpha: float = 0.0
    gamma: float = 0.5
    k: int = 0

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("p must be positive")
        if self.q <= 1:
            raise ValueError("q must exceed 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.k < 0:
            raise ValueError("k must be nonnegative")

    @property
    def N(self) -> int:
        """Smallest nonnegative integer with p N + alpha > -1."""
        return smallest_N(self.p, self.alpha)

    def key(self) -> dict:
        return {"n": self.n, "p": self.p, "q": self.q, "alpha": self.alpha, "gamma": self.gamma}


def smallest_N(p: float, alpha: float) -> int:
    if alpha > -1:
        return 0
    N = int(math.floor((-1.0 - alpha) / p)) + 1
    while p * (N - 1) + alpha > -1 and N > 0:
        N -= 1
    return N


# ------------------------------------------------------------ outer norms

def _lp_from_rule(rule: qd.Rule, h, p: float) -> Estimate:
    """(sum w h^p)^(1/p) with a delta-method stderr."""
    vals = np.asarray(h, dtype=float) ** p
    I, se = qd.rule_estimate(rule, vals)
    I = float(np.real(I))
    if not np.isfinite(I):
        return Estimate(float("inf"), 0.0, len(rule), divergent=True, notes=("non-finite integrand",))
    if I <= 0:
        return Estimate(0.0, se ** (1.0 / p) if se > 0 else 0.0, len(rule))
    val = I ** (1.0 / p)
    return Estimate(val, val * se / (p * I), len(rule))


def outer_rule(f, alpha: float, spec: QuadSpec, stream=(0,)) -> qd.Rule:
    centers = f.poles() if isinstance(f, HoloFunc) else []
    return ball_rule(spec, alpha, centers, stream)


def _near_critical(f: HoloFunc, p: float, alpha: float):
    notes = []
    for t in f.kernel_terms:
        if np.sum(np.abs(t.a) ** 2) >= 0.99 ** 2 and p * t.b > f.n + 1 + alpha:
            notes.append("kernel pole near the sphere with p*b > n+1+alpha: near-critical")
            break
    return tuple(notes)


def bergman_norm(f, p: float, alpha: float, spec: QuadSpec) -> Estimate:
    """||f||_{p,alpha} = (int |f|^p dv_alpha)^(1/p)."""
    if alpha <= -1:
        raise ValueError("alpha must exceed -1 for the classical norm")
    if getattr(f, "integrable", True) is False:
        return Estimate(float("inf"), 0.0, 0, divergent=True, notes=("integrand tagged non-integrable",))
    rule = outer_rule(f, alpha, spec)
    est = _lp_from_rule(rule, np.abs(np.asarray(f(rule.nodes))), p)
    if isinstance(f, HoloFunc):
        notes = _near_critical(f, p, alpha)
        if notes:
            est = Estimate(est.value, est.stderr, est.samples_used, est.divergent, est.notes + notes)
    return est


def generalized_norm(f: HoloFunc, p: float, alpha: float, spec: QuadSpec) -> Estimate:
    """|f(0)| + (int (1-|z|^2)^(pN) |R^N f|^p dv_alpha)^(1/p), N smallest with pN+alpha > -1.

    dv_alpha carries c_alpha = 1 when alpha <= -1. With N = 0 this is
    |f(0)| + ||f||_{p,alpha}, an equivalent norm kept verbatim.
    """
    N = smallest_N(p, alpha)
    a2 = p * N + alpha  # > -1
    g = radial_derivative_k(f, N)
    rule = outer_rule(g, a2, spec)
    # (1-|z|^2)^(pN) dv_alpha = c_alpha / c_{a2} dv_{a2}
    scale = (c_alpha(f.n, alpha) if alpha > -1 else 1.0) / c_alpha(f.n, a2)
    vals = np.abs(np.asarray(g(rule.nodes))) ** p * scale
    I, se = qd.rule_estimate(rule, vals)
    I = float(np.real(I))
    f0 = abs(f(np.zeros(f.n)))
    if I <= 0:
        return Estimate(f0, 0.0, len(rule), notes=(f"N={N}",))
    part = I ** (1.0 / p)
    return Estimate(f0 + part, part * se / (p * I), len(rule), notes=(f"N={N}",))


# ------------------------------------------------------------ maximal functions

@lru_cache(maxsize=32)
def _sphere_points(n: int, count: int):
    if n == 1:
        return np.exp(2j * np.pi * np.arange(count) / count)[:, None]
    order = max(4, int(round((2 * count) ** (1.0 / 3.0))))
    return qd.sphere_rule(n, order)[0]


@lru_cache(maxsize=32)
def _maximal_nodes(n: int, gamma: float, count: int, shells: int):
    R = math.tanh(gamma)
    S = _sphere_points(n, count)
    layers = [np.zeros((1, n), dtype=np.complex128)]
    for j in range(1, shells + 1):
        layers.append(R * j / shells * S)
    out = np.ascontiguousarray(np.concatenate(layers))
    out.setflags(write=False)
    return out


def maximal_values(f: HoloFunc, Z, gamma: float, boundary_samples: int = 64, k: int = 0,
                   weighted: bool = True, shells: int = 4) -> np.ndarray:
    """sup over D(z, gamma) at every z in ``Z``.

    k = 0 (or unweighted): sup |R^k f|, sampled on the center and phi_z of
    the sphere |u| = tanh(gamma) (maximum principle). Weighted k >= 1:
    sup (1-|w|^2)^k |R^k f(w)|, which is not holomorphic, so interior
    shells are sampled as well.
    """
    Z = as_point(Z).reshape(-1, f.n)
    g = radial_derivative_k(f, k) if k else f
    interior = weighted and k > 0
    U = _maximal_nodes(f.n, float(gamma), int(boundary_samples), shells if interior else 1)
    out = np.empty(len(Z))
    step = max(1, CHUNK // len(U))
    for s in range(0, len(Z), step):
        W = kernels.mobius_transport(np.ascontiguousarray(Z[s:s + step]), U)
        flat = W.reshape(-1, f.n)
        v = np.abs(g.derivs(flat, want_grad=False)[0])
        if interior:
            v = v * (1.0 - norm2(flat)) ** k
        out[s:s + step] = v.reshape(W.shape[0], -1).max(axis=1)
    return out


def maximal_fn(f: HoloFunc, z, gamma: float, boundary_samples: int = 64) -> float:
    """(M_gamma f)(z) = sup_{w in D(z, gamma)} |f(w)|."""
    return float(maximal_values(f, as_point(z)[None], gamma, boundary_samples)[0])


def maximal_fn_k(f: HoloFunc, z, gamma: float, k: int, boundary_samples: int = 64,
                 weighted: bool = True) -> float:
    """sup_{w in D(z, gamma)} (1-|w|^2)^k |R^k f(w)| (or without the weight)."""
    return float(maximal_values(f, as_point(z)[None], gamma, boundary_samples, k, weighted)[0])


# ------------------------------------------------------------ area functions

def area_values(f: HoloFunc, Z, gamma: float, q: float, spec: QuadSpec,
                kinds=AREA_KINDS, ks=()) -> dict:
    """Area functions at every z in ``Z``.

    ``kinds`` picks from radial, gradient, invariant. ``ks`` adds
    ``A_{R^k}`` (weight (1-|w|^2)^k on R^k f) under the key ``("R", k)``.
    """
    Z = as_point(Z).reshape(-1, f.n)
    rule = inner_ball_rule(spec, gamma)
    U, u = rule.nodes, rule.weights
    K = len(U)
    out = {kind: np.empty(len(Z)) for kind in kinds}
    rks = {k: radial_derivative_k(f, k) for k in ks}
    for k in ks:
        out[("R", k)] = np.empty(len(Z))
    step = max(1, CHUNK // K)
    for s in range(0, len(Z), step):
        W = kernels.mobius_transport(np.ascontiguousarray(Z[s:s + step]), U)
        m = W.shape[0]
        flat = W.reshape(-1, f.n)
        ww = norm2(flat)
        if kinds:
            _, grad = f.derivs(flat)
            if "radial" in kinds:
                rf = np.abs(np.sum(flat * grad, axis=1)) * (1.0 - ww)
                out["radial"][s:s + m] = (rf ** q).reshape(m, K) @ u
            if "gradient" in kinds:
                g2 = np.sum(grad.real ** 2 + grad.imag ** 2, axis=1) * (1.0 - ww) ** 2
                out["gradient"][s:s + m] = (g2 ** (q / 2)).reshape(m, K) @ u
            if "invariant" in kinds:
                inv = np.clip(invariant_gradient_sq(flat, grad, ww), 0.0, None)
                out["invariant"][s:s + m] = (inv ** (q / 2)).reshape(m, K) @ u
        for k, g in rks.items():
            v = np.abs(g.derivs(flat, want_grad=False)[0]) * (1.0 - ww) ** k
            out[("R", k)][s:s + m] = (v ** q).reshape(m, K) @ u
    for key in out:
        out[key] = np.maximum(out[key], 0.0) ** (1.0 / q)
    return out


def _area_one(f, z, params, spec, kind):
    return float(area_values(f, as_point(z)[None], params.gamma, params.q, spec,
                             kinds=(kind,))[kind][0])


def area_radial(f, z, params: SpaceParams, spec: QuadSpec) -> float:
    return _area_one(f, z, params, spec, "radial")


def area_gradient(f, z, params: SpaceParams, spec: QuadSpec) -> float:
    return _area_one(f, z, params, spec, "gradient")


def area_invariant(f, z, params: SpaceParams, spec: QuadSpec) -> float:
    return _area_one(f, z, params, spec, "invariant")


def area_radial_k(f, z, params: SpaceParams, k: int, spec: QuadSpec) -> float:
    """A_{R^k}: (int_{D(z,gamma)} |(1-|w|^2)^k R^k f(w)|^q dtau)^(1/q)."""
    return float(area_values(f, as_point(z)[None], params.gamma, params.q, spec, kinds=(),
                             ks=(k,))[("R", k)][0])


# ------------------------------------------------------------ Bloch and BMO

def _pow2(x: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(x, 1.0))))


@lru_cache(maxsize=16)
def hyperbolic_grid(n: int, step: float, rho_max: float) -> np.ndarray:
    """Nested hyperbolically dense grid: shells at Bergman radii j*step, power-of-two angular counts.

    Halving ``step`` yields a superset, so sups over it are monotone in refinement.
    """
    pts = [np.zeros((1, n), dtype=np.complex128)]
    J = int(math.floor(rho_max / step + 1e-9))
    for j in range(1, J + 1):
        r = math.tanh(j * step)
        tang = r / math.sqrt(1.0 - r * r)
        nrm = r / (1.0 - r * r)
        if n == 1:
            m = _pow2(2 * math.pi * nrm / step)
            pts.append((r * np.exp(2j * math.pi * np.arange(m) / m))[:, None])
            continue
        n_th = _pow2(0.5 * math.pi * tang / step)
        n_psi = _pow2(2 * math.pi * nrm / step)
        psi = np.exp(2j * math.pi * np.arange(n_psi) / n_psi)
        for i in range(n_th + 1):
            th = 0.5 * math.pi * i / n_th
            n_chi = _pow2(2 * math.pi * tang * math.sin(th) * math.cos(th) / step) if 0 < i < n_th else 1
            chi = np.exp(2j * math.pi * np.arange(n_chi) / n_chi)
            a = np.repeat(psi * math.cos(th), n_chi)
            b = (psi[:, None] * chi[None, :]).reshape(-1) * math.sin(th)
            pts.append(r * np.stack([a, b], axis=1))
    out = np.ascontiguousarray(np.concatenate(pts))
    out.setflags(write=False)
    return out


def _grid_defaults(n: int, level: int, coarse: bool = False):
    base, rho = ((0.1, 3.5) if n == 1 else (0.4, 2.0))
    if coarse:
        base *= 3 if n == 1 else 1.5
    return base / 2 ** level, rho


def sample_set(n: int, level: int = 0, centers=(), coarse: bool = False) -> np.ndarray:
    """Global grid plus Mobius images of a local grid around each center."""
    step, rho = _grid_defaults(n, level, coarse)
    pts = [hyperbolic_grid(n, step, rho)]
    if len(centers):
        local = hyperbolic_grid(n, step, min(rho, 2.0))
        C = np.array([as_point(c) for c in centers], dtype=np.complex128).reshape(-1, n)
        pts.append(kernels.mobius_transport(C, local).reshape(-1, n))
    return np.concatenate(pts)


def _polish(fun, starts, n, radius=0.6):
    """Locally maximize ``fun`` (batch callback) from each start in a Mobius chart."""
    best = -np.inf
    for w0 in starts:
        def obj(x):
            u = (x[:n] + 1j * x[n:]).reshape(1, n)
            if norm2(u)[0] >= radius ** 2:
                return 1e300
            w = kernels.mobius_transport(w0.reshape(1, n), u)[0]
            return -float(fun(w)[0])
        res = optimize.minimize(obj, np.zeros(2 * n), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 600 * n,
                                         "initial_simplex": 0.05 * np.vstack([np.zeros(2 * n),
                                                                              np.eye(2 * n)])})
        best = max(best, -float(res.fun))
    return best


def _top_starts(Z, vals, count):
    idx = np.argsort(-vals, kind="stable")[:count]
    return [Z[i] for i in idx]


def invariant_gradient_values(f: HoloFunc, Z) -> np.ndarray:
    Z = as_point(Z).reshape(-1, f.n)
    out = np.empty(len(Z))
    for s in range(0, len(Z), CHUNK):
        _, g = f.derivs(Z[s:s + CHUNK])
        out[s:s + CHUNK] = np.sqrt(np.clip(invariant_gradient_sq(Z[s:s + CHUNK], g), 0.0, None))
    return out


def bloch_norm(f: HoloFunc, samples: int = 0, centers=None, polish: bool = True) -> float:
    """sup |grad~ f| over a deterministic hyperbolically dense sample set.

    ``samples`` is the refinement level (each level halves the grid step).
    The set also holds local grids around ``centers`` (default: the kernel
    poles of f). ``polish`` refines the best few samples by a local
    Nelder-Mead search; without it the value is a plain sup over the set.
    """
    centers = f.poles() if centers is None else centers
    Z = sample_set(f.n, samples, centers)
    vals = invariant_gradient_values(f, Z)
    best = float(vals.max())
    if polish:
        best = max(best, _polish(lambda w: invariant_gradient_values(f, w),
                                 _top_starts(Z, vals, 3), f.n))
    return best


def area_sups(f: HoloFunc, kinds, gamma: float, q: float, spec: QuadSpec, level: int = 0,
              polish: bool = True) -> dict:
    """sup_z of several area functions, sharing the grid evaluation."""
    Z = sample_set(f.n, level, f.poles(), coarse=True)
    names = tuple(k for k in kinds if isinstance(k, str))
    ks = tuple(k[1] for k in kinds if not isinstance(k, str))
    grid = area_values(f, Z, gamma, q, spec, names, ks)
    out = {}
    for kind in kinds:
        vals = grid[kind]
        best = float(vals.max())
        if polish:
            one = ((kind,), ()) if isinstance(kind, str) else ((), (kind[1],))
            best = max(best, _polish(lambda w, kind=kind, one=one: area_values(f, w, gamma, q, spec, *one)[kind],
                                     _top_starts(Z, vals, 2), f.n))
        out[kind] = best
    return out


def area_sup(f: HoloFunc, kind, gamma: float, q: float, spec: QuadSpec, level: int = 0,
             polish: bool = True) -> float:
    """sup_z of an area function (kind as accepted by :func:`area_values`)."""
    return area_sups(f, (kind,), gamma, q, spec, level, polish)[kind]


def _tube_rule(tube, alpha, spec):
    return qd.tube_rule(tube, alpha, n_theta=max(spec.radial_order, 16),
                        n_rho=max(spec.radial_order // 2, 8))


def bmo_tube_norm(f, alpha: float, p: float, tubes, spec: QuadSpec) -> float:
    """max over tubes of ((1/v_alpha(Q)) int_Q |f - f_Q|^p dv_alpha)^(1/p)."""
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    if p < 1:
        raise ValueError("p must be at least 1")
    best = 0.0
    for tube in tubes:
        rule = _tube_rule(tube, alpha, spec)
        V = float(rule.weights.sum())
        if V < 1e-12:
            warnings.warn(f"tube of negligible measure skipped (v_alpha = {V:.3g})", stacklevel=2)
            continue
        vals = np.asarray(f(rule.nodes))
        mean = np.sum(rule.weights * vals) / V
        osc = (np.sum(rule.weights * np.abs(vals - mean) ** p) / V) ** (1.0 / p)
        best = max(best, float(osc))
    return best


def default_tubes(f: HoloFunc, radii=(1.5, 1.0, 0.5, 0.25, 0.125, 0.0625)):
    """Tubes at e_1 and at the direction of each kernel pole."""
    apexes = [np.eye(f.n, dtype=np.complex128)[0]]
    for a in f.poles():
        apexes.append(a / math.sqrt(norm2(a)))
    return [CarlesonTube(z, r) for z in apexes for r in radii]


# ------------------------------------------------------------ equivalence experiments

OPS = {
    "maximal": "||M_gamma f|| / ||f||",
    "area-radial": "||A_R f|| / ||f - f(0)||",
    "area-gradient": "||A_grad f|| / ||f - f(0)||",
    "area-invariant": "||A_inv f|| / ||f - f(0)||",
    "maximal-k": "||M^(k)_gamma (f - f(0))|| / ||f - f(0)|| (weighted)",
    "maximal-k-unweighted": "||M_gamma (R^k (f - f(0)))|| / ||f - f(0)|| (unweighted)",
    "area-radial-k": "||A_{R^(k+1)} f|| / ||f - f(0)||",
    "area-invariant-vs-f": "||A_inv f|| / ||f||",
    "bloch-area-radial": "sup A_R f / ||f||_B",
    "bloch-area-gradient": "sup A_grad f / ||f||_B",
    "bloch-area-invariant": "sup A_inv f / ||f||_B",
    "bmo": "bmo_tube_norm / ||f||_B",
}


@dataclass
class EquivReport:
    op_name: str
    family_id: str
    params: SpaceParams
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def ratios(self):
        return [r["ratio"] for r in self.rows]

    @property
    def min(self) -> float:
        return min(self.ratios) if self.rows else float("nan")

    @property
    def max(self) -> float:
        return max(self.ratios) if self.rows else float("nan")

    @property
    def spread(self) -> float:
        return self.max / self.min if self.rows and self.min > 0 else float("inf")

    CSV_FIELDS = ("op", "index", "name", "numerator", "numerator_stderr", "denominator",
                  "denominator_stderr", "ratio", "ratio_stderr")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for r in self.rows:
            w.writerow([self.op_name, r["index"], r["name"]]
                       + [repr(float(r[k])) for k in self.CSV_FIELDS[3:]])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"op": self.op_name, "description": OPS.get(self.op_name, ""),
                "family": self.family_id, "params": self.params.key() | {"k": self.params.k},
                "count": len(self.rows), "skipped": list(self.skipped),
                "min_ratio": self.min, "max_ratio": self.max, "spread": self.spread}

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


def _ratio_row(i, name, num: Estimate, den: Estimate):
    ratio = num.real / den.real
    rel = math.hypot(num.stderr / num.real if num.real else 0.0, den.stderr / den.real)
    return {"index": i, "name": name, "numerator": num.real, "numerator_stderr": num.stderr,
            "denominator": den.real, "denominator_stderr": den.stderr, "ratio": ratio,
            "ratio_stderr": abs(ratio) * rel}


class _Pointwise:
    """Per-function cache of outer rule, pointwise operator values and reference norms."""

    def __init__(self, f: HoloFunc, params: SpaceParams, spec: QuadSpec, boundary_samples=64):
        self.f, self.params, self.spec, self.bs = f, params, spec, boundary_samples
        self.rule = outer_rule(f, params.alpha, spec)
        self._cache = {}

    def values(self, key):
        P = self.params
        ck = (key, P.k) if key in ("maximal-k", "maximal-k-unweighted") else key
        if ck in self._cache:
            return self._cache[ck]
        f, Z = self.f, self.rule.nodes
        f0 = f - f(np.zeros(f.n))
        if key == "f":
            v = np.abs(f(Z))
        elif key == "f-f0":
            v = np.abs(f0(Z))
        elif key == "maximal":
            v = maximal_values(f, Z, P.gamma, self.bs)
        elif key == "maximal-k":
            v = maximal_values(f0, Z, P.gamma, self.bs, P.k, weighted=True)
        elif key == "maximal-k-unweighted":
            v = maximal_values(f0, Z, P.gamma, self.bs, P.k, weighted=False)
        elif key in AREA_KINDS or key == ("R", P.k + 1):
            kinds = tuple(k for k in AREA_KINDS if k not in self._cache)
            ks = () if ("R", P.k + 1) in self._cache else (P.k + 1,)
            self._cache.update(area_values(f, Z, P.gamma, P.q, self.spec, kinds, ks))
            return self._cache[key]
        else:
            raise KeyError(key)
        self._cache[ck] = v
        return v

    def norm(self, key, p=None):
        return _lp_from_rule(self.rule, self.values(key), self.params.p if p is None else p)


def _op_pair(op: str):
    """(numerator key, reference key) for the integral-norm operators."""
    table = {
        "maximal": ("maximal", "f"),
        "area-radial": ("radial", "f-f0"),
        "area-gradient": ("gradient", "f-f0"),
        "area-invariant": ("invariant", "f-f0"),
        "maximal-k": ("maximal-k", "f-f0"),
        "maximal-k-unweighted": ("maximal-k-unweighted", "f-f0"),
        "area-invariant-vs-f": ("invariant", "f"),
    }
    return table.get(op)


def equivalence_suite(family, ops, params: SpaceParams, spec: QuadSpec, family_id: str = "fixture",
                      names=None, boundary_samples: int = 64, cache: dict | None = None) -> dict:
    """Reports for several operators, sharing pointwise evaluations per function.

    Pointwise values do not depend on p, and only the k-variants depend on
    k; pass the same ``cache`` dict to calls that differ only in p or k.
    """
    for op in ops:
        if op not in OPS:
            raise ValueError(f"unknown operator {op!r}")
    if not family:
        raise ValueError("family must be nonempty")
    names = names or [f"f{i}" for i in range(len(family))]
    reports = {op: EquivReport(op, family_id, params) for op in ops}
    tol_zero = 1e-13
    for i, f in enumerate(family):
        key = (i, f, params.n, params.q, params.alpha, params.gamma, spec, boundary_samples)
        pw = cache.get(key) if cache is not None else None
        if pw is None:
            pw = _Pointwise(f, params, spec, boundary_samples)
            if cache is not None:
                cache[key] = pw
        pw.params = params
        bloch = None
        sups = None
        for op in ops:
            rep = reports[op]
            pair = _op_pair(op)
            if op == "area-radial-k":
                pair = (("R", params.k + 1), "f-f0")
            if pair is not None:
                den = pw.norm(pair[1])
                if den.real <= tol_zero:
                    rep.skipped.append({"index": i, "name": names[i], "reason": "reference norm is zero"})
                    continue
                rep.rows.append(_ratio_row(i, names[i], pw.norm(pair[0]), den))
                continue
            if bloch is None:
                bloch = bloch_norm(f)
            if bloch <= tol_zero:
                rep.skipped.append({"index": i, "name": names[i], "reason": "Bloch seminorm is zero"})
                continue
            if op == "bmo":
                num = bmo_tube_norm(f, params.alpha, max(1.0, params.p), default_tubes(f), spec)
            else:
                if sups is None:
                    kinds = tuple(o.split("bloch-area-")[1] for o in ops if o.startswith("bloch-area-"))
                    sups = area_sups(f, kinds, params.gamma, params.q, spec)
                num = sups[op.split("bloch-area-")[1]]
            rep.rows.append(_ratio_row(i, names[i], Estimate(num), Estimate(bloch)))
    return reports


def equivalence_experiment(family, op: str, params: SpaceParams, spec: QuadSpec,
                           family_id: str = "fixture", names=None) -> EquivReport:
    """Measured ratios ||op(f)|| / ||reference(f)|| over a family of functions."""
    return equivalence_suite(family, (op,), params, spec, family_id, names)[op]


# ------------------------------------------------------------ Fubini identity

def fubini_sides(f: HoloFunc, params: SpaceParams, spec: QuadSpec):
    """Both sides of the exact identity, computed independently.

    Left: int |A_inv f|^q dv_alpha, outer rule over z with the inner
    Bergman-ball rule. Right: int v_alpha(D(w,gamma)) (1-|w|^2)^(-1-n)
    |grad~ f(w)|^q dv(w), with v_alpha(D) from its power series.
    """
    from .measures import bergman_ball_volume_alpha_series

    P = params
    rule_l = outer_rule(f, P.alpha, spec, stream=(10,))
    A = area_values(f, rule_l.nodes, P.gamma, P.q, spec, ("invariant",))["invariant"]
    L, sl = qd.rule_estimate(rule_l, A ** P.q)
    # right side: dv = dv_0, so integrate against the alpha = 0 rule
    rule_r = outer_rule(f, 0.0, spec, stream=(11,))
    W = rule_r.nodes
    g = invariant_gradient_values(f, W) ** P.q
    vD = bergman_ball_volume_alpha_series(W, P.gamma, P.alpha)
    Rv, sr = qd.rule_estimate(rule_r, vD * (1.0 - norm2(W)) ** (-1.0 - f.n) * g)
    return Estimate(float(np.real(L)), sl, len(rule_l)), Estimate(float(np.real(Rv)), sr, len(rule_r))


def unitary_norms(f: HoloFunc, U, params: SpaceParams, spec: QuadSpec):
    """||f|| and ||f o U|| (unitary invariance check)."""
    from .holo import compose_unitary

    return (bergman_norm(f, params.p, params.alpha, spec),
            bergman_norm(compose_unitary(f, U), params.p, params.alpha, spec))

