"""Coifman-Rochberg atoms, (1,q)_alpha tube atoms, kernel-difference and Carleson checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from . import quadrature as qd
from .geometry import CarlesonTube, as_point, noniso_dist, norm2
from .holo import HoloFunc, SampledFunction, bergman_kernel
from .measures import (Estimate, QuadSpec, ball_rule, kernel_power_integral_exact, loglog_slope,
                       tube_volume)
from .operators import bloch_norm

NEAR_CRITICAL_MARGIN = 1.0


# ------------------------------------------------------------ Coifman-Rochberg atoms

def cr_threshold(n: int, p: float, alpha: float) -> float:
    """Lower bound n max(1, 1/p) + (alpha+1)/p for the kernel exponent b."""
    return n * max(1.0, 1.0 / p) + (alpha + 1.0) / p


def cr_atom(a, b: float, p: float, alpha: float) -> HoloFunc:
    """(1-|a|^2)^((pb-n-1-alpha)/p) / (1-<z,a>)^b."""
    a = as_point(a)
    n = a.shape[0]
    if norm2(a) >= 1.0:
        raise ValueError("atom center must lie in the open ball")
    if alpha <= -1 or p <= 0:
        raise ValueError("need p > 0 and alpha > -1")
    thr = cr_threshold(n, p, alpha)
    if b <= thr:
        raise ValueError(f"b = {b} must exceed n*max(1, 1/p) + (alpha+1)/p = {thr}")
    return HoloFunc.kernel(a, b, s=(p * b - n - 1 - alpha) / p)


def cr_near_critical(n: int, b: float, p: float, alpha: float) -> bool:
    return b <= cr_threshold(n, p, alpha) + NEAR_CRITICAL_MARGIN


def cr_synthesize(coeffs, atoms, n: int | None = None) -> HoloFunc:
    """sum c_k f_k (term concatenation)."""
    coeffs = list(coeffs)
    atoms = list(atoms)
    if len(coeffs) != len(atoms):
        raise ValueError("coefficient and atom sequences must have equal length")
    if not atoms:
        return HoloFunc.zero(n or 1)
    out = HoloFunc.zero(atoms[0].n)
    for c, f in zip(coeffs, atoms):
        out = out + c * f
    return out


# ------------------------------------------------------------ tube atoms

@dataclass(frozen=True)
class TubeAtom:
    """a = scale (g - mean) chi_Q, or the unit atom 1 when ``unit`` is set."""

    tube: CarlesonTube | None
    profile: SampledFunction | None
    q: float
    alpha: float
    scale: float = 1.0
    mean: complex = 0.0
    unit: bool = False
    n: int = 1

    def __call__(self, z):
        z = as_point(z).reshape(-1, self.n)
        if self.unit:
            return np.ones(len(z), dtype=np.complex128)
        inside = np.abs(1.0 - z @ np.conj(self.tube.apex)) < self.tube.radius ** 2
        inside &= norm2(z) < 1.0
        out = np.zeros(len(z), dtype=np.complex128)
        if np.any(inside):
            out[inside] = self.scale * (np.asarray(self.profile(z[inside])) - self.mean)
        return out

    def scaled(self, c: float) -> "TubeAtom":
        return TubeAtom(self.tube, self.profile, self.q, self.alpha, self.scale * c, self.mean,
                        self.unit, self.n)


def unit_atom(n: int, q: float = 2.0, alpha: float = 0.0) -> TubeAtom:
    return TubeAtom(None, None, q, alpha, unit=True, n=n)


def _atom_rule(tube, alpha, spec):
    return qd.tube_rule(tube, alpha, n_theta=max(spec.radial_order, 16),
                        n_rho=max(spec.radial_order // 2, 8))


def make_tube_atom(tube: CarlesonTube, g, q: float, alpha: float, spec: QuadSpec) -> TubeAtom:
    """Mean-subtract g on Q and scale so that ||a||_{q,alpha} = v_alpha(Q)^(1/q - 1)."""
    if not 1 < q < math.inf:
        raise ValueError("q must lie in (1, inf)")
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    prof = g if isinstance(g, SampledFunction) else SampledFunction(g)
    rule = _atom_rule(tube, alpha, spec)
    V = float(rule.weights.sum())
    if V <= 0:
        raise ValueError("tube has zero measure")
    vals = np.asarray(prof(rule.nodes), dtype=np.complex128)
    mean = complex(np.sum(rule.weights * vals) / V)
    dev = vals - mean
    L = float(np.sum(rule.weights * np.abs(dev) ** q)) ** (1.0 / q)
    if L <= 1e-12 * max(1.0, float(np.max(np.abs(vals)))) * V ** (1.0 / q):
        raise ValueError("profile is constant on the tube: the atom would be zero")
    return TubeAtom(tube, prof, q, alpha, V ** (1.0 / q - 1.0) / L, mean, n=tube.n)


@dataclass
class AtomDiagnostics:
    valid: bool
    support: bool
    norm_ratio: float
    mean_scaled: float
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def atom_is_valid(atom: TubeAtom, spec: QuadSpec, tol: float = 1e-8) -> AtomDiagnostics:
    """Check support in Q, ||a||_{q,alpha} <= v_alpha(Q)^(1/q-1) and zero mean."""
    if atom.unit:
        return AtomDiagnostics(True, True, 1.0, 0.0, ["unit atom"])
    tube = atom.tube
    rule = _atom_rule(tube, atom.alpha, spec)
    V = float(rule.weights.sum())
    bound = V ** (1.0 / atom.q - 1.0)
    vals = atom(rule.nodes)
    norm = float(np.sum(rule.weights * np.abs(vals) ** atom.q)) ** (1.0 / atom.q)
    mean = abs(complex(np.sum(rule.weights * vals)))
    # support: sample the complement of Q
    outside = qd.tube_region_rule(tube.apex, atom.alpha, tube.radius ** 2 * 1.000001, 2.0,
                                  n_theta=8, n_rho=4, inner=(3, 6)).nodes
    support = bool(np.all(atom(outside) == 0)) if len(outside) else True
    ratio = norm / bound
    ok_norm = ratio <= 1.0 + tol
    ok_mean = mean <= tol * bound
    notes = []
    if not support:
        notes.append("nonzero outside the tube")
    if not ok_norm:
        notes.append(f"norm exceeds bound by factor {ratio:.6g}")
    if not ok_mean:
        notes.append(f"mean {mean:.3g} not zero")
    return AtomDiagnostics(support and ok_norm and ok_mean, support, ratio, mean / bound, notes)


def _proj_coeffs(atom: TubeAtom, spec: QuadSpec):
    rule = _atom_rule(atom.tube, atom.alpha, spec)
    return rule.nodes, rule.weights * atom(rule.nodes)


def projection_values(atom: TubeAtom, Z, spec: QuadSpec) -> np.ndarray:
    """P_alpha a at points Z.

    Tube atoms have zero mean, so P_alpha a(z) = int_Q [K(z,w) - K(z,zeta)] a(w) dv_alpha(w),
    which is accurate far from the tube. The unit atom uses a per-point
    Mobius-adapted ball rule.
    """
    Z = np.ascontiguousarray(as_point(Z).reshape(-1, atom.n))
    lam = atom.n + 1 + atom.alpha
    if atom.unit:
        return _project_unit(Z, atom.alpha, spec)
    ws, c = _proj_coeffs(atom, spec)
    return kernels.projection_sum(Z, np.ascontiguousarray(ws), np.ascontiguousarray(c),
                                  np.ascontiguousarray(atom.tube.apex), lam)


def _project_unit(Z, alpha, spec, tol=1e-15):
    """P_alpha 1 at Z by an inner product rule aligned with each z.

    In a frame where z = |z| e_1 the integrand depends on w only through
    w_1 = sqrt(t u) e^(i theta); the phase count is chosen per point so
    the aliased terms of the geometric kernel series stay below ``tol``.
    """
    n = Z.shape[1]
    lam = n + 1 + alpha
    t, wt = qd.gauss_jacobi01(max(4, spec.radial_order // 3), alpha, n - 1)
    wt = wt / wt.sum()
    if n == 1:
        u, wu = np.ones(1), np.ones(1)
    else:
        # |w_1|^2 / |w|^2 has density (n-1)(1-u)^(n-2)
        u, wu = qd.gauss_jacobi01(4, n - 2, 0)
        wu = wu / wu.sum()
    rad = np.sqrt(np.outer(t, u)).ravel()
    wrad = np.outer(wt, wu).ravel()
    rmax = float(rad.max())
    # the aligned integrand depends on |z| only, so each distinct modulus is done once
    mods, inv = np.unique(np.round(np.sqrt(norm2(Z)), 15), return_inverse=True)
    vals = np.empty(len(mods), dtype=np.complex128)
    for i, r in enumerate(mods):
        m = 8
        while m < 1 << 18 and m ** lam * (r * rmax) ** m > tol:
            m *= 2
        ph = np.exp(-2j * math.pi * (np.arange(m) + 0.5) / m)
        vals[i] = np.sum(wrad[:, None] * np.exp(-lam * np.log(1.0 - r * np.outer(rad, ph)))) / m
    return vals[inv.ravel()]


def _outer(atom: TubeAtom, spec: QuadSpec):
    if atom.unit:
        return qd.ball_product_rule(atom.n, atom.alpha, spec.radial_order, spec.angular_order)
    return qd.dyadic_annuli_rule(atom.tube.apex, atom.alpha, atom.tube.radius,
                                 n_theta=max(spec.radial_order, 16),
                                 n_rho=max(spec.radial_order // 2, 8))


def atom_projection_norm(atom: TubeAtom, alpha: float, spec: QuadSpec) -> Estimate:
    """||P_alpha a||_{1,alpha}; the notes carry the split over 2Q and its complement."""
    if alpha != atom.alpha:
        atom = TubeAtom(atom.tube, atom.profile, atom.q, alpha, atom.scale, atom.mean, atom.unit, atom.n)
    rule = _outer(atom, spec)
    v = np.abs(projection_values(atom, rule.nodes, spec))
    total = float(np.sum(rule.weights * v))
    notes = ()
    if not atom.unit:
        inner = np.abs(1.0 - rule.nodes @ np.conj(atom.tube.apex)) < 4 * atom.tube.radius ** 2
        near = float(np.sum(rule.weights[inner] * v[inner]))
        notes = (f"2Q={near!r}", f"complement={total - near!r}")
    if not np.isfinite(total):
        return Estimate(float("inf"), 0.0, len(rule), divergent=True, notes=("non-finite",))
    return Estimate(total, 0.0, len(rule), notes=notes)


def synthesis_norm(lams, atoms, spec: QuadSpec) -> Estimate:
    """||sum lam_i P_alpha a_i||_{1,alpha}.

    The outer rule glues each atom's dyadic rule on the cell of points whose
    normalized distance |1-<z,zeta_i>|/r_i^2 is smallest for that atom.
    """
    tubes = [a.tube for a in atoms if not a.unit]
    alpha = atoms[0].alpha
    if not tubes:
        rule = qd.ball_product_rule(atoms[0].n, alpha, spec.radial_order, spec.angular_order)
        parts = [rule]
    else:
        parts = []
        for i, a in enumerate(atoms):
            if a.unit:
                continue
            r = _outer(a, spec)
            dist = np.stack([np.abs(1.0 - r.nodes @ np.conj(t.apex)) / t.radius ** 2 for t in tubes])
            mine = np.argmin(dist, axis=0) == tubes.index(a.tube)
            parts.append(qd.Rule(r.nodes[mine], r.weights[mine]))
        rule = qd.concat_rules(parts)
    total = np.zeros(len(rule), dtype=np.complex128)
    for lam, a in zip(lams, atoms):
        total += lam * projection_values(a, rule.nodes, spec)
    return Estimate(float(np.sum(rule.weights * np.abs(total))), 0.0, len(rule))


def pairing(atom: TubeAtom, g: HoloFunc, spec: QuadSpec) -> complex:
    """int P_alpha a conj(g) dv_alpha by nested quadrature."""
    rule = _outer(atom, spec)
    vals = projection_values(atom, rule.nodes, spec) * np.conj(g(rule.nodes))
    return complex(np.sum(rule.weights * vals))


def pairing_ratio(atom: TubeAtom, g: HoloFunc, spec: QuadSpec) -> float:
    """|<P_alpha a, g>| / (|g(0)| + ||g||_B)."""
    den = abs(g(np.zeros(g.n))) + bloch_norm(g)
    return abs(pairing(atom, g, spec)) / den


# ------------------------------------------------------------ kernel-difference estimate

def kernel_diff_ratio(z, w, zeta, alpha: float, delta: float = 4.0) -> float:
    """|K(z,w) - K(z,zeta)| d(z,zeta)^(2(n+1+alpha)+1) / d(w,zeta), for d(z,zeta) > delta d(w,zeta)."""
    z, w, zeta = as_point(z), as_point(w), as_point(zeta)
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    if abs(math.sqrt(float(norm2(zeta))) - 1.0) > 1e-12:
        raise ValueError("zeta must lie on the sphere")
    dz = float(noniso_dist(z, zeta))
    dw = float(noniso_dist(w, zeta))
    if not dz > delta * dw:
        raise ValueError("outside the admissible regime: need d(z, zeta) > delta d(w, zeta)")
    if dw == 0:
        return 0.0
    n = z.shape[0]
    lam = n + 1 + alpha
    diff = abs(complex(bergman_kernel(alpha, z, w)) - complex(bergman_kernel(alpha, z, zeta)))
    return diff * dz ** (2 * lam + 1) / dw


def kernel_diff_explicit_constant(n: int, alpha: float, delta: float) -> float:
    """2^(n+3+alpha) (n+1+alpha) (1 + 1/delta), valid once delta is large enough (delta >= 5 used)."""
    return 2.0 ** (n + 3 + alpha) * (n + 1 + alpha) * (1.0 + 1.0 / delta)


def admissible_triples(rng, count: int, n: int, delta: float):
    """Random (z, w, zeta) with d(z,zeta) > delta d(w,zeta), spread over many scales."""
    from .geometry import random_sphere_points

    zeta = random_sphere_points(rng, count, n)
    Z, W = [], []
    for k in range(count):
        zk = zeta[k]
        while True:
            dz2 = 10 ** rng.uniform(-4, math.log10(2.0))   # |1-<z,zeta>|
            z = _point_at(rng, zk, dz2)
            dw2 = dz2 / delta ** 2 * rng.uniform(0.0, 0.999) ** 2
            w = _point_at(rng, zk, dw2)
            if z is not None and w is not None:
                break
        Z.append(z)
        W.append(w)
    return np.array(Z), np.array(W), zeta


def _point_at(rng, zeta, rho):
    """A point z in the ball with |1-<z,zeta>| = rho (None if the draw misses the ball)."""
    n = zeta.shape[0]
    for _ in range(50):
        th = rng.uniform(-math.pi / 2, math.pi / 2)
        lam = 1.0 - rho * np.exp(1j * th)
        if abs(lam) >= 1.0:
            continue
        rest = math.sqrt(1.0 - abs(lam) ** 2) * rng.uniform() ** 0.5
        if n == 1:
            return lam * zeta
        from .geometry import unitary_completion

        U = unitary_completion(zeta)
        x = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
        x = x / np.linalg.norm(x) * rest
        return lam * zeta + U[:, 1:] @ x
    return None


# ------------------------------------------------------------ Carleson measures

@dataclass(frozen=True)
class CarlesonMeasureSpec:
    """Either dv_{alpha'} (``kind="v_alpha"``), weighted point masses, or a density against dv_alpha."""

    kind: str
    alpha: float = 0.0
    points: tuple = ()
    masses: tuple = ()
    density: SampledFunction | None = None
    n: int = 1

    def __post_init__(self):
        if self.kind not in ("v_alpha", "points", "density"):
            raise ValueError("kind must be v_alpha, points or density")
        if self.kind == "v_alpha" and self.alpha <= -1:
            raise ValueError("dv_alpha has infinite mass for alpha <= -1")
        if any(m < 0 for m in self.masses):
            raise ValueError("masses must be nonnegative")


def tube_mass(mu: CarlesonMeasureSpec, tube: CarlesonTube, spec: QuadSpec) -> float:
    if mu.kind == "v_alpha":
        return tube_volume(tube, mu.alpha, spec).real
    if mu.kind == "points":
        P = np.array(mu.points, dtype=np.complex128).reshape(-1, mu.n)
        inside = np.abs(1.0 - P @ np.conj(tube.apex)) < tube.radius ** 2
        return float(np.sum(np.asarray(mu.masses)[inside]))
    rule = qd.tube_rule(tube, mu.alpha, n_theta=max(spec.radial_order, 16),
                        n_rho=max(spec.radial_order // 2, 8))
    return float(np.sum(rule.weights * np.asarray(mu.density(rule.nodes))))


def kernel_integral(mu: CarlesonMeasureSpec, z, alpha: float, s: float, spec: QuadSpec) -> float:
    """int (1-|z|^2)^s / |1-<z,w>|^(n+1+alpha+s) dmu(w)."""
    z = as_point(z)
    n = z.shape[0]
    e = n + 1 + alpha + s
    pre = (1.0 - float(norm2(z))) ** s
    if mu.kind == "points":
        P = np.array(mu.points, dtype=np.complex128).reshape(-1, n)
        return pre * float(np.sum(np.asarray(mu.masses) / np.abs(1.0 - P @ np.conj(z)) ** e))
    rule = ball_rule(spec.with_(adapt=True), mu.alpha, [z])
    vals = np.abs(1.0 - rule.nodes @ np.conj(z)) ** (-e)
    if mu.kind == "density":
        vals = vals * np.asarray(mu.density(rule.nodes))
    return pre * float(np.sum(rule.weights * vals))


def carleson_check(mu: CarlesonMeasureSpec, alpha: float, s: float, tube_radii, probe_points,
                   spec: QuadSpec, apexes=None, slope_tol: float = 0.05, growth_tol: float = 0.1):
    """Both sides of the Carleson-measure equivalence on finite sweeps.

    The tube side is flagged divergent when the log-log slope of mu(Q_r)
    against r falls below 2(n+1+alpha) by more than ``slope_tol``
    (relative); the integral side when the kernel integral grows like
    (1-|z|^2)^(-c) with c > ``growth_tol`` along the probes.
    """
    n = mu.n
    if n + 1 + alpha <= 0 or s <= 0:
        raise ValueError("need n+1+alpha > 0 and s > 0")
    target = 2 * (n + 1 + alpha)
    apexes = apexes if apexes is not None else [np.eye(n, dtype=np.complex128)[0]]
    radii = np.asarray(tube_radii, dtype=float)
    tube_ratios, masses_by_apex = [], []
    for ap in apexes:
        m = np.array([tube_mass(mu, CarlesonTube(ap, r), spec) for r in radii])
        masses_by_apex.append(m)
        tube_ratios.append(m / radii ** target)
    tube_ratios = np.array(tube_ratios)
    small = radii <= 1.0
    slopes = []
    for m in masses_by_apex:
        pos = small & (m > 0)
        if pos.sum() >= 2:
            slopes.append(loglog_slope(radii[pos], m[pos])[0])
    slope = min(slopes) if slopes else float("nan")
    tube_div = bool(slopes) and slope < target * (1.0 - slope_tol)
    P = as_point(probe_points).reshape(-1, n)
    ints = np.array([kernel_integral(mu, z, alpha, s, spec) for z in P])
    dist = 1.0 - norm2(P)
    growth = -loglog_slope(dist, ints)[0] if len(P) >= 2 and np.all(ints > 0) else 0.0
    int_div = growth > growth_tol
    return {
        "tube_constant": float("inf") if tube_div else float(np.max(tube_ratios)),
        "tube_max_observed": float(np.max(tube_ratios)),
        "tube_slope": slope,
        "tube_target_slope": target,
        "tube_divergent": tube_div,
        "integral_constant": float("inf") if int_div else float(np.max(ints)),
        "integral_max_observed": float(np.max(ints)),
        "integral_growth_exponent": growth,
        "integral_divergent": int_div,
        "consistent": tube_div == int_div,
    }


def carleson_integral_exact(alpha_mu: float, z_norm: float, alpha: float, s: float, n: int) -> float:
    """Series value of the kernel integral for mu = dv_{alpha_mu}."""
    e = n + 1 + alpha + s
    return (1.0 - z_norm ** 2) ** s * kernel_power_integral_exact(z_norm, e / 2.0, n, alpha_mu)
