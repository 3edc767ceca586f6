"""One experiment per acceptance criterion.

Each experiment takes a :class:`Context` and returns a :class:`Result` with
per-item CSV rows, named checks and summary entries. Sweeps default to the
acceptance configurations; an explicit ``p``, ``alpha``, ``gamma`` (and so
on) in the config narrows a sweep to that value.
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import atoms as at
from . import operators as op
from .family import family_id as _family_id
from .family import fixture_family, random_members
from .geometry import (BergmanBall, CarlesonTube, bergman_ball_volume, mobius, mobius_pairs, norm2,
                       random_ball_points, random_sphere_points)
from .holo import (HoloFunc, invariant_gradient_fd, invariant_gradient_sq, multi_indices,
                   radial_from_grad)
from .lattice import build_lattice, random_unitary
from .measures import (QuadSpec, WeightedMeasure, integrate_ball, integrate_bergman_ball,
                       bergman_ball_volume_alpha, loglog_slope, monomial_norm_exact, tube_volume)
from .regression import MissingConstant, RegressionStore, make_key


@dataclass
class ExperimentConfig:
    experiment: str
    n: int | None = None
    p: float | None = None
    q: float | None = None
    alpha: float | None = None
    gamma: float | None = None
    delta: float | None = None
    seed: int = 0
    family_seed: int = 0
    out: str = "bergman-out"
    freeze: bool = False
    force: bool = False
    regression: str | None = None
    experiments: str | None = None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass
class Result:
    fields: tuple
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.fields)
        for r in self.rows:
            w.writerow([_cell(r.get(k, "")) for k in self.fields])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (tuple, list)):
        return " ".join(str(x) for x in v)
    return str(v)


class Context:
    """Config, regression store, log sink and collected checks of one run."""

    def __init__(self, cfg: ExperimentConfig, store: RegressionStore, log=None):
        self.cfg = cfg
        self.store = store
        self._log = log or (lambda msg: None)
        self.checks = []

    def log(self, msg: str):
        self._log(msg)

    def rng(self, *stream):
        return np.random.default_rng(np.random.SeedSequence(self.cfg.seed, spawn_key=stream))

    def sweep(self, name, default):
        v = getattr(self.cfg, name)
        return (v,) if v is not None else tuple(default)

    def value(self, name, default):
        v = getattr(self.cfg, name)
        return default if v is None else v

    def check(self, name: str, passed, **detail):
        self.checks.append({"name": name, "passed": bool(passed), **detail})
        return bool(passed)

    def frozen(self, name: str, observed: float, kind: str, n: int, p=None, q=None, alpha=None,
               gamma=None, delta=None) -> bool:
        """Check an observation against a committed constant (recording it in freeze mode)."""
        key = make_key(name, n, p, q, alpha, gamma, delta)
        observed = float(observed)
        if not math.isfinite(observed):
            if key not in self.store:
                raise MissingConstant(f"no frozen constant for {key!r}")
            return self.check(key, False, observed=observed, kind=kind, note="non-finite observation")
        prov = {"experiment": self.cfg.experiment, "seed": self.cfg.seed,
                "family_seed": self.cfg.family_seed}
        c = self.store.check(key, observed, kind, prov)
        return self.check(key, c.passed, observed=c.observed, bound=c.bound, kind=kind)


def _family(ctx, n, seed=None):
    seed = ctx.cfg.family_seed if seed is None else seed
    names, funcs = fixture_family(n, seed)
    return names, funcs, _family_id(n, seed)


# ------------------------------------------------------------ 1. geometry identities

def _identity_errors(A, Z):
    zero = np.zeros_like(A)
    img = mobius_pairs(A, np.stack([Z, zero, A], axis=1))
    back = mobius_pairs(A, img[:, 0])
    lhs = 1.0 - norm2(img[:, 0])
    rhs = (1.0 - norm2(A)) * (1.0 - norm2(Z)) / np.abs(1.0 - np.sum(np.conj(A) * Z, axis=1)) ** 2
    return {"involution": float(np.max(np.abs(back - Z))),
            "phi_a(0)=a": float(np.max(np.abs(img[:, 1] - A))),
            "phi_a(a)=0": float(np.max(np.abs(img[:, 2]))),
            "fundamental": float(np.max(np.abs(lhs - rhs)))}


GEOMETRY_RMAX = 0.99


def exp_geometry(ctx: Context) -> Result:
    """Identities at 10^4 random pairs with |a|, |z| <= 0.99.

    The involution is conditioned like 1/(1-|a|^2), so pairs drawn up to the
    sphere are also run and reported without being asserted.
    """
    res = Result(("n", "identity", "rmax", "cases", "max_abs_error", "tolerance", "asserted", "passed"))
    tol = 1e-12
    m = 10000
    for n in ctx.sweep("n", (1, 2)):
        for rmax, asserted in ((GEOMETRY_RMAX, True), (1.0, False)):
            rng = ctx.rng(1, n, int(asserted))
            err = _identity_errors(random_ball_points(rng, m, n, rmax), random_ball_points(rng, m, n, rmax))
            for name, e in err.items():
                ok = e < tol
                if asserted:
                    ctx.check(f"geometry {name} n={n}", ok, observed=e, tolerance=tol)
                res.rows.append({"n": n, "identity": name, "rmax": rmax, "cases": m, "max_abs_error": e,
                                 "tolerance": tol, "asserted": asserted, "passed": ok})
    res.summary["max_abs_error"] = max(r["max_abs_error"] for r in res.rows if r["asserted"])
    return res


# ------------------------------------------------------------ 2. quadrature oracle

def exp_quadrature(ctx: Context) -> Result:
    res = Result(("n", "alpha", "J", "exact", "estimate", "stderr", "rel_err", "criterion", "passed"))
    for n in ctx.sweep("n", (1, 2)):
        for alpha in ctx.sweep("alpha", (0.0, 1.0, 2.5)):
            if n == 1:
                spec = QuadSpec(n=1, mode="product")
            else:
                spec = QuadSpec(n=n, mode="monte-carlo", sample_count=100000, seed=ctx.cfg.seed)
            for J in multi_indices(n, 6):
                exact = monomial_norm_exact(J, n, alpha)
                Jt = tuple(J)
                est = integrate_ball(lambda z, Jt=Jt: np.prod(np.abs(z) ** (2 * np.array(Jt)), axis=1),
                                     WeightedMeasure("v_alpha", alpha), spec)
                rel = abs(est.real - exact) / exact
                if spec.deterministic:
                    ok, crit = rel < 1e-8, "rel_err<1e-8"
                else:
                    ok, crit = abs(est.real - exact) <= 3 * est.stderr, "|err|<=3*stderr"
                ctx.check(f"quadrature n={n} alpha={alpha} J={Jt}", ok, observed=rel)
                res.rows.append({"n": n, "alpha": alpha, "J": Jt, "exact": exact, "estimate": est.real,
                                 "stderr": est.stderr, "rel_err": rel, "criterion": crit, "passed": ok})
    res.summary["max_rel_err_product"] = max([r["rel_err"] for r in res.rows if r["n"] == 1] or [0.0])
    return res


# ------------------------------------------------------------ 3. tau invariance

def _test_integrand(n):
    def g(w):
        w1 = w[:, 0]
        wn = w[:, -1]
        return np.abs(1.0 + 2.0 * w1 + w1 * np.conj(wn)) ** 2 * (1.0 - norm2(w)) ** 0.5
    return g


def exp_tau(ctx: Context) -> Result:
    res = Result(("n", "case", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "abs_diff", "tolerance", "passed"))
    gamma = ctx.value("gamma", 0.5)
    for n in ctx.sweep("n", (1, 2)):
        rng = ctx.rng(3, n)
        g = _test_integrand(n)
        for i in range(20):
            b = random_ball_points(rng, 1, n, 0.8)[0]
            U = random_unitary(rng, n)
            c = random_ball_points(rng, 1, n, 0.7)[0]
            psi = lambda w, b=b, U=U: mobius(b, w) @ U.T  # noqa: E731
            s1 = QuadSpec(n=n, mode="monte-carlo", sample_count=20000, seed=ctx.cfg.seed * 1000 + 2 * i)
            s2 = s1.with_(seed=s1.seed + 1)
            lhs = integrate_bergman_ball(lambda w: g(psi(w)), BergmanBall(c, gamma), s1)
            rhs = integrate_bergman_ball(g, BergmanBall(psi(c.reshape(1, n))[0], gamma), s2)
            tol = 3 * math.hypot(lhs.stderr, rhs.stderr)
            d = abs(lhs.real - rhs.real)
            ok = ctx.check(f"tau invariance n={n} case={i}", d <= tol, observed=d, tolerance=tol)
            res.rows.append({"n": n, "case": i, "lhs": lhs.real, "lhs_stderr": lhs.stderr, "rhs": rhs.real,
                             "rhs_stderr": rhs.stderr, "abs_diff": d, "tolerance": tol, "passed": ok})
    return res


# ------------------------------------------------------------ 4. volume laws

TUBE_RADII = tuple(2.0 ** -j for j in range(2, 7))


def _tube_slope_rows(ctx, res, cases):
    for n, alpha in cases:
        spec = QuadSpec(n=n, mode="product")
        ap = np.eye(n, dtype=np.complex128)[0]
        vols = [tube_volume(CarlesonTube(ap, r), alpha, spec).real for r in TUBE_RADII]
        for r, v in zip(TUBE_RADII, vols):
            res.rows.append({"check": "tube-volume", "n": n, "alpha": alpha, "x": r, "value": v,
                             "reference": r ** (2 * (n + 1 + alpha))})
        slope = loglog_slope(np.array(TUBE_RADII), np.array(vols))[0]
        target = 2 * (n + 1 + alpha)
        ok = ctx.check(f"tube slope n={n} alpha={alpha}", abs(slope - target) <= 0.05 * target,
                       observed=slope, target=target)
        res.rows.append({"check": "tube-slope", "n": n, "alpha": alpha, "x": "", "value": slope,
                         "reference": target, "passed": ok})
        res.summary.setdefault("slopes", {})[f"n={n},alpha={alpha}"] = slope


def exp_tube_slope(ctx: Context) -> Result:
    res = Result(("check", "n", "alpha", "gamma", "x", "value", "reference", "passed"))
    n = ctx.value("n", 1)
    _tube_slope_rows(ctx, res, [(n, ctx.value("alpha", 0.0))])
    res.summary["slope"] = next(iter(res.summary["slopes"].values()))
    return res


def exp_volume(ctx: Context) -> Result:
    res = Result(("check", "n", "alpha", "gamma", "x", "value", "reference", "passed"))
    cases = [(1, 0.0), (1, 1.0), (2, 0.0)]
    if ctx.cfg.n is not None or ctx.cfg.alpha is not None:
        cases = [(ctx.value("n", 1), ctx.value("alpha", 0.0))]
    _tube_slope_rows(ctx, res, cases)
    for n in ctx.sweep("n", (1, 2)):
        spec = QuadSpec(n=n, mode="product", radial_order=32, angular_order=32)
        for gamma in ctx.sweep("gamma", (0.3, 1.0)):
            # unitary invariance: |z| along e_1 suffices
            ratios = []
            for r in np.linspace(0.0, 0.95, 20):
                z = np.zeros(n, dtype=np.complex128)
                z[0] = r
                v = bergman_ball_volume_alpha(z, gamma, 0.0, spec)
                ratio = float(np.real(v)) / (1.0 - r * r) ** (n + 1)
                ratios.append(ratio)
                res.rows.append({"check": "ball-volume-ratio", "n": n, "alpha": 0.0, "gamma": gamma,
                                 "x": float(r), "value": ratio,
                                 "reference": float(bergman_ball_volume(z, gamma)) / (1.0 - r * r) ** (n + 1)})
            ctx.frozen("ball-volume-ratio.max", max(ratios), "upper", n, gamma=gamma)
            ctx.frozen("ball-volume-ratio.min", min(ratios), "lower", n, gamma=gamma)
            v0 = float(np.real(bergman_ball_volume_alpha(np.zeros(n), gamma, 0.0, spec)))
            ref = math.tanh(gamma) ** (2 * n)
            ok = ctx.check(f"v(D(0,{gamma})) n={n}", abs(v0 - ref) <= 1e-6, observed=v0, reference=ref)
            res.rows.append({"check": "origin-ball-volume", "n": n, "alpha": 0.0, "gamma": gamma, "x": 0.0,
                             "value": v0, "reference": ref, "passed": ok})
    return res


# ------------------------------------------------------------ 5. invariant gradient

def exp_invariant_gradient(ctx: Context) -> Result:
    res = Result(("n", "case", "function", "z", "closed_form", "finite_difference", "rel_err", "passed"))
    rng = ctx.rng(5)
    ns = ctx.sweep("n", (1, 2))
    per_n = 200 // len(ns)
    worst_chain = -np.inf
    for n in ns:
        names, funcs, _ = _family(ctx, n)
        idx = [i for i, f in enumerate(funcs) if not (f.is_polynomial and all(t.degree == 0 for t in f.monomials))]
        for c in range(per_n):
            i = idx[int(rng.integers(len(idx)))]
            f = funcs[i]
            z = random_ball_points(rng, 1, n, 0.95)[0]
            closed = math.sqrt(max(0.0, float(invariant_gradient_sq(z[None], f.derivs(z[None])[1])[0])))
            fd = invariant_gradient_fd(f, z)
            rel = abs(closed - fd) / max(closed, 1e-300)
            ok = ctx.check(f"invariant gradient n={n} case={c}", rel < 1e-6, observed=rel)
            res.rows.append({"n": n, "case": c, "function": names[i], "z": tuple(np.round(z, 12)),
                             "closed_form": closed, "finite_difference": fd, "rel_err": rel, "passed": ok})
        # pointwise chain on a larger set
        Z = random_ball_points(rng, 2000, n, 0.99)
        for f in funcs:
            _, g = f.derivs(Z)
            w = 1.0 - norm2(Z)
            a = w * np.abs(radial_from_grad(Z, g))
            b = w * np.sqrt(np.sum(np.abs(g) ** 2, axis=1))
            c2 = np.sqrt(np.clip(invariant_gradient_sq(Z, g), 0.0, None))
            worst_chain = max(worst_chain, float(np.max(a - b)), float(np.max(b - c2)))
    ctx.check("chain (1-|z|^2)|Rf| <= (1-|z|^2)|grad f| <= |grad~ f|", worst_chain <= 1e-10,
              observed=worst_chain, tolerance=1e-10)
    res.summary["max_rel_err"] = max(r["rel_err"] for r in res.rows)
    res.summary["worst_chain_violation"] = worst_chain
    return res


# ------------------------------------------------------------ 6. maximal equivalence

EQUIV_FIELDS = ("op", "p", "q", "alpha", "gamma", "k", "index", "name", "numerator", "numerator_stderr",
                "denominator", "denominator_stderr", "ratio", "ratio_stderr", "asserted")


def _equiv_spec(n, seed):
    return QuadSpec(n=n, seed=seed) if n == 1 else QuadSpec(n=n, sample_count=4000, seed=seed)


def _add_report(res, rep, asserted=True):
    P = rep.params
    for r in rep.rows:
        res.rows.append({"op": rep.op_name, "p": P.p, "q": P.q, "alpha": P.alpha, "gamma": P.gamma,
                         "k": P.k, "asserted": asserted, **r})


def exp_maximal(ctx: Context) -> Result:
    res = Result(EQUIV_FIELDS)
    n = ctx.value("n", 1)
    names, funcs, fid = _family(ctx, n)
    extra = random_members(n, ctx.cfg.family_seed + 1, len(funcs))
    spec = _equiv_spec(n, ctx.cfg.seed)
    mins, changes = [], []
    for alpha in ctx.sweep("alpha", (0.0, 1.0)):
        for gamma in ctx.sweep("gamma", (0.3, 1.0)):
            cache = {}
            for p in ctx.sweep("p", (0.5, 1.0, 2.0)):
                P = op.SpaceParams(n=n, p=p, alpha=alpha, gamma=gamma)
                rep = op.equivalence_suite(funcs, ("maximal",), P, spec, fid, names, cache=cache)["maximal"]
                _add_report(res, rep)
                big = op.equivalence_suite(funcs + [f for _, f in extra], ("maximal",), P, spec, fid + "+",
                                           names + [m for m, _ in extra], cache=cache)["maximal"]
                tag = f"p={p} alpha={alpha} gamma={gamma}"
                mins.append(rep.min)
                ctx.check(f"maximal min ratio {tag}", rep.min >= 1 - 1e-6, observed=rep.min)
                ctx.frozen("maximal.max", rep.max, "upper", n, p=p, alpha=alpha, gamma=gamma)
                change = abs(big.max - rep.max) / rep.max
                changes.append(change)
                ctx.check(f"maximal doubling change {tag}", change < 0.15, observed=change)
    res.summary["min_ratio"] = min(mins)
    res.summary["max_doubling_change"] = max(changes)
    res.summary["family"] = fid
    return res


# ------------------------------------------------------------ 7. area equivalence

AREA_ASSERTED = ("area-radial", "area-gradient", "area-invariant", "maximal-k", "area-radial-k")


def exp_area(ctx: Context) -> Result:
    res = Result(EQUIV_FIELDS)
    n = ctx.value("n", 1)
    q = ctx.value("q", 2.0)
    names, funcs, fid = _family(ctx, n)
    spec = _equiv_spec(n, ctx.cfg.seed)
    worst_order = -np.inf
    for alpha in ctx.sweep("alpha", (0.0, 1.0)):
        for gamma in ctx.sweep("gamma", (0.3, 1.0)):
            cache = {}
            for k in (0, 1):
                for p in ctx.sweep("p", (0.5, 1.0, 2.0)):
                    P = op.SpaceParams(n=n, p=p, q=q, alpha=alpha, gamma=gamma, k=k)
                    ops = AREA_ASSERTED + ("maximal-k-unweighted",)
                    if p == 1.0 and k == 0:
                        ops = ops + ("area-invariant-vs-f",)
                    reps = op.equivalence_suite(funcs, ops, P, spec, fid, names, cache=cache)
                    for name, rep in reps.items():
                        asserted = name != "maximal-k-unweighted"
                        _add_report(res, rep, asserted)
                        if not asserted:
                            continue
                        tag = f"{name}.k{k}" if name in ("maximal-k", "area-radial-k") else name
                        if k == 1 and name in ("area-radial", "area-gradient", "area-invariant"):
                            continue  # independent of k, already checked at k = 0
                        ctx.frozen(f"{tag}.max", rep.max, "upper", n, p=p, q=q, alpha=alpha, gamma=gamma)
                        if name != "area-invariant-vs-f":
                            ctx.frozen(f"{tag}.min", rep.min, "lower", n, p=p, q=q, alpha=alpha, gamma=gamma)
            for pw in cache.values():
                a, b, c = (pw.values(kind) for kind in ("radial", "gradient", "invariant"))
                scale = np.maximum(np.abs(c), 1e-300)
                worst_order = max(worst_order, float(np.max((a - b) / scale)),
                                  float(np.max((b - c) / scale)))
    ctx.check("pointwise ordering A_R <= A_grad <= A_inv", worst_order <= 1e-10, observed=worst_order)
    res.summary["worst_ordering_violation"] = worst_order
    unw = [r["ratio"] for r in res.rows if r["op"] == "maximal-k-unweighted"]
    res.summary["unweighted_maximal_k_max_ratio"] = max(unw) if unw else None
    res.summary["family"] = fid
    return res


# ------------------------------------------------------------ 8. Fubini identity

def exp_fubini(ctx: Context) -> Result:
    res = Result(("index", "name", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "abs_gap", "rel_gap",
                  "z_score", "passed"))
    n = ctx.value("n", 1)
    P = op.SpaceParams(n=n, q=ctx.value("q", 2.0), alpha=ctx.value("alpha", 0.0),
                       gamma=ctx.value("gamma", 0.5))
    names, funcs, fid = _family(ctx, n)
    # a 6 x 12 inner ball rule matches 10 x 20 to about 1e-8 relative, far below the stderr
    spec = QuadSpec(n=n, mode="monte-carlo", sample_count=20000, seed=ctx.cfg.seed, inner_radial=6,
                    inner_angular=12)
    zs = []
    for i, (name, f) in enumerate(zip(names, funcs)):
        L, R = op.fubini_sides(f, P, spec)
        se = math.hypot(L.stderr, R.stderr)
        gap = abs(L.real - R.real)
        z = gap / se if se > 0 else (0.0 if gap == 0 else math.inf)
        zs.append(z)
        ok = ctx.check(f"fubini {name}", gap <= 3 * se, observed=gap, tolerance=3 * se)
        res.rows.append({"index": i, "name": name, "lhs": L.real, "lhs_stderr": L.stderr, "rhs": R.real,
                         "rhs_stderr": R.stderr, "abs_gap": gap,
                         "rel_gap": gap / max(abs(L.real), 1e-300), "z_score": z, "passed": ok})
    res.summary["max_z_score"] = max(zs)
    res.summary["family"] = fid
    return res


# ------------------------------------------------------------ 9. atom projections

ATOM_APEX_ANGLES = (0.0, 2.0, 4.0)


def _normal_profile(zeta):
    return lambda z: np.real(z @ np.conj(zeta))


def _tangential_profile(zeta):
    return lambda z: np.imag(z @ np.conj(zeta))


def exp_atoms(ctx: Context) -> Result:
    res = Result(("part", "profile", "apex", "j", "radius", "valid", "value", "inside_2q", "outside_2q",
                  "asserted", "passed"))
    q = ctx.value("q", 2.0)
    alpha = ctx.value("alpha", 0.0)
    n = 1
    spec = QuadSpec(n=n)
    u = at.atom_projection_norm(at.unit_atom(n, q, alpha), alpha, spec)
    ok = ctx.check("unit atom projection norm", abs(u.real - 1.0) <= 1e-8, observed=u.real)
    res.rows.append({"part": "unit", "value": u.real, "asserted": True, "passed": ok})
    sweep = {}
    top = 0.0
    for prof_name, mk, asserted in (("normal", _normal_profile, True), ("tangential", _tangential_profile, False)):
        for ang in ATOM_APEX_ANGLES:
            zeta = np.array([np.exp(1j * ang)])
            vals = []
            for j in range(7):
                tube = CarlesonTube(zeta, 2.0 ** -j)
                a = at.make_tube_atom(tube, mk(zeta), q, alpha, spec)
                valid = at.atom_is_valid(a, spec)
                est = at.atom_projection_norm(a, alpha, spec)
                parts = dict(s.split("=") for s in est.notes)
                vals.append(est.real)
                if asserted:
                    ctx.check(f"atom valid apex={ang} j={j}", bool(valid), observed=valid.norm_ratio)
                    sweep[(ang, j)] = a
                res.rows.append({"part": "sweep", "profile": prof_name, "apex": ang, "j": j,
                                 "radius": 2.0 ** -j, "valid": bool(valid), "value": est.real,
                                 "inside_2q": float(parts["2Q"]), "outside_2q": float(parts["complement"]),
                                 "asserted": asserted})
            slope = float(np.polyfit(np.arange(7), vals, 1)[0])
            ok = abs(slope) < 0.05
            if asserted:
                ctx.check(f"atom sweep slope apex={ang}", ok, observed=slope, tolerance=0.05)
                top = max(top, max(vals))
            res.rows.append({"part": "slope", "profile": prof_name, "apex": ang, "value": slope,
                             "asserted": asserted, "passed": ok})
            res.summary.setdefault("slopes", {})[f"{prof_name}@{ang}"] = slope
    ctx.frozen("atom-projection.max", top, "upper", n, q=q, alpha=alpha)
    # synthesis: sum lam_i P a_i with the frozen per-atom constant
    C = ctx.store.get(make_key("atom-projection.max", n, None, q, alpha))["value"]
    chosen = [sweep[(ang, j)] for ang in ATOM_APEX_ANGLES for j in (0, 2, 4, 6)]
    rng = ctx.rng(9)
    for t in range(3):
        lam = rng.normal(size=len(chosen))
        val = at.synthesis_norm(lam, chosen, spec).real
        bound = C * float(np.sum(np.abs(lam)))
        ok = ctx.check(f"atom synthesis vector {t}", val <= bound, observed=val, bound=bound)
        res.rows.append({"part": "synthesis", "j": t, "value": val / float(np.sum(np.abs(lam))),
                         "asserted": True, "passed": ok})
    # pairing with test Bloch functions
    tests = [HoloFunc.monomial((1,)), HoloFunc.monomial((3,)), HoloFunc.kernel(np.array([0.9j]), 2.0, s=2.0),
             HoloFunc.kernel(np.array([0.99]), 3.0, s=3.0)]
    worst = 0.0
    for g in tests:
        for a in chosen:
            worst = max(worst, at.pairing_ratio(a, g, spec))
    ctx.frozen("atom-pairing.max", worst, "upper", n, q=q, alpha=alpha)
    res.rows.append({"part": "pairing", "value": worst, "asserted": True})
    return res


# ------------------------------------------------------------ 10. kernel difference

def exp_kernel_diff(ctx: Context) -> Result:
    res = Result(("part", "delta", "count", "max_ratio", "bound", "passed"))
    n = ctx.value("n", 1)
    alpha = ctx.value("alpha", 0.0)
    delta = ctx.value("delta", 4.0)
    rng = ctx.rng(10)
    Z, W, Zt = at.admissible_triples(rng, 10000, n, delta)
    r = np.array([at.kernel_diff_ratio(Z[i], W[i], Zt[i], alpha, delta) for i in range(len(Z))])
    mx = float(r.max())
    ok = ctx.frozen("kernel-diff.max", mx, "upper", n, alpha=alpha, delta=delta)
    res.rows.append({"part": "sweep", "delta": delta, "count": len(r), "max_ratio": mx, "passed": ok})
    zero = max(at.kernel_diff_ratio(Z[i], Zt[i], Zt[i], alpha, delta) for i in range(100))
    ok = ctx.check("w = zeta gives 0", zero == 0.0, observed=zero)
    res.rows.append({"part": "w=zeta", "delta": delta, "count": 100, "max_ratio": zero, "passed": ok})
    # halving d(w, zeta) at fixed z, zeta
    bound = ctx.store.get(make_key("kernel-diff.max", n, alpha=alpha, delta=delta))["value"]
    worst = 0.0
    for i in range(500):
        d2 = abs(1.0 - np.vdot(Zt[i], W[i]))
        w2 = at._point_at(rng, Zt[i], d2 / 4.0)
        if w2 is not None:
            worst = max(worst, at.kernel_diff_ratio(Z[i], w2, Zt[i], alpha, delta))
    ok = ctx.check("halved d(w,zeta) stays within the frozen constant", worst <= bound, observed=worst,
                   bound=bound)
    res.rows.append({"part": "halved", "delta": delta, "count": 500, "max_ratio": worst, "bound": bound,
                     "passed": ok})
    for d in (5.0, 8.0):
        Z2, W2, Zt2 = at.admissible_triples(ctx.rng(10, int(d)), 2000, n, d)
        m2 = max(at.kernel_diff_ratio(Z2[i], W2[i], Zt2[i], alpha, d) for i in range(len(Z2)))
        c = at.kernel_diff_explicit_constant(n, alpha, d)
        ok = ctx.check(f"explicit constant delta={d}", m2 <= c, observed=m2, bound=c)
        res.rows.append({"part": "explicit", "delta": d, "count": len(Z2), "max_ratio": m2, "bound": c,
                         "passed": ok})
    res.summary["max_ratio"] = mx
    return res


# ------------------------------------------------------------ 11. Carleson measures

def exp_carleson(ctx: Context) -> Result:
    res = Result(("alpha", "measure", "tube_constant", "tube_slope", "target_slope", "tube_divergent",
                  "integral_constant", "growth_exponent", "integral_divergent", "consistent", "passed"))
    n = 1
    s = 1.0
    spec = QuadSpec(n=n)
    radii = 2.0 ** -np.arange(0, 7)
    probes = np.array([[1 - 10.0 ** -k] for k in np.arange(0.5, 4.01, 0.5)])
    for alpha in ctx.sweep("alpha", (0.5, 1.0)):
        mus = [("dv_alpha", at.CarlesonMeasureSpec("v_alpha", alpha=alpha, n=n), False),
               ("dv_alpha-1", at.CarlesonMeasureSpec("v_alpha", alpha=alpha - 1.0, n=n), True),
               ("point mass at 0", at.CarlesonMeasureSpec("points", points=((0.0,),), masses=(1.0,), n=n), False)]
        for name, mu, expect_div in mus:
            rad = np.concatenate([[1.4, 1.2], radii]) if mu.kind == "points" else radii
            out = at.carleson_check(mu, alpha, s, rad, probes, spec)
            ok = (out["tube_divergent"] == expect_div and out["integral_divergent"] == expect_div
                  and out["consistent"])
            if name == "dv_alpha":
                ok = ok and abs(out["tube_slope"] - out["tube_target_slope"]) <= 0.05 * out["tube_target_slope"]
            ctx.check(f"carleson {name} alpha={alpha}", ok, **{k: v for k, v in out.items()})
            res.rows.append({"alpha": alpha, "measure": name, "tube_constant": out["tube_constant"],
                             "tube_slope": out["tube_slope"], "target_slope": out["tube_target_slope"],
                             "tube_divergent": out["tube_divergent"], "integral_constant": out["integral_constant"],
                             "growth_exponent": out["integral_growth_exponent"],
                             "integral_divergent": out["integral_divergent"], "consistent": out["consistent"],
                             "passed": ok})
    return res


# ------------------------------------------------------------ 12. Bloch checks

def exp_bloch(ctx: Context) -> Result:
    res = Result(EQUIV_FIELDS)
    n = ctx.value("n", 1)
    P = op.SpaceParams(n=n, p=ctx.value("p", 1.0), q=ctx.value("q", 2.0), alpha=ctx.value("alpha", 0.0),
                       gamma=ctx.value("gamma", 0.5))
    names, funcs, fid = _family(ctx, n)
    spec = _equiv_spec(n, ctx.cfg.seed)
    ops = ("bloch-area-radial", "bloch-area-gradient", "bloch-area-invariant", "bmo")
    reps = op.equivalence_suite(funcs, ops, P, spec, fid, names)
    for name, rep in reps.items():
        _add_report(res, rep)
        ctx.frozen(f"{name}.max", rep.max, "upper", n, p=P.p, q=P.q, alpha=P.alpha, gamma=P.gamma)
        ctx.frozen(f"{name}.min", rep.min, "lower", n, p=P.p, q=P.q, alpha=P.alpha, gamma=P.gamma)
    z = HoloFunc.monomial((1,) + (0,) * (n - 1))
    bz = op.bloch_norm(z)
    if n == 1:
        ctx.check("||z||_B = 1", abs(bz - 1.0) <= 1e-6, observed=bz)
    res.summary["bloch_z"] = bz
    res.summary["family"] = fid
    return res


# ------------------------------------------------------------ 13. Coifman-Rochberg synthesis

def exp_cr(ctx: Context) -> Result:
    res = Result(("part", "p", "b", "a_modulus", "direction", "trial", "value", "bound", "passed"))
    n = ctx.value("n", 1)
    alpha = ctx.value("alpha", 0.0)
    spec = _equiv_spec(n, ctx.cfg.seed)
    lat = build_lattice(n, 1.0, 0.9)
    pick = np.linspace(0, len(lat) - 1, 10).round().astype(int)
    pts = lat.points[pick]
    rng = ctx.rng(13)
    for p in ctx.sweep("p", (1.0, 0.5)):
        b = at.cr_threshold(n, p, alpha) + 1.0
        worst = 0.0
        for r in (0.0, 0.5, 0.9, 0.99):
            for d in range(3):
                u = np.zeros(n, dtype=np.complex128)
                u[0] = np.exp(2j * math.pi * d / 3)
                if n > 1:
                    u = random_sphere_points(ctx.rng(13, d), 1, n)[0]
                f = at.cr_atom(r * u, b, p, alpha)
                v = op.bergman_norm(f, p, alpha, spec).real
                worst = max(worst, v)
                res.rows.append({"part": "atom-norm", "p": p, "b": b, "a_modulus": r, "direction": d, "value": v})
        ctx.frozen("cr-atom-norm.max", worst, "upper", n, p=p, alpha=alpha)
        lat_atoms = [at.cr_atom(a, b, p, alpha) for a in pts]
        lat_max = max(op.bergman_norm(f, p, alpha, spec).real for f in lat_atoms)
        for t in range(10):
            c = rng.normal(size=10) + 1j * rng.normal(size=10)
            f = at.cr_synthesize(c, lat_atoms)
            v = op.bergman_norm(f, p, alpha, spec).real
            if p == 1.0:
                bound = worst * float(np.sum(np.abs(c)))
                ok = ctx.check(f"cr synthesis p=1 trial {t}", v <= bound, observed=v, bound=bound)
                row_v = v
            else:
                bound = float(np.sum(np.abs(c) ** p)) * lat_max ** p
                row_v = v ** p
                ok = ctx.check(f"cr p-triangle p={p} trial {t}", row_v <= bound, observed=row_v, bound=bound)
            res.rows.append({"part": "synthesis", "p": p, "b": b, "trial": t, "value": row_v, "bound": bound,
                             "passed": ok})
    res.summary["lattice_points"] = len(lat)
    return res


# ------------------------------------------------------------ registry and runner

EXPERIMENTS = {
    "geometry-identities": (1, exp_geometry),
    "quadrature-oracle": (2, exp_quadrature),
    "tau-invariance": (3, exp_tau),
    "volume-laws": (4, exp_volume),
    "tube-slope": (4, exp_tube_slope),
    "invariant-gradient": (5, exp_invariant_gradient),
    "maximal-equiv": (6, exp_maximal),
    "area-equiv": (7, exp_area),
    "fubini-identity": (8, exp_fubini),
    "atom-projection": (9, exp_atoms),
    "kernel-difference": (10, exp_kernel_diff),
    "carleson": (11, exp_carleson),
    "bloch-checks": (12, exp_bloch),
    "cr-synthesis": (13, exp_cr),
    "determinism": (14, None),
}

DETERMINISM_DEFAULT = ("geometry-identities", "quadrature-oracle", "tau-invariance", "invariant-gradient",
                       "fubini-identity", "kernel-difference", "carleson", "cr-synthesis")


def exp_determinism(ctx: Context) -> Result:
    res = Result(("experiment", "bytes", "identical", "passed"))
    names = ctx.cfg.experiments.split(",") if ctx.cfg.experiments else DETERMINISM_DEFAULT
    for name in names:
        outs = []
        for _ in range(2):
            sub = ExperimentConfig(**{**ctx.cfg.to_dict(), "experiment": name, "experiments": None})
            outs.append(run_experiment(sub, ctx.store).to_csv())
        same = outs[0] == outs[1]
        ok = ctx.check(f"byte-identical {name}", same)
        res.rows.append({"experiment": name, "bytes": len(outs[0].encode()), "identical": same, "passed": ok})
    return res


EXPERIMENTS["determinism"] = (14, exp_determinism)


def run_experiment(cfg: ExperimentConfig, store: RegressionStore, log=None, ctx_out=None) -> Result:
    if cfg.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {cfg.experiment!r}; choose from {sorted(EXPERIMENTS)}")
    ctx = Context(cfg, store, log)
    t0 = time.perf_counter()
    res = EXPERIMENTS[cfg.experiment][1](ctx)
    ctx.log(f"{cfg.experiment}: {len(res.rows)} rows, {len(ctx.checks)} checks, "
            f"{time.perf_counter() - t0:.2f} s")
    res.summary["checks"] = ctx.checks
    res.summary["passed"] = all(c["passed"] for c in ctx.checks)
    res.summary["criterion"] = EXPERIMENTS[cfg.experiment][0]
    if ctx_out is not None:
        ctx_out.append(ctx)
    return res
