"""Closed-form holomorphic functions on B_n and the operators acting on them.

A :class:`HoloFunc` is a finite sum of monomials ``c z^J`` and kernel terms
``c (1-|a|^2)^s / (1-<z,a>)^b``. The family is closed under the radial
derivative, so ``R^k f`` stays exact.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .geometry import as_point, mobius, norm2
from .measures import Estimate, QuadSpec, ball_rule, integrate_rule

POLE_GUARD = 1e-14


@dataclass(frozen=True)
class Monomial:
    coeff: complex
    J: tuple

    @property
    def degree(self) -> int:
        return sum(self.J)


@dataclass(frozen=True)
class KernelTerm:
    """coeff * (1-|a|^2)^s / (1-<z,a>)^b with |a| < 1, b > 0 real."""

    coeff: complex
    pole: tuple
    b: float
    s: float = 0.0

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("kernel exponent b must be positive")
        if sum(abs(x) ** 2 for x in self.pole) >= 1.0:
            raise ValueError("kernel pole must lie strictly inside the ball")

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.pole, dtype=np.complex128)


def _key(t):
    if isinstance(t, Monomial):
        return ("m", t.J)
    return ("k", t.pole, t.b, t.s)


class HoloFunc:
    """Immutable sum of :class:`Monomial` and :class:`KernelTerm` terms."""

    __slots__ = ("terms", "n", "__dict__")

    def __init__(self, terms, n: int):
        merged: dict = {}
        for t in terms:
            if isinstance(t, Monomial):
                if len(t.J) != n:
                    raise ValueError("monomial multi-index length must equal n")
                t = Monomial(complex(t.coeff), tuple(int(j) for j in t.J))
            elif isinstance(t, KernelTerm):
                if len(t.pole) != n:
                    raise ValueError("kernel pole dimension must equal n")
                pole = tuple(complex(x) for x in t.pole)
                if all(x == 0 for x in pole):
                    # (1-0)^s / (1-0)^b is the constant coeff
                    t = Monomial(complex(t.coeff), (0,) * n)
                else:
                    t = KernelTerm(complex(t.coeff), pole, float(t.b), float(t.s))
            else:
                raise TypeError(f"unsupported term {t!r}")
            k = _key(t)
            if k in merged:
                old = merged[k]
                merged[k] = type(old)(old.coeff + t.coeff, *_rest(old))
            else:
                merged[k] = t
        object.__setattr__(self, "terms", tuple(t for t in merged.values() if t.coeff != 0))
        object.__setattr__(self, "n", int(n))

    def __setattr__(self, name, value):
        if name in ("terms", "n"):
            raise AttributeError("HoloFunc is immutable")
        object.__setattr__(self, name, value)

    # construction helpers
    @classmethod
    def constant(cls, c, n):
        return cls([Monomial(c, (0,) * n)], n)

    @classmethod
    def monomial(cls, J, c=1.0):
        J = tuple(J)
        return cls([Monomial(c, J)], len(J))

    @classmethod
    def kernel(cls, a, b, s=0.0, c=1.0):
        a = tuple(complex(x) for x in as_point(a))
        return cls([KernelTerm(c, a, b, s)], len(a))

    @classmethod
    def zero(cls, n):
        return cls([], n)

    # algebra
    def __add__(self, other):
        if not isinstance(other, HoloFunc):
            other = HoloFunc.constant(other, self.n)
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return HoloFunc(self.terms + other.terms, self.n)

    __radd__ = __add__

    def __mul__(self, c):
        if isinstance(c, HoloFunc):
            raise TypeError("products of HoloFuncs are outside the closed family")
        return HoloFunc([type(t)(t.coeff * c, *_rest(t)) for t in self.terms], self.n)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, HoloFunc) else -complex(other))

    def __eq__(self, other):
        return (isinstance(other, HoloFunc) and other.n == self.n
                and set(map(_key_coeff, self.terms)) == set(map(_key_coeff, other.terms)))

    def __hash__(self):
        return hash(frozenset(map(_key_coeff, self.terms)))

    def __repr__(self):
        return f"HoloFunc(n={self.n}, terms={list(self.terms)!r})"

    # structure
    @property
    def monomials(self):
        return [t for t in self.terms if isinstance(t, Monomial)]

    @property
    def kernel_terms(self):
        return [t for t in self.terms if isinstance(t, KernelTerm)]

    @property
    def is_polynomial(self) -> bool:
        return not self.kernel_terms

    def poles(self):
        """Distinct kernel poles (used to adapt quadrature)."""
        seen = []
        for t in self.kernel_terms:
            if t.pole not in seen:
                seen.append(t.pole)
        return [np.asarray(p, dtype=np.complex128) for p in seen]

    @cached_property
    def _packed(self):
        mons = self.monomials
        kers = self.kernel_terms
        poles = self.poles()
        pidx = {tuple(p): i for i, p in enumerate(poles)}
        mono_coef = np.array([t.coeff for t in mons], dtype=np.complex128)
        mono_exp = np.array([t.J for t in mons], dtype=np.int64).reshape(-1, self.n)
        pole_arr = np.array(poles, dtype=np.complex128).reshape(-1, self.n)
        ker_coef = np.array([t.coeff for t in kers], dtype=np.complex128)
        ker_pole = np.array([pidx[t.pole] for t in kers], dtype=np.int64)
        ker_b = np.array([t.b for t in kers], dtype=np.float64)
        ker_ls = np.array([t.s * math.log1p(-float(np.sum(np.abs(t.a) ** 2))) for t in kers],
                          dtype=np.float64)
        return mono_coef, mono_exp, pole_arr, ker_coef, ker_pole, ker_b, ker_ls

    def _guard(self, z):
        kers = self.kernel_terms
        if not kers:
            return
        amax = max(float(np.sqrt(np.sum(np.abs(t.a) ** 2))) for t in kers)
        zmax = float(np.sqrt(norm2(z).max())) if z.size else 0.0
        if 1.0 - amax * zmax >= POLE_GUARD:
            return
        P = self._packed[2]
        if np.min(np.abs(1.0 - z @ np.conj(P).T)) < POLE_GUARD:
            raise ValueError("evaluation too close to a kernel pole")

    def derivs(self, z, want_grad=True):
        """(f(z), grad f(z)) for a batch ``(m, n)``."""
        z = np.ascontiguousarray(z, dtype=np.complex128)
        self._guard(z)
        return kernels.holo_eval(z, *self._packed, want_grad=want_grad)

    def __call__(self, z):
        z = as_point(z)
        batch = z.reshape(-1, self.n)
        val, _ = self.derivs(batch, want_grad=False)
        return val.reshape(z.shape[:-1]) if z.ndim > 1 else complex(val[0])

    # serialization
    def to_dict(self):
        out = []
        for t in self.terms:
            if isinstance(t, Monomial):
                out.append({"type": "monomial", "coeff": [t.coeff.real, t.coeff.imag],
                            "J": list(t.J)})
            else:
                out.append({"type": "kernel", "coeff": [t.coeff.real, t.coeff.imag],
                            "pole": [[x.real, x.imag] for x in t.pole], "b": t.b, "s": t.s})
        return {"n": self.n, "terms": out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        terms = []
        for t in d["terms"]:
            c = complex(*t["coeff"])
            if t["type"] == "monomial":
                terms.append(Monomial(c, tuple(t["J"])))
            elif t["type"] == "kernel":
                terms.append(KernelTerm(c, tuple(complex(*p) for p in t["pole"]), t["b"], t["s"]))
            else:
                raise ValueError(f"unknown term type {t['type']!r}")
        return cls(terms, d["n"])

    @classmethod
    def from_json(cls, s: str):
        return cls.from_dict(json.loads(s))


def _rest(t):
    if isinstance(t, Monomial):
        return (t.J,)
    return (t.pole, t.b, t.s)


def _key_coeff(t):
    return _key(t) + (t.coeff,)


@dataclass(frozen=True)
class SampledFunction:
    """A (not necessarily holomorphic) function given by a batch callback."""

    func: object
    integrable: bool = True
    name: str = ""

    def __call__(self, z):
        return self.func(z)


# ------------------------------------------------------------------ operators

def eval(f: HoloFunc, z):  # noqa: A001 - mirrors the operation name
    return f(z)


def radial_derivative(f: HoloFunc) -> HoloFunc:
    """R f = sum z_k df/dz_k.

    Monomials scale by their degree. A kernel term with exponent b maps to
    b c (1-|a|^2)^s [(1-<z,a>)^-(b+1) - (1-<z,a>)^-b], from rewriting
    <z,a> = 1 - (1-<z,a>).
    """
    out = []
    for t in f.terms:
        if isinstance(t, Monomial):
            if t.degree:
                out.append(Monomial(t.coeff * t.degree, t.J))
        else:
            out.append(KernelTerm(t.coeff * t.b, t.pole, t.b + 1.0, t.s))
            out.append(KernelTerm(-t.coeff * t.b, t.pole, t.b, t.s))
    return HoloFunc(out, f.n)


def radial_derivative_k(f: HoloFunc, k: int) -> HoloFunc:
    if k < 0:
        raise ValueError("k must be nonnegative")
    for _ in range(k):
        f = radial_derivative(f)
    return f


def gradient(f: HoloFunc, z) -> np.ndarray:
    z = as_point(z)
    batch = z.reshape(-1, f.n)
    _, g = f.derivs(batch)
    return g.reshape(z.shape)


def radial_from_grad(z, grad):
    return np.sum(z * grad, axis=-1)


def invariant_gradient_sq(z, grad, zz=None):
    """(1-|z|^2)(|grad f|^2 - |R f|^2) for batches; may be slightly negative from rounding."""
    if zz is None:
        zz = norm2(z)
    rf = np.sum(z * grad, axis=-1)
    g2 = np.sum(grad.real ** 2 + grad.imag ** 2, axis=-1)
    return (1.0 - zz) * (g2 - np.abs(rf) ** 2)


def invariant_gradient_norm(f: HoloFunc, z):
    """|grad~ f(z)| = sqrt((1-|z|^2)(|grad f(z)|^2 - |R f(z)|^2))."""
    z = as_point(z)
    batch = z.reshape(-1, f.n)
    if np.any(norm2(batch) >= 1.0):
        raise ValueError("invariant gradient needs |z| < 1")
    _, g = f.derivs(batch)
    sq = invariant_gradient_sq(batch, g)
    scale = (1.0 - norm2(batch)) * np.sum(np.abs(g) ** 2, axis=-1)
    if np.any(sq < -1e-12 * np.maximum(1.0, scale)):
        raise ArithmeticError("negative radicand in invariant gradient: internal inconsistency")
    out = np.sqrt(np.clip(sq, 0.0, None))
    return out.reshape(z.shape[:-1]) if z.ndim > 1 else float(out[0])


def invariant_gradient_fd(f: HoloFunc, z, h: float = 1e-5) -> float:
    """|grad (f o phi_z)(0)| by central differences in each complex coordinate.

    The Wirtinger derivative d/du_k = (d/dx_k - i d/dy_k)/2 is formed from
    real and imaginary central differences.
    """
    if not 1e-7 <= h <= 1e-4:
        raise ValueError("step h must lie in [1e-7, 1e-4]")
    z = as_point(z)
    n = f.n
    E = np.eye(n, dtype=np.complex128) * h
    pts = np.concatenate([E, -E, 1j * E, -1j * E])
    vals = f(mobius(z, pts))
    dx = (vals[:n] - vals[n:2 * n]) / (2 * h)
    dy = (vals[2 * n:3 * n] - vals[3 * n:]) / (2 * h)
    grad = 0.5 * (dx - 1j * dy)
    return float(np.sqrt(np.sum(np.abs(grad) ** 2)))


def fractional_shift(f: HoloFunc, s: float) -> HoloFunc:
    """(I + R)^s f: each homogeneous part of degree k scaled by (1+k)^s."""
    if not f.is_polynomial:
        raise ValueError("(I+R)^s is only provided for polynomials (finite homogeneous expansion)")
    return HoloFunc([Monomial(t.coeff * (1.0 + t.degree) ** s, t.J) for t in f.terms], f.n)


def compose_unitary(f: HoloFunc, U) -> HoloFunc:
    """f o U for a unitary matrix U (z -> U z)."""
    U = np.asarray(U, dtype=np.complex128)
    n = f.n
    out = []
    for t in f.terms:
        if isinstance(t, KernelTerm):
            # <U z, a> = <z, U* a>
            out.append(KernelTerm(t.coeff, tuple(U.conj().T @ t.a), t.b, t.s))
            continue
        # expand prod_k (sum_j U_kj z_j)^(J_k)
        poly = {(0,) * n: t.coeff}
        for k, e in enumerate(t.J):
            for _ in range(e):
                nxt: dict = {}
                for J, c in poly.items():
                    for j in range(n):
                        if U[k, j] == 0:
                            continue
                        J2 = list(J)
                        J2[j] += 1
                        J2 = tuple(J2)
                        nxt[J2] = nxt.get(J2, 0) + c * U[k, j]
                poly = nxt
        out.extend(Monomial(c, J) for J, c in poly.items())
    return HoloFunc(out, n)


def bergman_kernel(alpha: float, z, w):
    """K^alpha(z, w) = (1 - <z, w>)^-(n+1+alpha), principal branch."""
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    z, w = as_point(z), as_point(w)
    n = z.shape[-1]
    d = 1.0 - np.sum(z * np.conj(w), axis=-1)
    if np.any(np.abs(d) < POLE_GUARD):
        raise ValueError("kernel evaluated at its pole")
    return np.exp(-(n + 1 + alpha) * np.log(d))


def project(alpha: float, u, z, spec: QuadSpec) -> Estimate:
    """P_alpha u(z) = int K^alpha(z, w) u(w) dv_alpha(w) by quadrature.

    The rule is Mobius-adapted to z (the kernel peaks towards z/|z|) and to
    any kernel poles of u.
    """
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    z = as_point(z)
    if getattr(u, "integrable", True) is False:
        return Estimate(float("nan"), 0.0, 0, divergent=True, notes=("integrand not integrable",))
    centers = [z] + (u.poles() if isinstance(u, HoloFunc) else [])
    rule = ball_rule(spec, alpha, centers)
    return integrate_rule(lambda w: bergman_kernel(alpha, z, w) * np.asarray(u(w)), rule)


def multi_indices(n: int, max_degree: int):
    """All J in N^n with |J| <= max_degree, graded lexicographic."""
    out = []
    for d in range(max_degree + 1):
        for J in itertools.product(range(d + 1), repeat=n):
            if sum(J) == d:
                out.append(tuple(reversed(J)))
    return out
