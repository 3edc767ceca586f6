"""Geometry of the unit ball in C^n.

Points are complex numpy vectors of shape ``(n,)``; most functions also
accept batches of shape ``(m, n)`` and broadcast over the leading axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

SPHERE_TOL = 1e-12


def as_point(z) -> np.ndarray:
    """Coerce a scalar, sequence or array to a complex point/batch."""
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim == 0:
        z = z.reshape(1)
    return z


def _check_dims(z, w):
    if z.shape[-1] != w.shape[-1]:
        raise ValueError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")


def norm2(z) -> np.ndarray:
    z = as_point(z)
    return np.sum(z.real ** 2 + z.imag ** 2, axis=-1)


def herm_inner(z, w):
    """<z, w> = sum z_k conj(w_k)."""
    z, w = as_point(z), as_point(w)
    _check_dims(z, w)
    return np.sum(z * np.conj(w), axis=-1)


def mobius(a, z) -> np.ndarray:
    """The involutive automorphism phi_a swapping 0 and a, applied to z.

    phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>), s_a = sqrt(1 - |a|^2).
    For a = 0 this is -z.
    """
    a, z = as_point(a), as_point(z)
    _check_dims(a, z)
    if a.ndim != 1:
        raise ValueError("mobius expects a single center a")
    if norm2(a) >= 1.0:
        raise ValueError("automorphism undefined for |a| >= 1")
    batch = z.reshape(-1, z.shape[-1])
    out = kernels.mobius_transport(a.reshape(1, -1), batch)[0]
    return out.reshape(z.shape)


def mobius_pairs(A, Z) -> np.ndarray:
    """phi_{A[i]}(Z[i, ...]) for centers ``(m, n)`` and points ``(m, n)`` or ``(m, k, n)``."""
    A, Z = as_point(A), as_point(Z)
    _check_dims(A, Z)
    if np.any(norm2(A) >= 1.0):
        raise ValueError("automorphism undefined for |a| >= 1")
    squeeze = Z.ndim == 2
    u = Z[:, None, :] if squeeze else Z
    a = A[:, None, :]
    aa = norm2(A)[:, None, None]
    s = np.sqrt(1.0 - aa)
    d = u - a
    da = np.sum(d * np.conj(a), axis=2)[:, :, None]
    out = (-s * d - da * a / (1.0 + s)) / ((1.0 - aa) - da)
    return out[:, 0, :] if squeeze else out


def phi_norm2(z, w) -> np.ndarray:
    """|phi_z(w)|^2 via 1 - (1-|z|^2)(1-|w|^2)/|1-<z,w>|^2 (no automorphism needed)."""
    z, w = as_point(z), as_point(w)
    _check_dims(z, w)
    d = np.abs(1.0 - herm_inner(w, z)) ** 2
    return 1.0 - (1.0 - norm2(z)) * (1.0 - norm2(w)) / d


def bergman_metric(z, w):
    """beta(z, w) = atanh |phi_z(w)|."""
    z, w = as_point(z), as_point(w)
    if np.any(norm2(z) >= 1.0) or np.any(norm2(w) >= 1.0):
        raise ValueError("Bergman metric needs points strictly inside the ball")
    r = np.sqrt(np.clip(phi_norm2(z, w), 0.0, None))
    return np.arctanh(np.minimum(r, 1.0 - 1e-17))


def noniso_dist(z, w):
    """d(z, w) = |1 - <z, w>|^(1/2) on the closed ball."""
    return np.sqrt(np.abs(1.0 - herm_inner(z, w)))


def _snap(z):
    """Points within SPHERE_TOL of the sphere are projected onto it."""
    z = as_point(z)
    r = np.sqrt(norm2(z))
    near = np.abs(r - 1.0) <= SPHERE_TOL
    if np.any(near):
        z = np.where(np.asarray(near)[..., None], z / np.where(r == 0, 1, r)[..., None], z)
    return z


@dataclass(frozen=True)
class BergmanBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        object.__setattr__(self, "center", c)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if norm2(c) >= 1.0:
            raise ValueError("center must lie in the open ball")

    @property
    def n(self) -> int:
        return self.center.shape[-1]

    @property
    def euclid_radius(self) -> float:
        """tanh(gamma): radius of the concentric ball D(0, gamma)."""
        return float(np.tanh(self.radius))


@dataclass(frozen=True)
class CarlesonTube:
    apex: np.ndarray
    radius: float

    def __post_init__(self):
        z = as_point(self.apex)
        if abs(np.sqrt(norm2(z)) - 1.0) > SPHERE_TOL:
            raise ValueError("tube apex must lie on the unit sphere")
        object.__setattr__(self, "apex", z / np.sqrt(norm2(z)))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def n(self) -> int:
        return self.apex.shape[-1]

    def dilate(self, factor: float) -> "CarlesonTube":
        return CarlesonTube(self.apex, self.radius * factor)


def in_bergman_ball(z, ball: BergmanBall):
    z = _snap(z)
    batch = z.reshape(-1, z.shape[-1])
    inside = norm2(batch) < 1.0
    out = np.zeros(batch.shape[0], dtype=bool)
    if np.any(inside):
        out[inside] = bergman_metric(ball.center, batch[inside]) < ball.radius
    return out.reshape(z.shape[:-1]) if z.ndim > 1 else bool(out[0])


def in_tube(z, tube: CarlesonTube):
    z = _snap(z)
    res = (noniso_dist(z, tube.apex) < tube.radius) & (norm2(z) < 1.0)
    return res if z.ndim > 1 else bool(res)


def bergman_ball_ellipsoid(center, gamma):
    """Euclidean description of D(a, gamma): center, and semi-axes along a and across.

    D(a, gamma) is the ellipsoid with center (1-R^2) a / (1-R^2|a|^2),
    semi-axis R(1-|a|^2)/(1-R^2|a|^2) in the complex line through a and
    R sqrt(1-|a|^2)/sqrt(1-R^2|a|^2) orthogonally, R = tanh(gamma).
    """
    a = as_point(center)
    R = np.tanh(gamma)
    aa = float(norm2(a))
    den = 1.0 - R * R * aa
    c = (1.0 - R * R) * a / den
    along = R * (1.0 - aa) / den
    across = R * np.sqrt(1.0 - aa) / np.sqrt(den)
    return c, along, across


def bergman_ball_volume(center, gamma) -> float:
    """Closed form v(D(a, gamma)) = R^(2n) (1-|a|^2)^(n+1) / (1-R^2|a|^2)^(n+1)."""
    a = as_point(center)
    n = a.shape[-1]
    R2 = np.tanh(gamma) ** 2
    aa = norm2(a)
    return R2 ** n * (1.0 - aa) ** (n + 1) / (1.0 - R2 * aa) ** (n + 1)


def unitary_completion(zeta) -> np.ndarray:
    """A unitary matrix whose first column is the unit vector zeta."""
    zeta = as_point(zeta)
    n = zeta.shape[0]
    M = np.eye(n, dtype=np.complex128)
    M[:, 0] = zeta
    Q, R = np.linalg.qr(M)
    # fix the phase so that Q[:, 0] == zeta exactly (up to rounding)
    ph = R[0, 0] / abs(R[0, 0])
    Q[:, 0] *= ph
    return Q


def random_ball_points(rng, m, n, rmax=1.0, rmin=0.0) -> np.ndarray:
    """Points uniformly distributed in direction, radius uniform in volume on [rmin, rmax)."""
    g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    g /= np.linalg.norm(g, axis=1)[:, None]
    t = rng.uniform(rmin ** (2 * n), rmax ** (2 * n), size=m)
    return g * t[:, None] ** (1.0 / (2 * n))


def random_sphere_points(rng, m, n) -> np.ndarray:
    g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    return g / np.linalg.norm(g, axis=1)[:, None]
