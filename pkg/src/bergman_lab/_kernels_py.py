"""Pure numpy implementation of the hot kernels.

This module is the reference; ``_ckernels.pyx`` must agree with it to
rounding. Every function takes C-contiguous ``complex128`` arrays.
"""
from __future__ import annotations

import numpy as np


def mobius_transport(centers, nodes):
    """phi_c(u) for every center c (M, n) and node u (K, n) -> (M, K, n)."""
    centers = np.asarray(centers, dtype=np.complex128)
    nodes = np.asarray(nodes, dtype=np.complex128)
    a = centers[:, None, :]
    u = nodes[None, :, :]
    aa = np.sum(centers.real ** 2 + centers.imag ** 2, axis=1)[:, None, None]
    s = np.sqrt(1.0 - aa)
    # written in d = u - a so that phi_a(a) = 0 exactly and nearby points keep relative accuracy
    d = u - a
    da = np.sum(d * np.conj(a), axis=2)[:, :, None]
    return (-s * d - da * a / (1.0 + s)) / ((1.0 - aa) - da)


def holo_eval(points, mono_coef, mono_exp, poles, ker_coef, ker_pole, ker_b,
              ker_logscale, want_grad=True):
    """Evaluate a monomial + kernel-term sum and (optionally) its gradient.

    Kernel term t is ``ker_coef[t] * exp(ker_logscale[t]) *
    (1 - <z, poles[ker_pole[t]]>)^(-ker_b[t])`` on the principal branch.
    """
    z = np.asarray(points, dtype=np.complex128)
    m, n = z.shape
    val = np.zeros(m, dtype=np.complex128)
    grad = np.zeros((m, n), dtype=np.complex128) if want_grad else None

    for c, J in zip(mono_coef, mono_exp):
        J = np.asarray(J)
        term = np.full(m, c, dtype=np.complex128)
        for k in range(n):
            if J[k]:
                term = term * z[:, k] ** int(J[k])
        val += term
        if want_grad:
            for k in range(n):
                if J[k]:
                    g = np.full(m, c * J[k], dtype=np.complex128)
                    for j in range(n):
                        e = int(J[j]) - (1 if j == k else 0)
                        if e:
                            g = g * z[:, j] ** e
                    grad[:, k] += g

    if len(ker_coef):
        poles = np.asarray(poles, dtype=np.complex128)
        # one log per (point, pole); exponents are applied per term
        logw = np.log(1.0 - z @ np.conj(poles).T)
        for c, p, b, ls in zip(ker_coef, ker_pole, ker_b, ker_logscale):
            lw = logw[:, p]
            val += c * np.exp(ls - b * lw)
            if want_grad:
                g = c * b * np.exp(ls - (b + 1.0) * lw)
                grad += g[:, None] * np.conj(poles[p])[None, :]
    return val, grad


def projection_sum(zs, ws, coeffs, zeta, lam):
    """sum_j coeffs[j] * (K(z, w_j) - K(z, zeta)) for each z, K = (1-<z,w>)^-lam.

    ``zeta=None`` drops the subtracted boundary kernel.
    """
    zs = np.asarray(zs, dtype=np.complex128)
    ws = np.asarray(ws, dtype=np.complex128)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    out = np.empty(zs.shape[0], dtype=np.complex128)
    step = max(1, 2_000_000 // max(1, ws.shape[0]))
    for i in range(0, zs.shape[0], step):
        blk = zs[i:i + step]
        K = np.exp(-lam * np.log(1.0 - blk @ np.conj(ws).T))
        s = K @ coeffs
        if zeta is not None:
            kz = np.exp(-lam * np.log(1.0 - blk @ np.conj(zeta)))
            s = s - kz * coeffs.sum()
        out[i:i + step] = s
    return out


def greedy_separated(cands, tanh2_sep):
    """Greedy maximal subset with pairwise |phi_x(y)|^2 >= tanh2_sep.

    Candidates must be sorted by modulus; the Bergman distance from the
    origin is then nondecreasing, so only a suffix of the accepted list can
    conflict (triangle inequality through 0).
    """
    cands = np.asarray(cands, dtype=np.complex128)
    N = cands.shape[0]
    r2 = np.sum(np.abs(cands) ** 2, axis=1)
    beta0 = np.arctanh(np.sqrt(np.minimum(r2, 1.0 - 1e-16)))
    sep = np.arctanh(np.sqrt(tanh2_sep))
    chosen: list[int] = []
    chosen_beta = np.empty(N)
    start = 0
    for i in range(N):
        nsel = len(chosen)
        while start < nsel and chosen_beta[start] <= beta0[i] - sep:
            start += 1
        if start < nsel:
            idx = np.asarray(chosen[start:])
            w = cands[idx]
            inner = w @ np.conj(cands[i])
            phi2 = 1.0 - (1.0 - r2[idx]) * (1.0 - r2[i]) / np.abs(1.0 - inner) ** 2
            if np.any(phi2 < tanh2_sep):
                continue
        chosen_beta[nsel] = beta0[i]
        chosen.append(i)
    return np.asarray(chosen, dtype=np.int64)
