# cython: language_level=3
"""Compiled versions of the kernels in ``_kernels_py``.

Same signatures and semantics; complex arithmetic is done on (re, im) pairs
so the generated C does not depend on the compiler's complex support.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, exp, cos, sin, atan2, atanh, hypot

cnp.import_array()


cdef inline void _cpow_neg(double re, double im, double b, double ls,
                           double* ore, double* oim) noexcept nogil:
    # exp(ls - b*log(re + i im)) on the principal branch
    cdef double lr = log(hypot(re, im))
    cdef double th = atan2(im, re)
    cdef double mag = exp(ls - b * lr)
    ore[0] = mag * cos(-b * th)
    oim[0] = mag * sin(-b * th)


def mobius_transport(centers, nodes):
    cdef const double complex[:, ::1] A = np.ascontiguousarray(centers, dtype=np.complex128)
    cdef const double complex[:, ::1] U = np.ascontiguousarray(nodes, dtype=np.complex128)
    cdef Py_ssize_t M = A.shape[0], K = U.shape[0], n = A.shape[1]
    out = np.empty((M, K, n), dtype=np.complex128)
    cdef double complex[:, :, ::1] O = out
    cdef Py_ssize_t i, j, k
    cdef double aa, s, ur, ui, dr, di, den, nr, ni, tr, ti, ar, ai, c
    with nogil:
        for i in range(M):
            aa = 0.0
            for k in range(n):
                aa = aa + A[i, k].real * A[i, k].real + A[i, k].imag * A[i, k].imag
            s = sqrt(1.0 - aa)
            c = 1.0 / (1.0 + s)
            for j in range(K):
                # d = u - a and da = <d, a>, so that phi_a(a) = 0 exactly
                ur = 0.0
                ui = 0.0
                for k in range(n):
                    ur = ur + (U[j, k].real - A[i, k].real) * A[i, k].real + (U[j, k].imag - A[i, k].imag) * A[i, k].imag
                    ui = ui + (U[j, k].imag - A[i, k].imag) * A[i, k].real - (U[j, k].real - A[i, k].real) * A[i, k].imag
                dr = (1.0 - aa) - ur
                di = -ui
                den = dr * dr + di * di
                for k in range(n):
                    ar = A[i, k].real
                    ai = A[i, k].imag
                    nr = -s * (U[j, k].real - ar) - c * (ur * ar - ui * ai)
                    ni = -s * (U[j, k].imag - ai) - c * (ur * ai + ui * ar)
                    tr = (nr * dr + ni * di) / den
                    ti = (ni * dr - nr * di) / den
                    O[i, j, k] = tr + 1j * ti
    return out


def holo_eval(points, mono_coef, mono_exp, poles, ker_coef, ker_pole, ker_b,
              ker_logscale, want_grad=True):
    cdef const double complex[:, ::1] Z = np.ascontiguousarray(points, dtype=np.complex128)
    cdef Py_ssize_t m = Z.shape[0], n = Z.shape[1]
    mc_arr = np.ascontiguousarray(mono_coef, dtype=np.complex128).reshape(-1)
    me_arr = np.ascontiguousarray(mono_exp, dtype=np.int64).reshape(-1, n) if len(mc_arr) else np.zeros((0, n), dtype=np.int64)
    po_arr = np.ascontiguousarray(poles, dtype=np.complex128).reshape(-1, n) if len(ker_coef) else np.zeros((0, n), dtype=np.complex128)
    cdef const double complex[::1] MC = mc_arr
    cdef const long long[:, ::1] ME = me_arr.astype(np.longlong)
    cdef const double complex[:, ::1] P = po_arr
    cdef const double complex[::1] KC = np.ascontiguousarray(ker_coef, dtype=np.complex128).reshape(-1)
    cdef const long long[::1] KP = np.ascontiguousarray(ker_pole, dtype=np.longlong).reshape(-1)
    cdef const double[::1] KB = np.ascontiguousarray(ker_b, dtype=np.float64).reshape(-1)
    cdef const double[::1] KL = np.ascontiguousarray(ker_logscale, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t T1 = MC.shape[0], T2 = KC.shape[0], NP = P.shape[0]
    cdef bint g = bool(want_grad)

    val = np.zeros(m, dtype=np.complex128)
    grad = np.zeros((m, n if g else 0), dtype=np.complex128)
    cdef double complex[::1] V = val
    cdef double complex[:, ::1] G = grad
    lr_arr = np.empty(NP, dtype=np.float64)
    th_arr = np.empty(NP, dtype=np.float64)
    ir_arr = np.empty(NP, dtype=np.float64)
    ii_arr = np.empty(NP, dtype=np.float64)
    cdef double[::1] LR = lr_arr
    cdef double[::1] TH = th_arr
    cdef double[::1] IR = ir_arr
    cdef double[::1] II = ii_arr
    # integer exponents are applied by repeated squaring of 1/w, scales are hoisted
    kb = np.ascontiguousarray(ker_b, dtype=np.float64).reshape(-1)
    kint = (kb == np.round(kb)) & (kb >= 0) & (kb <= 256)
    cdef const long long[::1] KI = np.where(kint, kb, -1).astype(np.longlong)
    cdef const double[::1] KE = np.exp(np.ascontiguousarray(ker_logscale, dtype=np.float64).reshape(-1))
    cdef bint need_log = not bool(np.all(kint))
    cdef Py_ssize_t i, t, k, j, p
    cdef long long e
    cdef double vr, vi, tr, ti, xr, xi, qr, qi, wr, wi, mag, ang, cr, ci, gr, gi
    with nogil:
        for i in range(m):
            vr = 0.0
            vi = 0.0
            for t in range(T1):
                tr = MC[t].real
                ti = MC[t].imag
                for k in range(n):
                    e = ME[t, k]
                    while e > 0:
                        xr = tr * Z[i, k].real - ti * Z[i, k].imag
                        ti = tr * Z[i, k].imag + ti * Z[i, k].real
                        tr = xr
                        e = e - 1
                vr = vr + tr
                vi = vi + ti
                if g:
                    for k in range(n):
                        if ME[t, k] == 0:
                            continue
                        gr = MC[t].real * ME[t, k]
                        gi = MC[t].imag * ME[t, k]
                        for j in range(n):
                            e = ME[t, j] - (1 if j == k else 0)
                            while e > 0:
                                xr = gr * Z[i, j].real - gi * Z[i, j].imag
                                gi = gr * Z[i, j].imag + gi * Z[i, j].real
                                gr = xr
                                e = e - 1
                        G[i, k] = G[i, k] + (gr + 1j * gi)
            for p in range(NP):
                # w = 1 - <z, a>
                wr = 1.0
                wi = 0.0
                for k in range(n):
                    wr = wr - (Z[i, k].real * P[p, k].real + Z[i, k].imag * P[p, k].imag)
                    wi = wi - (Z[i, k].imag * P[p, k].real - Z[i, k].real * P[p, k].imag)
                mag = wr * wr + wi * wi
                IR[p] = wr / mag
                II[p] = -wi / mag
                if need_log:
                    LR[p] = log(hypot(wr, wi))
                    TH[p] = atan2(wi, wr)
            for t in range(T2):
                p = KP[t]
                e = KI[t]
                if e >= 0:
                    # (1/w)^e by squaring
                    qr = 1.0
                    qi = 0.0
                    xr = IR[p]
                    xi = II[p]
                    while e > 0:
                        if e & 1:
                            wr = qr * xr - qi * xi
                            qi = qr * xi + qi * xr
                            qr = wr
                        e = e >> 1
                        if e:
                            wr = xr * xr - xi * xi
                            xi = 2.0 * xr * xi
                            xr = wr
                    qr = qr * KE[t]
                    qi = qi * KE[t]
                else:
                    mag = exp(KL[t] - KB[t] * LR[p])
                    ang = -KB[t] * TH[p]
                    qr = mag * cos(ang)
                    qi = mag * sin(ang)
                cr = KC[t].real
                ci = KC[t].imag
                vr = vr + cr * qr - ci * qi
                vi = vi + cr * qi + ci * qr
                if g:
                    # b w^-(b+1) = b w^-b / w
                    wr = KB[t] * (qr * IR[p] - qi * II[p])
                    wi = KB[t] * (qr * II[p] + qi * IR[p])
                    gr = cr * wr - ci * wi
                    gi = cr * wi + ci * wr
                    for k in range(n):
                        # times conj(a_k)
                        G[i, k] = G[i, k] + ((gr * P[p, k].real + gi * P[p, k].imag)
                                             + 1j * (gi * P[p, k].real - gr * P[p, k].imag))
            V[i] = vr + 1j * vi
    return val, (grad if g else None)


def projection_sum(zs, ws, coeffs, zeta, lam):
    cdef const double complex[:, ::1] Z = np.ascontiguousarray(zs, dtype=np.complex128)
    cdef const double complex[:, ::1] W = np.ascontiguousarray(ws, dtype=np.complex128)
    cdef const double complex[::1] C = np.ascontiguousarray(coeffs, dtype=np.complex128).reshape(-1)
    cdef bint sub = zeta is not None
    zeta_arr = np.ascontiguousarray(zeta if sub else np.zeros(Z.shape[1]), dtype=np.complex128)
    cdef const double complex[::1] ZE = zeta_arr
    cdef Py_ssize_t M = Z.shape[0], K = W.shape[0], n = Z.shape[1]
    cdef double L = lam
    out = np.empty(M, dtype=np.complex128)
    cdef double complex[::1] O = out
    cdef Py_ssize_t i, j, k
    cdef double sr, si, wr, wi, qr, qi, mag, ang, csr = 0.0, csi = 0.0
    for j in range(K):
        csr += C[j].real
        csi += C[j].imag
    with nogil:
        for i in range(M):
            sr = 0.0
            si = 0.0
            for j in range(K):
                wr = 1.0
                wi = 0.0
                for k in range(n):
                    wr = wr - (Z[i, k].real * W[j, k].real + Z[i, k].imag * W[j, k].imag)
                    wi = wi - (Z[i, k].imag * W[j, k].real - Z[i, k].real * W[j, k].imag)
                mag = exp(-L * log(hypot(wr, wi)))
                ang = -L * atan2(wi, wr)
                qr = mag * cos(ang)
                qi = mag * sin(ang)
                sr = sr + qr * C[j].real - qi * C[j].imag
                si = si + qr * C[j].imag + qi * C[j].real
            if sub:
                wr = 1.0
                wi = 0.0
                for k in range(n):
                    wr = wr - (Z[i, k].real * ZE[k].real + Z[i, k].imag * ZE[k].imag)
                    wi = wi - (Z[i, k].imag * ZE[k].real - Z[i, k].real * ZE[k].imag)
                mag = exp(-L * log(hypot(wr, wi)))
                ang = -L * atan2(wi, wr)
                qr = mag * cos(ang)
                qi = mag * sin(ang)
                sr = sr - (qr * csr - qi * csi)
                si = si - (qr * csi + qi * csr)
            O[i] = sr + 1j * si
    return out


def greedy_separated(cands, double tanh2_sep):
    cdef const double complex[:, ::1] X = np.ascontiguousarray(cands, dtype=np.complex128)
    cdef Py_ssize_t N = X.shape[0], n = X.shape[1]
    r2_arr = np.sum(np.abs(np.asarray(X)) ** 2, axis=1)
    cdef double[::1] R2 = r2_arr
    beta_arr = np.arctanh(np.sqrt(np.minimum(r2_arr, 1.0 - 1e-16)))
    cdef double[::1] B0 = beta_arr
    cdef double sep = atanh(sqrt(tanh2_sep))
    chosen_arr = np.empty(N, dtype=np.int64)
    cdef long long[::1] CH = chosen_arr.astype(np.longlong)
    cdef Py_ssize_t nsel = 0, start = 0, i, j, k, s
    cdef double ir, ii, dr, di, phi2
    cdef bint ok
    with nogil:
        for i in range(N):
            while start < nsel and B0[CH[start]] <= B0[i] - sep:
                start += 1
            ok = True
            for j in range(start, nsel):
                s = CH[j]
                ir = 0.0
                ii = 0.0
                for k in range(n):
                    ir = ir + X[s, k].real * X[i, k].real + X[s, k].imag * X[i, k].imag
                    ii = ii + X[s, k].imag * X[i, k].real - X[s, k].real * X[i, k].imag
                dr = 1.0 - ir
                di = -ii
                phi2 = 1.0 - (1.0 - R2[s]) * (1.0 - R2[i]) / (dr * dr + di * di)
                if phi2 < tanh2_sep:
                    ok = False
                    break
            if ok:
                CH[nsel] = i
                nsel += 1
    return np.asarray(CH[:nsel], dtype=np.int64).copy()
