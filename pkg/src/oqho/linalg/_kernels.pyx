# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; same contract as ``_kernels_py``."""

import numpy as np

from libc.math cimport fabs, sqrt, copysign, isfinite

from ..errors import NumericError

BACKEND_NAME = "compiled"

cdef double RADIX = 2.0


def balance(double[:, ::1] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef double sqrdx = RADIX * RADIX
    cdef double c, r, g, f, s
    cdef bint done = False
    while not done:
        done = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += fabs(a[j, i])
                    r += fabs(a[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= RADIX
                c *= sqrdx
            g = r * RADIX
            while c > g:
                f /= RADIX
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                g = 1.0 / f
                for j in range(n):
                    a[i, j] *= g
                for j in range(n):
                    a[j, i] *= f


def hessenberg(double[:, ::1] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k, i, j
    cdef double alpha, vnorm, d
    cdef double[::1] v = np.zeros(n)
    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += a[i, k] * a[i, k]
        alpha = sqrt(alpha)
        if alpha == 0.0:
            continue
        if a[k + 1, k] > 0.0:
            alpha = -alpha
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] -= alpha
        vnorm = 0.0
        for i in range(k + 1, n):
            vnorm += v[i] * v[i]
        vnorm = sqrt(vnorm)
        if vnorm == 0.0:
            continue
        for i in range(k + 1, n):
            v[i] /= vnorm
        # left: rows k+1.. of a
        for j in range(n):
            d = 0.0
            for i in range(k + 1, n):
                d += v[i] * a[i, j]
            for i in range(k + 1, n):
                a[i, j] -= 2.0 * v[i] * d
        # right: columns k+1.. of a
        for i in range(n):
            d = 0.0
            for j in range(k + 1, n):
                d += a[i, j] * v[j]
            for j in range(k + 1, n):
                a[i, j] -= 2.0 * d * v[j]
        for i in range(k + 2, n):
            a[i, k] = 0.0


def hqr(h, long max_iterations):
    cdef Py_ssize_t n = h.shape[0]
    cdef double[:, ::1] a = np.zeros((n + 1, n + 1))
    cdef double[::1] wr = np.zeros(n + 1)
    cdef double[::1] wi = np.zeros(n + 1)
    cdef double[:, ::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t nn, m, l, k, j, i, mmin
    cdef long its, total = 0
    cdef double z = 0.0, y = 0.0, x = 0.0, w = 0.0, v = 0.0, u = 0.0
    cdef double t, s = 0.0, r = 0.0, q = 0.0, p = 0.0, anorm
    for i in range(n):
        for j in range(n):
            a[i + 1, j + 1] = hv[i, j]

    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += fabs(a[i, j])

    nn = n
    t = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = nn
            while l >= 2:
                s = fabs(a[l - 1, l - 1]) + fabs(a[l, l])
                if s == 0.0:
                    s = anorm
                if fabs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = sqrt(fabs(q))
                x += t
                if q >= 0.0:
                    z = p + copysign(z, p)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = z
                    wi[nn] = -z
                nn -= 2
                break
            if total >= max_iterations:
                raise NumericError(
                    f"QR iteration did not converge after {total} iterations "
                    f"({nn} eigenvalues still undeflated)"
                )
            if its == 10 or its == 20:
                t += x
                for i in range(1, nn + 1):
                    a[i, i] -= x
                s = fabs(a[nn, nn - 1]) + fabs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            total += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = fabs(p) + fabs(q) + fabs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = fabs(a[m, m - 1]) * (fabs(q) + fabs(r))
                v = fabs(p) * (fabs(a[m - 1, m - 1]) + fabs(z) + fabs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            k = m
            while k <= nn - 1:
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = fabs(p) + fabs(q) + fabs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = copysign(sqrt(p * p + q * q + r * r), p)
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if k != nn - 1:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if k != nn - 1:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
                k += 1
            if l >= nn - 1:
                break
    return np.asarray(wr[1:]).copy(), np.asarray(wi[1:]).copy(), total


def jacobi_hermitian(h, int max_sweeps):
    cdef double complex[:, ::1] a = np.array(h, dtype=np.complex128, copy=True)
    cdef Py_ssize_t n = a.shape[0]
    cdef double complex[:, ::1] vec = np.eye(n, dtype=np.complex128)
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double scale = 0.0, off, r, app, aqq, theta, t, c, s
    cdef double complex apq, dq, dqc, xp, xq
    for p in range(n):
        for q in range(n):
            scale += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
    scale = sqrt(scale)
    if scale == 0.0 or n == 1:
        return np.asarray(a).diagonal().real.copy(), np.asarray(vec), 0
    for sweep in range(1, max_sweeps + 1):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        if sqrt(2.0 * off) <= 1e-15 * scale:
            return np.asarray(a).diagonal().real.copy(), np.asarray(vec), sweep - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if r <= 1e-300:
                    continue
                dq = apq.conjugate() / r
                dqc = dq.conjugate()
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for i in range(n):
                    xp = a[i, p]
                    xq = a[i, q] * dq
                    a[i, p] = c * xp - s * xq
                    a[i, q] = s * xp + c * xq
                for i in range(n):
                    xp = a[p, i]
                    xq = a[q, i] * dqc
                    a[p, i] = c * xp - s * xq
                    a[q, i] = s * xp + c * xq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for i in range(n):
                    xp = vec[i, p]
                    xq = vec[i, q] * dq
                    vec[i, p] = c * xp - s * xq
                    vec[i, q] = s * xp + c * xq
    raise NumericError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def march_threshold(step, y0, weight, double threshold, long max_steps):
    cdef double[:, ::1] e = np.ascontiguousarray(step, dtype=np.float64)
    cdef double[:, ::1] wgt = np.ascontiguousarray(weight, dtype=np.float64)
    cdef double[:, ::1] y = np.array(y0, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t n = y.shape[0], cols = y.shape[1], nw = wgt.shape[0]
    cdef double[:, ::1] tmp = np.zeros((n, cols))
    cdef Py_ssize_t i, j, l
    cdef long k
    cdef double acc, norm2, thr2 = threshold * threshold
    for k in range(1, max_steps + 1):
        for i in range(n):
            for j in range(cols):
                acc = 0.0
                for l in range(n):
                    acc += e[i, l] * y[l, j]
                tmp[i, j] = acc
        y[:, :] = tmp
        norm2 = 0.0
        for i in range(nw):
            for j in range(cols):
                acc = 0.0
                for l in range(n):
                    acc += wgt[i, l] * y[l, j]
                norm2 += acc * acc
        if sqrt(norm2) <= threshold:
            return k
    return -1


cdef void _rhs(double[:, ::1] a, double[:, ::1] q, double[:, ::1] x,
               double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, l
    cdef double acc
    for i in range(n):
        for j in range(n):
            acc = q[i, j]
            for l in range(n):
                acc += a[i, l] * x[l, j] + x[i, l] * a[j, l]
            out[i, j] = acc


def rk4_lyapunov(a_in, q_in, p0, double dt, long n_steps, double last_dt):
    cdef double[:, ::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    out_arr = np.empty((n_steps + 1, n, n))
    cdef double[:, :, ::1] out = out_arr
    cdef double[:, ::1] p = np.array(p0, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] k1 = np.zeros((n, n))
    cdef double[:, ::1] k2 = np.zeros((n, n))
    cdef double[:, ::1] k3 = np.zeros((n, n))
    cdef double[:, ::1] k4 = np.zeros((n, n))
    cdef double[:, ::1] tmp = np.zeros((n, n))
    cdef Py_ssize_t i, j
    cdef long k
    cdef double h, sym
    out[0, :, :] = p
    for k in range(n_steps):
        h = last_dt if k == n_steps - 1 else dt
        _rhs(a, q, p, k1)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = p[i, j] + 0.5 * h * k1[i, j]
        _rhs(a, q, tmp, k2)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = p[i, j] + 0.5 * h * k2[i, j]
        _rhs(a, q, tmp, k3)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = p[i, j] + h * k3[i, j]
        _rhs(a, q, tmp, k4)
        for i in range(n):
            for j in range(n):
                tmp[i, j] = p[i, j] + (h / 6.0) * (
                    k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
        for i in range(n):
            for j in range(i, n):
                sym = 0.5 * (tmp[i, j] + tmp[j, i])
                if not isfinite(sym):
                    raise NumericError(f"Lyapunov ODE blew up at step {k + 1}")
                p[i, j] = sym
                p[j, i] = sym
        out[k + 1, :, :] = p
    return out_arr
