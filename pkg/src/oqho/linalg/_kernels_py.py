"""Pure-Python implementations of the hot loops.

Mirrors ``_kernels.pyx`` function for function; whichever is importable
is selected by :mod:`oqho.linalg._backend`. Arrays come in as contiguous
float64 / complex128 and are modified in place where documented.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NumericError

BACKEND_NAME = "python"

_RADIX = 2.0


def balance(a: np.ndarray) -> None:
    """Parlett-Reinsch balancing with power-of-two scaling, in place."""
    n = a.shape[0]
    sqrdx = _RADIX * _RADIX
    done = False
    while not done:
        done = True
        for i in range(n):
            c = float(np.abs(a[:, i]).sum() - abs(a[i, i]))
            r = float(np.abs(a[i, :]).sum() - abs(a[i, i]))
            if c == 0.0 or r == 0.0:
                continue
            g = r / _RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= _RADIX
                c *= sqrdx
            g = r * _RADIX
            while c > g:
                f /= _RADIX
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] *= 1.0 / f
                a[:, i] *= f


def hessenberg(a: np.ndarray) -> None:
    """Householder reduction to upper Hessenberg form, in place."""
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = math.sqrt(float(x @ x))
        if alpha == 0.0:
            continue
        if x[0] > 0.0:
            alpha = -alpha
        x[0] -= alpha
        vnorm = math.sqrt(float(x @ x))
        if vnorm == 0.0:
            continue
        v = x / vnorm
        a[k + 1:, :] -= 2.0 * np.outer(v, v @ a[k + 1:, :])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v)
        a[k + 2:, k] = 0.0


def hqr(h: np.ndarray, max_iterations: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Returns ``(wr, wi, iterations)``. Complex pairs come out with exactly
    equal real parts and opposite imaginary parts. Raises
    :class:`NumericError` once the total iteration count exceeds
    ``max_iterations``.
    """
    n = h.shape[0]
    # 1-based working copy; row/column 0 unused
    a = [[0.0] * (n + 1)]
    for i in range(n):
        a.append([0.0] + [float(v) for v in h[i]])
    wr = [0.0] * (n + 1)
    wi = [0.0] * (n + 1)

    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(a[i][j])

    nn = n
    t = 0.0
    total = 0
    while nn >= 1:
        its = 0
        while True:
            l = nn
            while l >= 2:
                s = abs(a[l - 1][l - 1]) + abs(a[l][l])
                if s == 0.0:
                    s = anorm
                if abs(a[l][l - 1]) + s == s:
                    a[l][l - 1] = 0.0
                    break
                l -= 1
            x = a[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1][nn - 1]
            w = a[nn][nn - 1] * a[nn - 1][nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
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
                    a[i][i] -= x
                s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            total += 1
            m = nn - 2
            while m >= l:
                z = a[m][m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                q = a[m + 1][m + 1] - z - r - s
                r = a[m + 2][m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i][i - 2] = 0.0
                if i != m + 2:
                    a[i][i - 3] = 0.0
            k = m
            while k <= nn - 1:
                if k != m:
                    p = a[k][k - 1]
                    q = a[k + 1][k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2][k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k][k - 1] = -a[k][k - 1]
                    else:
                        a[k][k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = a[k][j] + q * a[k + 1][j]
                        if k != nn - 1:
                            p += r * a[k + 2][j]
                            a[k + 2][j] -= p * z
                        a[k + 1][j] -= p * y
                        a[k][j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i][k] + y * a[i][k + 1]
                        if k != nn - 1:
                            p += z * a[i][k + 2]
                            a[i][k + 2] -= p * r
                        a[i][k + 1] -= p * q
                        a[i][k] -= p
                k += 1
            if l >= nn - 1:
                break
    return np.array(wr[1:]), np.array(wi[1:]), total


def jacobi_hermitian(h: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Cyclic complex Jacobi diagonalization of a Hermitian matrix.

    Each rotation first removes the phase of the pivot ``h[p, q]`` with a
    diagonal unitary and then applies a real plane rotation. Works on a
    copy; returns ``(eigenvalues, eigenvectors, sweeps)`` unsorted.
    """
    a = np.array(h, dtype=np.complex128, copy=True)
    n = a.shape[0]
    vec = np.eye(n, dtype=np.complex128)
    scale = float(np.sqrt(np.sum(np.abs(a) ** 2)))
    if scale == 0.0 or n == 1:
        return a.diagonal().real.copy(), vec, 0
    for sweep in range(1, max_sweeps + 1):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if math.sqrt(2.0 * off) <= 1e-15 * scale:
            return a.diagonal().real.copy(), vec, sweep - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                dq = apq.conjugate() / r
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q] * dq
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :] * dq.conjugate()
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = vec[:, p].copy()
                vq = vec[:, q] * dq
                vec[:, p] = c * vp - s * vq
                vec[:, q] = s * vp + c * vq
    raise NumericError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def march_threshold(
    step: np.ndarray,
    y0: np.ndarray,
    weight: np.ndarray,
    threshold: float,
    max_steps: int,
) -> int:
    """Smallest ``k`` with ``||weight @ step**k @ y0||_F <= threshold``.

    Returns -1 if no such ``k <= max_steps`` exists.
    """
    y = np.array(y0, dtype=np.float64, copy=True)
    for k in range(1, max_steps + 1):
        y = step @ y
        if float(np.sqrt(np.sum((weight @ y) ** 2))) <= threshold:
            return k
    return -1


def rk4_lyapunov(
    a: np.ndarray, q: np.ndarray, p0: np.ndarray, dt: float, n_steps: int, last_dt: float
) -> np.ndarray:
    """Classical RK4 for ``P' = A P + P A^T + Q`` with symmetrization.

    The final step uses ``last_dt`` so the horizon is hit exactly.
    Returns an ``(n_steps + 1, n, n)`` array of samples.
    """
    n = a.shape[0]
    out = np.empty((n_steps + 1, n, n))
    p = np.array(p0, dtype=np.float64, copy=True)
    out[0] = p
    at = a.T

    def rhs(x: np.ndarray) -> np.ndarray:
        return a @ x + x @ at + q

    for k in range(n_steps):
        h = last_dt if k == n_steps - 1 else dt
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = rhs(p)
            k2 = rhs(p + 0.5 * h * k1)
            k3 = rhs(p + 0.5 * h * k2)
            k4 = rhs(p + h * k3)
            p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            p = 0.5 * (p + p.T)
        if not np.all(np.isfinite(p)):
            raise NumericError(f"Lyapunov ODE blew up at step {k + 1}")
        out[k + 1] = p
    return out
