"""Dense kernels for small real and complex square matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..config import TOL
from ..errors import (
    DefinitenessError,
    DimensionError,
    NumericError,
    StabilityError,
    ValidationError,
)
from . import _backend

__all__ = [
    "Spectrum",
    "as_square",
    "expm",
    "eig_general",
    "eig_hermitian",
    "sqrtm_spd",
    "inv_sqrtm_spd",
    "solve_lyapunov",
    "lyapunov_residual",
    "frobenius_norm",
    "frobenius_inner",
    "spectral_abscissa",
    "is_hurwitz",
    "psd_margin",
    "psd_check",
]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with optional unit-norm eigenvectors stored as columns."""

    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128] | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)


def as_square(a: ArrayLike, name: str = "matrix", dtype=None) -> NDArray:
    """Validate a finite square 2-D array and return it as a fresh ndarray."""
    arr = np.array(a, dtype=dtype, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def frobenius_norm(x: ArrayLike) -> float:
    arr = np.asarray(x)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("non-finite entries")
    return float(np.sqrt(np.sum(np.abs(arr) ** 2)))


def frobenius_inner(x: ArrayLike, y: ArrayLike) -> float:
    """Real Frobenius pairing <X, Y> = Tr(X^T Y)."""
    return float(np.sum(np.asarray(x) * np.asarray(y)))


# Degree-13 diagonal Pade coefficients and the matching 1-norm bound
# (Higham 2005, "The scaling and squaring method for the matrix exponential revisited").
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def expm(a: ArrayLike) -> NDArray:
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant.

    The scaling exponent ``s`` is the smallest non-negative integer with
    ``||A||_1 / 2**s <= theta_13``.
    """
    a = as_square(a, "A")
    if not np.iscomplexobj(a):
        a = a.astype(np.float64)
    n = a.shape[0]
    norm1 = float(np.max(np.sum(np.abs(a), axis=0)))
    if norm1 == 0.0:
        return np.eye(n, dtype=a.dtype)
    s = 0
    if norm1 > _THETA13:
        s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
    a = a / (2.0**s)

    b = _PADE13
    ident = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    try:
        f = np.linalg.solve(v - u, v + u)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Pade denominator is singular: {exc}") from exc
    for _ in range(s):
        f = f @ f
    return f


def _sort_desc(values: NDArray[np.complex128]) -> NDArray[np.intp]:
    # descending real part, ties by descending imaginary part
    return np.lexsort((-values.imag, -values.real))


def eig_general(a: ArrayLike) -> Spectrum:
    """Full complex spectrum of a real square matrix.

    Balancing, Householder reduction to Hessenberg form, then Francis
    double-shift QR capped at ``100 n`` iterations. Conjugate pairs share
    an identical real part, so the sort keeps ``+i`` before ``-i``.
    """
    a = as_square(a, "A", dtype=np.float64)
    n = a.shape[0]
    peak = float(np.max(np.abs(a)))
    if peak == 0.0:
        return Spectrum(np.zeros(n, dtype=np.complex128))
    # power-of-two scaling keeps the iteration clear of under/overflow
    scale = 2.0 ** math.frexp(peak)[1]
    k = _backend.kernels()
    work = np.ascontiguousarray(a / scale)
    k.balance(work)
    k.hessenberg(work)
    wr, wi, _ = k.hqr(work, TOL.qr_iterations_per_dim * n)
    values = (wr + 1j * wi) * scale
    return Spectrum(values[_sort_desc(values)])


def spectral_abscissa(a: ArrayLike) -> float:
    """max Re(lambda) over the spectrum of ``a``."""
    return float(np.max(eig_general(a).eigenvalues.real))


def is_hurwitz(a: ArrayLike) -> bool:
    return spectral_abscissa(a) < -TOL.hurwitz_margin


def _check_hermitian(h: NDArray, name: str) -> None:
    scale = frobenius_norm(h)
    if frobenius_norm(h - h.conj().T) > TOL.hermitian_rel * scale:
        raise ValidationError(f"{name} is not Hermitian within tolerance")


def eig_hermitian(h: ArrayLike) -> Spectrum:
    """Real eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix."""
    h = as_square(h, "H", dtype=np.complex128)
    _check_hermitian(h, "H")
    h = 0.5 * (h + h.conj().T)
    w, v, _ = _backend.kernels().jacobi_hermitian(np.ascontiguousarray(h), TOL.jacobi_max_sweeps)
    order = np.argsort(-w, kind="stable")
    v = v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    return Spectrum(w[order].astype(np.complex128), v)


def _spd_eig(r: ArrayLike, name: str) -> tuple[NDArray, NDArray]:
    r = as_square(r, name, dtype=np.float64)
    scale = max(1.0, frobenius_norm(r))
    if frobenius_norm(r - r.T) > TOL.symmetric_rel * scale:
        raise ValidationError(f"{name} is not symmetric")
    spec = eig_hermitian(0.5 * (r + r.T))
    w = spec.eigenvalues.real
    if w[-1] <= 0.0:
        raise DefinitenessError(
            f"{name} is not positive definite: eigenvalue {w[-1]:.6g}", eigenvalue=float(w[-1])
        )
    return w, spec.eigenvectors


def sqrtm_spd(r: ArrayLike) -> NDArray[np.float64]:
    """Symmetric square root of a symmetric positive definite matrix."""
    w, v = _spd_eig(r, "R")
    s = (v * np.sqrt(w)) @ v.conj().T
    s = s.real
    return 0.5 * (s + s.T)


def inv_sqrtm_spd(r: ArrayLike) -> NDArray[np.float64]:
    w, v = _spd_eig(r, "R")
    s = ((v / np.sqrt(w)) @ v.conj().T).real
    return 0.5 * (s + s.T)


def lyapunov_residual(a: NDArray, x: NDArray, q: NDArray) -> float:
    return frobenius_norm(a @ x + x @ a.T + q)


def solve_lyapunov(a: ArrayLike, q: ArrayLike) -> NDArray[np.float64]:
    """Solve ``A X + X A^T + Q = 0`` for Hurwitz ``A`` by Kronecker vectorization.

    The ``n^2 x n^2`` system ``(I (x) A + A (x) I) vec X = -vec Q`` is solved
    densely, which is fine for the n <= 32 this package targets.
    """
    a = as_square(a, "A", dtype=np.float64)
    q = as_square(q, "Q", dtype=np.float64)
    if a.shape != q.shape:
        raise DimensionError(f"A {a.shape} and Q {q.shape} differ in shape")
    if frobenius_norm(q - q.T) > TOL.symmetric_rel * max(1.0, frobenius_norm(q)):
        raise ValidationError("Q is not symmetric")
    abscissa = spectral_abscissa(a)
    if not abscissa < -TOL.hurwitz_margin:
        raise StabilityError(f"A is not Hurwitz (max Re lambda = {abscissa:.6g})")
    n = a.shape[0]
    ident = np.eye(n)
    kron = np.kron(ident, a) + np.kron(a, ident)
    try:
        vec = np.linalg.solve(kron, -q.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular Kronecker system: {exc}") from exc
    x = vec.reshape((n, n), order="F")
    return 0.5 * (x + x.T)


def psd_margin(x: ArrayLike) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(eig_hermitian(x).eigenvalues.real[-1])


def psd_check(x: ArrayLike) -> bool:
    """True iff the smallest eigenvalue is >= -1e-8 (1 + ||X||_F)."""
    return psd_margin(x) >= -TOL.psd_rel * (1.0 + frobenius_norm(x))
