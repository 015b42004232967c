"""Self-contained dense linear algebra used throughout :mod:`oqho`.

The scalar hot loops (QR iteration, Jacobi rotations, the decay-threshold
march and the Lyapunov ODE stepper) have a compiled and a pure-Python
implementation; see :mod:`oqho.linalg._backend`.
"""

from ._backend import available as available_backends
from ._backend import current as current_backend
from ._backend import set_backend
from .core import (
    Spectrum,
    as_square,
    eig_general,
    eig_hermitian,
    expm,
    frobenius_inner,
    frobenius_norm,
    inv_sqrtm_spd,
    is_hurwitz,
    lyapunov_residual,
    psd_check,
    psd_margin,
    solve_lyapunov,
    spectral_abscissa,
    sqrtm_spd,
)

__all__ = [
    "Spectrum",
    "as_square",
    "available_backends",
    "current_backend",
    "eig_general",
    "eig_hermitian",
    "expm",
    "frobenius_inner",
    "frobenius_norm",
    "inv_sqrtm_spd",
    "is_hurwitz",
    "lyapunov_residual",
    "psd_check",
    "psd_margin",
    "set_backend",
    "solve_lyapunov",
    "spectral_abscissa",
    "sqrtm_spd",
]
