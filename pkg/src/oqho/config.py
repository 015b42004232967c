"""Numerical thresholds shared by every module.

All tolerances live in one frozen record so tests can pin them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # linalg
    hurwitz_margin: float = 1e-12
    psd_rel: float = 1e-8
    hermitian_rel: float = 1e-10
    symmetric_rel: float = 1e-12
    lyapunov_residual: float = 1e-9
    qr_iterations_per_dim: int = 100
    jacobi_max_sweeps: int = 100
    # model
    antisymmetry_abs: float = 1e-12
    det_rel: float = 1e-12
    degeneracy_rel: float = 1e-8
    phase_magnitude: float = 1e-8
    # asymptotics / interconnect
    quadratic_form_imag: float = 1e-9
    mu_strict: float = 1e-10
    consistency_abs: float = 1e-10
    # decay
    march_steps_per_period: int = 1000
    march_min_steps: int = 10_000
    march_decay_horizon: float = 50.0
    bisection_rel: float = 1e-10
    bound_mu2_margin: float = 1e-10
    lambda_upper_fraction: float = 0.999
    lambda_lower_fraction: float = 1e-3


TOL = Tolerances()
