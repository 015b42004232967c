"""Invariant and transient second moments, energy balance and the weak-coupling limit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import linalg
from .asymptotics import compute_mus, stability_verdict
from .config import TOL
from .errors import StabilityError, ValidationError, WeakCouplingUnstable
from .linalg import _backend
from .model import OscillatorModel, build_state_space, spectral_structure


@dataclass(frozen=True)
class CovarianceResult:
    P: NDArray[np.float64]
    residual: float
    psd_quantum: bool
    quantum_min_eigenvalue: float


def quantum_psd(P: ArrayLike, Theta: ArrayLike) -> tuple[bool, float]:
    """Check ``P + i Theta >= 0``; returns the verdict and the smallest eigenvalue."""
    h = np.asarray(P, dtype=np.complex128) + 1j * np.asarray(Theta)
    lo = linalg.psd_margin(h)
    return bool(lo >= -TOL.psd_rel * (1.0 + linalg.frobenius_norm(h))), lo


def steady_covariance_from_matrices(a: ArrayLike, bbt: ArrayLike, theta: ArrayLike) -> CovarianceResult:
    a = np.asarray(a, dtype=np.float64)
    bbt = np.asarray(bbt, dtype=np.float64)
    P = linalg.solve_lyapunov(a, bbt)
    residual = linalg.lyapunov_residual(a, P, bbt)
    if residual > TOL.lyapunov_residual * max(1.0, linalg.frobenius_norm(bbt)):
        raise StabilityError(f"ALE residual {residual:.3g} exceeds tolerance; A is too close to marginal")
    ok, lo = quantum_psd(P, theta)
    return CovarianceResult(P, residual, ok, lo)


def steady_covariance(model: OscillatorModel) -> CovarianceResult:
    """Invariant covariance from ``A P + P A^T + B B^T = 0``."""
    ss = build_state_space(model)
    return steady_covariance_from_matrices(ss.A, ss.BBt, model.Theta)


def lyapunov_ode(
    a: ArrayLike, bbt: ArrayLike, P0: ArrayLike, t_end: float, dt: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """RK4 for ``dP/dt = A P + P A^T + BB^T`` sampled at multiples of ``dt``.

    The last step is shortened so the trajectory ends exactly at ``t_end``.
    """
    a = linalg.as_square(a, "A", dtype=np.float64)
    bbt = np.asarray(bbt, dtype=np.float64)
    P0 = np.asarray(P0, dtype=np.float64)
    if P0.shape != a.shape:
        raise ValidationError(f"P0 must be {a.shape[0]}x{a.shape[0]}")
    if linalg.frobenius_norm(P0 - P0.T) > TOL.symmetric_rel * max(1.0, linalg.frobenius_norm(P0)):
        raise ValidationError("P0 is not symmetric")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if t_end < 0:
        raise ValidationError("t_end must be non-negative")
    full = int(np.floor(t_end / dt * (1 + 1e-12)))
    last = t_end - full * dt
    if last <= 1e-12 * dt:
        last = 0.0
    n_steps = full + (1 if last > 0 else 0)
    traj = _backend.kernels().rk4_lyapunov(
        np.ascontiguousarray(a),
        np.ascontiguousarray(bbt),
        np.ascontiguousarray(0.5 * (P0 + P0.T)),
        float(dt),
        n_steps,
        float(last if last > 0 else dt),
    )
    times = np.arange(n_steps + 1, dtype=np.float64) * dt
    if n_steps:
        times[-1] = t_end
    return times, np.asarray(traj)


@dataclass(frozen=True)
class Trajectory:
    times: NDArray[np.float64]
    P: NDArray[np.float64]

    @property
    def final(self) -> NDArray[np.float64]:
        return self.P[-1]


def default_dt(model: OscillatorModel) -> float:
    return 0.01 / linalg.frobenius_norm(build_state_space(model).A)


def transient_covariance(
    model: OscillatorModel, P0: ArrayLike, t_end: float, dt: float | None = None
) -> Trajectory:
    ss = build_state_space(model)
    if dt is None:
        dt = 0.01 / linalg.frobenius_norm(ss.A)
    times, traj = lyapunov_ode(ss.A, ss.BBt, P0, t_end, dt)
    return Trajectory(times, traj)


@dataclass(frozen=True)
class ModeContribution:
    k: int
    omega_mu: float
    drive: float
    real_part: NDArray[np.float64]


@dataclass(frozen=True)
class WeakCouplingLimit:
    Pi: NDArray[np.float64]
    contributions: tuple[ModeContribution, ...] = field(default_factory=tuple)


def weak_coupling_limit(model: OscillatorModel) -> WeakCouplingLimit:
    """``eps -> 0`` limit of the invariant covariance, mode by mode."""
    spec = spectral_structure(model)
    shape = model.coupling_shape
    mus = compute_mus(spec, shape, J=model.J)
    verdict = stability_verdict(mus)
    if not verdict.stable:
        raise WeakCouplingUnstable(
            f"weak-coupling limit needs mu_k > 0 for positive frequencies; min is {verdict.margin:.6g}"
        )
    bshape = 2.0 * model.Theta @ shape.T
    drive_op = bshape.T @ spec.R_sqrt
    half = len(mus) // 2
    acc = np.zeros((model.n, model.n))
    contribs = []
    for k in range(half):
        v = spec.V[:, k]
        om = float(spec.omegas[k] * mus[k])
        drive = float(np.sum(np.abs(drive_op @ v) ** 2))
        re = np.outer(v, v.conj()).real
        acc += drive / om * re
        contribs.append(ModeContribution(k + 1, om, drive, re))
    Pi = spec.R_inv_sqrt @ acc @ spec.R_inv_sqrt
    return WeakCouplingLimit(0.5 * (Pi + Pi.T), tuple(contribs))


@dataclass(frozen=True)
class EnergyRate:
    value: float
    drift_term: float
    diffusion_term: float


def energy_rate(model: OscillatorModel, P: ArrayLike) -> EnergyRate:
    """Mean rate of change of the energy at covariance ``P``."""
    P = np.asarray(P, dtype=np.float64)
    ss = build_state_space(model)
    R = model.R
    drift = linalg.frobenius_inner(ss.Atilde.T @ R + R @ ss.Atilde, P)
    diffusion = linalg.frobenius_inner(R, ss.BBt)
    return EnergyRate(0.5 * (drift + diffusion), drift, diffusion)


def mean_energy(model: OscillatorModel, P: ArrayLike) -> float:
    return 0.5 * linalg.frobenius_inner(model.R, np.asarray(P))
