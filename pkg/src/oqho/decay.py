"""Two-point commutator decay, decoherence time and its Lyapunov upper bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import linalg
from .config import TOL
from .errors import (
    DegeneracyError,
    HorizonError,
    ParameterError,
    StabilityError,
    ValidationError,
)
from .linalg import _backend
from .model import OscillatorModel, build_state_space, spectral_structure

NormKind = Literal["frobenius", "weighted"]


def _weight(model: OscillatorModel, norm_kind: str) -> NDArray[np.float64] | None:
    if norm_kind == "frobenius":
        return None
    if norm_kind in ("weighted", "R-weighted", "r_weighted"):
        return linalg.sqrtm_spd(model.R)
    raise ParameterError(f"unknown norm kind {norm_kind!r}; use 'frobenius' or 'weighted'")


def _norm(x: NDArray, weight: NDArray | None) -> float:
    return linalg.frobenius_norm(x if weight is None else weight @ x)


def two_point_kernel(a: ArrayLike, theta: ArrayLike, tau: float) -> NDArray[np.float64]:
    """``exp(tau A) Theta`` for tau >= 0 and ``Theta exp(-tau A^T)`` for tau < 0."""
    a = np.asarray(a, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if tau == 0:
        return theta.copy()
    if tau > 0:
        return linalg.expm(tau * a) @ theta
    return theta @ linalg.expm(-tau * a.T)


@dataclass(frozen=True)
class KernelSample:
    tau: float
    value: NDArray[np.float64]
    norm: float


@dataclass(frozen=True)
class CommutatorKernel:
    model: OscillatorModel
    samples: tuple[KernelSample, ...]
    norm_kind: str = "frobenius"

    @property
    def taus(self) -> NDArray[np.float64]:
        return np.array([s.tau for s in self.samples])

    @property
    def norms(self) -> NDArray[np.float64]:
        return np.array([s.norm for s in self.samples])


def commutator_kernel(
    model: OscillatorModel, taus: Iterable[float], norm_kind: NormKind = "frobenius"
) -> CommutatorKernel:
    ss = build_state_space(model)
    weight = _weight(model, norm_kind)
    samples = []
    for tau in taus:
        value = two_point_kernel(ss.A, model.Theta, float(tau))
        samples.append(KernelSample(float(tau), value, _norm(value, weight)))
    return CommutatorKernel(model, tuple(samples), norm_kind)


@dataclass(frozen=True)
class DecoherenceTimeResult:
    tau_star: float
    norm_kind: str
    bracket: tuple[float, float]
    ratio: float
    step: float
    steps: int


def decoherence_time_from_matrices(
    a: ArrayLike,
    theta: ArrayLike,
    *,
    weight: ArrayLike | None = None,
    period: float | None = None,
    norm_kind: str = "frobenius",
    max_steps: int | None = None,
) -> DecoherenceTimeResult:
    """First time the (weighted) norm of ``exp(tau A) Theta`` drops to ``1/e`` of its start.

    Marches forward with step ``period / 1000`` (or ``0.01 / |max Re lambda|``
    when no period is known), then bisects the first bracketing cell to a
    relative width of 1e-10. No monotonicity is assumed.

    The march is allowed ``max(10_000, 50 / (|max Re lambda| * step))``
    steps unless ``max_steps`` is given.
    """
    a = linalg.as_square(a, "A", dtype=np.float64)
    theta = linalg.as_square(theta, "Theta", dtype=np.float64)
    w = None if weight is None else np.asarray(weight, dtype=np.float64)
    abscissa = linalg.spectral_abscissa(a)
    if not abscissa < -TOL.hurwitz_margin:
        raise StabilityError(f"A is not Hurwitz (max Re lambda = {abscissa:.6g})")
    if period is not None and period > 0:
        step = period / TOL.march_steps_per_period
    else:
        step = 0.01 / abs(abscissa)
    if max_steps is None:
        max_steps = max(TOL.march_min_steps, int(math.ceil(TOL.march_decay_horizon / (abs(abscissa) * step))))

    start = _norm(theta, w)
    if start == 0.0:
        raise ValidationError("Theta has zero norm; the decay ratio is undefined")
    threshold = start / math.e
    eye = np.eye(theta.shape[0])
    k = _backend.kernels().march_threshold(
        np.ascontiguousarray(linalg.expm(step * a)),
        np.ascontiguousarray(theta),
        np.ascontiguousarray(eye if w is None else w),
        threshold,
        int(max_steps),
    )
    if k < 0:
        raise HorizonError(f"no threshold crossing within {max_steps} steps of size {step:.6g}")

    def excess(tau: float) -> float:
        return _norm(linalg.expm(tau * a) @ theta, w) - threshold

    lo, hi = (k - 1) * step, k * step
    while hi - lo > TOL.bisection_rel * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    ratio = (excess(hi) + threshold) / start
    return DecoherenceTimeResult(hi, norm_kind, ((k - 1) * step, k * step), ratio, step, k)


def _period_or_none(model: OscillatorModel) -> float | None:
    try:
        return spectral_structure(model).period
    except (ValidationError, DegeneracyError):
        return None


def decoherence_time(
    model: OscillatorModel, norm_kind: NormKind = "frobenius", max_steps: int | None = None
) -> DecoherenceTimeResult:
    ss = build_state_space(model)
    weight = _weight(model, norm_kind)
    return decoherence_time_from_matrices(
        ss.A,
        model.Theta,
        weight=weight,
        period=_period_or_none(model),
        norm_kind=norm_kind,
        max_steps=max_steps,
    )


@dataclass(frozen=True)
class LyapunovBound:
    lam: float
    N: NDArray[np.float64]
    Gamma: NDArray[np.float64]
    bound: float
    mu2_max_eigenvalue: float
    N_kind: str = "custom"


def lyapunov_bound_from_matrices(
    a: ArrayLike,
    theta: ArrayLike,
    lam: float,
    N: ArrayLike | None = None,
    N_kind: str = "custom",
) -> LyapunovBound:
    """Upper bound on the decoherence time from ``(A + lam I) G + G (A + lam I)^T + N = 0``.

    ``N`` defaults to ``I/n``. The returned ``N`` is normalised to unit
    trace; the bound itself is computed from ``N`` as given and does not
    depend on its scale.
    """
    a = linalg.as_square(a, "A", dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    n = a.shape[0]
    rate = -linalg.spectral_abscissa(a)
    if not (0.0 < lam < rate):
        raise ParameterError(f"lambda = {lam:.6g} must lie in (0, {rate:.6g})")
    if N is None:
        N = np.eye(n) / n
        N_kind = "identity"
    N = np.asarray(N, dtype=np.float64)
    if N.shape != (n, n):
        raise ParameterError(f"N must be {n}x{n}")
    trace = float(np.trace(N))
    if trace <= 0 or linalg.psd_margin(N) <= TOL.bound_mu2_margin * trace:
        raise ParameterError("N must be positive definite")

    shifted = a + lam * np.eye(n)
    gamma = linalg.solve_lyapunov(shifted, N)
    mu2 = linalg.eig_hermitian(a @ gamma + gamma @ a.T + 2.0 * lam * gamma).eigenvalues.real[0]
    gamma_norm = float(linalg.eig_hermitian(gamma).eigenvalues.real[0])
    g_half = linalg.sqrtm_spd(gamma)
    scaled = np.linalg.solve(g_half, theta)
    ratio = math.sqrt(gamma_norm) * linalg.frobenius_norm(scaled) / linalg.frobenius_norm(theta)
    bound = (1.0 + math.log(ratio)) / lam
    return LyapunovBound(lam, N / trace, gamma, bound, float(mu2), N_kind)


def lyapunov_bound(
    model: OscillatorModel, lam: float, N: ArrayLike | None = None
) -> LyapunovBound:
    ss = build_state_space(model)
    return lyapunov_bound_from_matrices(ss.A, model.Theta, lam, N)


def bound_candidates(a: NDArray, theta: NDArray, bbt: NDArray | None) -> list[tuple[str, NDArray]]:
    """Unit-trace N family: identity, steady-state covariance, Theta Theta^T."""
    n = a.shape[0]
    out = [("identity", np.eye(n) / n)]
    for name, mat in (
        ("steady_covariance", None if bbt is None else linalg.solve_lyapunov(a, bbt)),
        ("theta_gram", theta @ theta.T),
    ):
        if mat is None:
            continue
        tr = float(np.trace(mat))
        if tr <= 0:
            continue
        mat = mat / tr
        if linalg.psd_margin(mat) > TOL.bound_mu2_margin:
            out.append((name, mat))
    return out


def lambda_grid(rate: float, size: int) -> NDArray[np.float64]:
    if size < 1:
        raise ParameterError("lambda grid size must be positive")
    hi = TOL.lambda_upper_fraction * rate
    if size == 1:
        return np.array([hi])
    return np.geomspace(TOL.lambda_lower_fraction * rate, hi, size)


def optimize_bound_from_matrices(
    a: ArrayLike, theta: ArrayLike, bbt: ArrayLike | None = None, lambda_grid_size: int = 40
) -> LyapunovBound:
    """Minimise the bound over a geometric lambda grid times the N family.

    Ties go to the smaller lambda, then to the earlier candidate.
    """
    a = linalg.as_square(a, "A", dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    rate = -linalg.spectral_abscissa(a)
    if not rate > TOL.hurwitz_margin:
        raise StabilityError(f"A is not Hurwitz (max Re lambda = {-rate:.6g})")
    cands = bound_candidates(a, theta, None if bbt is None else np.asarray(bbt, dtype=np.float64))
    best: LyapunovBound | None = None
    for lam in lambda_grid(rate, lambda_grid_size):
        for name, N in cands:
            result = lyapunov_bound_from_matrices(a, theta, float(lam), N, N_kind=name)
            if best is None or result.bound < best.bound:
                best = result
    assert best is not None
    return best


def optimize_bound(model: OscillatorModel, lambda_grid_size: int = 40) -> LyapunovBound:
    ss = build_state_space(model)
    return optimize_bound_from_matrices(ss.A, model.Theta, ss.BBt, lambda_grid_size)
