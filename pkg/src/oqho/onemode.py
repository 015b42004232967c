"""Closed forms for a single oscillatory mode (n = 2).

Internally the model is rescaled so that ``Theta = bJ / 2``: the first
variable is divided by ``2 theta``. All public results are mapped back to
the caller's coordinates; the rescaled data stay available on
:class:`OneModeParams`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import linalg
from .config import TOL
from .errors import DimensionError, ParameterError, StabilityError, ValidationError
from .model import BJ, OscillatorModel

_SQRT_HALF = 1.0 / math.sqrt(2.0)
V1 = np.array([1.0, 1.0j]) * _SQRT_HALF
V2 = np.array([1.0, -1.0j]) * _SQRT_HALF


def rotation(phi: float) -> NDArray[np.float64]:
    """``exp(phi bJ)``."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class OneModeParams:
    """Scalar description of a one-mode model.

    ``gamma`` and ``omega`` are the rescaled values entering
    ``lambda = -eps^2 gamma +- i omega``; ``raw_gamma`` is the
    ``(1, 2)`` entry of ``shape^T J shape`` before rescaling.
    """

    theta: float
    gamma: float
    omega: float
    raw_gamma: float
    Theta: NDArray[np.float64]
    R: NDArray[np.float64]
    shape: NDArray[np.float64]
    J: NDArray[np.float64]
    transform: NDArray[np.float64]

    @property
    def mu(self) -> float:
        return self.gamma / self.omega

    @property
    def rescaled(self) -> bool:
        return self.theta != 0.5

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def canonical_R(self) -> NDArray[np.float64]:
        ti = np.linalg.inv(self.transform)
        return ti.T @ self.R @ ti

    @property
    def canonical_shape(self) -> NDArray[np.float64]:
        return self.shape @ np.linalg.inv(self.transform)

    def model(self, epsilon: float) -> OscillatorModel:
        """The model in the caller's coordinates at coupling strength ``epsilon``."""
        return OscillatorModel.from_coupling(self.Theta, self.R, self.shape, epsilon, J=self.J)


def extract_params(model: OscillatorModel) -> OneModeParams:
    if model.n != 2:
        raise DimensionError(f"one-mode analysis needs n = 2, got n = {model.n}")
    th = model.Theta
    if abs(th[0, 1] + th[1, 0]) > TOL.antisymmetry_abs * max(1.0, abs(th[0, 1])) or abs(th[0, 0]) + abs(th[1, 1]) > TOL.antisymmetry_abs:
        raise ValidationError("Theta is not antisymmetric")
    theta = float(th[0, 1])
    if theta == 0.0:
        raise ValidationError("singular CCR matrix: theta = 0")
    shape = model.coupling_shape
    g = shape.T @ model.J @ shape
    raw_gamma = float(g[0, 1])
    transform = np.diag([1.0 / (2.0 * theta), 1.0])
    ti = np.linalg.inv(transform)
    r_c = ti.T @ model.R @ ti
    det = float(np.linalg.det(r_c))
    if det <= 0 or r_c[0, 0] <= 0:
        # let the SPD routine name the offending eigenvalue
        linalg.sqrtm_spd(model.R)
    return OneModeParams(
        theta=theta,
        gamma=2.0 * theta * raw_gamma,
        omega=math.sqrt(det),
        raw_gamma=raw_gamma,
        Theta=np.array(model.Theta),
        R=np.array(model.R),
        shape=np.array(shape),
        J=np.array(model.J),
        transform=transform,
    )


def exact_spectrum(params: OneModeParams, epsilon: float) -> NDArray[np.complex128]:
    """``-eps^2 gamma + i omega`` and its conjugate."""
    re = -(epsilon**2) * params.gamma
    return np.array([complex(re, params.omega), complex(re, -params.omega)])


def _to_caller(params: OneModeParams, x: NDArray) -> NDArray:
    t = params.transform
    return np.linalg.inv(t) @ x @ t


def exact_propagator(params: OneModeParams, tau: float, epsilon: float) -> NDArray[np.float64]:
    """``exp(tau A_eps)`` from the rotation form in rescaled coordinates."""
    r_c = params.canonical_R
    rs = linalg.sqrtm_spd(r_c)
    ris = linalg.inv_sqrtm_spd(r_c)
    core = math.exp(-(epsilon**2) * params.gamma * tau) * (ris @ rotation(params.omega * tau) @ rs)
    return _to_caller(params, core)


@dataclass(frozen=True)
class WeightedDecay:
    value: float
    ratio: float
    tau_R: float
    eps_threshold: float


def weighted_decay(params: OneModeParams, epsilon: float, tau: float) -> WeightedDecay:
    """R-weighted norm of ``exp(tau A_eps) Theta``, which decays as a pure exponential.

    ``tau_R`` is the time where the ratio hits ``1/e``; ``eps_threshold``
    is the coupling strength below which that time exceeds one period.
    """
    if not params.gamma > 0:
        raise StabilityError(f"gamma = {params.gamma:.6g} must be positive for decay")
    ratio = math.exp(-(epsilon**2) * params.gamma * tau)
    start = linalg.frobenius_norm(linalg.sqrtm_spd(params.R) @ params.Theta)
    tau_r = math.inf if epsilon == 0 else 1.0 / (epsilon**2 * params.gamma)
    return WeightedDecay(ratio * start, ratio, tau_r, 1.0 / math.sqrt(2.0 * math.pi * params.mu))


@dataclass(frozen=True)
class OneModeCovariance:
    P: NDArray[np.float64]
    Pi: NDArray[np.float64]
    remainder: NDArray[np.float64]


def exact_covariance(params: OneModeParams, epsilon: float) -> OneModeCovariance:
    """Invariant covariance as the weak-coupling limit plus an explicit ``eps^2`` remainder."""
    if not params.gamma > 0:
        raise StabilityError(f"gamma = {params.gamma:.6g} must be positive for a steady state")
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    r_c = params.canonical_R
    rs = linalg.sqrtm_spd(r_c)
    ris = linalg.inv_sqrtm_spd(r_c)
    b = BJ @ params.canonical_shape.T
    drive = float(np.sum(np.abs(b.T @ rs @ V1) ** 2))
    pi_c = drive / (2.0 * params.gamma) * np.linalg.inv(r_c)
    cross = V1.conj() @ rs @ b @ b.T @ rs @ V2
    coef = cross / complex(epsilon**2 * params.gamma, -params.omega)
    rem_c = epsilon**2 * (ris @ (coef * np.outer(V1, V2.conj())).real @ ris)
    ti = np.linalg.inv(params.transform)

    def back(x: NDArray) -> NDArray:
        y = ti @ x @ ti.T
        return 0.5 * (y + y.T)

    pi, rem = back(pi_c), back(rem_c)
    return OneModeCovariance(pi + rem, pi, rem)


def weak_limit(params: OneModeParams) -> NDArray[np.float64]:
    return exact_covariance(params, 1.0).Pi
