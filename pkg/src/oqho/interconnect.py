"""Coherent feedback interconnection of two oscillators.

Two subsystems exchange energy directly through ``R12`` and indirectly
through selected output fields. The loop is closed into a single augmented
model whose CCR and Ito matrices are block diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import block_diag

from . import linalg
from .asymptotics import Thresholds, Verdict, hermitian_diagonal, stability_verdict, thresholds
from .config import TOL
from .covariance import CovarianceResult, steady_covariance_from_matrices
from .decay import DecoherenceTimeResult, LyapunovBound, decoherence_time_from_matrices, optimize_bound_from_matrices
from .errors import ConsistencyError, DimensionError, ValidationError
from .model import OscillatorModel, SpectralStructure, canonical_j, canonical_theta, eigenstructure


def selection_matrix(indices: Sequence[int], m: int) -> NDArray[np.float64]:
    """0/1 matrix picking the given 1-based rows of ``I_m``.

    The selected set must be closed under ``i <-> i + m/2`` so that whole
    conjugate pairs of field channels are routed.
    """
    idx = [int(i) for i in indices]
    if any(i < 1 or i > m for i in idx):
        raise ValidationError(f"selection indices must lie in 1..{m}")
    if len(set(idx)) != len(idx):
        raise ValidationError("selection indices must be distinct")
    half = m // 2
    chosen = set(idx)
    for i in idx:
        partner = i + half if i <= half else i - half
        if partner not in chosen:
            raise ValidationError(f"row {i} is selected without its conjugate row {partner}")
    d = np.zeros((len(idx), m))
    d[np.arange(len(idx)), np.array(idx, dtype=int) - 1] = 1.0
    return d


def _check_selection(d: NDArray, m: int) -> None:
    if d.ndim != 2 or d.shape[1] != m:
        raise DimensionError(f"D must have {m} columns")
    if not np.all((d == 0.0) | (d == 1.0)) or not np.all(d.sum(axis=1) == 1.0):
        raise ValidationError("D must consist of rows of a permutation matrix")
    selection_matrix(list(np.argmax(d, axis=1) + 1), m)


@dataclass(frozen=True)
class SubsystemSpec:
    """One constituent: CCR ``Theta``, energy ``R`` and the coupling shapes.

    ``Mshape`` couples to the external input field, ``Lshape`` to the
    other subsystem's output (``p`` of the partner rows) and ``D`` selects
    which output rows are passed on.
    """

    Theta: NDArray[np.float64]
    R: NDArray[np.float64]
    Mshape: NDArray[np.float64]
    Lshape: NDArray[np.float64]
    D: NDArray[np.float64]

    def __post_init__(self) -> None:
        for f in ("Theta", "R", "Mshape", "Lshape", "D"):
            arr = np.array(getattr(self, f), dtype=np.float64)
            if arr.ndim != 2 or not np.all(np.isfinite(arr)):
                raise ValidationError(f"{f} must be a finite 2-D array")
            arr.setflags(write=False)
            object.__setattr__(self, f, arr)
        n, m = self.n, self.m
        if n % 2 or m % 2 or n == 0 or m == 0:
            raise DimensionError(f"n = {n} and m = {m} must be even and positive")
        if self.Theta.shape != (n, n) or self.R.shape != (n, n):
            raise DimensionError("Theta and R must be n x n")
        if self.Lshape.shape[1] != n:
            raise DimensionError("Lshape must have n columns")
        if self.p % 2 or self.p > m:
            raise DimensionError(f"p = {self.p} must be even and at most m = {m}")
        _check_selection(self.D, m)
        if linalg.frobenius_norm(self.Theta + self.Theta.T) > TOL.antisymmetry_abs * max(1.0, linalg.frobenius_norm(self.Theta)):
            raise ValidationError("Theta is not antisymmetric")
        if linalg.frobenius_norm(self.R - self.R.T) > TOL.symmetric_rel * max(1.0, linalg.frobenius_norm(self.R)):
            raise ValidationError("R is not symmetric")

    @classmethod
    def build(
        cls,
        R: ArrayLike,
        Mshape: ArrayLike,
        Lshape: ArrayLike,
        selected: Sequence[int],
        Theta: ArrayLike | None = None,
    ) -> "SubsystemSpec":
        """Convenience constructor taking 1-based selected rows and an optional ``Theta``."""
        R = np.asarray(R, dtype=np.float64)
        Mshape = np.asarray(Mshape, dtype=np.float64)
        th = canonical_theta(R.shape[0]) if Theta is None else Theta
        return cls(th, R, Mshape, Lshape, selection_matrix(selected, Mshape.shape[0]))

    @property
    def n(self) -> int:
        return self.Theta.shape[0]

    @property
    def m(self) -> int:
        return self.Mshape.shape[0]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    @property
    def J(self) -> NDArray[np.float64]:
        return canonical_j(self.m)

    @property
    def Jtilde(self) -> NDArray[np.float64]:
        return self.D @ self.J @ self.D.T


@dataclass(frozen=True)
class SubsystemMatrices:
    A: NDArray[np.float64]
    B: NDArray[np.float64]
    C: NDArray[np.float64]
    D: NDArray[np.float64]
    E: NDArray[np.float64]
    F: NDArray[np.float64]
    Jtilde: NDArray[np.float64]


@dataclass(frozen=True)
class ClosedLoopNetwork:
    subsystems: tuple[SubsystemSpec, SubsystemSpec]
    R12: NDArray[np.float64]
    epsilon: float
    model: OscillatorModel
    R0: NDArray[np.float64]
    sR: NDArray[np.float64]
    sM: NDArray[np.float64]
    parts: tuple[SubsystemMatrices, SubsystemMatrices]
    A: NDArray[np.float64]
    B: NDArray[np.float64]

    @property
    def Theta(self) -> NDArray[np.float64]:
        return self.model.Theta

    @property
    def J(self) -> NDArray[np.float64]:
        return self.model.J

    @property
    def A0(self) -> NDArray[np.float64]:
        return 2.0 * self.Theta @ self.R0

    def A_eps(self, epsilon: float) -> NDArray[np.float64]:
        return self.A0 + 2.0 * epsilon**2 * self.Theta @ (self.sR + self.sM.T @ self.J @ self.sM)

    def with_epsilon(self, epsilon: float) -> "ClosedLoopNetwork":
        return assemble(self.subsystems[0], self.subsystems[1], self.R12, epsilon)


def _subsystem_matrices(
    spec: SubsystemSpec, other: SubsystemSpec, r_cross: NDArray, epsilon: float
) -> SubsystemMatrices:
    th, j = spec.Theta, spec.J
    m_k = epsilon * spec.Mshape
    l_k = epsilon * spec.Lshape
    jt_other = other.Jtilde
    return SubsystemMatrices(
        A=2.0 * th @ (spec.R + m_k.T @ j @ m_k + l_k.T @ jt_other @ l_k),
        B=2.0 * th @ m_k.T,
        C=2.0 * spec.D @ j @ m_k,
        D=np.array(spec.D),
        E=2.0 * th @ l_k.T,
        F=2.0 * th @ r_cross,
        Jtilde=spec.Jtilde,
    )


def shape_blocks(s1: SubsystemSpec, s2: SubsystemSpec) -> tuple[NDArray, NDArray]:
    """Closed-loop coupling shape and the symmetric energy correction per unit ``eps^2``."""
    m1, m2, l1, l2 = s1.Mshape, s2.Mshape, s1.Lshape, s2.Lshape
    d1, d2, j1, j2 = s1.D, s2.D, s1.J, s2.J
    sM = np.block([[m1, d1.T @ l2], [d2.T @ l1, m2]])
    upper = l1.T @ d2 @ j2 @ m2 - m1.T @ j1 @ d1.T @ l2
    lower = l2.T @ d1 @ j1 @ m1 - m2.T @ j2 @ d2.T @ l1
    sR = np.block([[np.zeros((s1.n, s1.n)), upper], [lower, np.zeros((s2.n, s2.n))]])
    return sM, sR


def assemble(s1: SubsystemSpec, s2: SubsystemSpec, R12: ArrayLike, epsilon: float) -> ClosedLoopNetwork:
    """Close the loop and cross-check the two assembly routes.

    Raises
    ------
    ConsistencyError
        If the feedback-network form of ``(A, B)`` disagrees with the one
        rebuilt from the closed-loop energy and coupling matrices.
    """
    if not (epsilon >= 0 and math.isfinite(epsilon)):
        raise ValidationError(f"coupling strength must be finite and non-negative, got {epsilon}")
    R12 = np.array(R12, dtype=np.float64)
    if R12.shape != (s1.n, s2.n):
        raise DimensionError(f"R12 must be {s1.n}x{s2.n}, got {R12.shape}")
    if s1.Lshape.shape[0] != s2.p or s2.Lshape.shape[0] != s1.p:
        raise DimensionError("Lshape of each subsystem needs as many rows as the partner selects")
    R12.setflags(write=False)
    p1 = _subsystem_matrices(s1, s2, R12, epsilon)
    p2 = _subsystem_matrices(s2, s1, R12.T, epsilon)
    A = np.block([[p1.A, p1.F + p1.E @ p2.C], [p2.F + p2.E @ p1.C, p2.A]])
    B = np.block([[p1.B, p1.E @ p2.D], [p2.E @ p1.D, p2.B]])

    theta = block_diag(s1.Theta, s2.Theta)
    J = block_diag(s1.J, s2.J)
    R0 = np.block([[s1.R, R12], [R12.T, s2.R]])
    sM, sR = shape_blocks(s1, s2)
    model = OscillatorModel.from_coupling(theta, R0 + epsilon**2 * sR, sM, epsilon, J=J)

    M = model.M
    A_ref = 2.0 * theta @ (model.R + M.T @ J @ M)
    B_ref = 2.0 * theta @ M.T
    scale = max(1.0, float(np.max(np.abs(A_ref))), float(np.max(np.abs(B_ref), initial=0.0)))
    gap = max(float(np.max(np.abs(A - A_ref))), float(np.max(np.abs(B - B_ref), initial=0.0)))
    if gap > TOL.consistency_abs * scale:
        raise ConsistencyError(f"closed-loop assembly mismatch {gap:.3g}")
    return ClosedLoopNetwork((s1, s2), R12, float(epsilon), model, R0, sR, sM, (p1, p2), A, B)


@dataclass(frozen=True)
class ClosedLoopAsymptotics:
    omegas: NDArray[np.float64]
    mus: NDArray[np.float64]
    sigmas: NDArray[np.float64]
    K: NDArray[np.complex128]
    spectral: SpectralStructure

    def lambda_asymptote(self, epsilon: float) -> NDArray[np.complex128]:
        e2 = epsilon**2
        return self.omegas * (1j * (1.0 + e2 * self.sigmas) - e2 * self.mus)

    @property
    def verdict(self) -> Verdict:
        return stability_verdict(self.mus)


def closed_loop_asymptotics(network: ClosedLoopNetwork) -> ClosedLoopAsymptotics:
    """Damping ``mu_k``, frequency shifts ``sigma_k`` and the matrix ``K`` with diagonal ``mu``."""
    spec = eigenstructure(network.Theta, network.R0)
    ri, v = spec.R_inv_sqrt, spec.V
    sM = network.sM
    K = -1j * (v.conj().T @ ri @ sM.T @ network.J @ sM @ ri @ v)
    if linalg.frobenius_norm(K - K.conj().T) > TOL.hermitian_rel * max(1.0, linalg.frobenius_norm(K)):
        raise ValidationError("K is not Hermitian")
    mus = hermitian_diagonal(v, -1j * (ri @ sM.T @ network.J @ sM @ ri))
    sigmas = hermitian_diagonal(v, ri @ network.sR @ ri)
    return ClosedLoopAsymptotics(spec.omegas, mus, sigmas, K, spec)


@dataclass(frozen=True)
class ClosedLoopReport:
    asymptotics: ClosedLoopAsymptotics
    thresholds: Thresholds | None
    decoherence: DecoherenceTimeResult
    bound: LyapunovBound
    covariance: CovarianceResult


def analyze_closed_loop(network: ClosedLoopNetwork, lambda_grid_size: int = 40) -> ClosedLoopReport:
    """Decay, bound, thresholds and invariant covariance of the augmented model."""
    asy = closed_loop_asymptotics(network)
    thr = thresholds(asy.mus, asy.omegas) if asy.verdict.stable else None
    bbt = network.B @ network.B.T
    dec = decoherence_time_from_matrices(network.A, network.Theta, period=asy.spectral.period)
    bound = optimize_bound_from_matrices(network.A, network.Theta, bbt, lambda_grid_size)
    cov = steady_covariance_from_matrices(network.A, bbt, network.Theta)
    return ClosedLoopReport(asy, thr, dec, bound, cov)
