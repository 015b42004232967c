"""Weak-coupling spectral asymptotics of ``A_eps = A0 + eps^2 Atilde_1``.

For distinct eigenfrequencies the eigenvalues behave as
``omega_k (i - eps^2 mu_k) + o(eps^2)``; positivity of the first half of
the ``mu_k`` decides stability for small ``eps``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linear_sum_assignment

from . import linalg
from .config import TOL
from .errors import NumericError, WeakCouplingUnstable
from .model import OscillatorModel, SpectralStructure, build_state_space, spectral_structure


@dataclass(frozen=True)
class CouplingDecomposition:
    epsilon: float
    shape: NDArray[np.float64]
    Atilde1: NDArray[np.float64]
    Bshape: NDArray[np.float64]
    A0: NDArray[np.float64]

    def A(self, epsilon: float | None = None) -> NDArray[np.float64]:
        eps = self.epsilon if epsilon is None else epsilon
        return self.A0 + eps**2 * self.Atilde1

    def B(self, epsilon: float | None = None) -> NDArray[np.float64]:
        eps = self.epsilon if epsilon is None else epsilon
        return eps * self.Bshape


def decompose(model: OscillatorModel) -> CouplingDecomposition:
    ss = build_state_space(model.uncoupled())
    th, shape, j = model.Theta, model.coupling_shape, model.J
    return CouplingDecomposition(
        epsilon=model.coupling_strength,
        shape=np.array(shape),
        Atilde1=2.0 * th @ shape.T @ j @ shape,
        Bshape=2.0 * th @ shape.T,
        A0=ss.A0,
    )


def hermitian_diagonal(v: NDArray[np.complex128], k: NDArray) -> NDArray[np.float64]:
    """Real diagonal of ``V^* K V`` for Hermitian ``K``; checks the imaginary residue."""
    quad = np.einsum("ik,ij,jk->k", v.conj(), k, v)
    scale = max(1.0, float(np.max(np.abs(quad.real), initial=0.0)))
    if float(np.max(np.abs(quad.imag), initial=0.0)) > TOL.quadratic_form_imag * scale:
        raise NumericError("quadratic form has a non-negligible imaginary part")
    return quad.real.copy()


def compute_mus(
    spectral: SpectralStructure, shape: ArrayLike, R: ArrayLike | None = None, J: ArrayLike | None = None
) -> NDArray[np.float64]:
    """``mu_k = -i v_k^* R^{-1/2} shape^T J shape R^{-1/2} v_k``.

    ``R`` is only used to cross-check ``spectral``; the factor
    ``R^{-1/2}`` stored there is used directly.
    """
    shape = np.asarray(shape, dtype=np.float64)
    if J is None:
        J = np.kron(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.eye(shape.shape[0] // 2))
    if R is not None:
        rs = spectral.R_sqrt
        if linalg.frobenius_norm(rs @ rs - np.asarray(R)) > 1e-8 * max(1.0, linalg.frobenius_norm(R)):
            raise ValueError("spectral structure was computed for a different R")
    ri = spectral.R_inv_sqrt
    k = -1j * (ri @ shape.T @ np.asarray(J) @ shape @ ri)
    return hermitian_diagonal(spectral.V, k)


def eigen_asymptote(mus: ArrayLike, omegas: ArrayLike, epsilon: float) -> NDArray[np.complex128]:
    """``omega_k (i - eps^2 mu_k)``."""
    mus = np.asarray(mus, dtype=np.float64)
    omegas = np.asarray(omegas, dtype=np.float64)
    return omegas * (1j - epsilon**2 * mus)


@dataclass(frozen=True)
class Verdict:
    stable: bool
    margin: float

    @property
    def inconclusive(self) -> bool:
        """Theorem gives no verdict when the smallest mu is numerically zero."""
        return abs(self.margin) <= TOL.mu_strict

    def __bool__(self) -> bool:
        return self.stable


def stability_verdict(mus: ArrayLike) -> Verdict:
    """Weak-coupling stability iff ``mu_k > 1e-10`` for the positive-frequency half."""
    mus = np.asarray(mus, dtype=np.float64)
    half = mus[: len(mus) // 2]
    margin = float(np.min(half))
    return Verdict(bool(margin > TOL.mu_strict), margin)


@dataclass(frozen=True)
class Thresholds:
    lead_coefficient: float
    eps_hat: float
    eps_tilde: float

    def tau_hat(self, epsilon: float) -> float:
        """Decay-time estimate ``eps^-2 / lead``."""
        return math.inf if epsilon == 0 else 1.0 / (epsilon**2 * self.lead_coefficient)


def lead_coefficient(mus: ArrayLike, omegas: ArrayLike) -> float:
    mus = np.asarray(mus)
    omegas = np.asarray(omegas)
    h = len(mus) // 2
    return float(np.min(omegas[:h] * mus[:h]))


def thresholds(mus: ArrayLike, omegas: ArrayLike) -> Thresholds:
    """Leading Lyapunov coefficient and the coupling-strength thresholds.

    Raises
    ------
    WeakCouplingUnstable
        If some ``mu_k`` in the positive-frequency half is not strictly positive.
    """
    mus = np.asarray(mus, dtype=np.float64)
    omegas = np.asarray(omegas, dtype=np.float64)
    verdict = stability_verdict(mus)
    if not verdict.stable:
        raise WeakCouplingUnstable(
            f"weak-coupling stability fails: min mu_k = {verdict.margin:.6g} over positive frequencies"
        )
    h = len(mus) // 2
    lead = lead_coefficient(mus, omegas)
    eps_hat = math.sqrt(float(np.min(omegas[:h])) / (2.0 * math.pi * lead))
    eps_tilde = 1.0 / math.sqrt(2.0 * math.pi * float(np.max(mus[:h])))
    return Thresholds(lead, eps_hat, eps_tilde)


@dataclass(frozen=True)
class AsymptoticsReport:
    omegas: NDArray[np.float64]
    mus: NDArray[np.float64]
    verdict: Verdict
    thresholds: Thresholds | None
    epsilon: float

    @property
    def omega_mu_products(self) -> NDArray[np.float64]:
        h = len(self.mus) // 2
        return self.omegas[:h] * self.mus[:h]

    @property
    def stable_weak_coupling(self) -> bool:
        return self.verdict.stable

    @property
    def lead_coefficient(self) -> float:
        return lead_coefficient(self.mus, self.omegas)

    def tau_hat(self, epsilon: float | None = None) -> float:
        if self.thresholds is None:
            raise WeakCouplingUnstable("tau_hat is undefined without weak-coupling stability")
        return self.thresholds.tau_hat(self.epsilon if epsilon is None else epsilon)

    def eps_ratio(self) -> float | None:
        """``eps / eps_hat``: how deep inside the weak-coupling regime the model sits."""
        if self.thresholds is None:
            return None
        return self.epsilon / self.thresholds.eps_hat


def analyze(model: OscillatorModel) -> AsymptoticsReport:
    spec = spectral_structure(model)
    mus = compute_mus(spec, model.coupling_shape, J=model.J)
    verdict = stability_verdict(mus)
    thr = thresholds(mus, spec.omegas) if verdict.stable else None
    return AsymptoticsReport(spec.omegas, mus, verdict, thr, model.coupling_strength)


def pair_eigenvalues(exact: ArrayLike, approx: ArrayLike) -> NDArray[np.complex128]:
    """Reorder ``exact`` so that ``exact[k]`` pairs with ``approx[k]``.

    Global assignment minimising the total distance.
    """
    exact = np.asarray(exact, dtype=np.complex128)
    approx = np.asarray(approx, dtype=np.complex128)
    cost = np.abs(approx[:, None] - exact[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(exact)
    out[rows] = exact[cols]
    return out


def asymptote_error(model: OscillatorModel, epsilon: float, mus=None, omegas=None) -> float:
    """``max_k |lambda_k(eps) - lambda_hat_k(eps)|`` after optimal pairing."""
    if mus is None or omegas is None:
        spec = spectral_structure(model)
        omegas = spec.omegas
        mus = compute_mus(spec, model.coupling_shape, J=model.J)
    dec = decompose(model)
    exact = linalg.eig_general(dec.A(epsilon)).eigenvalues
    approx = eigen_asymptote(mus, omegas, epsilon)
    return float(np.max(np.abs(pair_eigenvalues(exact, approx) - approx)))


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    exact_lyapunov: float
    asymptotic_approx: float


def lyapunov_exponent_sweep(model: OscillatorModel, eps_list: Iterable[float]) -> list[SweepRow]:
    """Exact ``max Re lambda(A_eps)`` next to ``-eps^2 * lead`` for each eps, ascending."""
    spec = spectral_structure(model)
    mus = compute_mus(spec, model.coupling_shape, J=model.J)
    lead = lead_coefficient(mus, spec.omegas)
    dec = decompose(model)
    rows = []
    for eps in sorted(float(e) for e in eps_list):
        if eps == 0.0:
            exact = 0.0
        else:
            exact = float(np.max(linalg.eig_general(dec.A(eps)).eigenvalues.real))
        rows.append(SweepRow(eps, exact, -(eps**2) * lead))
    return rows


SWEEP_HEADER = ("epsilon", "exact_lyapunov", "asymptotic_approx")


def format_number(x: float) -> str:
    # fold -0.0 into 0
    return f"{x + 0.0:.12g}"


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow([format_number(r.epsilon), format_number(r.exact_lyapunov), format_number(r.asymptotic_approx)])
    return buf.getvalue()
