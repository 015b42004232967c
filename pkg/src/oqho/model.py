"""Oscillator definition, state-space matrices and uncoupled eigenstructure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import linalg
from .config import TOL
from .errors import DegeneracyError, DimensionError, ValidationError

BJ = np.array([[0.0, 1.0], [-1.0, 0.0]])


def canonical_theta(n: int) -> NDArray[np.float64]:
    """CCR matrix ``0.5 * bJ (x) I_{n/2}`` for positions-then-momenta ordering."""
    if n <= 0 or n % 2:
        raise DimensionError(f"n must be even and positive, got {n}")
    return 0.5 * np.kron(BJ, np.eye(n // 2))


def canonical_j(m: int) -> NDArray[np.float64]:
    if m <= 0 or m % 2:
        raise DimensionError(f"m must be even and positive, got {m}")
    return np.kron(BJ, np.eye(m // 2))


@dataclass(frozen=True)
class ItoStructure:
    """Field commutation matrix ``J`` and Ito matrix ``Omega = I + iJ``."""

    J: NDArray[np.float64]

    @property
    def m(self) -> int:
        return self.J.shape[0]

    @property
    def Omega(self) -> NDArray[np.complex128]:
        return np.eye(self.m) + 1j * self.J

    @classmethod
    def canonical(cls, m: int) -> "ItoStructure":
        return cls(canonical_j(m))


def _matrix(x: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.array(x, dtype=np.float64, copy=True)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OscillatorModel:
    """An OQHO given by CCR matrix ``Theta``, energy matrix ``R`` and coupling ``M``.

    When built through :meth:`from_coupling` the model also remembers the
    coupling shape and strength, with ``M = epsilon * shape``. ``J``
    defaults to ``bJ (x) I_{m/2}``; a different field ordering (for instance
    the block-diagonal one of an interconnection) can be supplied.
    """

    Theta: NDArray[np.float64]
    R: NDArray[np.float64]
    M: NDArray[np.float64]
    shape: NDArray[np.float64] | None = None
    epsilon: float | None = None
    J: NDArray[np.float64] | None = field(default=None)

    def __post_init__(self) -> None:
        for f in ("Theta", "R", "M"):
            object.__setattr__(self, f, _matrix(getattr(self, f), f))
        if self.shape is not None:
            object.__setattr__(self, "shape", _matrix(self.shape, "shape"))
        if self.J is None:
            m = self.M.shape[0]
            j = canonical_j(m) if m > 0 and m % 2 == 0 else np.zeros((m, m))
            object.__setattr__(self, "J", _matrix(j, "J"))
        else:
            object.__setattr__(self, "J", _matrix(self.J, "J"))

    @classmethod
    def from_coupling(
        cls,
        Theta: ArrayLike,
        R: ArrayLike,
        shape: ArrayLike,
        epsilon: float = 1.0,
        J: ArrayLike | None = None,
    ) -> "OscillatorModel":
        if epsilon < 0 or not math.isfinite(epsilon):
            raise ValidationError(f"coupling strength must be finite and non-negative, got {epsilon}")
        shape = np.asarray(shape, dtype=np.float64)
        return cls(Theta, R, epsilon * shape, shape=shape, epsilon=float(epsilon), J=J)

    @property
    def n(self) -> int:
        return self.Theta.shape[0]

    @property
    def m(self) -> int:
        return self.M.shape[0]

    @property
    def coupling_shape(self) -> NDArray[np.float64]:
        """Shape matrix; a model given by plain ``M`` is read as ``epsilon = 1``."""
        return self.M if self.shape is None else self.shape

    @property
    def coupling_strength(self) -> float:
        return 1.0 if self.epsilon is None else self.epsilon

    @property
    def ito(self) -> ItoStructure:
        return ItoStructure(np.array(self.J))

    def with_epsilon(self, epsilon: float) -> "OscillatorModel":
        """Same shape, new coupling strength."""
        return OscillatorModel.from_coupling(self.Theta, self.R, self.coupling_shape, epsilon, J=self.J)

    def uncoupled(self) -> "OscillatorModel":
        return self.with_epsilon(0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OscillatorModel):
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                if a is None or b is None or a.shape != b.shape or not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return True

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ValidationReport:
    dims_consistent: bool
    n_even: bool
    m_even: bool
    theta_antisymmetric: bool
    R_symmetric: bool
    theta_nonsingular: bool
    R_positive_definite: bool
    J_valid: bool
    messages: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(getattr(self, f.name) for f in fields(self) if f.name != "messages")

    @property
    def structural_ok(self) -> bool:
        """Enough to build (A, B): dimensions and (anti)symmetry."""
        return self.dims_consistent and self.theta_antisymmetric and self.R_symmetric and self.J_valid

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "messages"}
        out["ok"] = self.ok
        out["messages"] = list(self.messages)
        return out


def validate(model: OscillatorModel) -> ValidationReport:
    """Check every structural requirement; never raises, failures are flagged."""
    msgs: list[str] = []
    th, r, mm, j = model.Theta, model.R, model.M, model.J
    n = th.shape[0]
    dims = (
        th.shape == (n, n)
        and n > 0
        and r.shape == (n, n)
        and mm.ndim == 2
        and mm.shape[1] == n
        and j.shape == (mm.shape[0], mm.shape[0])
        and (model.shape is None or model.shape.shape == mm.shape)
    )
    if not dims:
        msgs.append(f"inconsistent dimensions: Theta {th.shape}, R {r.shape}, M {mm.shape}, J {j.shape}")
    n_even = n > 0 and n % 2 == 0
    m_even = mm.shape[0] > 0 and mm.shape[0] % 2 == 0
    if not n_even:
        msgs.append(f"n = {n} is not even")
    if not m_even:
        msgs.append(f"m = {mm.shape[0]} is not even")

    anti = th.shape[0] == th.shape[1] and float(np.max(np.abs(th + th.T), initial=0.0)) <= TOL.antisymmetry_abs
    if not anti:
        msgs.append("Theta is not antisymmetric")
    sym = r.shape[0] == r.shape[1] and float(np.max(np.abs(r - r.T), initial=0.0)) <= TOL.antisymmetry_abs
    if not sym:
        msgs.append("R is not symmetric")

    nonsing = False
    if th.shape[0] == th.shape[1] and n > 0:
        scale = linalg.frobenius_norm(th)
        nonsing = scale > 0 and abs(float(np.linalg.det(th))) > TOL.det_rel * scale**n
    if not nonsing:
        msgs.append("Theta is singular")

    pd = False
    if sym:
        try:
            pd = linalg.psd_margin(0.5 * (r + r.T)) > 0.0
        except Exception:  # noqa: BLE001 - report, never raise
            pd = False
    if not pd:
        msgs.append("R is not positive definite")

    jv = (
        j.shape[0] == j.shape[1]
        and float(np.max(np.abs(j + j.T), initial=0.0)) <= TOL.antisymmetry_abs
        and float(np.max(np.abs(j @ j + np.eye(j.shape[0])), initial=0.0)) <= TOL.antisymmetry_abs
    )
    if not jv:
        msgs.append("J is not antisymmetric with J^2 = -I")
    return ValidationReport(dims, n_even, m_even, anti, sym, nonsing, pd, jv, tuple(msgs))


@dataclass(frozen=True)
class StateSpace:
    A: NDArray[np.float64]
    B: NDArray[np.float64]
    A0: NDArray[np.float64]
    Atilde: NDArray[np.float64]
    BBt: NDArray[np.float64]


def _require_structure(model: OscillatorModel) -> None:
    report = validate(model)
    if not report.dims_consistent:
        raise DimensionError("; ".join(report.messages))
    if not report.structural_ok:
        raise ValidationError("; ".join(report.messages))


def build_state_space(model: OscillatorModel) -> StateSpace:
    """``A = 2 Theta (R + M^T J M)``, ``B = 2 Theta M^T`` and their parts."""
    _require_structure(model)
    th, r, mm, j = model.Theta, model.R, model.M, model.J
    a0 = 2.0 * th @ r
    atilde = 2.0 * th @ (mm.T @ j @ mm)
    b = 2.0 * th @ mm.T
    return StateSpace(A=a0 + atilde, B=b, A0=a0, Atilde=atilde, BBt=b @ b.T)


@dataclass(frozen=True)
class SpectralStructure:
    """Eigenfrequencies and eigenvectors of ``-2i sqrt(R) Theta sqrt(R)``.

    ``omegas[:n//2]`` are the positive frequencies in descending order and
    ``omegas[k + n//2] = -omegas[k]`` with ``V[:, k + n//2] = conj(V[:, k])``.
    """

    omegas: NDArray[np.float64]
    V: NDArray[np.complex128]
    R_sqrt: NDArray[np.float64]
    R_inv_sqrt: NDArray[np.float64]

    @property
    def n(self) -> int:
        return len(self.omegas)

    @property
    def positive_omegas(self) -> NDArray[np.float64]:
        return self.omegas[: self.n // 2]

    @property
    def S(self) -> NDArray[np.complex128]:
        return self.R_inv_sqrt @ self.V

    @property
    def S_inv(self) -> NDArray[np.complex128]:
        return self.V.conj().T @ self.R_sqrt

    @property
    def period(self) -> float:
        return 2.0 * math.pi / float(np.min(self.positive_omegas))


def _fix_phase(v: NDArray[np.complex128]) -> NDArray[np.complex128]:
    out = v.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > TOL.phase_magnitude))
        c = col[idx]
        out[:, k] = col * (abs(c) / c)
        out[idx, k] = abs(c)
    return out


def eigenstructure(theta: ArrayLike, r: ArrayLike) -> SpectralStructure:
    """Eigen-decomposition for a CCR/energy pair satisfying det Theta != 0, R > 0."""
    theta = np.asarray(theta, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    n = theta.shape[0]
    if n % 2:
        raise DimensionError(f"n = {n} is not even")
    scale = linalg.frobenius_norm(theta)
    if scale == 0 or abs(float(np.linalg.det(theta))) <= TOL.det_rel * scale**n:
        raise ValidationError("Theta is singular")
    rs = linalg.sqrtm_spd(r)
    rsi = linalg.inv_sqrtm_spd(r)
    h = -2j * rs @ theta @ rs
    spec = linalg.eig_hermitian(h)
    w = spec.eigenvalues.real
    vecs = spec.eigenvectors

    omax = float(np.max(np.abs(w)))
    gaps = np.abs(w[:, None] - w[None, :]) + np.diag(np.full(n, np.inf))
    j, k = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
    if gaps[j, k] <= TOL.degeneracy_rel * omax:
        raise DegeneracyError(
            f"eigenfrequencies {w[j]:.10g} and {w[k]:.10g} coincide within tolerance",
            pair=(int(min(j, k)), int(max(j, k))),
        )

    half = n // 2
    pos = vecs[:, :half]  # eigenvalues already descending, so these are the positive ones
    if not np.all(w[:half] > 0):
        raise ValidationError("eigenfrequencies are not symmetric about zero")
    pos = _fix_phase(pos)
    v = np.hstack([pos, pos.conj()])
    omegas = np.concatenate([w[:half], -w[:half]])
    return SpectralStructure(omegas=omegas, V=v, R_sqrt=rs, R_inv_sqrt=rsi)


def spectral_structure(model: OscillatorModel) -> SpectralStructure:
    report = validate(model)
    if not report.dims_consistent:
        raise DimensionError("; ".join(report.messages))
    if not (report.theta_antisymmetric and report.theta_nonsingular and report.R_symmetric):
        raise ValidationError("; ".join(report.messages))
    if not report.R_positive_definite:
        raise ValidationError("R is not positive definite; eigenfrequencies are not defined")
    return eigenstructure(model.Theta, model.R)
