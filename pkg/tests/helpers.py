"""Random model generators and independent oracles shared by the test modules."""

from __future__ import annotations

import json
import pathlib

import numpy as np
import scipy.linalg
from scipy.integrate import quad_vec

from oqho import linalg
from oqho.asymptotics import compute_mus, stability_verdict
from oqho.model import OscillatorModel, build_state_space, canonical_theta, spectral_structure
from oqho.io import model_from_dict

DATA = pathlib.Path(__file__).parent / "data"


def load_model(name: str) -> OscillatorModel:
    return model_from_dict(json.loads((DATA / name).read_text()))


def two_mode(epsilon: float = 0.2) -> OscillatorModel:
    return load_model("two_mode.json").with_epsilon(epsilon)


def random_spd(rng: np.random.Generator, n: int, floor: float = 0.5) -> np.ndarray:
    x = rng.normal(size=(n, n))
    return x @ x.T / n + floor * np.eye(n)


def random_model(rng, n: int, m: int | None = None, epsilon: float = 1.0) -> OscillatorModel:
    m = n if m is None else m
    return OscillatorModel.from_coupling(canonical_theta(n), random_spd(rng, n), rng.normal(size=(m, n)), epsilon)


def random_hurwitz(rng, n: int, min_rate: float = 0.05, max_tries: int = 500, epsilon=None) -> OscillatorModel:
    """Random model with ``max Re lambda(A) <= -min_rate``.

    Shapes are drawn around the identity, whose coupling damps every mode
    at rate ``eps^2``; fully random square shapes are rarely Hurwitz for n >= 6.
    """
    for _ in range(max_tries):
        eps = rng.uniform(0.3, 1.0) if epsilon is None else epsilon
        shape = np.eye(n) + rng.uniform(0.2, 0.8) * rng.normal(size=(n, n))
        model = OscillatorModel.from_coupling(canonical_theta(n), random_spd(rng, n), shape, eps)
        if linalg.spectral_abscissa(build_state_space(model).A) <= -min_rate:
            return model
    raise RuntimeError("no Hurwitz sample found")


def random_weakly_stable(rng, n: int, min_mu: float = 0.05, max_tries: int = 500) -> OscillatorModel:
    """Random shape with every positive-frequency ``mu_k`` above ``min_mu`` and a clear frequency gap."""
    for _ in range(max_tries):
        model = random_model(rng, n, epsilon=0.05)
        try:
            spec = spectral_structure(model)
        except Exception:
            continue
        w = spec.positive_omegas
        if len(w) > 1 and np.min(np.abs(np.diff(w))) < 0.1 * np.max(w):
            continue
        if stability_verdict(compute_mus(spec, model.coupling_shape)).margin > min_mu:
            return model
    raise RuntimeError("no weakly stable sample found")


def expm_taylor(a: np.ndarray, terms: int = 30) -> np.ndarray:
    """Truncated Taylor series with scaling and squaring; independent of the Pade path."""
    norm = np.max(np.sum(np.abs(a), axis=0))
    s = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0.5 else 0
    x = a / 2.0**s
    out = np.eye(a.shape[0], dtype=a.dtype)
    term = np.eye(a.shape[0], dtype=a.dtype)
    for k in range(1, terms + 1):
        term = term @ x / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def ale_quadrature(a: np.ndarray, q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """``int_0^inf exp(tA) Q exp(tA^T) dt`` by adaptive quadrature."""

    def f(t):
        e = scipy.linalg.expm(t * a)
        return e @ q @ e.T

    val, _ = quad_vec(f, 0.0, np.inf, epsabs=tol, epsrel=tol, limit=20000)
    return val


def first_crossing_grid(a, theta, step: float, horizon: float, weight=None) -> float:
    """Left edge of the first grid cell whose right end is at or below ``1/e`` of the start."""
    w = np.eye(a.shape[0]) if weight is None else weight
    start = np.linalg.norm(w @ theta)
    e_step = scipy.linalg.expm(step * a)
    y = theta.copy()
    t = 0.0
    while t < horizon:
        y = e_step @ y
        t += step
        if np.linalg.norm(w @ y) <= start / np.e:
            return t
    raise RuntimeError("no crossing")


def random_subsystem(rng, n: int, m: int, selected, partner_p: int):
    from oqho.interconnect import SubsystemSpec

    return SubsystemSpec.build(
        random_spd(rng, n), rng.normal(size=(m, n)), rng.normal(size=(partner_p, n)), selected
    )


def random_network(rng, epsilon: float | None = None):
    """Two subsystems with random sizes and routing, closed through a random ``R12``."""
    from oqho.interconnect import assemble

    sizes = []
    for _ in range(2):
        n = 2 * int(rng.integers(1, 3))
        m = 2 * int(rng.integers(1, 4))
        half = m // 2
        k = int(rng.integers(1, half + 1))
        picks = sorted(rng.choice(np.arange(1, half + 1), size=k, replace=False).tolist())
        sizes.append((n, m, picks + [i + half for i in picks]))
    s1 = random_subsystem(rng, sizes[0][0], sizes[0][1], sizes[0][2], len(sizes[1][2]))
    s2 = random_subsystem(rng, sizes[1][0], sizes[1][1], sizes[1][2], len(sizes[0][2]))
    eps = rng.uniform(0.05, 1.0) if epsilon is None else epsilon
    while True:
        r12 = 0.3 * rng.normal(size=(s1.n, s2.n))
        r0 = np.block([[s1.R, r12], [r12.T, s2.R]])
        if np.min(np.linalg.eigvalsh(r0)) > 0.05:
            return assemble(s1, s2, r12, eps)
