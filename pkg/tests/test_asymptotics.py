import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_model, random_weakly_stable, two_mode
from oqho import asymptotics as asy
from oqho import linalg
from oqho.errors import DegeneracyError, WeakCouplingUnstable
from oqho.model import BJ, OscillatorModel, SpectralStructure, build_state_space, canonical_theta, spectral_structure


def one_mode(eps=0.5):
    return OscillatorModel.from_coupling(0.5 * BJ, np.diag([4.0, 1.0]), np.eye(2), eps)


def mus_of(model):
    return asy.compute_mus(spectral_structure(model), model.coupling_shape)


class TestMus:
    def test_zero_shape(self):
        m = OscillatorModel.from_coupling(canonical_theta(4), two_mode().R, np.zeros((6, 4)), 0.1)
        assert np.allclose(mus_of(m), 0.0)

    def test_one_mode(self):
        assert np.allclose(mus_of(one_mode()), [0.5, -0.5])

    def test_two_mode_mu1(self):
        mus = mus_of(two_mode())
        assert mus[0] == pytest.approx(0.1765, abs=5e-4)
        # the second value sits 1e-3 from the printed 5.2214; see the acceptance suite
        assert mus[1] == pytest.approx(5.2204, abs=5e-4)

    def test_antisymmetry_and_products(self, rng):
        for n in (2, 4, 6):
            m = random_model(rng, n, n + 2)
            spec = spectral_structure(m)
            mus = asy.compute_mus(spec, m.coupling_shape)
            h = n // 2
            assert np.allclose(mus[h:], -mus[:h], atol=1e-9)
            assert np.allclose(spec.omegas[h:] * mus[h:], spec.omegas[:h] * mus[:h], atol=1e-9)

    def test_phase_invariance(self, rng):
        m = random_model(rng, 4)
        spec = spectral_structure(m)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        rotated = SpectralStructure(spec.omegas, spec.V * phases, spec.R_sqrt, spec.R_inv_sqrt)
        a = asy.compute_mus(spec, m.coupling_shape)
        b = asy.compute_mus(rotated, m.coupling_shape)
        assert np.allclose(a, b, atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 5.0))
    def test_scale_law(self, seed, sigma):
        m = random_model(np.random.default_rng(seed), 4)
        spec = spectral_structure(m)
        a = asy.compute_mus(spec, m.coupling_shape)
        b = asy.compute_mus(spec, sigma * m.coupling_shape)
        assert np.allclose(b, sigma**2 * a, atol=1e-10 * max(1.0, sigma**2 * np.abs(a).max()))

    def test_R_cross_check(self):
        m = two_mode()
        spec = spectral_structure(m)
        asy.compute_mus(spec, m.coupling_shape, R=m.R)
        with pytest.raises(ValueError):
            asy.compute_mus(spec, m.coupling_shape, R=np.eye(4))

    def test_degenerate(self):
        m = OscillatorModel.from_coupling(canonical_theta(4), np.eye(4), np.eye(4), 0.1)
        with pytest.raises(DegeneracyError):
            asy.analyze(m)


class TestAsymptote:
    def test_zero_epsilon(self):
        om = np.array([2.0, -2.0])
        assert np.allclose(asy.eigen_asymptote([0.5, -0.5], om, 0.0), 1j * om)

    def test_one_mode_exact(self):
        for eps in (0.1, 0.5, 1.3):
            lam = asy.eigen_asymptote([0.5, -0.5], [2.0, -2.0], eps)
            assert np.allclose(lam, [-(eps**2) + 2j, -(eps**2) - 2j], atol=1e-15)
            exact = linalg.eig_general(build_state_space(one_mode(eps)).A).eigenvalues
            assert np.allclose(asy.pair_eigenvalues(exact, lam), lam, atol=1e-10)

    def test_little_o(self):
        m = two_mode()
        e1 = asy.asymptote_error(m, 0.01) / 0.01**2
        e4 = asy.asymptote_error(m, 0.04) / 0.04**2
        assert e1 <= e4

    def test_pairing(self):
        exact = np.array([1 + 1j, 5 - 1j, -2j])
        approx = np.array([5 - 1.1j, -2.1j, 1.1 + 1j])
        paired = asy.pair_eigenvalues(exact, approx)
        assert np.array_equal(paired, [5 - 1j, -2j, 1 + 1j])

    def test_pairing_random(self, rng):
        for _ in range(20):
            m = random_weakly_stable(rng, 4)
            spec = spectral_structure(m)
            mus = asy.compute_mus(spec, m.coupling_shape)
            eps = 0.01
            approx = asy.eigen_asymptote(mus, spec.omegas, eps)
            exact = linalg.eig_general(build_state_space(m.with_epsilon(eps)).A).eigenvalues
            dist = np.abs(approx[:, None] - exact[None, :])
            nearest = np.argmin(dist, axis=1)
            assert len(set(nearest)) == 4
            assert np.all(dist.min(axis=1) <= 10 * eps**2)


class TestVerdict:
    def test_zero_shape(self):
        v = asy.stability_verdict(np.zeros(4))
        assert not v and v.inconclusive and v.margin == 0.0

    def test_two_mode(self):
        v = asy.stability_verdict(mus_of(two_mode()))
        assert v.stable and v.margin == pytest.approx(0.1765, abs=5e-4)
        assert not v.inconclusive

    def test_sign_flip(self):
        m = two_mode()
        # swapping the two halves of the rows negates shape^T J shape
        flipped = np.vstack([m.coupling_shape[3:], m.coupling_shape[:3]])
        spec = spectral_structure(m)
        a = asy.compute_mus(spec, m.coupling_shape)
        b = asy.compute_mus(spec, flipped)
        assert np.allclose(b, -a, atol=1e-12)
        assert asy.stability_verdict(a).stable and not asy.stability_verdict(b).stable


class TestThresholds:
    def test_two_mode(self):
        r = asy.analyze(two_mode())
        t = r.thresholds
        assert t.lead_coefficient == pytest.approx(1.2714, abs=5e-4)
        assert t.eps_hat == pytest.approx(0.2161, abs=5e-4)
        assert t.eps_tilde == pytest.approx(0.1746, abs=5e-4)
        assert t.eps_hat >= t.eps_tilde
        assert r.tau_hat(0.1) == pytest.approx(100 / t.lead_coefficient)
        assert r.eps_ratio() == pytest.approx(0.2 / t.eps_hat)

    def test_one_mode_equal(self):
        r = asy.analyze(one_mode())
        assert r.thresholds.eps_hat == pytest.approx(r.thresholds.eps_tilde, rel=1e-14)
        assert r.thresholds.eps_hat == pytest.approx(1 / math.sqrt(math.pi), abs=1e-12)

    def test_unstable(self):
        with pytest.raises(WeakCouplingUnstable) as info:
            asy.thresholds(np.array([0.2, -0.1, -0.2, 0.1]), np.array([3.0, 1.0, -3.0, -1.0]))
        assert info.value.name == "weak_coupling_unstable"
        r = asy.analyze(OscillatorModel.from_coupling(0.5 * BJ, np.eye(2), np.diag([1.0, -1.0]), 0.1))
        assert r.thresholds is None and not r.stable_weak_coupling
        with pytest.raises(WeakCouplingUnstable):
            r.tau_hat()

    def test_eps_hat_dominates(self, rng):
        for _ in range(10):
            r = asy.analyze(random_weakly_stable(rng, 6))
            assert r.thresholds.eps_hat >= r.thresholds.eps_tilde * (1 - 1e-12)


class TestSweep:
    def test_zero_row(self):
        rows = asy.lyapunov_exponent_sweep(two_mode(), [0.0])
        assert (rows[0].epsilon, rows[0].exact_lyapunov, rows[0].asymptotic_approx) == (0.0, 0.0, 0.0)

    def test_sorted(self):
        rows = asy.lyapunov_exponent_sweep(two_mode(), [0.3, 0.1, 0.2])
        assert [r.epsilon for r in rows] == [0.1, 0.2, 0.3]

    def test_little_o(self):
        rows = asy.lyapunov_exponent_sweep(two_mode(), [0.08, 0.04, 0.02, 0.01])
        ratios = [abs(r.exact_lyapunov - r.asymptotic_approx) / r.epsilon**2 for r in rows]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))

    def test_approx_value(self):
        row = asy.lyapunov_exponent_sweep(two_mode(), [0.05])[0]
        assert row.asymptotic_approx == pytest.approx(-0.0031785, abs=5e-4 * 0.05**2)

    def test_csv(self):
        text = asy.sweep_csv(asy.lyapunov_exponent_sweep(two_mode(), [0.0, 0.1]))
        lines = text.splitlines()
        assert lines[0] == "epsilon,exact_lyapunov,asymptotic_approx"
        assert lines[1] == "0,0,0"
        assert len(lines[2].split(",")[1].lstrip("-").replace(".", "").lstrip("0")) <= 12
