import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_model, random_spd, two_mode
from oqho import linalg
from oqho.errors import DegeneracyError, DimensionError, ValidationError
from oqho.model import (
    BJ,
    ItoStructure,
    OscillatorModel,
    build_state_space,
    canonical_j,
    canonical_theta,
    spectral_structure,
    validate,
)


def sorted_c(values):
    values = np.asarray(values)
    return values[np.lexsort((values.real.round(8), values.imag.round(8)))]


class TestIto:
    def test_canonical(self):
        ito = ItoStructure.canonical(4)
        assert ito.m == 4
        assert np.allclose(ito.J @ ito.J, -np.eye(4))
        assert np.allclose(ito.Omega, np.eye(4) + 1j * canonical_j(4))
        assert linalg.psd_check(ito.Omega)

    def test_canonical_theta(self):
        th = canonical_theta(4)
        assert th[0, 2] == 0.5 and th[2, 0] == -0.5 and th[0, 1] == 0.0


class TestValidate:
    def test_isolated_passes(self):
        rep = validate(OscillatorModel(canonical_theta(4), np.eye(4), np.zeros((2, 4))))
        assert rep.ok and rep.messages == ()

    def test_zero_theta(self):
        rep = validate(OscillatorModel(np.zeros((2, 2)), np.eye(2), np.eye(2)))
        assert not rep.theta_nonsingular and rep.theta_antisymmetric
        assert not rep.ok

    def test_two_mode_passes(self):
        assert validate(two_mode()).ok

    def test_flags_individually(self):
        rep = validate(OscillatorModel(np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, -1.0]), np.eye(2)))
        d = rep.as_dict()
        assert d["theta_antisymmetric"] is False
        assert d["R_positive_definite"] is False
        assert d["dims_consistent"] is True
        assert len(rep.messages) >= 2

    def test_odd_dimensions(self):
        rep = validate(OscillatorModel(np.zeros((3, 3)), np.eye(3), np.ones((3, 3))))
        assert not rep.n_even and not rep.m_even

    def test_shape_mismatch(self):
        rep = validate(OscillatorModel(canonical_theta(2), np.eye(4), np.eye(2)))
        assert not rep.dims_consistent
        with pytest.raises(DimensionError):
            build_state_space(OscillatorModel(canonical_theta(2), np.eye(4), np.eye(2)))

    def test_never_raises_on_garbage(self):
        rep = validate(OscillatorModel(np.ones((2, 2)), np.ones((2, 2)) * np.array([[1, 2], [3, 4]]), np.ones((2, 2))))
        assert not rep.ok


class TestStateSpace:
    def test_isolated(self):
        m = OscillatorModel(canonical_theta(2), np.eye(2), np.zeros((2, 2)))
        ss = build_state_space(m)
        assert np.array_equal(ss.A, ss.A0)
        assert not ss.B.any()

    def test_unit_example(self):
        ss = build_state_space(OscillatorModel(0.5 * BJ, np.eye(2), np.eye(2)))
        assert np.allclose(ss.A, BJ - np.eye(2))
        assert np.allclose(ss.B, BJ)

    def test_two_mode_products(self):
        m = two_mode(1.0)
        ss = build_state_space(m)
        th, mm = m.Theta, m.M
        assert np.allclose(ss.BBt, -4 * th @ mm.T @ mm @ th, atol=1e-12)
        eig = linalg.eig_general(ss.A).eigenvalues
        assert np.allclose(sorted_c(eig), sorted_c(np.linalg.eigvals(ss.A)), atol=1e-10)

    def test_energy_identities(self, rng):
        for _ in range(10):
            m = random_model(rng, 4, 6)
            ss = build_state_space(m)
            R = m.R
            assert np.allclose(ss.A0.T @ R + R @ ss.A0, 0, atol=1e-10)
            assert np.allclose(ss.A.T @ R + R @ ss.A, ss.Atilde.T @ R + R @ ss.Atilde, atol=1e-10)

    def test_epsilon_scaling(self, rng):
        m = random_model(rng, 4)
        a = build_state_space(m.with_epsilon(0.3))
        assert np.allclose(a.B, 0.3 * build_state_space(m.with_epsilon(1.0)).B)
        assert np.allclose(a.Atilde, 0.09 * build_state_space(m.with_epsilon(1.0)).Atilde)

    def test_negative_epsilon(self):
        with pytest.raises(ValidationError):
            OscillatorModel.from_coupling(canonical_theta(2), np.eye(2), np.eye(2), -1.0)

    def test_immutable(self):
        m = two_mode()
        with pytest.raises(ValueError):
            m.R[0, 0] = 1.0


class TestSpectral:
    def test_one_mode(self):
        s = spectral_structure(OscillatorModel(0.5 * BJ, np.diag([4.0, 1.0]), np.eye(2)))
        assert np.allclose(s.omegas, [2.0, -2.0])
        assert s.period == pytest.approx(np.pi)

    def test_two_mode_frequencies(self):
        s = spectral_structure(two_mode())
        assert s.omegas[0] == pytest.approx(7.2046, abs=5e-4)
        assert s.omegas[1] == pytest.approx(0.3729, abs=5e-4)
        assert s.period == pytest.approx(2 * np.pi / 0.3729, abs=2e-2)

    def test_structure(self, rng):
        for n in (2, 4, 6):
            m = random_model(rng, n)
            s = spectral_structure(m)
            h = n // 2
            assert np.all(s.omegas[:h] > 0) and np.all(np.diff(s.omegas[:h]) < 0)
            assert np.allclose(s.omegas[h:], -s.omegas[:h])
            assert np.allclose(s.V[:, h:], s.V[:, :h].conj(), atol=1e-9)
            assert np.allclose(s.V.conj().T @ s.V, np.eye(n), atol=1e-10)
            a0 = build_state_space(m).A0
            assert np.linalg.norm(a0 - 1j * s.S @ np.diag(s.omegas) @ s.S_inv) <= 1e-8
            eig = linalg.eig_general(a0).eigenvalues
            assert np.allclose(sorted_c(eig), sorted_c(1j * s.omegas), atol=1e-8)

    def test_phase_convention(self, rng):
        s = spectral_structure(random_model(rng, 4))
        for k in range(4):
            col = s.V[:, k]
            first = col[np.argmax(np.abs(col) > 1e-8)]
            if k < 2:
                assert first.imag == 0.0 and first.real > 0

    def test_degenerate(self):
        m = OscillatorModel(canonical_theta(4), np.eye(4), np.eye(4))
        with pytest.raises(DegeneracyError) as info:
            spectral_structure(m)
        assert info.value.pair is not None

    def test_indefinite_R_builds_state_space_only(self):
        m = OscillatorModel(canonical_theta(2), np.diag([1.0, -1.0]), np.eye(2))
        build_state_space(m)
        with pytest.raises(ValidationError):
            spectral_structure(m)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_orthogonal_invariance(self, seed):
        rng = np.random.default_rng(seed)
        th, r = canonical_theta(4), random_spd(rng, 4)
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        a = spectral_structure(OscillatorModel(th, r, np.eye(4))).omegas
        b = spectral_structure(OscillatorModel(q.T @ th @ q, q.T @ r @ q, np.eye(4))).omegas
        assert np.allclose(a, b, atol=1e-9 * max(1.0, np.abs(a).max()))


def test_equality():
    assert two_mode(0.2) == two_mode(0.2)
    assert two_mode(0.2) != two_mode(0.3)
