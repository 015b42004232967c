import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helpers import ale_quadrature, expm_taylor, random_spd
from oqho import linalg
from oqho.errors import DefinitenessError, DimensionError, NumericError, StabilityError, ValidationError
from oqho.linalg import _backend

BJ = np.array([[0.0, 1.0], [-1.0, 0.0]])


def sorted_multiset(values):
    values = np.asarray(values)
    return values[np.lexsort((values.imag.round(9), values.real.round(9)))]


class TestExpm:
    def test_zero_is_identity(self):
        assert np.array_equal(linalg.expm(np.zeros((3, 3))), np.eye(3))

    def test_rotation(self):
        t = 1.234
        expected = np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])
        assert np.allclose(linalg.expm(t * BJ), expected, atol=1e-14)

    @pytest.mark.parametrize("scale", [0.01, 1.0, 10.0, 60.0])
    def test_matches_taylor_oracle(self, rng, scale):
        for n in (2, 4, 7):
            a = rng.normal(size=(n, n)) * scale / np.sqrt(n)
            got = linalg.expm(a)
            ref = expm_taylor(a)
            assert np.linalg.norm(got - ref) <= 1e-11 * max(1.0, np.linalg.norm(ref))

    def test_matches_scipy(self, rng):
        a = rng.normal(size=(6, 6))
        assert np.allclose(linalg.expm(a), scipy.linalg.expm(a), rtol=1e-12, atol=1e-13)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            linalg.expm(np.ones((2, 3)))

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            linalg.expm(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, (4, 4), elements=st.floats(-3, 3)))
    def test_inverse_property(self, a):
        prod = linalg.expm(a) @ linalg.expm(-a)
        assert np.allclose(prod, np.eye(4), atol=1e-8 * np.exp(2 * np.abs(a).sum()))


class TestEigGeneral:
    def test_matches_numpy(self, rng, backend):
        for n in (1, 2, 3, 5, 8, 12):
            a = rng.normal(size=(n, n))
            got = linalg.eig_general(a).eigenvalues
            ref = np.linalg.eigvals(a)
            assert np.allclose(sorted_multiset(got), sorted_multiset(ref), atol=1e-10)

    def test_sort_order(self):
        a = np.diag([1.0, 3.0, -2.0])
        a = scipy.linalg.block_diag(a, 2.0 * BJ)
        vals = linalg.eig_general(a).eigenvalues
        assert np.allclose(vals, [3.0, 1.0, 2.0j, -2.0j, -2.0])

    def test_pure_imaginary(self):
        vals = linalg.eig_general(5.0 * BJ).eigenvalues
        assert np.allclose(vals, [5j, -5j], atol=1e-14)

    def test_iteration_cap(self):
        k = _backend.kernels()
        # cyclic shift in Hessenberg form: no eigenvalue deflates without iterating
        h = np.ascontiguousarray(np.roll(np.eye(4), 1, axis=0))
        with pytest.raises(NumericError):
            k.hqr(h, 0)

    def test_hurwitz(self):
        assert linalg.is_hurwitz(-np.eye(2) + BJ)
        assert not linalg.is_hurwitz(BJ)
        assert linalg.spectral_abscissa(np.diag([-1.0, -3.0])) == pytest.approx(-1.0)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, (5, 5), elements=st.floats(-10, 10)))
    def test_trace_and_determinant(self, a):
        vals = linalg.eig_general(a).eigenvalues
        assert abs(vals.sum().real - np.trace(a)) <= 1e-8 * (1 + np.abs(a).sum())
        assert abs(vals.sum().imag) <= 1e-8 * (1 + np.abs(a).sum())


class TestEigHermitian:
    def test_decomposition(self, rng, backend):
        for n in (1, 2, 5, 9):
            x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            h = x + x.conj().T
            spec = linalg.eig_hermitian(h)
            v, w = spec.eigenvectors, spec.eigenvalues.real
            assert np.all(np.diff(w) <= 0)
            assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
            assert np.allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-11)
            assert np.allclose(w, np.sort(np.linalg.eigvalsh(h))[::-1], atol=1e-11)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            linalg.eig_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_unit_columns(self, rng):
        x = rng.normal(size=(4, 4))
        spec = linalg.eig_hermitian(x + x.T)
        assert np.allclose(np.linalg.norm(spec.eigenvectors, axis=0), 1.0)


class TestSqrtm:
    def test_square_root(self, rng):
        r = random_spd(rng, 5)
        s = linalg.sqrtm_spd(r)
        assert np.allclose(s, s.T)
        assert np.allclose(s @ s, r, atol=1e-12)
        assert np.allclose(linalg.inv_sqrtm_spd(r) @ s, np.eye(5), atol=1e-12)

    def test_indefinite_names_eigenvalue(self):
        with pytest.raises(DefinitenessError) as info:
            linalg.sqrtm_spd(np.diag([1.0, -2.0]))
        assert info.value.eigenvalue == pytest.approx(-2.0)

    def test_asymmetric(self):
        with pytest.raises(ValidationError):
            linalg.sqrtm_spd(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestLyapunov:
    def test_scalar(self):
        x = linalg.solve_lyapunov(-np.eye(2), 2.0 * np.eye(2))
        assert np.allclose(x, np.eye(2))

    def test_residual_and_symmetry(self, rng):
        for n in (2, 4, 8):
            a = rng.normal(size=(n, n)) - 2.0 * np.sqrt(n) * np.eye(n)
            q = random_spd(rng, n)
            x = linalg.solve_lyapunov(a, q)
            assert np.array_equal(x, x.T)
            assert linalg.lyapunov_residual(a, x, q) <= 1e-11 * np.linalg.norm(q)

    def test_quadrature_oracle(self, rng):
        a = rng.normal(size=(3, 3)) - 2.5 * np.eye(3)
        q = random_spd(rng, 3)
        assert np.allclose(linalg.solve_lyapunov(a, q), ale_quadrature(a, q), atol=1e-9)

    def test_not_hurwitz(self):
        with pytest.raises(StabilityError):
            linalg.solve_lyapunov(BJ, np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            linalg.solve_lyapunov(-np.eye(2), np.eye(3))

    def test_asymmetric_q(self):
        with pytest.raises(ValidationError):
            linalg.solve_lyapunov(-np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestPsd:
    def test_margin(self):
        assert linalg.psd_margin(np.diag([3.0, 1.0])) == pytest.approx(1.0)
        assert linalg.psd_check(np.zeros((2, 2)))
        assert not linalg.psd_check(np.diag([1.0, -1e-3]))

    def test_complex_hermitian(self):
        # P + i Theta with P = I/2 and Theta = bJ/2 is exactly borderline
        h = 0.5 * np.eye(2) + 0.5j * BJ
        assert linalg.psd_check(h)
        assert linalg.psd_margin(h) == pytest.approx(0.0, abs=1e-14)

    def test_frobenius(self):
        assert linalg.frobenius_norm(np.array([[3.0, 4.0]])) == 5.0
        assert linalg.frobenius_inner(np.eye(2), np.diag([2.0, 3.0])) == 5.0
