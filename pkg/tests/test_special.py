"""
Unit tests for Special Functions
Testing the dilogarithm, the hyperbolic gamma function and its extension.
"""
import mpmath
import numpy as np
import pytest

import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

from resilience import DomainError, PoleError
from special.functions import (HyperbolicParams, QcParams, dilog, dilog_array, extend_hyp_gamma,
                               extend_log_hyp_gamma, hyp_gamma, inversion_error, log_hyp_gamma,
                               log_hyp_gamma_batch, qc_leading_error, qc_leading_log, shift_errors,
                               shift_factor)


class TestDilog:
    """Test suite for the principal dilogarithm"""

    @pytest.mark.parametrize("z", [0.3, -2.5, 0.5 + 0.5j, -1 - 3j, 4 + 0.1j, 0.999j, 10 - 10j])
    def test_matches_mpmath(self, z):
        expected = complex(mpmath.polylog(2, z))
        assert abs(dilog(z) - expected) < 1e-12 * max(1.0, abs(expected))

    def test_special_values(self):
        assert abs(dilog(0)) == 0
        assert abs(dilog(-1) + np.pi ** 2 / 12) < 1e-14

    def test_branch_cut_rejected(self):
        with pytest.raises(DomainError):
            dilog(2.0)
        with pytest.raises(DomainError):
            dilog(1.0)

    def test_array_matches_scalar(self, rng):
        zs = rng.normal(size=20) + 1j * rng.normal(size=20)
        batch = dilog_array(zs)
        for z, value in zip(zs, batch):
            assert abs(value - dilog(z)) < 1e-14 * max(1.0, abs(value))

    def test_array_names_bad_entry(self):
        with pytest.raises(DomainError, match=r"\(2,\)"):
            dilog_array([0.1, -0.5, 3.0])


class TestHyperbolicGamma:
    """Test suite for Gamma_h on and off the strip"""

    def test_params_domain(self):
        with pytest.raises(DomainError):
            HyperbolicParams(0.0)
        with pytest.raises(DomainError):
            HyperbolicParams(-1.0)
        assert HyperbolicParams(2.0).eta_h == pytest.approx(1.25)

    def test_value_at_zero(self, hyper):
        assert hyp_gamma(0.0, hyper) == 1.0

    def test_outside_strip_rejected(self, hyper):
        with pytest.raises(DomainError):
            log_hyp_gamma(0.1 + 1.2j, hyper)

    @pytest.mark.parametrize("b", [0.5, 1.0, 1.7])
    def test_unitarity_on_real_axis(self, b):
        """|Gamma_h(x)| = 1 for real x"""
        params = HyperbolicParams(b)
        for x in (-1.3, 0.2, 2.5):
            assert abs(abs(hyp_gamma(x, params)) - 1.0) < 1e-10

    @pytest.mark.parametrize("b", [0.5, 1.0, 1.7])
    def test_inversion(self, b):
        params = HyperbolicParams(b)
        for z in (0.3 + 0.2j, -0.7 + 0.4j, 1.1 - 1.5j):
            assert inversion_error(z, params) < 1e-10

    def test_inversion_on_random_points(self, rng):
        """Gamma_h(z) Gamma_h(-z) = 1 across the strip"""
        params = HyperbolicParams(0.8)
        zs = rng.uniform(-2.5, 2.5, size=200) + 1j * rng.uniform(-0.75, 0.75, size=200) * params.eta_h
        total = log_hyp_gamma_batch(zs, params) + log_hyp_gamma_batch(-zs, params)
        assert np.max(np.abs(np.exp(total) - 1.0)) < 1e-8

    @pytest.mark.parametrize("b", [0.4, 0.8, 1.3])
    def test_modulus_inversion_symmetry(self, b):
        """Gamma_h(z; b) = Gamma_h(z; 1/b)"""
        for z in (0.3 + 0.2j, -1.1 + 0.5j, 0.7 - 0.4j):
            direct = log_hyp_gamma(z, HyperbolicParams(b))
            swapped = log_hyp_gamma(z, HyperbolicParams(1.0 / b))
            assert abs(direct - swapped) < 1e-10

    @pytest.mark.parametrize("b", [0.5, 1.0, 1.7])
    def test_difference_equations(self, b):
        params = HyperbolicParams(b)
        for z in (0.3 + 0.2j, -0.4 + 0.1j):
            errors = shift_errors(z, params)
            assert errors["b"] < 1e-8
            assert errors["1/b"] < 1e-8

    def test_extension_agrees_inside_strip(self, hyper):
        z = 0.4 + 0.5j
        assert abs(extend_log_hyp_gamma(z, hyper) - log_hyp_gamma(z, hyper)) < 1e-10

    def test_extension_shift(self, hyper):
        """Gamma_h(z - i b) = 2 cosh(pi b (2z - i b)/2) Gamma_h(z) with z - i b off the strip"""
        z = 0.3 - 0.5j
        lhs = extend_hyp_gamma(z - 1j, hyper)
        rhs = shift_factor(z, 1.0, hyper) * hyp_gamma(z, hyper)
        assert abs(lhs - rhs) < 1e-9 * abs(rhs)

    def test_pole_detected(self, hyper):
        """Gamma_h has a pole at z = i eta_h"""
        with pytest.raises(PoleError):
            extend_log_hyp_gamma(1j * hyper.eta_h, hyper)

    def test_batch_matches_scalar(self, rng):
        params = HyperbolicParams(0.8)
        zs = rng.uniform(-2, 2, size=8) + 1j * rng.uniform(-0.8, 0.8, size=8)
        batch = log_hyp_gamma_batch(zs, params)
        for z, value in zip(zs, batch):
            assert abs(value - log_hyp_gamma(z, params)) < 1e-9

    def test_batch_rejects_outside_strip(self, hyper):
        with pytest.raises(DomainError):
            log_hyp_gamma_batch([0.1, 0.2 + 1.5j], hyper)


class TestQuasiClassical:
    """Test suite for the leading hbar -> 0 asymptotics"""

    def test_hbar_roundtrip(self):
        qc = QcParams.from_b(0.3)
        assert qc.b == pytest.approx(0.3)
        assert HyperbolicParams.from_hbar(qc.hbar).b == pytest.approx(0.3)

    def test_leading_term_scales_as_inverse_hbar(self):
        z = 0.5 + 0.3j
        coarse, fine = QcParams.from_b(0.4), QcParams.from_b(0.1)
        assert qc_leading_log(z, coarse) * coarse.hbar == pytest.approx(qc_leading_log(z, fine) * fine.hbar)

    def test_leading_term_domain(self):
        with pytest.raises(DomainError):
            qc_leading_log(0.1 + 3.2j, QcParams.from_b(0.2))

    def test_error_decreases_with_hbar(self):
        """Leading-term error shrinks as b goes from 0.2 to 0.1"""
        coarse = qc_leading_error(0.5, QcParams.from_b(0.2))
        fine = qc_leading_error(0.5, QcParams.from_b(0.1))
        assert fine < 0.5 * coarse
        assert fine < 0.1

    @pytest.mark.parametrize("z", [0.5, 1.0])
    def test_error_is_first_order_in_hbar(self, z):
        """Halving hbar roughly halves the error; b = 0.2, 0.1, 0.07"""
        errors = [qc_leading_error(z, QcParams.from_b(b)) for b in (0.2, 0.1, 0.07)]
        assert errors[0] > errors[1] > errors[2]
        assert errors[1] < 5e-3
        hbars = [QcParams.from_b(b).hbar for b in (0.2, 0.1, 0.07)]
        order = np.log(errors[0] / errors[2]) / np.log(hbars[0] / hbars[2])
        assert order > 0.7

    @pytest.mark.parametrize("z", [0.5, 1.2 + 0.3j, -0.4 - 1.0j])
    def test_leading_term_respects_inversion(self, z):
        """Gamma_h(z) Gamma_h(-z) = 1 leaves no leading-order remainder"""
        qc = QcParams.from_b(0.1)
        assert abs(qc_leading_log(z, qc) + qc_leading_log(-z, qc)) < 1e-10


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
