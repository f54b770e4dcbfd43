"""
Unit tests for Leg Functions
Testing Lagrangians, leg functions, the four-leg ratio and the derivative identities.
"""
import mpmath
import numpy as np
import pytest

import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

from model.legs import (LagrangianInputs, LegContext, c_term, c_term_mp, constrained_gradient, edge_lagrangian,
                        lagrangian, lagrangian_bar, lagrangian_mp, leg_ratio, leg_ratios, phi,
                        phi_derivative_errors, phi_rational, verify_phi_derivative)
from model.multispin import (AdditiveVar, MultiplicativeVar, Picture, RapidityPair, RationalVar,
                             random_multiplicative, random_rational, random_variable)
from resilience import DomainError, SingularityError


def _random_setup(n, picture, rng):
    """Centre, corners (i, j, k, l) and generic rapidities in one picture"""
    center = random_variable(n, picture, rng)
    corners = [random_variable(n, picture, rng) for _ in range(4)]
    if picture == Picture.HYPERBOLIC:
        draw = lambda: RapidityPair(*np.exp(1j * rng.uniform(0.1, 3.0, 2)))
    else:
        draw = lambda: RapidityPair(*rng.uniform(0.5, 2.0, 2))
    return center, corners, LegContext(draw(), draw(), n)


def _phi_oracle(a, y_i, y_j, alpha, beta):
    """Straight-line product formula for phi_a in mpmath"""
    yi = [mpmath.mpc(c) for c in y_i.components]
    yj = [mpmath.mpc(c) for c in y_j.components]
    n = len(yi)
    big_y = mpmath.fprod(yi[:-1])
    value = (yi[a - 1] / big_y) ** (mpmath.mpf(n) / 2)
    for c in yj:
        value *= (alpha - beta * big_y * c) / (alpha * yi[a - 1] - beta * c)
    return complex(value)


class TestLagrangians:
    """Test suite for C, L and Lbar"""

    def test_c_term_n2(self):
        """-i pi (x_1 - x_2) for n = 2"""
        x = AdditiveVar([0.3, -0.3])
        assert c_term(x) == pytest.approx(-1j * np.pi * 0.6)

    def test_c_term_permutation_changes_sign(self):
        x = AdditiveVar([0.3, -0.1, -0.2])
        assert c_term(x.permuted([2, 1, 0])) == pytest.approx(-c_term(x))

    def test_lagrangian_at_origin(self):
        """x_i = x_j = 0 leaves n^2 (pi^2 - 3 theta^2)/12 + n^2 Li2(-e^{i theta})"""
        theta = 0.7
        zero = AdditiveVar([0.0, 0.0])
        expected = 4 * (np.pi ** 2 - 3 * theta ** 2) / 12 + 4 * complex(mpmath.polylog(2, -np.exp(1j * theta)))
        assert abs(lagrangian(LagrangianInputs(theta, zero, zero)) - expected) < 1e-12

    def test_lagrangian_bar_direct(self):
        x_i = AdditiveVar([0.2, -0.2])
        x_j = AdditiveVar([-0.5, 0.5])
        bar = lagrangian_bar(LagrangianInputs(0.7, x_i, x_j))
        assert bar == pytest.approx(lagrangian(LagrangianInputs(np.pi - 0.7, x_i, x_j)))

    def test_mismatched_n(self):
        with pytest.raises(DomainError):
            edge_lagrangian(0.5, AdditiveVar([0.1, -0.1]), AdditiveVar([0.1, 0.2, -0.3]))

    def test_constrained_gradient_linear(self):
        """Gradient of sum w_a x_a along the constraint is w_a - w_n"""
        w = np.array([1.0, 2.0, 5.0])
        grad = constrained_gradient(lambda x: complex(np.dot(w, x.components)), AdditiveVar([0.1, 0.2, -0.3]))
        assert np.allclose(grad, [-4.0, -3.0])

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("theta", [0.4, 1.3, 2.6])
    def test_antisymmetry(self, rng, n, theta):
        """L_theta(x, y) = -L_{-theta}(y, x)"""
        x = AdditiveVar.from_independent(rng.normal(size=n - 1))
        y = AdditiveVar.from_independent(rng.normal(size=n - 1))
        forward = lagrangian(LagrangianInputs(theta, x, y))
        backward = lagrangian(LagrangianInputs(-theta, y, x))
        assert abs(forward + backward) < 1e-10 * max(1.0, abs(forward))

    @pytest.mark.parametrize("theta", [0.4, 2.6])
    def test_bar_antisymmetry(self, rng, theta):
        """Lbar_theta(x, y) = -L_{theta - pi}(y, x)"""
        x = AdditiveVar.from_independent(rng.normal(size=2))
        y = AdditiveVar.from_independent(rng.normal(size=2))
        bar = lagrangian_bar(LagrangianInputs(theta, x, y))
        assert abs(bar + lagrangian(LagrangianInputs(theta - np.pi, y, x))) < 1e-10 * max(1.0, abs(bar))

    @pytest.mark.parametrize("n", [2, 3])
    def test_extended_precision_matches(self, rng, n):
        x = AdditiveVar.from_independent(rng.normal(size=n - 1) + 1j * rng.uniform(-1, 1, size=n - 1))
        y = AdditiveVar.from_independent(rng.normal(size=n - 1))
        with mpmath.workdps(30):
            wide = complex(lagrangian_mp(0.9, [mpmath.mpc(c) for c in x.components],
                                         [mpmath.mpc(c) for c in y.components]))
            wide_c = complex(c_term_mp([mpmath.mpc(c) for c in x.components]))
        assert abs(wide - lagrangian(LagrangianInputs(0.9, x, y))) < 1e-11 * max(1.0, abs(wide))
        assert wide_c == pytest.approx(c_term(x))


class TestLegFunctions:
    """Test suite for phi, phi^(r) and A_a"""

    def test_phi_n2_closed_form(self):
        """n = 2 has a unit prefactor: the leg is a ratio of two quadratics"""
        y_i = MultiplicativeVar.from_independent([1.7])
        y_j = MultiplicativeVar.from_independent([0.6])
        alpha, beta = 1.3, 0.4
        big_y = 1.7
        num = (alpha - beta * big_y * 0.6) * (alpha - beta * big_y / 0.6)
        den = (alpha * 1.7 - beta * 0.6) * (alpha * 1.7 - beta / 0.6)
        assert phi(1, y_i, y_j, alpha, beta) == pytest.approx(num / den)

    def test_phi_rational_n2(self):
        y_i = RationalVar([0.5, -0.5])
        y_j = RationalVar([0.2, -0.2])
        alpha, beta = 1.0, 0.4
        num = (0.5 + 0.2 - 0.6) * (0.5 - 0.2 - 0.6)
        den = (0.5 - 0.2 + 0.6) * (0.5 + 0.2 + 0.6)
        assert phi_rational(1, y_i, y_j, alpha, beta) == pytest.approx(num / den)

    def test_index_range(self):
        y = MultiplicativeVar.from_independent([2.0])
        for a in (0, 3):
            with pytest.raises(DomainError):
                phi(a, y, y, 1.0, 0.5)

    def test_phi_last_component(self):
        """a = n takes y_{i,n} in the prefactor and the denominators"""
        y_i = MultiplicativeVar.from_independent([1.7])
        y_j = MultiplicativeVar.from_independent([0.6])
        alpha, beta = 1.3, 0.4
        num = (alpha - beta * 1.7 * 0.6) * (alpha - beta * 1.7 / 0.6)
        den = (alpha / 1.7 - beta * 0.6) * (alpha / 1.7 - beta / 0.6)
        assert phi(2, y_i, y_j, alpha, beta) == pytest.approx((1 / 1.7) / 1.7 * num / den)

    def test_phi_rational_last_component(self):
        y_i = RationalVar([0.5, -0.5])
        y_j = RationalVar([0.2, -0.2])
        num = (0.5 + 0.2 - 0.6) * (0.5 - 0.2 - 0.6)
        den = (-0.5 - 0.2 + 0.6) * (-0.5 + 0.2 + 0.6)
        assert phi_rational(2, y_i, y_j, 1.0, 0.4) == pytest.approx(num / den)

    @pytest.mark.parametrize("a", [1, 2, 3])
    def test_phi_n3_direct_product(self, a):
        y_i = MultiplicativeVar([2.0, 3.0, 1.0 / 6.0])
        y_j = MultiplicativeVar([1.0, 1.0, 1.0])
        assert phi(a, y_i, y_j, 2.0, 1.0) == pytest.approx(_phi_oracle(a, y_i, y_j, 2.0, 1.0), rel=1e-12)

    @pytest.mark.parametrize("n", [3, 4])
    def test_phi_random_direct_product(self, rng, n):
        y_i, y_j = random_multiplicative(n, rng), random_multiplicative(n, rng)
        alpha, beta = np.exp(0.7j), np.exp(2.1j)
        for a in range(1, n + 1):
            assert phi(a, y_i, y_j, alpha, beta) == pytest.approx(_phi_oracle(a, y_i, y_j, alpha, beta), rel=1e-11)

    def test_singular_leg(self):
        """alpha y_{i,1} = beta y_{j,1} makes a denominator vanish"""
        y_i = MultiplicativeVar.from_independent([2.0])
        y_j = MultiplicativeVar.from_independent([4.0])
        with pytest.raises(SingularityError):
            phi(1, y_i, y_j, 2.0, 1.0)

    def test_leg_ratio_singularity_names_corner(self, rng):
        center = MultiplicativeVar.from_independent([2.0])
        corners = [random_multiplicative(2, rng) for _ in range(4)]
        corners[0] = MultiplicativeVar.from_independent([4.0])
        ctx = LegContext(RapidityPair(1.0, 2.0), RapidityPair(1.0, 1.0), 2)
        with pytest.raises(SingularityError) as info:
            leg_ratios(center, corners, ctx, Picture.HYPERBOLIC)
        assert info.value.label == "corner i"

    def test_trivial_stencil(self, rng):
        """All four corners equal and alpha, beta symmetric: A = 1"""
        center = random_rational(3, rng)
        y = random_rational(3, rng)
        ctx = LegContext(RapidityPair(0.7, 0.7), RapidityPair(0.2, 0.2), 3)
        ratios = leg_ratios(center, [y, y, y, y], ctx, Picture.RATIONAL)
        assert np.allclose(ratios, 1.0)

    def test_single_component(self, rng):
        center = random_multiplicative(3, rng)
        corners = [random_multiplicative(3, rng) for _ in range(4)]
        ctx = LegContext(RapidityPair(np.exp(1.9j), -np.exp(1.5j)), RapidityPair(np.exp(0.4j), -np.exp(0.2j)), 3)
        full = leg_ratios(center, corners, ctx, Picture.HYPERBOLIC)
        assert leg_ratio(2, center, corners, ctx, Picture.HYPERBOLIC) == pytest.approx(full[1])

    def test_leg_ratio_last_component(self, rng):
        center, corners, ctx = _random_setup(3, Picture.HYPERBOLIC, rng)
        i, j, k, l = corners
        alpha, beta = ctx.alpha, ctx.beta
        direct = (phi(3, center, i, alpha[2], beta[1]) * phi(3, center, l, alpha[1], beta[2])
                  / (phi(3, center, j, alpha[2], beta[2]) * phi(3, center, k, alpha[1], beta[1])))
        assert leg_ratio(3, center, corners, ctx, Picture.HYPERBOLIC) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("picture", [Picture.HYPERBOLIC, Picture.RATIONAL], ids=["hyperbolic", "rational"])
@pytest.mark.parametrize("n", [2, 3, 4])
class TestLegRatioSymmetries:
    """Test suite for the reflection and permutation symmetries of A_a"""

    def test_reversed_corners_with_hatted_parameters(self, rng, picture, n):
        """A(f; i, j, k, l; alpha, beta) = A(f; l, k, j, i; alpha^, beta^)"""
        center, (i, j, k, l), ctx = _random_setup(n, picture, rng)
        plain = leg_ratios(center, [i, j, k, l], ctx, picture)
        reflected = leg_ratios(center, [l, k, j, i], ctx.hatted(True, True), picture)
        assert np.allclose(plain, reflected, rtol=1e-12, atol=0)

    def test_swapped_pairs_invert(self, rng, picture, n):
        """A(f; i, j, k, l; alpha, beta) A(f; j, i, l, k; alpha, beta^) = 1"""
        center, (i, j, k, l), ctx = _random_setup(n, picture, rng)
        plain = leg_ratios(center, [i, j, k, l], ctx, picture)
        swapped = leg_ratios(center, [j, i, l, k], ctx.hatted(False, True), picture)
        assert np.allclose(plain * swapped, 1.0, rtol=0, atol=1e-11)

    def test_invariant_under_corner_transpositions(self, rng, picture, n):
        """Transposing two components of any single corner leaves every A_a unchanged"""
        center, corners, ctx = _random_setup(n, picture, rng)
        base = leg_ratios(center, corners, ctx, picture)
        for slot in range(4):
            for p in range(n):
                for q in range(p + 1, n):
                    order = list(range(n))
                    order[p], order[q] = q, p
                    moved = list(corners)
                    moved[slot] = corners[slot].permuted(order)
                    assert np.allclose(leg_ratios(center, moved, ctx, picture), base, rtol=1e-12, atol=0)


class TestDerivativeIdentities:
    """Test suite for exp of Lagrangian gradients against leg functions"""

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_identities_hold(self, n):
        assert verify_phi_derivative(seed=7, n=n, trials=5) < 1e-5

    def test_all_four_reported(self):
        errors = phi_derivative_errors(seed=1, n=3, trials=2)
        assert set(errors) == {"L(i,j)", "Lbar(i,j)", "L(j,i)", "Lbar(j,i)"}

    def test_trials_positive(self):
        with pytest.raises(DomainError):
            phi_derivative_errors(seed=0, n=2, trials=0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
