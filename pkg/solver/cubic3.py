"""
QCStar n=3 Closed Form
G/P polynomials, the component cubic and its roots for the three-component
5-point equations with the unknown at corner l, in both pictures.

Notation: the centre is y_h; rho = alpha_1/beta_2 and c = 1/(y_h)_3.
The unhatted P-equation is A_2 = 1 written as
    P0 (r^2 + s) + P1 r + P2 (r s + 1) = 0        (hyperbolic)
    P0 (s^2 - r) + P1 r s + P2 = 0                (rational)
with r = (y_l)_1 (y_l)_2, s = (y_l)_1 + (y_l)_2; the hatted one is A_1 = 1.
"""
from dataclasses import dataclass
from itertools import permutations
from typing import List, Tuple

import numpy as np

from model.multispin import (
    MultiplicativeVar, Picture, RapidityPair, RationalVar, Var, hat,
)
from resilience import DegenerateError, DomainError

DEGENERATE_TOL = 1e-12
DISTINCT_TOL = 1e-9


@dataclass(frozen=True)
class SymmetricPair:
    """Product r and sum s of the first two components of a variable"""
    r: complex
    s: complex

    @classmethod
    def from_components(cls, t1: complex, t2: complex) -> "SymmetricPair":
        return cls(complex(t1 * t2), complex(t1 + t2))

    def components(self) -> Tuple[complex, complex]:
        """Roots of t^2 - s t + r"""
        disc = np.sqrt(complex(self.s * self.s - 4.0 * self.r))
        return complex((self.s + disc) / 2.0), complex((self.s - disc) / 2.0)


@dataclass(frozen=True)
class CubicCoeffs:
    """c0 + c1 x + c2 x^2 + c3 x^3"""
    c0: complex
    c1: complex
    c2: complex
    c3: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c3], dtype=complex)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.as_array())))

    def __call__(self, x):
        return self.c0 + x * (self.c1 + x * (self.c2 + x * self.c3))

    def derivative(self, x):
        return self.c1 + x * (2.0 * self.c2 + 3.0 * x * self.c3)


@dataclass(frozen=True)
class RootTriple:
    """The three roots t_1, t_2, t_3 of the component cubic"""
    t1: complex
    t2: complex
    t3: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3], dtype=complex)

    @property
    def product(self) -> complex:
        return complex(self.t1 * self.t2 * self.t3)

    @property
    def total(self) -> complex:
        return complex(self.t1 + self.t2 + self.t3)


def _require_n3(*variables: Var):
    for var in variables:
        if var.n != 3:
            raise DomainError(f"n=3 closed form called with n={var.n}")


# --- G and P polynomials ---

def g_polys(y_i: Var, y_j: Var, y_k: Var, y_h: Var, alpha: RapidityPair, beta: RapidityPair,
            picture) -> Tuple[complex, complex]:
    """The two 9-factor products G1, G2"""
    _require_n3(y_i, y_j, y_k, y_h)
    i, j, k = y_i.components, y_j.components, y_k.components
    h2, h3 = y_h.components[1], y_h.components[2]
    a1, a2, b1, b2 = alpha[1], alpha[2], beta[1], beta[2]
    if Picture(picture) == Picture.HYPERBOLIC:
        g1 = np.prod((i / h3 - a2 / b1) * (j - h2 * a2 / b2) * (k - h2 * a1 / b1))
        g2 = np.prod((i - h2 * a2 / b1) * (j / h3 - a2 / b2) * (k / h3 - a1 / b1))
    else:
        g1 = np.prod((i - h3 - a2 + b1) * (j - h2 - a2 + b2) * (k - h2 - a1 + b1))
        g2 = np.prod((i - h2 - a2 + b1) * (j - h3 - a2 + b2) * (k - h3 - a1 + b1))
    return complex(g1), complex(g2)


def p_polys(y_i: Var, y_j: Var, y_k: Var, y_h: Var, alpha: RapidityPair, beta: RapidityPair,
            picture) -> Tuple[complex, complex, complex]:
    """Coefficients (P0, P1, P2) of the membership polynomial"""
    g1, g2 = g_polys(y_i, y_j, y_k, y_h, alpha, beta, picture)
    h2, h3 = y_h.components[1], y_h.components[2]
    a1, b2 = alpha[1], beta[2]
    if Picture(picture) == Picture.HYPERBOLIC:
        rho, c = a1 / b2, 1.0 / h3
        p0 = g2 * rho * h2 - g1 * rho * c ** 2
        p1 = g1 * (c ** 3 - rho ** 3) - g2 * (1.0 - (rho * h2) ** 3)
        p2 = g1 * rho ** 2 * c - g2 * (rho * h2) ** 2
    else:
        p0 = g1 * (b2 - a1 - h3) + g2 * (h2 + a1 - b2)
        p1 = g1 - g2
        p2 = g1 * (h3 + a1 - b2) ** 3 + g2 * (b2 - a1 - h2) ** 3
    return complex(p0), complex(p1), complex(p2)


def _p_pair(y_i, y_j, y_k, y_h, alpha, beta, picture):
    p = np.array(p_polys(y_i, y_j, y_k, y_h, alpha, beta, picture))
    p_hat = np.array(p_polys(y_i, y_j, y_k, hat(y_h), alpha, beta, picture))
    return p, p_hat


def membership_value(p: Tuple[complex, complex, complex], pair: SymmetricPair, picture) -> complex:
    """P(r, s) for one coefficient triple"""
    p0, p1, p2 = p
    r, s = pair.r, pair.s
    if Picture(picture) == Picture.HYPERBOLIC:
        return complex(p0 * (r * r + s) + p1 * r + p2 * (r * s + 1.0))
    return complex(p0 * (s * s - r) + p1 * r * s + p2)


def membership_residuals(pair: SymmetricPair, y_i: Var, y_j: Var, y_k: Var, y_h: Var,
                         alpha: RapidityPair, beta: RapidityPair, picture) -> Tuple[float, float]:
    """Both P-equations at (r, s), scaled by coefficient and monomial size"""
    p, p_hat = _p_pair(y_i, y_j, y_k, y_h, alpha, beta, picture)
    r, s = pair.r, pair.s
    if Picture(picture) == Picture.HYPERBOLIC:
        monomials = np.abs([r * r + s, r, r * s + 1.0])
    else:
        monomials = np.abs([s * s - r, r * s, 1.0])
    out = []
    for coeffs in (p, p_hat):
        scale = float(np.max(np.abs(coeffs)) * max(1.0, float(np.max(monomials))))
        out.append(abs(membership_value(tuple(coeffs), pair, picture)) / max(scale, 1e-300))
    return out[0], out[1]


# --- Cubics ---

def f_cubic(y_i: Var, y_j: Var, y_k: Var, y_h: Var, alpha: RapidityPair, beta: RapidityPair,
            picture) -> CubicCoeffs:
    """
    Component cubic of the unknown at corner l.

    Hyperbolic: F0 + F1 x + F2 x^2 - F0 x^3 with
      F0 = P2 P^0 - P0 P^2, F1 = P2 P^1 - P1 P^2, F2 = P0 P^1 - P1 P^0.
    Rational: F0 + F1 x + F3 x^3 with the same F0, F1 and F3 = P0 P^1 - P1 P^0.
    (P^ denotes the coefficients at the hatted centre.)

    Raises:
        DegenerateError: vanishing leading coefficient
    """
    picture = Picture(picture)
    p, q = _p_pair(y_i, y_j, y_k, y_h, alpha, beta, picture)
    f0 = p[2] * q[0] - p[0] * q[2]
    f1 = p[2] * q[1] - p[1] * q[2]
    f_top = p[0] * q[1] - p[1] * q[0]
    if picture == Picture.HYPERBOLIC:
        coeffs = CubicCoeffs(complex(f0), complex(f1), complex(f_top), complex(-f0))
    else:
        coeffs = CubicCoeffs(complex(f0), complex(f1), 0j, complex(f_top))
    if abs(coeffs.c3) < DEGENERATE_TOL * max(coeffs.scale, 1e-300):
        raise DegenerateError(f"f_cubic: leading coefficient {abs(coeffs.c3):.3e} vanishes")
    return coeffs


def q_form(y_i: Var, y_j: Var, y_k: Var, y_h: Var, alpha: RapidityPair,
           beta: RapidityPair) -> Tuple[complex, complex, complex]:
    """(q0, q1, q2) of the cubic q0 + q1 r + q2 r^2 - q0 r^3 satisfied by r = (y_l)_1 (y_l)_2"""
    p, q = _p_pair(y_i, y_j, y_k, y_h, alpha, beta, Picture.HYPERBOLIC)
    q0 = p[2] * q[0] - p[0] * q[2]
    q1 = p[1] * q[0] - p[0] * q[1]
    q2 = p[1] * q[2] - p[2] * q[1]
    return complex(q0), complex(q1), complex(q2)


def r_cubic(y_i, y_j, y_k, y_h, alpha, beta) -> CubicCoeffs:
    q0, q1, q2 = q_form(y_i, y_j, y_k, y_h, alpha, beta)
    return CubicCoeffs(q0, q1, q2, -q0)


def x_cubic_from_q(y_i, y_j, y_k, y_h, alpha, beta) -> CubicCoeffs:
    """Component cubic q0 + q^1 x + q^2 x^2 - q0 x^3 with q^1 = -q2, q^2 = -q1"""
    q0, q1, q2 = q_form(y_i, y_j, y_k, y_h, alpha, beta)
    return CubicCoeffs(q0, -q2, -q1, -q0)


def cubic_roots(coeffs: CubicCoeffs, polish: bool = True) -> RootTriple:
    """
    Roots by Cardano's method on the depressed cubic, then one Newton step each.

    Raises:
        DegenerateError: vanishing leading coefficient
    """
    c0, c1, c2, c3 = coeffs.as_array()
    if abs(c3) < DEGENERATE_TOL * max(coeffs.scale, 1e-300):
        raise DegenerateError("cubic_roots: leading coefficient vanishes")
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = np.sqrt((q / 2.0) ** 2 + (p / 3.0) ** 3)
    # larger-magnitude branch avoids cancellation
    inner = -q / 2.0 + disc if abs(-q / 2.0 + disc) >= abs(-q / 2.0 - disc) else -q / 2.0 - disc
    u = inner ** (1.0 / 3.0) if inner != 0 else 0j
    omega = np.exp(2j * np.pi / 3.0)
    roots = []
    for k in range(3):
        uk = u * omega ** k
        yk = uk - p / (3.0 * uk) if uk != 0 else 0j
        roots.append(complex(yk - shift))
    if polish:
        polished = []
        for t in roots:
            d = coeffs.derivative(t)
            polished.append(complex(t - coeffs(t) / d) if d != 0 else t)
        roots = polished
    return RootTriple(*roots)


def cubic_roots_companion(coeffs: CubicCoeffs) -> np.ndarray:
    """Roots by numpy's companion-matrix eigenvalues (cross-check)"""
    return np.roots(coeffs.as_array()[::-1])


def root_triple(y_i: Var, y_j: Var, y_k: Var, y_h: Var, alpha: RapidityPair, beta: RapidityPair,
                picture) -> RootTriple:
    """
    Roots of the component cubic.

    Raises:
        DegenerateError: repeated roots
    """
    roots = cubic_roots(f_cubic(y_i, y_j, y_k, y_h, alpha, beta, picture))
    t = roots.as_array()
    scale = max(1.0, float(np.max(np.abs(t))))
    gaps = [abs(t[a] - t[b]) for a in range(3) for b in range(a + 1, 3)]
    if min(gaps) < DISTINCT_TOL * scale:
        raise DegenerateError(f"solve5_n3: repeated roots (gap {min(gaps):.3e})")
    return roots


def solve5_n3(y_i: Var, y_j: Var, y_k: Var, y_h: Var, alpha: RapidityPair, beta: RapidityPair,
              picture) -> List[Tuple[complex, complex]]:
    """The six ordered pairs ((y_l)_1, (y_l)_2) = (t_a, t_b), a != b"""
    t = root_triple(y_i, y_j, y_k, y_h, alpha, beta, picture).as_array()
    return [(complex(t[a]), complex(t[b])) for a, b in permutations(range(3), 2)]


def complete_pair(pair: Tuple[complex, complex], picture) -> Var:
    """Extend ((y)_1, (y)_2) to a 3-component variable through the picture's constraint"""
    if Picture(picture) == Picture.HYPERBOLIC:
        return MultiplicativeVar.from_independent(pair)
    return RationalVar.from_independent(pair)
