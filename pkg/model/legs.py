"""
QCStar Leg Functions
Classical Lagrangians C, L, Lbar, the leg functions phi (hyperbolic and rational),
the four-leg ratio A_a, and finite-difference checks of their derivative identities.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np
from mpmath import mp

from logging_setup import logger
from model.multispin import (
    AdditiveVar, MultiplicativeVar, Picture, RapidityPair, RationalVar, Var,
    exp_map, rapidities_from_angles,
)
from resilience import DomainError, SingularityError
from special.functions import dilog_array

CORNERS = ("i", "j", "k", "l")
SINGULAR_TOL = 1e-14
FD_STEP = 1e-5


@dataclass(frozen=True)
class LagrangianInputs:
    """Angle u - v and the two classical variables of one edge"""
    angle: complex
    left: AdditiveVar
    right: AdditiveVar

    def __post_init__(self):
        if self.left.n != self.right.n:
            raise DomainError(f"edge variables differ in n: {self.left.n} vs {self.right.n}")


@dataclass(frozen=True)
class LegContext:
    """Rapidity pairs of a 5-point equation"""
    alpha: RapidityPair
    beta: RapidityPair
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"n must be at least 2, got {self.n}")

    def hatted(self, alpha: bool, beta: bool) -> "LegContext":
        return LegContext(self.alpha.swapped() if alpha else self.alpha,
                          self.beta.swapped() if beta else self.beta, self.n)

    def exchanged(self) -> "LegContext":
        """(alpha, beta) -> (beta, alpha), the parameter order of white stencils"""
        return LegContext(self.beta, self.alpha, self.n)


# --- Lagrangians ---

def c_term(x: AdditiveVar) -> complex:
    """-i pi sum_{a<b} (x_a - x_b)"""
    n = x.n
    weights = n - 1 - 2 * np.arange(n)
    return complex(-1j * np.pi * np.dot(weights, x.components))


def lagrangian(inp: LagrangianInputs) -> complex:
    """
    L_theta(x_i, x_j) = n^2 (pi^2 - 3 theta^2)/12 + (n/4) sum (x_i^2 + x_j^2)
    + sum_{a,b} Li2(-exp(x_{i,a} - x_{j,b} + i theta)).

    Raises:
        DomainError: a dilogarithm argument hits the cut; the message names (a, b)
    """
    theta = complex(inp.angle)
    xi, xj = inp.left.components, inp.right.components
    n = xi.size
    args = -np.exp(xi[:, None] - xj[None, :] + 1j * theta)
    try:
        dilogs = dilog_array(args)
    except DomainError as e:
        raise DomainError(f"lagrangian at angle {theta:.6g}: {e} (component pair (a, b), 0-based)") from e
    quadratic = 0.25 * n * np.sum(xi * xi + xj * xj)
    return complex(n * n * (np.pi ** 2 - 3.0 * theta * theta) / 12.0 + quadratic + np.sum(dilogs))


def lagrangian_bar(inp: LagrangianInputs) -> complex:
    """Lbar_theta = L_{pi - theta}"""
    return lagrangian(LagrangianInputs(np.pi - complex(inp.angle), inp.left, inp.right))


def edge_lagrangian(theta: complex, left: AdditiveVar, right: AdditiveVar, bar: bool = False) -> complex:
    inp = LagrangianInputs(theta, left, right)
    return lagrangian_bar(inp) if bar else lagrangian(inp)


def lagrangian_mp(theta, left: Sequence, right: Sequence):
    """
    L_theta in the working precision of mpmath, for components already held as mpc.
    Callers set the precision with mp.workdps.
    """
    theta = mp.mpc(theta)
    n = len(left)
    quadratic = mp.mpf(n) / 4 * mp.fsum(c * c for c in list(left) + list(right))
    dilogs = mp.fsum(mp.polylog(2, -mp.exp(a - b + mp.j * theta)) for a in left for b in right)
    return n * n * (mp.pi ** 2 - 3 * theta * theta) / 12 + quadratic + dilogs


def c_term_mp(x: Sequence):
    n = len(x)
    return -mp.j * mp.pi * mp.fsum((n - 1 - 2 * a) * c for a, c in enumerate(x))


# --- Leg functions ---

def _guard(den: np.ndarray, scale: np.ndarray, what: str, components: np.ndarray):
    small = np.abs(den) <= SINGULAR_TOL * np.maximum(scale, 1e-300)
    if np.any(small):
        row, b = (int(v) for v in np.argwhere(small)[0])
        raise SingularityError(f"{what}: vanishing denominator at components (a={components[row] + 1}, b={b + 1})")


def _phi_rows(rows, y_i: MultiplicativeVar, y_j: MultiplicativeVar, alpha: complex, beta: complex) -> np.ndarray:
    yi, yj = y_i.components, y_j.components
    n = yi.size
    big_y = np.prod(yi[:-1])
    head = yi[rows]
    left, right = alpha * head[:, None], beta * yj[None, :]
    den = left - right
    _guard(den, np.abs(left) + np.abs(right), "phi", np.arange(n)[rows])
    num = np.prod(alpha - beta * big_y * yj)
    prefactor = np.power((head / big_y).astype(complex), n / 2.0)
    return prefactor * num / np.prod(den, axis=1)


def _phi_rational_rows(rows, y_i: RationalVar, y_j: RationalVar, alpha: complex, beta: complex) -> np.ndarray:
    yi, yj = y_i.components, y_j.components
    big_y = np.sum(yi[:-1])
    head = yi[rows]
    den = head[:, None] - yj[None, :] + (alpha - beta)
    scale = np.abs(head[:, None]) + np.abs(yj[None, :]) + abs(alpha) + abs(beta)
    _guard(den, scale, "phi_rational", np.arange(yi.size)[rows])
    num = np.prod(big_y + yj - alpha + beta)
    return num / np.prod(den, axis=1)


def phi_vector(y_i: MultiplicativeVar, y_j: MultiplicativeVar, alpha: complex, beta: complex) -> np.ndarray:
    """phi_a(y_i, y_j; alpha, beta) for a = 1..n-1"""
    return _phi_rows(slice(0, y_i.n - 1), y_i, y_j, alpha, beta)


def phi_rational_vector(y_i: RationalVar, y_j: RationalVar, alpha: complex, beta: complex) -> np.ndarray:
    """phi^(r)_a(y_i, y_j; alpha, beta) for a = 1..n-1"""
    return _phi_rational_rows(slice(0, y_i.n - 1), y_i, y_j, alpha, beta)


def _check_index(a: int, n: int):
    if not 1 <= a <= n:
        raise DomainError(f"component index a={a} outside 1..{n}")


def phi(a: int, y_i: MultiplicativeVar, y_j: MultiplicativeVar, alpha: complex, beta: complex) -> complex:
    """
    Hyperbolic leg function phi_a (1-based a). a = n uses the n-th component in the
    same product; the 5-point system itself uses a = 1..n-1.
    """
    _check_index(a, y_i.n)
    return complex(_phi_rows([a - 1], y_i, y_j, alpha, beta)[0])


def phi_rational(a: int, y_i: RationalVar, y_j: RationalVar, alpha: complex, beta: complex) -> complex:
    """Rational leg function phi^(r)_a (1-based a, a = n allowed as for phi)"""
    _check_index(a, y_i.n)
    return complex(_phi_rational_rows([a - 1], y_i, y_j, alpha, beta)[0])


def _leg_ratio_rows(rows, center: Var, corners: Sequence[Var], ctx: LegContext, picture) -> np.ndarray:
    picture = Picture(picture)
    leg = _phi_rows if picture == Picture.HYPERBOLIC else _phi_rational_rows
    y_i, y_j, y_k, y_l = corners
    alpha, beta = ctx.alpha, ctx.beta
    values = {}
    for label, var, a, b in (("i", y_i, alpha[2], beta[1]), ("l", y_l, alpha[1], beta[2]),
                             ("j", y_j, alpha[2], beta[2]), ("k", y_k, alpha[1], beta[1])):
        try:
            values[label] = leg(rows, center, var, a, b)
        except SingularityError as e:
            raise SingularityError(str(e), label=f"corner {label}") from e
    den = values["j"] * values["k"]
    if np.any(den == 0):
        raise SingularityError("leg ratio: zero leg in the denominator", label="corner j/k")
    return values["i"] * values["l"] / den


def leg_ratios(center: Var, corners: Sequence[Var], ctx: LegContext, picture) -> np.ndarray:
    """
    A_a(f; i, j, k, l; alpha, beta) for a = 1..n-1:
    phi(f,i; a2,b1) phi(f,l; a1,b2) / (phi(f,j; a2,b2) phi(f,k; a1,b1)).

    Raises:
        SingularityError: labelled with the offending corner
    """
    return _leg_ratio_rows(slice(0, center.n - 1), center, corners, ctx, picture)


def leg_ratio(a: int, center: Var, corners: Sequence[Var], ctx: LegContext, picture) -> complex:
    """Single component A_a (1-based a); a = n gives the complementary component"""
    _check_index(a, center.n)
    return complex(_leg_ratio_rows([a - 1], center, corners, ctx, picture)[0])


# --- Derivative identities ---

def constrained_gradient(func: Callable[[AdditiveVar], complex], x: AdditiveVar,
                         step: float = FD_STEP) -> np.ndarray:
    """
    Central differences of func with respect to the independent components x_1..x_{n-1};
    perturbing x_a moves x_n by the opposite amount.
    """
    n = x.n
    grad = np.empty(n - 1, dtype=complex)
    for a in range(n - 1):
        delta = np.zeros(n)
        delta[a], delta[-1] = step, -step
        plus = func(AdditiveVar(x.components + delta))
        minus = func(AdditiveVar(x.components - delta))
        grad[a] = (plus - minus) / (2.0 * step)
    return grad


def phi_derivative_errors(seed: int, n: int, trials: int) -> Dict[str, float]:
    """
    Maximum relative errors of the four derivative identities
      exp dL_theta(x_i, x_j)/dx_i    = phi(y_i, y_j; alpha, -beta)
      exp dLbar_theta(x_i, x_j)/dx_i = phi(y_i, y_j; beta, alpha)
      exp dL_theta(x_j, x_i)/dx_i    = phi(y_i, y_j; beta, -alpha)^-1
      exp dLbar_theta(x_j, x_i)/dx_i = phi(y_i, y_j; alpha, beta)^-1
    over random real spins, with theta = u - v in (0, pi), alpha = e^{iu}, beta = e^{iv}.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    errors = {"L(i,j)": 0.0, "Lbar(i,j)": 0.0, "L(j,i)": 0.0, "Lbar(j,i)": 0.0}
    for _ in range(trials):
        x_i = AdditiveVar.from_independent(rng.uniform(-1.0, 1.0, size=n - 1))
        x_j = AdditiveVar.from_independent(rng.uniform(-1.0, 1.0, size=n - 1))
        v = rng.uniform(0.0, 0.5)
        theta = rng.uniform(0.2, np.pi - 0.2)
        u = v + theta
        alpha, beta = np.exp(1j * u), np.exp(1j * v)
        y_i, y_j = exp_map(x_i), exp_map(x_j)

        checks = {
            "L(i,j)": (lambda x: edge_lagrangian(theta, x, x_j), phi_vector(y_i, y_j, alpha, -beta)),
            "Lbar(i,j)": (lambda x: edge_lagrangian(theta, x, x_j, bar=True), phi_vector(y_i, y_j, beta, alpha)),
            "L(j,i)": (lambda x: edge_lagrangian(theta, x_j, x), 1.0 / phi_vector(y_i, y_j, beta, -alpha)),
            "Lbar(j,i)": (lambda x: edge_lagrangian(theta, x_j, x, bar=True), 1.0 / phi_vector(y_i, y_j, alpha, beta)),
        }
        for name, (func, expected) in checks.items():
            got = np.exp(constrained_gradient(func, x_i))
            err = float(np.max(np.abs(got - expected) / np.abs(expected)))
            errors[name] = max(errors[name], err)
    logger.debug(f"[LEGS] derivative identities n={n}, {trials} trials: {errors}")
    return errors


def verify_phi_derivative(seed: int, n: int, trials: int) -> float:
    """Largest relative error over all four derivative identities"""
    return max(phi_derivative_errors(seed, n, trials).values())


def star_lagrangian_black(x_f: AdditiveVar, corners: Sequence[AdditiveVar], u, v) -> complex:
    """
    L^(B)(x_f; x_i, x_j, x_k, x_l) = C(x_f) + L_{u2-v1}(f,i) + L_{u1-v2}(f,l)
    + Lbar_{u2-v2}(j,f) + Lbar_{u1-v1}(k,f).
    """
    x_i, x_j, x_k, x_l = corners
    return (c_term(x_f)
            + edge_lagrangian(u[1] - v[0], x_f, x_i)
            + edge_lagrangian(u[0] - v[1], x_f, x_l)
            + edge_lagrangian(u[1] - v[1], x_j, x_f, bar=True)
            + edge_lagrangian(u[0] - v[0], x_k, x_f, bar=True))


def star_lagrangian_white(x_g: AdditiveVar, corners: Sequence[AdditiveVar], u, v) -> complex:
    """
    L^(W)(x_g; x_i, x_j, x_k, x_l) = C(x_g) + L_{u1-v2}(i,g) + L_{u2-v1}(l,g)
    + Lbar_{u1-v1}(g,j) + Lbar_{u2-v2}(g,k).
    """
    x_i, x_j, x_k, x_l = corners
    return (c_term(x_g)
            + edge_lagrangian(u[0] - v[1], x_i, x_g)
            + edge_lagrangian(u[1] - v[0], x_l, x_g)
            + edge_lagrangian(u[0] - v[0], x_g, x_j, bar=True)
            + edge_lagrangian(u[1] - v[1], x_g, x_k, bar=True))


def star_saddle_errors(x_center: AdditiveVar, corners: Sequence[AdditiveVar], u, v,
                       shift: bool = True) -> Dict[str, float]:
    """
    Compare exp of the finite-difference gradients of the star Lagrangians with
    A_a(f; i,j,k,l; alpha, beta) and A_a(g; i,k,j,l; beta, alpha)^-1.
    """
    alpha, beta = rapidities_from_angles(u, v, shift=shift)
    n = x_center.n
    ys = [exp_map(x) for x in corners]
    y_c = exp_map(x_center)
    ctx = LegContext(alpha, beta, n)

    black = np.exp(constrained_gradient(lambda x: star_lagrangian_black(x, corners, u, v), x_center))
    black_expected = leg_ratios(y_c, ys, ctx, Picture.HYPERBOLIC)
    white = np.exp(constrained_gradient(lambda x: star_lagrangian_white(x, corners, u, v), x_center))
    white_expected = 1.0 / leg_ratios(y_c, [ys[0], ys[2], ys[1], ys[3]], ctx.exchanged(), Picture.HYPERBOLIC)
    return {
        "black": float(np.max(np.abs(black - black_expected) / np.abs(black_expected))),
        "white": float(np.max(np.abs(white - white_expected) / np.abs(white_expected))),
    }
