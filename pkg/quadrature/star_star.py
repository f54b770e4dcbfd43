"""
QCStar Star-Star Relation
Numerical check of the star-star relation between the two IRF weights, and of
its quasi-classical counterpart: saddle points of the star Lagrangians solve the
5-point equations.
"""
from typing import Dict, Optional, Sequence

import numpy as np

from config import QuadratureConfig
from logging_setup import logger
from model.legs import star_saddle_errors
from model.multispin import AdditiveVar, SpinVar
from resilience import DomainError
from quadrature.weights import WeightParams, irf_weight, log_weight_W

EXPENSIVE_TARGET = 1e-4


def star_star_sides(boundary: Sequence[SpinVar], wp: WeightParams,
                    qc: Optional[QuadratureConfig] = None) -> Dict:
    """
    Both sides of the relation
      W_{p1-p2}(i,k) W_{q1-q2}(i,j) V^(B) = W_{p1-p2}(j,l) W_{q1-q2}(k,l) V^(W)
    with their quadrature error estimates.
    """
    qc = qc or QuadratureConfig()
    n = len(boundary[0])
    if n == 3:
        if not qc.expensive:
            raise DomainError("the n=3 star-star check is a two-dimensional quadrature; enable expensive")
        qc = qc.model_copy(update={"target": max(qc.target, EXPENSIVE_TARGET)})
    elif n != 2:
        raise DomainError(f"star-star check supports n=2 (and n=3 when expensive), got n={n}")
    y_i, y_j, y_k, y_l = boundary
    (p1, p2), (q1, q2) = wp.p, wp.q
    hp = wp.hyper

    v_black, err_black, radius_black = irf_weight("B", boundary, wp, qc)
    v_white, err_white, radius_white = irf_weight("W", boundary, wp, qc)
    left_prefactor = np.exp(log_weight_W(p1 - p2, y_i, y_k, hp) + log_weight_W(q1 - q2, y_i, y_j, hp))
    right_prefactor = np.exp(log_weight_W(p1 - p2, y_j, y_l, hp) + log_weight_W(q1 - q2, y_k, y_l, hp))
    lhs = complex(left_prefactor * v_black)
    rhs = complex(right_prefactor * v_white)
    scale = max(abs(lhs), abs(rhs))
    return {
        'lhs': lhs,
        'rhs': rhs,
        'residual': abs(lhs - rhs) / scale if scale > 0 else 0.0,
        'quadrature_error': max(err_black / max(abs(v_black), 1e-300),
                                err_white / max(abs(v_white), 1e-300)),
        'radius': max(radius_black, radius_white),
        'n': n,
    }


def star_star_residual(boundary: Sequence[SpinVar], wp: WeightParams,
                       qc: Optional[QuadratureConfig] = None) -> float:
    """|LHS - RHS| / max(|LHS|, |RHS|) of the star-star relation"""
    sides = star_star_sides(boundary, wp, qc)
    logger.info(f"[QUADRATURE] star-star n={sides['n']} residual {sides['residual']:.2e}")
    return float(sides['residual'])


def random_boundary(n: int, rng: np.random.Generator, spread: float = 1.0):
    """Four real boundary spins with components in [-spread, spread] summing to zero"""
    return [SpinVar.from_independent(rng.uniform(-spread, spread, size=n - 1)) for _ in range(4)]


def saddle_bridge_check(n: int, seed: int, trials: int, shift: bool = True) -> float:
    """
    Largest relative error between exp of the finite-difference gradients of the
    black/white star Lagrangians and the corresponding four-leg ratios, over random
    real variables and angles with every difference u_a - v_b in (0.5, 2.5).
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x_center = AdditiveVar.from_independent(rng.uniform(-1.0, 1.0, size=n - 1))
        corners = [AdditiveVar.from_independent(rng.uniform(-1.0, 1.0, size=n - 1)) for _ in range(4)]
        u = rng.uniform(1.0, 2.0, size=2)
        v = rng.uniform(0.0, 0.5, size=2)
        errors = star_saddle_errors(x_center, corners, u, v, shift=shift)
        worst = max(worst, errors["black"], errors["white"])
    logger.debug(f"[QUADRATURE] saddle bridge n={n}, {trials} trials, shift={shift}: {worst:.2e}")
    return worst
