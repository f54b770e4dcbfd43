"""
QCStar Boltzmann Weights
Vertex weight S, edge weights W and Wbar built from the hyperbolic gamma
function, and the IRF weights obtained by integrating over the central spin.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from config import QuadratureConfig
from logging_setup import logger, log_quadrature
from model.multispin import SpinVar
from resilience import AccuracyError, DomainError
from special.functions import HyperbolicParams, extend_log_hyp_gamma, log_hyp_gamma_batch

GL_ORDER = 16
INITIAL_PANELS = {2: 32, 3: 4}


@dataclass(frozen=True)
class WeightParams:
    """Modulus and the rapidities p = (p1, p2), q = (q1, q2) with 0 < p_a - q_b < eta_h"""
    hyper: HyperbolicParams
    p: Tuple[float, float]
    q: Tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        eta = self.hyper.eta_h
        for a, pa in enumerate(self.p, start=1):
            for b, qb in enumerate(self.q, start=1):
                if not 0.0 < pa - qb < eta:
                    raise DomainError(
                        f"p{a} - q{b} = {pa - qb:.6g} outside (0, eta_h={eta:.6g})"
                    )

    @property
    def eta(self) -> float:
        return self.hyper.eta_h


def _spin(xi) -> np.ndarray:
    return np.asarray(getattr(xi, "components", xi), dtype=float)


def _differences(xi: np.ndarray) -> np.ndarray:
    """xi_a - xi_b for a < b along the last axis"""
    n = xi.shape[-1]
    rows, cols = np.triu_indices(n, k=1)
    return xi[..., rows] - xi[..., cols]


def weight_S(xi, hp: HyperbolicParams):
    """prod_{a<b} 4 sinh(pi (xi_a - xi_b)/b) sinh(pi (xi_a - xi_b) b); broadcasts over leading axes"""
    d = _differences(_spin(xi))
    b = hp.b
    return np.prod(4.0 * np.sinh(np.pi * d / b) * np.sinh(np.pi * d * b), axis=-1)


def weight_S_gamma_form(xi, hp: HyperbolicParams) -> complex:
    """prod_{a<b} Gamma_h(d - i eta) Gamma_h(-d - i eta), d = xi_a - xi_b"""
    d = _differences(_spin(xi))
    eta = hp.eta_h
    total = 0j
    for dab in d.ravel():
        total += extend_log_hyp_gamma(dab - 1j * eta, hp) + extend_log_hyp_gamma(-dab - 1j * eta, hp)
    return complex(np.exp(total))


def log_weight_W(theta: float, xi_i, xi_j, hp: HyperbolicParams) -> complex:
    """sum_{a,b} log Gamma_h(xi_{i,a} - xi_{j,b} + i theta), extended outside the strip"""
    args = _spin(xi_i)[:, None] - _spin(xi_j)[None, :] + 1j * theta
    return complex(sum(extend_log_hyp_gamma(z, hp) for z in args.ravel()))


def weight_W(theta: float, xi_i, xi_j, hp: HyperbolicParams) -> complex:
    """
    prod_{a,b} Gamma_h(xi_{i,a} - xi_{j,b} + i theta).

    Raises:
        PoleError: an extended gamma factor hits a pole
    """
    return complex(np.exp(log_weight_W(theta, xi_i, xi_j, hp)))


def weight_Wbar(theta: float, xi_i, xi_j, hp: HyperbolicParams) -> complex:
    """Wbar_theta = W_{eta_h - theta}"""
    return weight_W(hp.eta_h - theta, xi_i, xi_j, hp)


# --- IRF weights ---

def _centre_spins(ts: np.ndarray) -> np.ndarray:
    """Rows (t_1, ..., t_{n-1}, -sum t)"""
    return np.concatenate([ts, -ts.sum(axis=1, keepdims=True)], axis=1)


def _edge_logs(theta: float, left: np.ndarray, right: np.ndarray, hp: HyperbolicParams) -> np.ndarray:
    """Batched log W_theta(left, right); one of the two sides is a fixed boundary spin"""
    left = np.atleast_2d(left)
    right = np.atleast_2d(right)
    args = left[:, :, None] - right[:, None, :] + 1j * theta
    return log_hyp_gamma_batch(args, hp).sum(axis=(1, 2))


def irf_factors(kind: str, wp: WeightParams):
    """
    The four edges of an IRF weight as (angle, boundary label, centre on the left).
    B: W_{p2-q1}(f,i) Wbar_{p2-q2}(j,f) Wbar_{p1-q1}(k,f) W_{p1-q2}(f,l)
    W: W_{p1-q2}(i,g) Wbar_{p1-q1}(g,j) Wbar_{p2-q2}(g,k) W_{p2-q1}(l,g)
    """
    (p1, p2), (q1, q2) = wp.p, wp.q
    eta = wp.eta
    if kind == "B":
        return [(p2 - q1, "i", True), (eta - (p2 - q2), "j", False),
                (eta - (p1 - q1), "k", False), (p1 - q2, "l", True)]
    if kind == "W":
        return [(p1 - q2, "i", False), (eta - (p1 - q1), "j", True),
                (eta - (p2 - q2), "k", True), (p2 - q1, "l", False)]
    raise DomainError(f'IRF weight kind must be "B" or "W", got {kind!r}')


def irf_integrand(kind: str, boundary: Sequence, wp: WeightParams, ts: np.ndarray) -> np.ndarray:
    """S(xi) times the four edge weights, at centre spins built from the rows of ts"""
    spins = dict(zip("ijkl", (_spin(x) for x in boundary)))
    centre = _centre_spins(np.atleast_2d(ts))
    logs = np.zeros(centre.shape[0], dtype=complex)
    for theta, label, centre_left in irf_factors(kind, wp):
        if centre_left:
            logs += _edge_logs(theta, centre, spins[label], wp.hyper)
        else:
            logs += _edge_logs(theta, spins[label], centre, wp.hyper)
    return weight_S(centre, wp.hyper) * np.exp(logs)


def _gl_grid(radius: float, panels: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor composite Gauss-Legendre nodes and weights on [-R, R]^dim"""
    nodes, weights = np.polynomial.legendre.leggauss(GL_ORDER)
    edges = np.linspace(-radius, radius, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()
    grids = np.meshgrid(*([xs] * dim), indexing="ij")
    wgrids = np.meshgrid(*([ws] * dim), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    return points, np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)


def _edge_ratio(kind, boundary, wp, radius) -> float:
    """Largest integrand magnitude on the boundary of the box relative to the peak on a coarse grid"""
    dim = len(_spin(boundary[0])) - 1
    line = np.linspace(-radius, radius, 41)
    grid = np.stack([g.ravel() for g in np.meshgrid(*([line] * dim), indexing="ij")], axis=1)
    values = np.abs(irf_integrand(kind, boundary, wp, grid))
    on_edge = np.any(np.isclose(np.abs(grid), radius), axis=1)
    peak = float(np.max(values))
    return float(np.max(values[on_edge]) / peak) if peak > 0 else 0.0


def decay_ratio(kind: str, boundary: Sequence, wp: WeightParams, radius: Optional[float] = None,
                qc: Optional[QuadratureConfig] = None) -> float:
    """Integrand magnitude at the truncation radius relative to its peak"""
    qc = qc or QuadratureConfig()
    return _edge_ratio(kind, boundary, wp, radius or qc.radius_factor * wp.eta)


def irf_weight(kind: str, boundary: Sequence, wp: WeightParams,
               qc: Optional[QuadratureConfig] = None) -> Tuple[complex, float, float]:
    """
    Integral of S(xi) times the four edge weights over the n-1 free centre components.

    The box [-R, R]^{n-1} starts at R = radius_factor * eta_h and doubles while the
    integrand at its boundary exceeds tail_tol relative to the peak. Panels double
    until two successive composite rules agree to the target.

    Returns:
        (value, error estimate, radius)

    Raises:
        AccuracyError: no agreement within max_subdivisions panels, with the best estimate
    """
    qc = qc or QuadratureConfig()
    spins = [_spin(x) for x in boundary]
    if len(spins) != 4 or len({s.size for s in spins}) != 1:
        raise DomainError("irf_weight needs four boundary spins of equal n")
    n = spins[0].size
    if n not in (2, 3):
        raise DomainError(f"irf_weight supports n=2 and n=3, got n={n}")
    dim = n - 1

    radius = qc.radius_factor * wp.eta
    for _ in range(qc.max_radius_doublings):
        if _edge_ratio(kind, boundary, wp, radius) < qc.tail_tol:
            break
        radius *= 2.0

    def integrate(panels):
        points, weights = _gl_grid(radius, panels, dim)
        return complex(np.dot(irf_integrand(kind, boundary, wp, points), weights))

    panels = INITIAL_PANELS[n]
    previous = integrate(panels)
    error = float("inf")
    while 2 * panels <= qc.max_subdivisions:
        panels *= 2
        value = integrate(panels)
        error = abs(value - previous)
        previous = value
        if error <= qc.target * max(abs(value), 1e-300):
            log_quadrature(f"V^({kind}) n={n}", value, error, radius)
            return value, error, radius
    logger.warning(f"[QUADRATURE] V^({kind}) not converged: error {error:.2e} at {panels} panels")
    raise AccuracyError(f"irf_weight {kind}: error {error:.2e} above target {qc.target:.1e}",
                        estimate=previous, error=error)
