"""
QCStar Special Functions
Complex dilogarithm, the hyperbolic gamma function with its meromorphic extension,
and the leading quasi-classical asymptotics of its logarithm.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from config import config, SpecialConfig
from logging_setup import logger
from resilience import DomainError, PoleError

GL_ORDER = 16
TAIL_DECAY = 35.0  # e^-35 below double precision relative to O(1) integrals
MIN_CUTOFF = 20.0


@dataclass(frozen=True)
class HyperbolicParams:
    """Modulus b > 0 and derived crossing parameter eta_h = (b + 1/b)/2"""
    b: float

    def __post_init__(self):
        if not np.isfinite(self.b) or self.b <= 0:
            raise DomainError(f"b must be a positive real number, got {self.b}")

    @property
    def eta_h(self) -> float:
        return 0.5 * (self.b + 1.0 / self.b)

    @classmethod
    def from_hbar(cls, hbar: float) -> "HyperbolicParams":
        return cls(b=float(np.sqrt(hbar / (2.0 * np.pi))))


@dataclass(frozen=True)
class QcParams:
    """Quasi-classical expansion parameter hbar = 2 pi b^2"""
    hbar: float

    def __post_init__(self):
        if not np.isfinite(self.hbar) or self.hbar <= 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")

    @property
    def b(self) -> float:
        return float(np.sqrt(self.hbar / (2.0 * np.pi)))

    @classmethod
    def from_b(cls, b: float) -> "QcParams":
        if b <= 0:
            raise DomainError(f"b must be positive, got {b}")
        return cls(hbar=2.0 * np.pi * b * b)

    def hyperbolic(self) -> HyperbolicParams:
        return HyperbolicParams(self.b)


# --- Dilogarithm ---

def dilog(z: complex) -> complex:
    """
    Principal branch of Li2(z), cut along real z >= 1.

    Raises:
        DomainError: z on the branch cut
    """
    z = complex(z)
    if z.imag == 0.0 and z.real >= 1.0:
        # Li2(1) is finite but the cut starts there; the whole ray is rejected
        raise DomainError(f"dilog: z={z} lies on the branch cut [1, inf)")
    return complex(special.spence(1.0 - z))


def dilog_array(zs) -> np.ndarray:
    """
    Vectorized principal Li2.

    Raises:
        DomainError: some entry on the branch cut; the message carries its index
    """
    zs = np.asarray(zs, dtype=complex)
    on_cut = (zs.imag == 0.0) & (zs.real >= 1.0)
    if np.any(on_cut):
        index = tuple(int(i) for i in np.argwhere(on_cut)[0])
        raise DomainError(f"dilog: entry {index} = {zs[index]} lies on the branch cut [1, inf)")
    return special.spence(1.0 - zs)


# --- Hyperbolic gamma ---

def _check_strip(z: complex, params: HyperbolicParams):
    if not abs(z.imag) < params.eta_h:
        raise DomainError(
            f"z={z} outside the strip |Im z| < eta_h={params.eta_h:.6g}; use extend_hyp_gamma"
        )


def _integrand(x, z, b: float, eta: float):
    """(1/x)(iz/x - sinh(2izx)/(2 sinh(bx) sinh(x/b))) with decaying exponentials only"""
    num = np.exp((2j * z - 2.0 * eta) * x) - np.exp((-2j * z - 2.0 * eta) * x)
    den = (-np.expm1(-2.0 * b * x)) * (-np.expm1(-2.0 * x / b))
    return (1j * z / x - num / den) / x


def _small_x_integral(z, b: float, x0: float):
    """Integral of the order-x^3 Taylor expansion of the integrand on [0, x0]"""
    w = 2j * z
    s2 = (b ** 2 + b ** -2) / 6.0
    s4 = (b ** 4 + b ** -4) / 120.0 + 1.0 / 36.0
    c4 = w ** 4 / 120.0 - s2 * w ** 2 / 6.0 + s2 ** 2 - s4
    return -0.5 * w * ((w ** 2 / 6.0 - s2) * x0 + c4 * x0 ** 3 / 3.0)


def _cutoffs(z_abs_max: float, im_abs_max: float, params: HyperbolicParams,
             settings: SpecialConfig):
    b = params.b
    x0 = settings.small_x_factor * min(b, 1.0 / b) / max(1.0, z_abs_max)
    kappa = 2.0 * (params.eta_h - im_abs_max)
    x_max = max(MIN_CUTOFF, TAIL_DECAY / kappa)
    return x0, x_max


def log_hyp_gamma(z: complex, params: HyperbolicParams,
                  settings: Optional[SpecialConfig] = None) -> complex:
    """
    Exponent of the hyperbolic gamma function for z in the strip |Im z| < eta_h.

    The integral is split into a Taylor piece on [0, x0], adaptive quadrature
    on [x0, X] and the analytic tail iz/X of the non-decaying term.

    Raises:
        DomainError: z outside the strip
    """
    settings = settings or config.special
    z = complex(z)
    _check_strip(z, params)
    if z == 0:
        return 0j
    b, eta = params.b, params.eta_h
    x0, x_max = _cutoffs(abs(z), abs(z.imag), params, settings)

    breaks = [x for x in (1.0, 4.0, 10.0) if x0 < x < x_max]
    pieces = [x0] + breaks + [x_max]
    total = _small_x_integral(z, b, x0) + 1j * z / x_max
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        re, _ = integrate.quad(lambda x: _integrand(x, z, b, eta).real, lo, hi,
                               epsabs=settings.quad_epsabs, epsrel=settings.quad_epsrel,
                               limit=settings.quad_limit)
        im, _ = integrate.quad(lambda x: _integrand(x, z, b, eta).imag, lo, hi,
                               epsabs=settings.quad_epsabs, epsrel=settings.quad_epsrel,
                               limit=settings.quad_limit)
        total += re + 1j * im
    return complex(total)


def hyp_gamma(z: complex, params: HyperbolicParams,
              settings: Optional[SpecialConfig] = None) -> complex:
    """Hyperbolic gamma function on the strip |Im z| < eta_h"""
    return complex(np.exp(log_hyp_gamma(z, params, settings)))


def log_hyp_gamma_batch(zs, params: HyperbolicParams,
                        settings: Optional[SpecialConfig] = None) -> np.ndarray:
    """
    Vectorized exponent of the hyperbolic gamma function.

    Uses one composite Gauss-Legendre rule for the whole batch, with panels
    narrow enough for the largest oscillation frequency present.

    Raises:
        DomainError: any point outside the strip
    """
    settings = settings or config.special
    zs = np.asarray(zs, dtype=complex)
    shape = zs.shape
    flat = zs.ravel()
    if flat.size == 0:
        return np.zeros(shape, dtype=complex)
    im_max = float(np.max(np.abs(flat.imag)))
    if not im_max < params.eta_h:
        bad = flat[np.argmax(np.abs(flat.imag))]
        _check_strip(complex(bad), params)

    b, eta = params.b, params.eta_h
    x0, x_max = _cutoffs(float(np.max(np.abs(flat))), im_max, params, settings)
    width = min(0.5, 2.0 / (1.0 + 2.0 * float(np.max(np.abs(flat.real)))))
    n_panels = int(np.ceil((x_max - x0) / width))
    edges = np.linspace(x0, x_max, n_panels + 1)
    nodes, weights = np.polynomial.legendre.leggauss(GL_ORDER)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()

    out = _small_x_integral(flat, b, x0) + 1j * flat / x_max
    chunk = max(1, 200000 // xs.size)
    for start in range(0, flat.size, chunk):
        block = flat[start:start + chunk, None]
        values = _integrand(xs[None, :], block, b, eta)
        out[start:start + chunk] += values @ ws
    out[flat == 0] = 0.0
    return out.reshape(shape)


# --- Meromorphic extension ---

def shift_factor(z: complex, step: float, params: HyperbolicParams) -> complex:
    """Gamma_h(z - i s)/Gamma_h(z) for s = b or 1/b"""
    # s = b pairs with cosh(pi b (2z - ib)/2); s = 1/b with cosh(pi (2z - i/b)/(2b))
    return complex(2.0 * np.cosh(np.pi * step * (2.0 * z - 1j * step) / 2.0))


def extend_log_hyp_gamma(z: complex, params: HyperbolicParams,
                         settings: Optional[SpecialConfig] = None) -> complex:
    """
    Exponent of the meromorphically extended hyperbolic gamma function.

    Shifts z into the strip by steps of i b or i/b, accumulating the logarithms
    of the difference-equation factors.

    Raises:
        PoleError: a difference-equation factor vanishes (pole or zero of Gamma_h)
        DomainError: the shift budget is exhausted
    """
    settings = settings or config.special
    z = complex(z)
    limit = settings.strip_margin * params.eta_h
    steps = (params.b, 1.0 / params.b)
    acc = 0j
    shifts = 0
    while abs(z.imag) >= limit:
        if shifts >= settings.max_shifts:
            raise DomainError(f"extend_hyp_gamma: no convergence after {shifts} shifts")
        if z.imag > 0:
            step = min(steps, key=lambda s: abs(z.imag - s))
            factor = shift_factor(z, step, params)
            if abs(factor) < settings.pole_tol:
                raise PoleError(f"extend_hyp_gamma: pole at z={z} (step {step:.6g})")
            # Gamma(z) = Gamma(z - i s) / c_s(z)
            acc -= np.log(factor)
            z = z - 1j * step
        else:
            step = min(steps, key=lambda s: abs(z.imag + s))
            factor = shift_factor(z + 1j * step, step, params)
            if abs(factor) < settings.pole_tol:
                raise PoleError(f"extend_hyp_gamma: zero at z={z} (step {step:.6g})")
            # Gamma(z) = Gamma(z + i s) * c_s(z + i s)
            acc += np.log(factor)
            z = z + 1j * step
        shifts += 1
    if shifts:
        logger.debug(f"[GAMMA] extension used {shifts} shift(s)")
    return complex(acc + log_hyp_gamma(z, params, settings))


def extend_hyp_gamma(z: complex, params: HyperbolicParams,
                     settings: Optional[SpecialConfig] = None) -> complex:
    """Meromorphically extended hyperbolic gamma function"""
    return complex(np.exp(extend_log_hyp_gamma(z, params, settings)))


# --- Quasi-classical asymptotics ---

def qc_leading_log(z: complex, qc: QcParams) -> complex:
    """
    Leading term of log Gamma_h(z/(2 pi b)) as hbar -> 0:
    -(i/hbar) (Li2(-e^z) + pi^2/12 + z^2/4).

    Raises:
        DomainError: Im z >= pi
    """
    z = complex(z)
    if z.imag >= np.pi:
        raise DomainError(f"qc_leading_log: Im z={z.imag:.6g} >= pi")
    return complex(-1j / qc.hbar * (dilog(-np.exp(z)) + np.pi ** 2 / 12.0 + z * z / 4.0))


def qc_leading_error(z: complex, qc: QcParams) -> float:
    """|log Gamma_h(z/(2 pi b)) - qc_leading_log(z)| with the extended function as oracle"""
    params = qc.hyperbolic()
    exact = extend_log_hyp_gamma(z / (2.0 * np.pi * params.b), params)
    return float(abs(exact - qc_leading_log(z, qc)))


# --- Identity checks ---

def inversion_error(z: complex, params: HyperbolicParams,
                    settings: Optional[SpecialConfig] = None) -> float:
    """|Gamma_h(z) Gamma_h(-z) - 1|"""
    z = complex(z)
    total = extend_log_hyp_gamma(z, params, settings) + extend_log_hyp_gamma(-z, params, settings)
    return float(abs(np.exp(total) - 1.0))


def shift_errors(z: complex, params: HyperbolicParams,
                 settings: Optional[SpecialConfig] = None) -> dict:
    """Relative errors of both difference equations Gamma_h(z - i s)/Gamma_h(z) = c_s(z), s = b, 1/b"""
    z = complex(z)
    base = extend_log_hyp_gamma(z, params, settings)
    errors = {}
    for name, step in (("b", params.b), ("1/b", 1.0 / params.b)):
        expected = shift_factor(z, step, params)
        ratio = np.exp(extend_log_hyp_gamma(z - 1j * step, params, settings) - base)
        errors[name] = float(abs(ratio - expected) / abs(expected))
    return errors
