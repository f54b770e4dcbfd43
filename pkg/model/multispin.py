"""
QCStar Multicomponent Variables
Sum-to-zero and product-to-one variables, rapidity pairs, the coordinate
changes between pictures, and their JSON form.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from reporting import encode_complex_array, decode_complex_array
from resilience import DomainError
from special.functions import QcParams

CONSTRAINT_TOL = 1e-12
LIFT_SNAP_TOL = 1e-12


class Picture(Enum):
    """Which 5-point system a variable belongs to"""
    HYPERBOLIC = "hyperbolic"
    RATIONAL = "rational"


def _frozen_array(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class _Components:
    """Immutable vector of n components with a constraint checked on construction"""
    components: np.ndarray

    kind = "components"
    dtype = complex

    def __post_init__(self):
        object.__setattr__(self, "components", _frozen_array(self.components, self.dtype))
        if self.components.size < 2:
            raise DomainError(f"{type(self).__name__}: need n >= 2 components")
        if not np.all(np.isfinite(self.components)):
            raise DomainError(f"{type(self).__name__}: non-finite component")
        self._validate()

    def _validate(self):
        pass

    @property
    def n(self) -> int:
        return int(self.components.size)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, index):
        return self.components[index]

    def __iter__(self):
        return iter(self.components)

    def __repr__(self) -> str:
        body = ", ".join(f"{c:.6g}" for c in self.components)
        return f"{type(self).__name__}({body})"

    def with_components(self, values):
        return type(self)(np.asarray(values))

    def permuted(self, order: Sequence[int]):
        return self.with_components(self.components[list(order)])

    def to_dict(self) -> Dict:
        return {'type': self.kind, 'components': encode_complex_array(self.components)}


class _SumToZero(_Components):
    def _validate(self):
        scale = max(1.0, float(np.max(np.abs(self.components))))
        total = abs(complex(np.sum(self.components)))
        if total > CONSTRAINT_TOL * scale * self.n:
            raise DomainError(f"{type(self).__name__}: components sum to {total:.3e}, not 0")

    @classmethod
    def from_independent(cls, first):
        first = np.asarray(first, dtype=cls.dtype).ravel()
        return cls(np.append(first, -np.sum(first)))


@dataclass(frozen=True, eq=False)
class AdditiveVar(_SumToZero):
    """Classical x-variable: n complex components summing to zero"""
    kind = "additive"


@dataclass(frozen=True, eq=False)
class RationalVar(_SumToZero):
    """Rational-picture variable: n complex components summing to zero"""
    kind = "rational"
    picture = Picture.RATIONAL


@dataclass(frozen=True, eq=False)
class SpinVar(_SumToZero):
    """Quantum-side spin: n real components summing to zero"""
    kind = "spin"
    dtype = float

    def __post_init__(self):
        values = np.asarray(self.components)
        if np.iscomplexobj(values) and np.any(np.abs(np.imag(values)) > 0):
            raise DomainError("SpinVar: components must be real")
        object.__setattr__(self, "components", np.real(values))
        super().__post_init__()

    def to_dict(self) -> Dict:
        return {'type': self.kind, 'components': [float(c) for c in self.components]}


@dataclass(frozen=True, eq=False)
class MultiplicativeVar(_Components):
    """Hyperbolic-picture y-variable: n nonzero complex components with product one"""
    kind = "multiplicative"
    picture = Picture.HYPERBOLIC

    def _validate(self):
        if np.any(self.components == 0):
            raise DomainError("MultiplicativeVar: zero component")
        product = complex(np.prod(self.components))
        if abs(product - 1.0) > CONSTRAINT_TOL * self.n:
            raise DomainError(f"MultiplicativeVar: product {product:.6g} differs from 1")

    @classmethod
    def from_independent(cls, first):
        first = np.asarray(first, dtype=complex).ravel()
        if np.any(first == 0):
            raise DomainError("MultiplicativeVar: zero component")
        return cls(np.append(first, 1.0 / np.prod(first)))


Var = Union[MultiplicativeVar, RationalVar]

_VARIABLE_TYPES = {cls.kind: cls for cls in (AdditiveVar, RationalVar, SpinVar, MultiplicativeVar)}


def variable_from_dict(data: Dict):
    """Rebuild any variable from its JSON form; constraints are re-validated"""
    try:
        cls = _VARIABLE_TYPES[data['type']]
    except KeyError as e:
        raise DomainError(f"unknown variable type {data.get('type')!r}") from e
    if cls is SpinVar:
        return SpinVar(np.asarray(data['components'], dtype=float))
    return cls(decode_complex_array(data['components']))


def variable_type(picture: Picture):
    return MultiplicativeVar if picture == Picture.HYPERBOLIC else RationalVar


def picture_of(var) -> Picture:
    try:
        return var.picture
    except AttributeError as e:
        raise DomainError(f"{type(var).__name__} carries no picture") from e


@dataclass(frozen=True)
class RapidityPair:
    """Ordered pair of nonzero parameters such as alpha = (alpha_1, alpha_2)"""
    first: complex
    second: complex

    def __post_init__(self):
        object.__setattr__(self, "first", complex(self.first))
        object.__setattr__(self, "second", complex(self.second))
        if self.first == 0 or self.second == 0:
            raise DomainError("RapidityPair entries must be nonzero")

    def __getitem__(self, index: int) -> complex:
        """1-based access matching alpha_1, alpha_2"""
        if index == 1:
            return self.first
        if index == 2:
            return self.second
        raise IndexError(index)

    def swapped(self) -> "RapidityPair":
        return RapidityPair(self.second, self.first)

    def to_dict(self) -> Dict:
        return {'first': encode_complex_array([self.first])[0],
                'second': encode_complex_array([self.second])[0]}

    @classmethod
    def from_dict(cls, data: Dict) -> "RapidityPair":
        first, second = decode_complex_array([data['first'], data['second']])
        return cls(first, second)


# --- Coordinate maps ---

def exp_map(x: AdditiveVar) -> MultiplicativeVar:
    """Componentwise exponential; the last component is the reciprocal of the others' product"""
    return MultiplicativeVar.from_independent(np.exp(x.components[:-1]))


def log_map(y: MultiplicativeVar) -> AdditiveVar:
    """
    Principal logarithm per component; the last one is moved by a multiple of 2 pi i
    so the sum vanishes and exp_map(log_map(y)) == y.

    Imaginary parts below LIFT_SNAP_TOL * |y_a| are dropped first, so a negative
    real component lifts to +i pi whatever the sign of its roundoff.
    """
    comps = y.components.astype(complex)
    noise = np.abs(comps.imag) <= LIFT_SNAP_TOL * np.abs(comps)
    comps = np.where(noise, comps.real + 0j, comps)
    logs = np.log(comps)
    winding = np.round(np.sum(logs).imag / (2.0 * np.pi))
    logs[-1] -= 2j * np.pi * winding
    return AdditiveVar(logs - np.sum(logs).real / y.n)


def hat(y: Var) -> Var:
    """Exchange components 1 and 2 of an n=3 variable"""
    if y.n != 3:
        raise DomainError(f"hat is defined for n=3 only, got n={y.n}")
    return y.permuted([1, 0, 2])


def qc_scale(spin: SpinVar, qc: QcParams) -> AdditiveVar:
    """Classical variable x with spin = x / sqrt(2 pi hbar)"""
    return AdditiveVar(spin.components * np.sqrt(2.0 * np.pi * qc.hbar))


def qc_unscale(x: AdditiveVar, qc: QcParams) -> SpinVar:
    """Inverse of qc_scale; x must be real"""
    if np.any(np.abs(x.components.imag) > 0):
        raise DomainError("qc_unscale: classical variable has complex components")
    return SpinVar(x.components.real / np.sqrt(2.0 * np.pi * qc.hbar))


def canonical_order(y):
    """Components sorted by (real part, imaginary part)"""
    order = np.lexsort((y.components.imag, y.components.real))
    return y.permuted(order)


def distance_up_to_permutation(a, b) -> float:
    """
    Largest relative componentwise deviation under the best matching of components.
    Accepts variables or plain component arrays.

    The matching minimizes the summed relative deviations (bipartite assignment).
    """
    a = np.asarray(getattr(a, "components", a)).ravel()
    b = np.asarray(getattr(b, "components", b)).ravel()
    if a.size != b.size:
        raise DomainError(f"cannot compare variables with n={a.size} and n={b.size}")
    ca, cb = a[:, None], b[None, :]
    cost = np.abs(ca - cb) / np.maximum(1.0, np.maximum(np.abs(ca), np.abs(cb)))
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


# --- Parameters ---

def rapidities_from_angles(u: Sequence[float], v: Sequence[float], shift: bool = True,
                           picture: Picture = Picture.HYPERBOLIC) -> Tuple[RapidityPair, RapidityPair]:
    """
    Map angle pairs (u, v) to rapidity pairs (alpha, beta).

    Hyperbolic picture: alpha_j = e^{i u_j}, beta_j = e^{i v_j}; with shift=True the
    second entry of both pairs is multiplied by -1 (u_2, v_2 advanced by pi), the
    convention under which the saddle-point equations of the star Lagrangians are A_a = 1.
    Rational picture: the angles are used as the parameters themselves.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if picture == Picture.RATIONAL:
        return RapidityPair(u[0], u[1]), RapidityPair(v[0], v[1])
    sign = -1.0 if shift else 1.0
    alpha = RapidityPair(np.exp(1j * u[0]), sign * np.exp(1j * u[1]))
    beta = RapidityPair(np.exp(1j * v[0]), sign * np.exp(1j * v[1]))
    return alpha, beta


def angles_from_rapidities(alpha: RapidityPair, beta: RapidityPair,
                           shift: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of rapidities_from_angles in the hyperbolic picture (principal angles)"""
    sign = -1.0 if shift else 1.0
    u = np.array([np.log(alpha.first), np.log(sign * alpha.second)]) / 1j
    v = np.array([np.log(beta.first), np.log(sign * beta.second)]) / 1j
    return u, v


# --- Random generic variables ---

def random_multiplicative(n: int, rng: np.random.Generator, spread: float = 1.0,
                          phase: float = 0.0) -> MultiplicativeVar:
    """Log-uniform components in [e^-spread, e^spread], optionally with random phases"""
    logs = rng.uniform(-spread, spread, size=n - 1)
    if phase:
        logs = logs + 1j * rng.uniform(-phase, phase, size=n - 1)
    return MultiplicativeVar.from_independent(np.exp(logs))


def random_rational(n: int, rng: np.random.Generator, spread: float = 1.0) -> RationalVar:
    """Uniform real components in [-spread, spread] completed to sum zero"""
    return RationalVar.from_independent(rng.uniform(-spread, spread, size=n - 1))


def random_variable(n: int, picture: Picture, rng: np.random.Generator, spread: float = 1.0) -> Var:
    if picture == Picture.HYPERBOLIC:
        return random_multiplicative(n, rng, spread)
    return random_rational(n, rng, spread)


def random_spin(n: int, rng: np.random.Generator, spread: float = 1.0) -> SpinVar:
    return SpinVar.from_independent(rng.uniform(-spread, spread, size=n - 1))
