"""
QCStar Stencil Solver
5-point stencils, their residuals, and solving for any corner: closed forms for
n=2 and n=3, damped multistart Newton for general n, permutation-aware dedup.
"""
import time
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from config import SolverConfig
from logging_setup import log_solve
from model.legs import CORNERS, LegContext, leg_ratios, phi_rational_vector, phi_vector
from model.multispin import (
    MultiplicativeVar, Picture, RapidityPair, RationalVar, Var,
    canonical_order, distance_up_to_permutation, random_variable, rapidities_from_angles,
    variable_type,
)
from resilience import (
    DegenerateError, DomainError, SearchFailure, SingularityError, retry_with_escalation,
)
from solver import cubic3

SolveConfig = SolverConfig
MATCH_TOL = 1e-6
DEGENERATE_TOL = 1e-14

# Relabelings moving each unknown to slot l; A maps to A or 1/A, so A = 1 is preserved.
# Values: (corner order, hat alpha, hat beta)
_TO_SLOT_L = {
    "l": (("i", "j", "k", "l"), False, False),
    "i": (("l", "k", "j", "i"), True, True),
    "j": (("k", "l", "i", "j"), True, False),
    "k": (("j", "i", "l", "k"), False, True),
}


@dataclass(frozen=True)
class Stencil5:
    """Centre, four corners (i, j, k, l), colour and parameters of one 5-point equation"""
    center: Var
    corners: Tuple[Optional[Var], Optional[Var], Optional[Var], Optional[Var]]
    alpha: RapidityPair
    beta: RapidityPair
    color: str = "black"
    picture: Picture = Picture.HYPERBOLIC

    def __post_init__(self):
        object.__setattr__(self, "picture", Picture(self.picture))
        object.__setattr__(self, "corners", tuple(self.corners))
        if self.color not in ("black", "white"):
            raise DomainError(f"color must be black or white, got {self.color!r}")
        if len(self.corners) != 4:
            raise DomainError("a stencil has exactly four corners")
        expected = variable_type(self.picture)
        for var in (self.center,) + tuple(c for c in self.corners if c is not None):
            if not isinstance(var, expected):
                raise DomainError(f"{type(var).__name__} in a {self.picture.value} stencil")
            if var.n != self.center.n:
                raise DomainError("all stencil variables must share n")

    @property
    def n(self) -> int:
        return self.center.n

    def corner(self, label: str) -> Optional[Var]:
        return self.corners[CORNERS.index(label)]

    def with_corner(self, label: str, value: Optional[Var]) -> "Stencil5":
        corners = list(self.corners)
        corners[CORNERS.index(label)] = value
        return replace(self, corners=tuple(corners))

    def black_form(self) -> Tuple[Dict[str, str], LegContext]:
        """
        Map from black-form slots to this stencil's corner labels, and the black-form parameters.
        White stencils read A(centre; i, k, j, l; beta, alpha).
        """
        ctx = LegContext(self.alpha, self.beta, self.n)
        if self.color == "black":
            return {s: s for s in CORNERS}, ctx
        return {"i": "i", "j": "k", "k": "j", "l": "l"}, ctx.exchanged()


@dataclass
class SolverReport:
    """Solution classes found for one unknown corner"""
    solutions: List[Var]
    residuals: List[float]
    branch_count: int
    iterations: int
    method: str = ""
    which: str = "l"
    pair_classes: Optional[int] = None
    starts_used: int = 0
    best_residual: float = float("inf")
    elapsed_ms: float = 0.0

    def to_dict(self) -> Dict:
        return {
            'solutions': [s.to_dict() for s in self.solutions],
            'residuals': self.residuals,
            'branch_count': self.branch_count,
            'pair_classes': self.pair_classes,
            'iterations': self.iterations,
            'method': self.method,
            'which': self.which,
            'starts_used': self.starts_used,
            'best_residual': self.best_residual,
        }


def residual(st: Stencil5) -> np.ndarray:
    """A_a - 1, a = 1..n-1, in the colour-appropriate argument order"""
    if any(c is None for c in st.corners):
        raise DomainError("residual needs all four corners")
    slots, ctx = st.black_form()
    corners = [st.corner(slots[s]) for s in CORNERS]
    return leg_ratios(st.center, corners, ctx, st.picture) - 1.0


def max_residual(st: Stencil5) -> float:
    return float(np.max(np.abs(residual(st))))


def match_up_to_permutation(a: Var, b: Var, tol: float = MATCH_TOL) -> bool:
    """True iff a and b agree componentwise within tol after the best matching of components"""
    return distance_up_to_permutation(canonical_order(a), canonical_order(b)) <= tol


# --- Reduction to an equation with the unknown at slot l ---

@dataclass(frozen=True)
class _SlotLEquation:
    """A(center; i, j, k, unknown; alpha, beta) = 1 in the stencil's picture"""
    center: Var
    known: Tuple[Var, Var, Var]
    ctx: LegContext
    picture: Picture

    def ratios(self, unknown: Var) -> np.ndarray:
        return leg_ratios(self.center, list(self.known) + [unknown], self.ctx, self.picture)

    def residual(self, unknown: Var) -> float:
        return float(np.max(np.abs(self.ratios(unknown) - 1.0)))


def _slot_l_equation(st: Stencil5, which: str) -> _SlotLEquation:
    if which not in CORNERS:
        raise DomainError(f"unknown corner {which!r}")
    slots, ctx = st.black_form()
    black_slot = next(s for s, lbl in slots.items() if lbl == which)
    order, hat_a, hat_b = _TO_SLOT_L[black_slot]
    for slot in order[:3]:
        if st.corner(slots[slot]) is None:
            raise DomainError(f"corner {slots[slot]} must be known to solve for {which}")
    known = tuple(st.corner(slots[slot]) for slot in order[:3])
    return _SlotLEquation(st.center, known, ctx.hatted(hat_a, hat_b), st.picture)


def _dedup(candidates: Sequence[Var], eq: _SlotLEquation) -> Tuple[List[Var], List[float]]:
    classes: List[Var] = []
    residuals: List[float] = []
    for var in candidates:
        if any(match_up_to_permutation(var, c) for c in classes):
            continue
        classes.append(canonical_order(var))
        residuals.append(eq.residual(var))
    order = sorted(range(len(classes)),
                   key=lambda m: (classes[m].components.real.tolist(), classes[m].components.imag.tolist()))
    return [classes[m] for m in order], [residuals[m] for m in order]


# --- n = 2 ---

def _n2_roots(eq: _SlotLEquation) -> Tuple[complex, complex]:
    """phi(f, l; alpha_1, beta_2) = K with K fixed by the three known legs"""
    leg = phi_vector if eq.picture == Picture.HYPERBOLIC else phi_rational_vector
    y_i, y_j, y_k = eq.known
    a1, a2, b1, b2 = eq.ctx.alpha[1], eq.ctx.alpha[2], eq.ctx.beta[1], eq.ctx.beta[2]
    f = complex(eq.center.components[0])
    k_val = complex((leg(eq.center, y_j, a2, b2) * leg(eq.center, y_k, a1, b1)
                     / leg(eq.center, y_i, a2, b1))[0])
    if eq.picture == Picture.HYPERBOLIC:
        # A z^2 + B z + A = 0, roots z and 1/z
        quad = -a1 * b2 * f * (1.0 - k_val)
        lin = a1 ** 2 + b2 ** 2 * f ** 2 - k_val * (a1 ** 2 * f ** 2 + b2 ** 2)
        if abs(quad) < DEGENERATE_TOL * max(abs(quad), abs(lin), 1e-300):
            raise DegenerateError("solve_n2: degenerate quadratic (leading coefficient vanishes)")
        disc = np.sqrt(complex(lin * lin - 4.0 * quad * quad))
        top = -lin + disc if abs(-lin + disc) >= abs(-lin - disc) else -lin - disc
        z = top / (2.0 * quad)
        return complex(z), complex(1.0 / z)
    # z^2 (K - 1) = K (f + delta)^2 - (f - delta)^2, roots z and -z
    delta = a1 - b2
    if abs(k_val - 1.0) < DEGENERATE_TOL:
        raise DegenerateError("solve_n2: degenerate quadratic (K = 1)")
    z = np.sqrt(complex((k_val * (f + delta) ** 2 - (f - delta) ** 2) / (k_val - 1.0)))
    return complex(z), complex(-z)


def solve_n2(st: Stencil5, which: str = "l") -> Tuple[complex, complex]:
    """
    Two roots of the quadratic for the first component of the unknown; they are the
    components of one solution class, (z, 1/z) or (z, -z).

    Raises:
        DomainError: n != 2
        DegenerateError: degenerate quadratic
    """
    if st.n != 2:
        raise DomainError(f"solve_n2 needs n=2, got n={st.n}")
    return _n2_roots(_slot_l_equation(st, which))


# --- Newton ---

def _chart(picture: Picture):
    """(to_var, from_var) between the n-1 free coordinates and a variable"""
    if picture == Picture.HYPERBOLIC:
        return (lambda w: MultiplicativeVar.from_independent(np.exp(w)),
                lambda var: np.log(var.components[:-1].astype(complex)))
    return (lambda w: RationalVar.from_independent(w),
            lambda var: var.components[:-1].astype(complex))


def _newton_from(eq: _SlotLEquation, w0: np.ndarray, cfg: SolverConfig) -> Tuple[Optional[Var], float, int]:
    """Damped Newton on log A(w) = 0 from one start; returns (solution or None, residual, iterations)"""
    to_var, _ = _chart(eq.picture)
    m = w0.size

    def evaluate(w):
        try:
            with np.errstate(all="ignore"):
                var = to_var(w)
                ratios = eq.ratios(var)
        except (SingularityError, DomainError, FloatingPointError, ZeroDivisionError):
            return None, None
        if not np.all(np.isfinite(ratios)) or np.any(ratios == 0):
            return None, None
        return var, ratios

    w = np.asarray(w0, dtype=complex)
    var, ratios = evaluate(w)
    if var is None:
        return None, float("inf"), 0
    f = np.log(ratios)
    norm = float(np.linalg.norm(f))
    best = float(np.max(np.abs(ratios - 1.0)))
    for iteration in range(1, cfg.max_iter + 1):
        if best <= cfg.tol:
            return var, best, iteration - 1
        jac = np.empty((m, m), dtype=complex)
        for col in range(m):
            step = cfg.fd_step * max(1.0, abs(w[col]))
            dw = np.zeros(m, dtype=complex)
            dw[col] = step
            _, plus = evaluate(w + dw)
            _, minus = evaluate(w - dw)
            if plus is None or minus is None:
                return None, best, iteration
            jac[:, col] = (np.log(plus / ratios) - np.log(minus / ratios)) / (2.0 * step)
        try:
            delta = linalg.solve(jac, -f)
        except (linalg.LinAlgError, ValueError):
            return None, best, iteration
        if not np.all(np.isfinite(delta)):
            return None, best, iteration
        scale = 1.0
        for _ in range(cfg.max_halvings + 1):
            trial = w + scale * delta
            t_var, t_ratios = evaluate(trial)
            if t_var is not None:
                t_f = np.log(t_ratios)
                t_norm = float(np.linalg.norm(t_f))
                if t_norm < norm:
                    w, var, ratios, f, norm = trial, t_var, t_ratios, t_f, t_norm
                    best = float(np.max(np.abs(ratios - 1.0)))
                    break
            scale *= 0.5
        else:
            # stagnation: no decrease along the Newton direction
            return (var if best <= cfg.tol else None), best, iteration
    return (var if best <= cfg.tol else None), best, cfg.max_iter


def _starts(eq: _SlotLEquation, starts: int, rng: np.random.Generator) -> List[np.ndarray]:
    _, from_var = _chart(eq.picture)
    m = eq.center.n - 1
    known = [eq.center] + list(eq.known)
    base = [from_var(v) for v in known]
    stack = np.array([v.components for v in known])
    if eq.picture == Picture.HYPERBOLIC:
        logs = np.log(stack.astype(complex))
        geometric = logs.mean(axis=0)
        arithmetic = np.log(stack.mean(axis=0).astype(complex))
        base += [geometric[:-1] - geometric.mean(), arithmetic[:-1]]
    else:
        base.append(stack.mean(axis=0)[:-1])
    out = []
    for vec in base:
        out.append(np.asarray(vec, dtype=complex) + 0.05 * rng.standard_normal(m))
        if len(out) >= starts:
            return out
    while len(out) < starts:
        out.append(rng.uniform(-2.0, 2.0, size=m) + 1j * rng.uniform(-1.0, 1.0, size=m))
    return out


def _newton_search(eq: _SlotLEquation, cfg: SolverConfig, starts: int, seed: int) -> SolverReport:
    rng = np.random.default_rng(seed)
    found: List[Var] = []
    total_iterations = 0
    best = float("inf")
    used = 0
    for w0 in _starts(eq, starts, rng):
        used += 1
        var, res, iterations = _newton_from(eq, w0, cfg)
        total_iterations += iterations
        best = min(best, res)
        if var is not None:
            found.append(var)
            if cfg.early_stop and len(_dedup(found, eq)[0]) >= cfg.early_stop:
                break
    if not found:
        raise SearchFailure(f"Newton multistart found no solution in {used} starts", best)
    classes, residuals = _dedup(found, eq)
    return SolverReport(classes, residuals, len(classes), total_iterations, method="newton",
                        starts_used=used, best_residual=min(residuals))


def solve_newton_general(st: Stencil5, which: str, cfg: Optional[SolverConfig] = None) -> SolverReport:
    """
    Damped Newton multistart on log A_a = 0 in the free coordinates of the unknown.

    Raises:
        SearchFailure: no start converged
    """
    cfg = cfg or SolverConfig()
    started = time.perf_counter()
    eq = _slot_l_equation(st, which)
    report = _newton_search(eq, cfg, cfg.starts, cfg.seed)
    report.which = which
    report.elapsed_ms = (time.perf_counter() - started) * 1000.0
    return report


def _polish(eq: _SlotLEquation, var: Var, cfg: SolverConfig) -> Var:
    """A few Newton steps from an accurate closed-form solution"""
    if eq.residual(var) <= cfg.tol:
        return var
    _, from_var = _chart(eq.picture)
    polished, _, _ = _newton_from(eq, from_var(var), cfg.model_copy(update={"max_iter": 8}))
    return polished if polished is not None else var


def solve_for_corner(st: Stencil5, which: str, cfg: Optional[SolverConfig] = None) -> SolverReport:
    """
    Solve the stencil's equation for one corner.

    n=2: closed-form quadratic; n=3: component cubic; n>=4: Newton multistart with
    escalating restarts. Solutions are canonicalized and deduplicated up to permutation.

    Raises:
        SearchFailure: no solution within tolerance
        DegenerateError: degenerate closed-form data
    """
    cfg = cfg or SolverConfig()
    started = time.perf_counter()
    eq = _slot_l_equation(st, which)
    n = st.n
    pair_classes = None
    if n == 2:
        method = "closed-form-n2"
        z1, z2 = _n2_roots(eq)
        if st.picture == Picture.RATIONAL:
            candidates = [RationalVar(np.array([z1, z2]))]
        else:
            candidates = [MultiplicativeVar.from_independent([z1])]
        candidates = [_polish(eq, v, cfg) for v in candidates]
        report = SolverReport(*_dedup(candidates, eq), branch_count=0, iterations=0, method=method)
    elif n == 3:
        method = "cubic"
        y_i, y_j, y_k = eq.known
        pairs = cubic3.solve5_n3(y_i, y_j, y_k, eq.center, eq.ctx.alpha, eq.ctx.beta, st.picture)
        candidates = [_polish(eq, cubic3.complete_pair(p, st.picture), cfg) for p in pairs]
        # the six ordered pairs are three unordered pairs of one root triple
        pair_classes = len(pairs) // 2
        report = SolverReport(*_dedup(candidates, eq), branch_count=0, iterations=0, method=method)
    else:
        method = "newton"
        report = retry_with_escalation(
            lambda starts, seed: _newton_search(eq, cfg, starts, seed),
            starts=cfg.starts, seed=cfg.seed, max_attempts=1 + cfg.retry_attempts,
        )
    report.branch_count = len(report.solutions)
    report.pair_classes = pair_classes
    report.which = which
    report.method = method
    good = [(s, r) for s, r in zip(report.solutions, report.residuals) if r <= cfg.tol]
    if not good:
        best = min(report.residuals) if report.residuals else float("inf")
        raise SearchFailure(f"no solution for corner {which} within tol {cfg.tol:.1e}", best)
    report.solutions = [s for s, _ in good]
    report.residuals = [r for _, r in good]
    report.branch_count = len(good)
    report.best_residual = min(report.residuals)
    report.elapsed_ms = (time.perf_counter() - started) * 1000.0
    log_solve(n, st.picture.value, method, report.branch_count, max(report.residuals),
              report.starts_used or None)
    return report


def random_stencil(n: int, picture: Picture, rng: np.random.Generator,
                   u: Sequence[float] = (1.9, 1.5), v: Sequence[float] = (0.4, 0.2),
                   color: str = "black", unknown: str = "l") -> Stencil5:
    """Generic stencil with random centre and corners, the unknown corner left empty"""
    picture = Picture(picture)
    alpha, beta = rapidities_from_angles(u, v, shift=True, picture=picture)
    values = [random_variable(n, picture, rng) for _ in range(5)]
    corners = tuple(None if label == unknown else values[1 + m] for m, label in enumerate(CORNERS))
    return Stencil5(values[0], corners, alpha, beta, color=color, picture=picture)
