"""
QCStar Face-Centred Cube Consistency
The fourteen 5-point equations on a face-centred cubic cell, and the randomized
experiment that solves eight of them from six free variables and checks the rest.
"""
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import CafccConfig, SolverConfig
from logging_setup import logger, log_cafcc
from metrics import ResidualTracker
from model.legs import CORNERS
from model.multispin import Picture, RapidityPair, Var, random_variable
from resilience import FailureBudget, QCStarError, SingularityError
from solver.stencil import Stencil5, residual, solve_for_corner

CORNER_LABELS = ("a", "b", "c", "d", "a'", "b'", "c'", "d'")
FACE_LABELS = ("e", "f", "g", "e'", "f'", "g'")
CELL_LABELS = CORNER_LABELS + FACE_LABELS
FREE_LABELS = ("a", "b", "c", "e", "f", "g")

# A parameter pair is two (rapidity, index) entries; plain pairs use indices (1, 2)
_ALPHA = (("alpha", 1), ("alpha", 2))
_BETA = (("beta", 1), ("beta", 2))
_GAMMA = (("gamma", 1), ("gamma", 2))


def _mixed(first: str, second: str) -> Tuple[Tuple[str, int], Tuple[str, int]]:
    names = {"a": "alpha", "b": "beta", "g": "gamma"}
    return (names[first[0]], int(first[1])), (names[second[0]], int(second[1]))


@dataclass(frozen=True)
class CellEquation:
    """A(centre; i, j, k, l; first, second) = 1 on the cell"""
    center: str
    corners: Tuple[str, str, str, str]
    first: Tuple[Tuple[str, int], Tuple[str, int]]
    second: Tuple[Tuple[str, int], Tuple[str, int]]

    @property
    def labels(self) -> Tuple[str, ...]:
        return (self.center,) + self.corners


EQUATIONS: Dict[str, CellEquation] = {eq.center: eq for eq in (
    CellEquation("g", ("a'", "a", "c'", "c"), _ALPHA, _GAMMA),
    CellEquation("g'", ("b'", "b", "d'", "d"), _ALPHA, _GAMMA),
    CellEquation("e", ("a", "b", "c", "d"), _ALPHA, _BETA),
    CellEquation("e'", ("a'", "b'", "c'", "d'"), _ALPHA, _BETA),
    CellEquation("f", ("a'", "b'", "a", "b"), _GAMMA, _BETA),
    CellEquation("f'", ("c'", "d'", "c", "d"), _GAMMA, _BETA),
    CellEquation("a", ("g", "a'", "e", "f"), _mixed("b1", "g2"), _mixed("a2", "g1")),
    CellEquation("d'", ("g'", "d", "e'", "f'"), _mixed("b2", "g1"), _mixed("a1", "g2")),
    CellEquation("b", ("g'", "b'", "e", "f"), _mixed("b2", "g2"), _mixed("a2", "g1")),
    CellEquation("b'", ("g'", "b", "e'", "f"), _mixed("b2", "g1"), _mixed("a2", "g2")),
    CellEquation("c", ("g", "c'", "e", "f'"), _mixed("b1", "g2"), _mixed("a1", "g1")),
    CellEquation("c'", ("g", "c", "e'", "f'"), _mixed("b1", "g1"), _mixed("a1", "g2")),
    CellEquation("d", ("g'", "d'", "e", "f'"), _mixed("b2", "g2"), _mixed("a1", "g1")),
    CellEquation("a'", ("g", "a", "e'", "f"), _mixed("b1", "g1"), _mixed("a2", "g2")),
)}

# (unknown, centre of the equation solved for it)
CANONICAL_ORDER: Tuple[Tuple[str, str], ...] = (
    ("d", "e"), ("a'", "a"), ("c'", "g"), ("b'", "f"),
    ("f'", "c"), ("e'", "a'"), ("g'", "b"), ("d'", "e'"),
)
ALTERNATIVE_ORDERS: Tuple[Tuple[Tuple[str, str], ...], ...] = (
    (("d", "e"), ("a'", "a"), ("c'", "g"), ("b'", "f"),
     ("e'", "a'"), ("f'", "c'"), ("g'", "b"), ("d'", "e'")),
    (("d", "e"), ("a'", "a"), ("c'", "g"), ("b'", "f"),
     ("e'", "a'"), ("f'", "c'"), ("d'", "e'"), ("g'", "d'")),
)


def check_centers(order: Sequence[Tuple[str, str]]) -> List[str]:
    """Centres of the equations not used by a solve order"""
    used = {center for _, center in order}
    return [c for c in EQUATIONS if c not in used]


@dataclass
class FccCell:
    """Variables on the fourteen cell labels and the rapidity triple"""
    alpha: RapidityPair
    beta: RapidityPair
    gamma: RapidityPair
    picture: Picture = Picture.HYPERBOLIC
    values: Dict[str, Optional[Var]] = field(default_factory=dict)

    def __post_init__(self):
        self.picture = Picture(self.picture)
        for label in CELL_LABELS:
            self.values.setdefault(label, None)
        unknown = set(self.values) - set(CELL_LABELS)
        if unknown:
            raise QCStarError(f"unknown cell labels {sorted(unknown)}")

    def copy(self) -> "FccCell":
        return FccCell(self.alpha, self.beta, self.gamma, self.picture, dict(self.values))

    def known(self, labels: Sequence[str]) -> bool:
        return all(self.values[label] is not None for label in labels)

    def pair(self, entries) -> RapidityPair:
        rapidities = {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}
        return RapidityPair(*(rapidities[name][index] for name, index in entries))

    def stencil(self, center: str) -> Stencil5:
        eq = EQUATIONS[center]
        return Stencil5(self.values[center], tuple(self.values[c] for c in eq.corners),
                        self.pair(eq.first), self.pair(eq.second), picture=self.picture)

    def equation_residual(self, center: str) -> float:
        try:
            return float(np.max(np.abs(residual(self.stencil(center)))))
        except SingularityError as e:
            raise SingularityError(str(e), label=f"equation {center}") from e

    def to_dict(self) -> Dict:
        return {
            'picture': self.picture.value,
            'alpha': self.alpha.to_dict(),
            'beta': self.beta.to_dict(),
            'gamma': self.gamma.to_dict(),
            'values': {k: (v.to_dict() if v is not None else None) for k, v in self.values.items()},
        }


def cell_equations(cell: FccCell) -> Dict[str, np.ndarray]:
    """
    A_a - 1 for all fourteen equations, keyed by centre label.

    Raises:
        QCStarError: a variable is missing
        SingularityError: labelled with the equation
    """
    missing = [label for label in CELL_LABELS if cell.values[label] is None]
    if missing:
        raise QCStarError(f"cell_equations needs all fourteen variables; missing {missing}")
    out = {}
    for center in EQUATIONS:
        try:
            out[center] = residual(cell.stencil(center))
        except SingularityError as e:
            raise SingularityError(str(e), label=f"equation {center}") from e
    return out


def random_parameters(rng: np.random.Generator, cfg: CafccConfig,
                      picture: Picture = Picture.HYPERBOLIC) -> Tuple[RapidityPair, RapidityPair, RapidityPair]:
    """Six sorted angles in (angle_low, angle_high) split into u, v, w; exponentiated when hyperbolic"""
    theta = np.sort(rng.uniform(cfg.angle_low, cfg.angle_high, size=6))
    if Picture(picture) == Picture.HYPERBOLIC:
        theta = np.exp(1j * theta)
    return (RapidityPair(theta[0], theta[1]), RapidityPair(theta[2], theta[3]),
            RapidityPair(theta[4], theta[5]))


def random_cell(n: int, rng: np.random.Generator, cfg: CafccConfig,
                picture: Picture = Picture.HYPERBOLIC) -> FccCell:
    alpha, beta, gamma = random_parameters(rng, cfg, picture)
    cell = FccCell(alpha, beta, gamma, picture)
    for label in FREE_LABELS:
        cell.values[label] = random_variable(n, Picture(picture), rng)
    return cell


@dataclass
class CafccReport:
    """Result of one consistency trial"""
    n: int
    picture: str
    seed: int
    solved_order: List[Dict] = field(default_factory=list)
    check_residuals: Dict[str, float] = field(default_factory=dict)
    success: bool = False
    backtracks: int = 0
    leaves: int = 0
    error: Optional[str] = None
    cell: Optional[FccCell] = None
    elapsed_ms: float = 0.0

    @property
    def max_check(self) -> float:
        return max(self.check_residuals.values()) if self.check_residuals else float("inf")

    def to_dict(self) -> Dict:
        return {
            'n': self.n,
            'picture': self.picture,
            'seed': self.seed,
            'solved_order': self.solved_order,
            'check_residuals': self.check_residuals,
            'success': self.success,
            'backtracks': self.backtracks,
            'leaves': self.leaves,
            'error': self.error,
        }


class _BranchSearch:
    """Depth-first search over the solution classes of the ordered solves"""

    def __init__(self, order, checks, cfg: CafccConfig, solver_cfg: SolverConfig):
        self.order = order
        self.checks = checks
        self.cfg = cfg
        self.solver_cfg = solver_cfg
        self.backtracks = 0
        self.leaves = 0
        self.best: Optional[Tuple[float, Dict[str, float], List[Dict], FccCell]] = None
        self.errors: List[str] = []

    def _evaluate(self, cell: FccCell, centers) -> Dict[str, float]:
        return {c: cell.equation_residual(c) for c in centers}

    def _ready_checks(self, cell: FccCell) -> List[str]:
        return [c for c in self.checks if cell.known(EQUATIONS[c].labels)]

    def run(self, cell: FccCell, depth: int = 0, path: Optional[List[Dict]] = None):
        path = path or []
        if depth == len(self.order):
            self.leaves += 1
            checks = self._evaluate(cell, self.checks)
            worst = max(checks.values())
            if self.best is None or worst < self.best[0]:
                self.best = (worst, checks, list(path), cell)
            return worst < self.cfg.check_tol
        unknown, center = self.order[depth]
        eq = EQUATIONS[center]
        which = CORNERS[eq.corners.index(unknown)]
        try:
            report = solve_for_corner(cell.stencil(center), which, self.solver_cfg)
        except QCStarError as e:
            self.errors.append(f"{unknown} from {center}: {type(e).__name__}: {e}")
            logger.debug(f"[CAFCC] solve {unknown} from {center} failed: {e}")
            return False
        for index, solution in enumerate(report.solutions):
            trial = cell.copy()
            trial.values[unknown] = solution
            step = {'label': unknown, 'equation': center, 'class': index, 'classes': report.branch_count}
            try:
                partial = self._evaluate(trial, self._ready_checks(trial))
            except QCStarError as e:
                self.errors.append(f"check after {unknown}: {e}")
                self.backtracks += 1
                continue
            if partial and max(partial.values()) > self.cfg.prune_tol:
                self.backtracks += 1
                continue
            if self.run(trial, depth + 1, path + [step]):
                return True
            self.backtracks += 1
        return False


def consistency_experiment(n: int, seed: int, cfg: Optional[CafccConfig] = None,
                           picture: Picture = Picture.HYPERBOLIC,
                           order: Sequence[Tuple[str, str]] = CANONICAL_ORDER,
                           solver_cfg: Optional[SolverConfig] = None) -> CafccReport:
    """
    Draw six free variables and a generic rapidity triple, solve the remaining eight
    variables in a dependency order and check the six unused equations, backtracking
    over solution classes until the checks pass or the branch tree is exhausted.
    """
    if n < 2:
        raise QCStarError(f"n must be at least 2, got {n}")
    cfg = cfg or CafccConfig()
    solver_cfg = solver_cfg or SolverConfig(seed=seed)
    picture = Picture(picture)
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    cell = random_cell(n, rng, cfg, picture)

    search = _BranchSearch(tuple(order), check_centers(order), cfg, solver_cfg)
    success = search.run(cell)
    report = CafccReport(n, picture.value, seed, success=success, backtracks=search.backtracks,
                         leaves=search.leaves)
    if search.best is not None:
        _, report.check_residuals, report.solved_order, report.cell = search.best
    if not success and search.errors:
        report.error = search.errors[-1]
    report.elapsed_ms = (time.perf_counter() - started) * 1000.0
    return report


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.default_rng([seed, trial]).integers(0, 2 ** 31 - 1))


def cafcc_batch(n: int, trials: int, seed: int, cfg: Optional[CafccConfig] = None,
                picture: Picture = Picture.HYPERBOLIC,
                solver_cfg: Optional[SolverConfig] = None) -> Dict:
    """
    Independent consistency trials with aggregate statistics.

    Returns:
        Summary with success counts, residual statistics, failure-budget state and
        one row per trial (pandas-ready)
    """
    if trials < 1:
        raise QCStarError("trials must be at least 1")
    cfg = cfg or CafccConfig()
    picture = Picture(picture)
    budget = FailureBudget(f"cafcc n={n} {picture.value}", cfg.failure_budget)
    tracker = ResidualTracker()
    rows = []
    for trial in range(trials):
        if budget.exhausted:
            break
        s = trial_seed(seed, trial)
        trial_cfg = solver_cfg.model_copy(update={"seed": s}) if solver_cfg else SolverConfig(seed=s)
        report = consistency_experiment(n, s, cfg, picture, solver_cfg=trial_cfg)
        budget.record(report.success)
        tracker.track("max_check", report.max_check)
        log_cafcc(n, picture.value, trial, report.success, report.backtracks)
        rows.append({
            'trial': trial,
            'seed': s,
            'success': report.success,
            'backtracks': report.backtracks,
            'max_check': report.max_check,
        })
    successes = sum(1 for r in rows if r['success'])
    logger.info(f"[CAFCC] n={n} {picture.value}: {successes}/{len(rows)} consistent")
    return {
        'n': n,
        'picture': picture.value,
        'trials': trials,
        'completed': len(rows),
        'successes': successes,
        'success_rate': successes / len(rows),
        'statistics': tracker.summary("max_check"),
        'budget': {k: v for k, v in budget.get_state().items() if k != 'last_failure'},
        'rows': rows,
    }
