"""
QCStar Checkerboard Lattice
Bipartite square lattice evolved toward the north-east by the black/white
5-point equations, from corner or staircase initial conditions.

Sites are the points (x, y) of a width x height box with x + y even; a site is
black iff x is even. The stencil of a centre (x, y) has corners
i = (x-1, y+1), j = (x+1, y+1), k = (x-1, y-1), l = (x+1, y-1).
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from config import SolverConfig
from logging_setup import logger, log_error, log_evolution
from metrics import ResidualTracker
from model.multispin import (
    Picture, RapidityPair, Var, distance_up_to_permutation, random_variable,
    rapidities_from_angles, variable_from_dict, variable_type,
)
from resilience import ConfigurationError, QCStarError
from solver.stencil import SolverReport, Stencil5, max_residual, solve_for_corner

Site = Tuple[int, int]
MIN_SIZE = 4
INITIAL_SPREAD = 1.0  # log-uniform components in [e^-1, e]

_OFFSETS = {"i": (-1, 1), "j": (1, 1), "k": (-1, -1), "l": (1, -1)}


class BranchPolicy(Enum):
    """How a new site picks among solution classes"""
    NEAREST = "nearest"  # closest to the mean of the stencil's known variables
    INDEXED = "indexed"  # fixed index into the canonically ordered classes


def site_color(site: Site) -> str:
    return "black" if site[0] % 2 == 0 else "white"


def box_sites(width: int, height: int) -> List[Site]:
    """All lattice points of the box, ordered by anti-diagonal then x"""
    sites = [(x, y) for x in range(width) for y in range(height) if (x + y) % 2 == 0]
    return sorted(sites, key=lambda s: (s[0] + s[1], s[0]))


def staircase_level(width: int, height: int) -> int:
    """Smallest even number not below max(width, height)"""
    m = max(width, height)
    return m + (m % 2)


@dataclass
class InitialCondition:
    """Kind of initial condition and optional user values on its crossed sites"""
    kind: str = "corner"
    values: Dict[Site, Var] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("corner", "staircase"):
            raise ConfigurationError(f'initial condition must be "corner" or "staircase", got {self.kind!r}')

    def crossed_sites(self, width: int, height: int) -> List[Site]:
        if self.kind == "corner":
            return [s for s in box_sites(width, height) if s[0] <= 1 or s[1] <= 1]
        m = staircase_level(width, height)
        return [s for s in box_sites(width, height) if s[0] + s[1] in (m - 2, m)]

    def domain(self, width: int, height: int) -> List[Site]:
        """Sites the evolution is expected to fill"""
        if self.kind == "corner":
            return box_sites(width, height)
        m = staircase_level(width, height)
        return [s for s in box_sites(width, height) if s[0] + s[1] >= m - 2]


@dataclass
class CheckerLattice:
    """Site values, colouring and parameters of one checkerboard lattice"""
    width: int
    height: int
    n: int
    u: Tuple[float, float]
    v: Tuple[float, float]
    picture: Picture = Picture.HYPERBOLIC
    ic: str = "corner"
    sites: Dict[Site, Optional[Var]] = field(default_factory=dict)
    branch_log: List[Dict] = field(default_factory=list)

    def __post_init__(self):
        self.picture = Picture(self.picture)
        self.u = tuple(float(a) for a in self.u)
        self.v = tuple(float(a) for a in self.v)
        for site in box_sites(self.width, self.height):
            self.sites.setdefault(site, None)

    @property
    def params(self) -> Tuple[RapidityPair, RapidityPair]:
        return rapidities_from_angles(self.u, self.v, shift=True, picture=self.picture)

    def color(self, site: Site) -> str:
        return site_color(site)

    def get(self, site: Site) -> Optional[Var]:
        return self.sites.get(site)

    def filled(self) -> List[Site]:
        return [s for s in box_sites(self.width, self.height) if self.sites[s] is not None]

    def domain(self) -> List[Site]:
        return InitialCondition(self.ic).domain(self.width, self.height)

    @property
    def complete(self) -> bool:
        return all(self.sites[s] is not None for s in self.domain())

    def copy(self) -> "CheckerLattice":
        return CheckerLattice(self.width, self.height, self.n, self.u, self.v, self.picture,
                              self.ic, dict(self.sites), list(self.branch_log))

    def stencil_sites(self, center: Site) -> Dict[str, Site]:
        x, y = center
        return {label: (x + dx, y + dy) for label, (dx, dy) in _OFFSETS.items()}

    def stencil_at(self, center: Site) -> Optional[Stencil5]:
        """Stencil centred at a site when the centre and all four corners are filled"""
        if self.sites.get(center) is None:
            return None
        corners = [self.sites.get(s) for s in self.stencil_sites(center).values()]
        if any(c is None for c in corners):
            return None
        alpha, beta = self.params
        return Stencil5(self.sites[center], tuple(corners), alpha, beta,
                        color=self.color(center), picture=self.picture)

    def stencils(self) -> Iterator[Tuple[Site, Stencil5]]:
        for site in box_sites(self.width, self.height):
            st = self.stencil_at(site)
            if st is not None:
                yield site, st

    def residual_map(self) -> pd.DataFrame:
        """Max |A_a - 1| of every complete stencil"""
        rows = [{'x': s[0], 'y': s[1], 'color': self.color(s), 'max_residual': max_residual(st)}
                for s, st in self.stencils()]
        return pd.DataFrame(rows, columns=['x', 'y', 'color', 'max_residual'])

    def max_residual(self) -> float:
        frame = self.residual_map()
        return float(frame['max_residual'].max()) if len(frame) else 0.0

    def to_dict(self) -> Dict:
        return {
            'width': self.width,
            'height': self.height,
            'n': self.n,
            'picture': self.picture.value,
            'u': list(self.u),
            'v': list(self.v),
            'ic': self.ic,
            'sites': [
                {'x': s[0], 'y': s[1], 'color': self.color(s),
                 'value': self.sites[s].to_dict() if self.sites[s] is not None else None}
                for s in box_sites(self.width, self.height)
            ],
            'branch_log': self.branch_log,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CheckerLattice":
        sites = {(int(e['x']), int(e['y'])): variable_from_dict(e['value']) if e['value'] else None
                 for e in data['sites']}
        return cls(int(data['width']), int(data['height']), int(data['n']),
                   tuple(data['u']), tuple(data['v']), Picture(data['picture']),
                   data.get('ic', 'corner'), sites, list(data.get('branch_log', [])))


def site_rng(seed: int, site: Site) -> np.random.Generator:
    """Generator determined by the global seed and the site coordinates"""
    return np.random.default_rng([seed, site[0], site[1]])


def site_seed(seed: int, site: Site) -> int:
    return int(site_rng(seed, site).integers(0, 2 ** 31 - 1))


def init_lattice(width: int, height: int, ic: InitialCondition, seed: int, n: int = 2,
                 picture: Picture = Picture.HYPERBOLIC,
                 u: Tuple[float, float] = (1.9, 1.5), v: Tuple[float, float] = (0.4, 0.2)) -> CheckerLattice:
    """
    Fill the crossed sites of an initial condition.

    Sites without user values get random generic values (real positive, log-uniform,
    in the hyperbolic picture), drawn from per-site generators.

    Raises:
        ConfigurationError: box too small, or values off the crossed set or of the wrong type
    """
    if width < MIN_SIZE or height < MIN_SIZE:
        raise ConfigurationError(f"lattice must be at least {MIN_SIZE}x{MIN_SIZE}, got {width}x{height}")
    picture = Picture(picture)
    crossed = ic.crossed_sites(width, height)
    extra = sorted(set(ic.values) - set(crossed))
    if extra:
        raise ConfigurationError(f"initial values given off the {ic.kind} seed set: {extra[:3]}")
    expected = variable_type(picture)
    lat = CheckerLattice(width, height, n, u, v, picture, ic.kind)
    for site in crossed:
        value = ic.values.get(site)
        if value is None:
            value = random_variable(n, picture, site_rng(seed, site), spread=INITIAL_SPREAD)
        elif not isinstance(value, expected) or value.n != n:
            raise ConfigurationError(f"initial value at {site} is not an n={n} {picture.value} variable")
        lat.sites[site] = value
    logger.debug(f"[LATTICE] {ic.kind} initial condition: {len(crossed)} sites")
    return lat


def staircase_from(lat: CheckerLattice) -> InitialCondition:
    """Staircase initial condition carrying an evolved lattice's values on the band"""
    ic = InitialCondition("staircase")
    for site in ic.crossed_sites(lat.width, lat.height):
        value = lat.get(site)
        if value is None:
            raise ConfigurationError(f"band site {site} is empty")
        ic.values[site] = value
    return ic


@dataclass
class EvolutionReport:
    """Outcome of one north-east sweep"""
    sites_solved: int = 0
    complete: bool = False
    max_residual: float = 0.0
    failure: Optional[Dict] = None
    site_reports: Dict[Site, SolverReport] = field(default_factory=dict)
    statistics: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            'sites_solved': self.sites_solved,
            'complete': self.complete,
            'max_residual': self.max_residual,
            'failure': self.failure,
            'statistics': self.statistics,
        }


def _choose(report: SolverReport, known: List[Var], policy: BranchPolicy, index: int) -> int:
    if policy == BranchPolicy.INDEXED:
        return index % len(report.solutions)
    mean = np.mean([v.components for v in known], axis=0)
    distances = [distance_up_to_permutation(s, mean) for s in report.solutions]
    return int(np.argmin(distances))


def evolve_ne(lat: CheckerLattice, cfg: Optional[SolverConfig] = None,
              branch: BranchPolicy = BranchPolicy.NEAREST, branch_index: int = 0,
              seed: int = 0) -> Tuple[CheckerLattice, EvolutionReport]:
    """
    Sweep anti-diagonals toward the north-east, solving each new site as corner j
    of the stencil centred at its south-west neighbour.

    A solver failure stops the sweep; the partial lattice is returned with the
    failing site recorded in the report.
    """
    cfg = cfg or SolverConfig()
    branch = BranchPolicy(branch)
    out = lat.copy()
    report = EvolutionReport()
    tracker = ResidualTracker()
    for site in out.domain():
        if out.sites[site] is not None:
            continue
        x, y = site
        center = (x - 1, y - 1)
        corners = out.stencil_sites(center)
        known = [out.get(center)] + [out.get(corners[c]) for c in ("i", "k", "l")]
        if any(v is None for v in known):
            report.failure = {'site': list(site), 'error': "stencil data missing"}
            break
        alpha, beta = out.params
        st = Stencil5(known[0], (known[1], None, known[2], known[3]), alpha, beta,
                      color=out.color(center), picture=out.picture)
        try:
            site_report = solve_for_corner(st, "j", cfg.model_copy(update={"seed": site_seed(seed, site)}))
        except QCStarError as e:
            log_error("lattice", e, f"site {site}")
            report.failure = {'site': list(site), 'error': f"{type(e).__name__}: {e}"}
            break
        choice = _choose(site_report, known, branch, branch_index)
        out.sites[site] = site_report.solutions[choice]
        out.branch_log.append({'site': list(site), 'classes': site_report.branch_count, 'chosen': choice})
        report.site_reports[site] = site_report
        report.sites_solved += 1
        tracker.track("site", site_report.residuals[choice])

    report.complete = report.failure is None and out.complete
    residuals = out.residual_map()
    tracker.track_many("stencil", residuals['max_residual'])
    report.max_residual = float(residuals['max_residual'].max()) if len(residuals) else 0.0
    report.statistics = tracker.summary_by_label()
    log_evolution(max(out.width, out.height), out.ic, report.sites_solved, report.max_residual)
    return out, report
