"""
QCStar Lattice Action
Classical action of a filled checkerboard lattice, split by edge class, and the
finite-difference audit of its stationarity at interior sites.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Sequence, Tuple

import pandas as pd
from mpmath import mp

from logging_setup import logger
from model.legs import c_term, c_term_mp, edge_lagrangian, lagrangian_mp
from model.multispin import AdditiveVar, Picture, log_map
from resilience import DomainError
from lattice.checkerboard import CheckerLattice, Site, box_sites

EDGE_CLASSES = ("E1", "E2", "E3", "E4")
AUDIT_STEP = 1e-12
AUDIT_DPS = 40

# White neighbour offset from the black vertex -> edge class
_EDGE_OF_OFFSET = {(-1, 1): "E1", (1, 1): "E2", (-1, -1): "E3", (1, -1): "E4"}


@dataclass
class ActionValue:
    """Total action with its vertex (C) and edge-class contributions"""
    value: complex
    breakdown: Dict[str, complex] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {'value': self.value, 'breakdown': dict(self.breakdown)}


def edge_term(edge_class: str, x_black: AdditiveVar, x_white: AdditiveVar,
              u: Sequence[float], v: Sequence[float]) -> complex:
    """
    Lagrangian of one edge:
      E1 L_{u2-v1}(b, w), E2 Lbar_{u2-v2}(w, b), E3 Lbar_{u1-v1}(w, b), E4 L_{u1-v2}(b, w)
    """
    if edge_class == "E1":
        return edge_lagrangian(u[1] - v[0], x_black, x_white)
    if edge_class == "E2":
        return edge_lagrangian(u[1] - v[1], x_white, x_black, bar=True)
    if edge_class == "E3":
        return edge_lagrangian(u[0] - v[0], x_white, x_black, bar=True)
    if edge_class == "E4":
        return edge_lagrangian(u[0] - v[1], x_black, x_white)
    raise DomainError(f"unknown edge class {edge_class!r}")


def lattice_edges(lat: CheckerLattice) -> Iterator[Tuple[str, Site, Site]]:
    """(edge class, black site, white site) for every edge between filled sites"""
    for site in box_sites(lat.width, lat.height):
        if lat.color(site) != "black" or lat.get(site) is None:
            continue
        x, y = site
        for (dx, dy), edge_class in _EDGE_OF_OFFSET.items():
            other = (x + dx, y + dy)
            if lat.get(other) is not None:
                yield edge_class, site, other


def additive_values(lat: CheckerLattice) -> Dict[Site, AdditiveVar]:
    """Principal-branch logarithms of the filled sites"""
    if lat.picture != Picture.HYPERBOLIC:
        raise DomainError("the action is defined for hyperbolic-picture lattices")
    return {s: log_map(lat.get(s)) for s in lat.filled()}


def _edge(lat, edge_class, black, white, xs, u, v) -> complex:
    try:
        return edge_term(edge_class, xs[black], xs[white], u, v)
    except DomainError as e:
        raise DomainError(f"edge {edge_class} {black}-{white}: {e}") from e


def action(lat: CheckerLattice, u: Optional[Sequence[float]] = None,
           v: Optional[Sequence[float]] = None) -> ActionValue:
    """
    Sum of C over filled sites plus the edge Lagrangians of every edge between filled sites.

    Raises:
        DomainError: rational lattice, or a dilogarithm branch cut hit (names the edge)
    """
    u = lat.u if u is None else tuple(u)
    v = lat.v if v is None else tuple(v)
    xs = additive_values(lat)
    breakdown = {"C": complex(sum(c_term(x) for x in xs.values()))}
    for edge_class in EDGE_CLASSES:
        breakdown[edge_class] = 0j
    for edge_class, black, white in lattice_edges(lat):
        breakdown[edge_class] += _edge(lat, edge_class, black, white, xs, u, v)
    return ActionValue(complex(sum(breakdown.values())), breakdown)


def _edge_mp(edge_class: str, x_black, x_white, u: Sequence[float], v: Sequence[float]):
    if edge_class == "E1":
        return lagrangian_mp(u[1] - v[0], x_black, x_white)
    if edge_class == "E2":
        return lagrangian_mp(mp.pi - (u[1] - v[1]), x_white, x_black)
    if edge_class == "E3":
        return lagrangian_mp(mp.pi - (u[0] - v[0]), x_white, x_black)
    if edge_class == "E4":
        return lagrangian_mp(u[0] - v[1], x_black, x_white)
    raise DomainError(f"unknown edge class {edge_class!r}")


def local_action(lat: CheckerLattice, site: Site, x_site: Sequence, xs: Dict[Site, Sequence],
                 u: Sequence[float], v: Sequence[float]):
    """Part of the action that depends on one site, with its value replaced by x_site (mpc components)"""
    total = c_term_mp(x_site)
    x, y = site
    for (dx, dy), edge_class in _EDGE_OF_OFFSET.items():
        other = (x + dx, y + dy)
        if other not in xs:
            continue
        if lat.color(site) == "black":
            total += _edge_mp(edge_class, x_site, xs[other], u, v)
        else:
            total += _edge_mp(_EDGE_OF_OFFSET[(-dx, -dy)], xs[other], x_site, u, v)
    return total


def action_gradient_audit(lat: CheckerLattice, u: Optional[Sequence[float]] = None,
                          v: Optional[Sequence[float]] = None, step: float = AUDIT_STEP,
                          dps: int = AUDIT_DPS) -> pd.DataFrame:
    """
    max_a |exp(dA/dx_a) - 1| by central differences at every site with four filled
    neighbours; zero up to the accuracy of the lattice values on an evolved lattice.

    The differences are taken in mpmath at dps digits.
    """
    u = lat.u if u is None else tuple(u)
    v = lat.v if v is None else tuple(v)
    xs = additive_values(lat)
    rows = []
    with mp.workdps(dps):
        h = mp.mpf(step)
        xs_mp = {s: [mp.mpc(c) for c in x.components] for s, x in xs.items()}
        for site, _ in lat.stencils():
            base = xs_mp[site]
            deviation = 0.0
            for a in range(len(base) - 1):
                plus, minus = list(base), list(base)
                plus[a], plus[-1] = base[a] + h, base[-1] - h
                minus[a], minus[-1] = base[a] - h, base[-1] + h
                diff = (local_action(lat, site, plus, xs_mp, u, v)
                        - local_action(lat, site, minus, xs_mp, u, v))
                deviation = max(deviation, float(abs(mp.exp(diff / (2 * h)) - 1)))
            rows.append({'x': site[0], 'y': site[1], 'color': lat.color(site), 'deviation': deviation})
    frame = pd.DataFrame(rows, columns=['x', 'y', 'color', 'deviation'])
    if len(frame):
        logger.debug(f"[LATTICE] action audit: {len(frame)} sites, max deviation {frame['deviation'].max():.2e}")
    return frame
