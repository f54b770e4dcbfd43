"""
Unit tests for the Checkerboard Lattice
Testing geometry, initial conditions, north-east evolution and the lattice action.
"""
import numpy as np
import pytest

import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

from config import SolverConfig
from lattice.action import EDGE_CLASSES, action, action_gradient_audit, lattice_edges
from lattice.checkerboard import (BranchPolicy, CheckerLattice, InitialCondition, box_sites, evolve_ne,
                                  init_lattice, site_color, staircase_from, staircase_level)
from model.multispin import MultiplicativeVar, Picture, RationalVar
from resilience import ConfigurationError, DomainError
from solver.stencil import match_up_to_permutation


def _evolved(ic="corner", n=2, picture=Picture.HYPERBOLIC, size=8, seed=4, **kwargs):
    lat = init_lattice(size, size, InitialCondition(ic), seed, n=n, picture=picture)
    return evolve_ne(lat, seed=seed, **kwargs)


class TestGeometry:
    """Test suite for sites, colours and initial-condition sets"""

    def test_parity_and_colour(self):
        sites = box_sites(4, 4)
        assert all((x + y) % 2 == 0 for x, y in sites)
        assert site_color((2, 0)) == "black" and site_color((1, 1)) == "white"

    def test_staircase_level(self):
        assert staircase_level(8, 8) == 8
        assert staircase_level(7, 5) == 8

    def test_corner_crossed_sites(self):
        crossed = InitialCondition("corner").crossed_sites(6, 6)
        assert all(x <= 1 or y <= 1 for x, y in crossed)
        assert (2, 2) not in crossed

    def test_staircase_band(self):
        ic = InitialCondition("staircase")
        assert {x + y for x, y in ic.crossed_sites(8, 8)} == {6, 8}
        assert min(x + y for x, y in ic.domain(8, 8)) == 6

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            InitialCondition("diagonal")


class TestInitialization:
    """Test suite for init_lattice"""

    def test_too_small(self):
        with pytest.raises(ConfigurationError):
            init_lattice(3, 8, InitialCondition("corner"), 0)

    def test_values_off_crossed_set(self):
        ic = InitialCondition("corner", {(4, 4): MultiplicativeVar.from_independent([2.0])})
        with pytest.raises(ConfigurationError):
            init_lattice(8, 8, ic, 0)

    def test_wrong_value_type(self):
        ic = InitialCondition("corner", {(0, 0): RationalVar([1.0, -1.0])})
        with pytest.raises(ConfigurationError):
            init_lattice(8, 8, ic, 0)

    def test_user_values_kept(self):
        y = MultiplicativeVar.from_independent([2.0])
        lat = init_lattice(8, 8, InitialCondition("corner", {(0, 0): y}), 0)
        assert lat.get((0, 0)) is y

    def test_seeded(self):
        first = init_lattice(6, 6, InitialCondition("corner"), 17)
        second = init_lattice(6, 6, InitialCondition("corner"), 17)
        for site in first.filled():
            assert np.array_equal(first.get(site).components, second.get(site).components)


class TestEvolution:
    """Test suite for evolve_ne"""

    @pytest.mark.parametrize("ic", ["corner", "staircase"])
    @pytest.mark.parametrize("n", [2, 3])
    def test_fills_domain(self, ic, n):
        lat, report = _evolved(ic, n=n)
        assert report.complete
        assert report.failure is None
        assert report.max_residual < 1e-8

    def test_rational_picture(self):
        lat, report = _evolved("corner", n=2, picture=Picture.RATIONAL)
        assert report.complete
        assert lat.max_residual() < 1e-8

    def test_deterministic(self):
        first, _ = _evolved("corner", n=3, seed=21)
        second, _ = _evolved("corner", n=3, seed=21)
        for site in first.filled():
            assert np.array_equal(first.get(site).components, second.get(site).components)

    def test_input_untouched(self):
        lat = init_lattice(6, 6, InitialCondition("corner"), 2)
        before = len(lat.filled())
        evolve_ne(lat)
        assert len(lat.filled()) == before

    def test_indexed_branch(self):
        lat, report = _evolved("corner", n=2, branch=BranchPolicy.INDEXED, branch_index=5)
        assert report.complete
        assert all(entry['chosen'] == 0 for entry in lat.branch_log)

    def test_failure_stops_sweep(self):
        """An impossible tolerance makes the first site fail"""
        lat = init_lattice(6, 6, InitialCondition("corner"), 0, n=4)
        cfg = SolverConfig(tol=1e-300, starts=2, max_iter=2, retry_attempts=0)
        out, report = evolve_ne(lat, cfg)
        assert not report.complete
        assert report.failure is not None
        assert report.sites_solved == 0

    def test_snapshot_roundtrip(self):
        lat, _ = _evolved("corner", n=2, size=6)
        back = CheckerLattice.from_dict(lat.to_dict())
        assert back.complete
        assert back.max_residual() < 1e-8
        assert back.branch_log == lat.branch_log

    def test_staircase_from_evolved(self):
        """Re-evolving from the band of an evolved lattice reproduces the region beyond it"""
        corner, _ = _evolved("corner", n=2)
        stair = init_lattice(8, 8, staircase_from(corner), 0, n=2)
        again, report = evolve_ne(stair)
        assert report.complete
        for site in again.filled():
            assert match_up_to_permutation(again.get(site), corner.get(site), tol=1e-8)

    def test_residual_map_columns(self):
        lat, _ = _evolved("corner", n=2, size=6)
        frame = lat.residual_map()
        assert list(frame.columns) == ['x', 'y', 'color', 'max_residual']
        assert set(frame['color']) == {"black", "white"}


class TestAction:
    """Test suite for the lattice action"""

    def test_breakdown_sums_to_value(self):
        lat, _ = _evolved("corner", n=2, size=6)
        value = action(lat)
        assert set(value.breakdown) == {"C", *EDGE_CLASSES}
        assert value.value == pytest.approx(sum(value.breakdown.values()))

    def test_empty_lattice(self):
        lat = CheckerLattice(4, 4, 2, (1.9, 1.5), (0.4, 0.2))
        value = action(lat)
        assert value.value == 0
        assert list(lattice_edges(lat)) == []

    def test_edge_count(self):
        """Edges join a black site to a white one and use all four classes"""
        lat, _ = _evolved("corner", n=2, size=6)
        edges = list(lattice_edges(lat))
        assert {e[0] for e in edges} == set(EDGE_CLASSES)
        assert all(lat.color(b) == "black" and lat.color(w) == "white" for _, b, w in edges)

    def test_rational_rejected(self):
        lat, _ = _evolved("corner", n=2, picture=Picture.RATIONAL, size=6)
        with pytest.raises(DomainError):
            action(lat)

    def test_stationary_on_evolved_lattice(self):
        lat, _ = _evolved("corner", n=2)
        audit = action_gradient_audit(lat)
        assert len(audit) > 0
        assert audit['deviation'].max() < 1e-5

    def test_stationary_along_diagonal(self):
        """Sites far from the seed data, where values have sign changes and grown spread"""
        lat, report = _evolved("corner", n=2, seed=4)
        assert report.max_residual < 1e-8
        audit = action_gradient_audit(lat).set_index(['x', 'y'])
        for site in [(4, 4), (5, 5), (6, 6)]:
            assert audit.loc[site, 'deviation'] < 1e-5

    def test_perturbed_site_detected(self):
        lat, _ = _evolved("corner", n=2, size=6)
        y = lat.get((3, 3))
        lat.sites[(3, 3)] = MultiplicativeVar.from_independent([y.components[0] * 1.05])
        audit = action_gradient_audit(lat).set_index(['x', 'y'])
        assert audit.loc[(3, 3), 'deviation'] > 1e-3


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
