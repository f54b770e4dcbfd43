"""
Unit tests for Face-Centred Cube Consistency
Testing the cell equations, solve orders and the randomized experiment.
"""
import numpy as np
import pytest

import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

from config import CafccConfig
from consistency.cafcc import (ALTERNATIVE_ORDERS, CANONICAL_ORDER, CELL_LABELS, EQUATIONS, FREE_LABELS,
                               FccCell, cafcc_batch, cell_equations, check_centers, consistency_experiment,
                               random_cell, trial_seed)
from model.multispin import Picture
from resilience import QCStarError


class TestCellStructure:
    """Test suite for the equation table and solve orders"""

    def test_fourteen_equations(self):
        assert len(EQUATIONS) == 14
        assert set(EQUATIONS) == set(CELL_LABELS)
        for eq in EQUATIONS.values():
            assert set(eq.labels) <= set(CELL_LABELS)
            assert eq.center not in eq.corners

    def test_canonical_checks(self):
        assert set(check_centers(CANONICAL_ORDER)) == {"g'", "f'", "d'", "b'", "c'", "d"}

    @pytest.mark.parametrize("order", (CANONICAL_ORDER,) + ALTERNATIVE_ORDERS)
    def test_orders_respect_dependencies(self, order):
        """Each solve uses only free or previously solved variables"""
        known = set(FREE_LABELS)
        for unknown, center in order:
            others = set(EQUATIONS[center].labels) - {unknown}
            assert unknown in EQUATIONS[center].labels
            assert others <= known
            known.add(unknown)
        assert known == set(CELL_LABELS)

    def test_unknown_label_rejected(self):
        cell = random_cell(2, np.random.default_rng(0), CafccConfig())
        with pytest.raises(QCStarError):
            FccCell(cell.alpha, cell.beta, cell.gamma, values={"h": None})

    def test_cell_equations_need_all_values(self):
        cell = random_cell(2, np.random.default_rng(0), CafccConfig())
        with pytest.raises(QCStarError, match="missing"):
            cell_equations(cell)


class TestConsistency:
    """Test suite for consistency_experiment"""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_n2_hyperbolic(self, seed):
        report = consistency_experiment(2, seed)
        assert report.success, report.error
        assert report.max_check < 1e-6
        assert len(report.solved_order) == 8

    def test_all_fourteen_hold(self):
        report = consistency_experiment(2, 3)
        assert report.success
        residuals = cell_equations(report.cell)
        assert max(float(np.max(np.abs(r))) for r in residuals.values()) < 1e-6

    def test_n2_rational(self):
        report = consistency_experiment(2, 4, picture=Picture.RATIONAL)
        assert report.success, report.error

    def test_n3(self):
        report = consistency_experiment(3, 5)
        assert report.success, report.error
        assert report.max_check < 1e-6

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_n4(self, seed):
        report = consistency_experiment(4, seed)
        assert report.success, report.error
        assert report.max_check < 1e-6

    def test_n5(self):
        report = consistency_experiment(5, 0)
        assert report.success, report.error
        assert report.max_check < 1e-6

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_n3_rational(self, seed):
        report = consistency_experiment(3, seed, picture=Picture.RATIONAL)
        assert report.success, report.error
        assert report.max_check < 1e-6

    @pytest.mark.parametrize("order", ALTERNATIVE_ORDERS)
    def test_alternative_orders(self, order):
        report = consistency_experiment(2, 6, order=order)
        assert report.success, report.error
        assert set(report.check_residuals) == set(check_centers(order))

    def test_report_dict(self):
        data = consistency_experiment(2, 0).to_dict()
        assert 'cell' not in data and 'elapsed_ms' not in data
        assert data['success']


class TestBatch:
    """Test suite for cafcc_batch"""

    def test_deterministic(self):
        cfg = CafccConfig(trials=3)
        assert cafcc_batch(2, 3, 11, cfg) == cafcc_batch(2, 3, 11, cfg)

    def test_summary(self):
        summary = cafcc_batch(2, 4, 0, CafccConfig())
        assert summary['completed'] == 4
        assert summary['success_rate'] == summary['successes'] / 4
        assert [row['trial'] for row in summary['rows']] == [0, 1, 2, 3]
        assert summary['budget']['state'] == "running"

    def test_success_rate_n2(self):
        summary = cafcc_batch(2, 20, 1, CafccConfig())
        assert summary['completed'] == 20
        assert summary['success_rate'] >= 0.95
        assert all(row['max_check'] < 1e-6 for row in summary['rows'] if row['success'])

    def test_success_rate_n3_rational(self):
        summary = cafcc_batch(3, 10, 2, CafccConfig(), picture=Picture.RATIONAL)
        assert summary['success_rate'] >= 0.9

    def test_trials_positive(self):
        with pytest.raises(QCStarError):
            cafcc_batch(2, 0, 0)

    def test_trial_seeds(self):
        seeds = [trial_seed(7, t) for t in range(10)]
        assert len(set(seeds)) == 10
        assert seeds == [trial_seed(7, t) for t in range(10)]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
