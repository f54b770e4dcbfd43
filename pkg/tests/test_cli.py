"""
Integration tests for the command line
Each command runs end to end through main() with small, seeded inputs.
"""
import json

import pytest

import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

from main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main, parse_complex
from resilience import ConfigurationError


def _result(capsys):
    return json.loads(capsys.readouterr().out)['result']


class TestParsing:
    """Test suite for argument and config handling"""

    def test_parse_complex(self):
        assert parse_complex("0.1+0.45i") == 0.1 + 0.45j
        assert parse_complex("-1.5i") == -1.5j
        with pytest.raises(ConfigurationError):
            parse_complex("one")

    def test_unknown_command(self, capsys):
        assert main(["braid"]) == EXIT_USAGE

    def test_malformed_config(self, out_dir):
        bad = out_dir / "bad.json"
        bad.write_text("{not json")
        assert main(["gamma", "--config", str(bad)]) == EXIT_USAGE

    def test_invalid_config_value(self, out_dir):
        cfg = out_dir / "cfg.json"
        cfg.write_text(json.dumps({"lattice": {"size": 2}}))
        assert main(["evolve", "--config", str(cfg)]) == EXIT_USAGE

    def test_flags_override_config(self, out_dir, capsys):
        cfg = out_dir / "cfg.json"
        cfg.write_text(json.dumps({"n": 3, "picture": "rational"}))
        assert main(["solve", "--config", str(cfg), "--n", "2"]) == EXIT_OK
        result = _result(capsys)
        assert result['n'] == 2 and result['picture'] == "rational"


class TestGamma:
    """Test suite for the gamma command"""

    def test_value_at_zero(self, capsys):
        assert main(["gamma", "--z", "0"]) == EXIT_OK
        assert _result(capsys)['value'] == [1.0, 0.0]

    @pytest.mark.parametrize("check", ["inversion", "shift"])
    def test_identity_checks(self, check, capsys):
        assert main(["gamma", "--z", "0.3+0.2i", "--b", "0.7", "--check", check]) == EXIT_OK
        result = _result(capsys)
        assert result['passed']
        assert result['checks']

    def test_bad_modulus(self):
        assert main(["gamma", "--z", "0.1", "--b", "-1"]) == EXIT_USAGE


class TestSolveAndEvolve:
    """Test suite for the solve and evolve commands"""

    def test_solve_white_corner(self, capsys):
        assert main(["solve", "--n", "3", "--which", "j", "--color", "white", "--seed", "2"]) == EXIT_OK
        report = _result(capsys)['report']
        assert report['method'] == "cubic"
        assert report['which'] == "j"
        assert report['best_residual'] < 1e-10

    def test_evolve_deterministic(self, out_dir):
        paths = [out_dir / "a.json", out_dir / "b.json"]
        for path in paths:
            assert main(["evolve", "--size", "6", "--seed", "3", "--out", str(path)]) == EXIT_OK
        assert paths[0].read_text() == paths[1].read_text()
        data = json.loads(paths[0].read_text())
        assert data['result']['report']['complete']

    def test_evolve_csv(self, out_dir):
        path = out_dir / "map.csv"
        assert main(["evolve", "--size", "6", "--format", "csv", "--out", str(path)]) == EXIT_OK
        assert "max_residual" in path.read_text()

    def test_solver_failure_exit_code(self, out_dir):
        cfg = out_dir / "cfg.json"
        cfg.write_text(json.dumps({"solver": {"starts": 1, "max_iter": 1, "retry_attempts": 0}}))
        assert main(["solve", "--config", str(cfg), "--n", "4", "--tol", "1e-300"]) == EXIT_FAILURE


class TestCafccAndSsr:
    """Test suite for the cafcc and ssr commands"""

    def test_cafcc_batch(self, capsys):
        assert main(["cafcc", "--n", "2", "--trials", "2", "--seed", "1"]) == EXIT_OK
        result = _result(capsys)
        assert result['completed'] == 2
        assert len(result['rows']) == 2

    def test_ssr_n2(self, capsys):
        assert main(["ssr", "--seed", "0"]) == EXIT_OK
        assert _result(capsys)['residual'] < 1e-6

    def test_ssr_out_of_domain(self):
        assert main(["ssr", "--p", "1.5", "0.5"]) == EXIT_USAGE

    def test_ssr_n3_needs_expensive(self):
        assert main(["ssr", "--n", "3"]) == EXIT_USAGE


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
