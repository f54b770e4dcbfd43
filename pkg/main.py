"""
QCStar Command Line
Seeded, file-based entry points: gamma, solve, evolve, cafcc, ssr.

Exit codes: 0 success, 1 numerical failure, 2 usage, configuration or domain error.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from config import RunConfig, config_hash
from consistency.cafcc import cafcc_batch
from lattice.checkerboard import BranchPolicy, InitialCondition, evolve_ne, init_lattice
from logging_setup import log_error, set_verbosity
from model.multispin import Picture, RapidityPair, variable_from_dict
from quadrature.star_star import random_boundary, star_star_sides
from quadrature.weights import WeightParams
from reporting import RunMetadata, dumps_report, write_csv, write_json
from resilience import ConfigurationError, DomainError, QCStarError
from solver.stencil import Stencil5, random_stencil, solve_for_corner
from special.functions import HyperbolicParams, extend_log_hyp_gamma, inversion_error, shift_errors

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
CHECK_TOL = 1e-8


class UsageError(ConfigurationError):
    """Malformed command line"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_complex(text: str) -> complex:
    """Accept "0.1+0.45i", "0.1+0.45j", "2", "-1.5i" """
    cleaned = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as e:
        raise ConfigurationError(f"cannot parse complex number {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcstar", description="Quasi-classical star-star relation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration; flags override its values")
        p.add_argument("--seed", type=int, help="Random seed")
        p.add_argument("--out", help="Output file (stdout when omitted)")
        p.add_argument("--format", choices=["json", "csv"], help="Output format")
        p.add_argument("--verbose", action="store_true", help="Log INFO messages to the console")

    def model(p):
        p.add_argument("--n", type=int, help="Number of components")
        p.add_argument("--picture", choices=["hyperbolic", "rational"], help="Equation system")
        p.add_argument("--tol", type=float, help="Residual tolerance")

    p = sub.add_parser("gamma", help="Evaluate the hyperbolic gamma function")
    common(p)
    p.add_argument("--z", help='Argument, e.g. "0.1+0.45i"')
    p.add_argument("--b", type=float, help="Modulus b > 0")
    p.add_argument("--check", choices=["none", "inversion", "shift"], help="Identity self-check")

    p = sub.add_parser("solve", help="Solve a 5-point stencil for one corner")
    common(p)
    model(p)
    p.add_argument("--which", choices=["i", "j", "k", "l"], help="Unknown corner")
    p.add_argument("--color", choices=["black", "white"], help="Stencil colour")

    p = sub.add_parser("evolve", help="Evolve a checkerboard lattice north-east")
    common(p)
    model(p)
    p.add_argument("--size", type=int, help="Lattice width and height")
    p.add_argument("--ic", choices=["corner", "staircase"], help="Initial condition")
    p.add_argument("--branch", choices=["nearest", "indexed"], help="Branch policy")

    p = sub.add_parser("cafcc", help="Face-centred cube consistency experiment")
    common(p)
    model(p)
    p.add_argument("--trials", type=int, help="Number of trials")

    p = sub.add_parser("ssr", help="Star-star relation by quadrature")
    common(p)
    p.add_argument("--n", type=int, help="Number of components (2, or 3 with --expensive)")
    p.add_argument("--b", type=float, help="Modulus b > 0")
    p.add_argument("--p", type=float, nargs=2, help="Rapidities p1 p2")
    p.add_argument("--q", type=float, nargs=2, help="Rapidities q1 q2")
    p.add_argument("--expensive", action="store_true", help="Enable the n=3 two-dimensional quadrature")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge the optional JSON file with command-line flags and validate.

    Raises:
        ConfigurationError: unreadable file or invalid values
    """
    data: Dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
    data["command"] = args.command
    flags = vars(args)

    def put(section: Optional[str], key: str, value):
        if value is None:
            return
        target = data if section is None else data.setdefault(section, {})
        target[key] = value

    put(None, "n", flags.get("n"))
    put(None, "picture", flags.get("picture"))
    put(None, "b", flags.get("b"))
    put(None, "seed", flags.get("seed"))
    put("solver", "seed", flags.get("seed"))
    put("solver", "tol", flags.get("tol"))
    put("cafcc", "trials", flags.get("trials"))
    put("lattice", "size", flags.get("size"))
    put("lattice", "ic", flags.get("ic"))
    put("lattice", "branch", flags.get("branch"))
    put("output", "path", flags.get("out"))
    put("output", "format", flags.get("format"))
    if flags.get("expensive"):
        put("quadrature", "expensive", True)
    for key in ("z", "check", "which", "color", "p", "q"):
        put("inputs", key, flags.get(key))
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid run configuration: {e}") from e


# --- Commands ---

def cmd_gamma(run: RunConfig) -> Dict:
    z = parse_complex(run.inputs.get("z", "0"))
    try:
        params = HyperbolicParams(run.b)
    except DomainError as e:
        raise ConfigurationError(str(e)) from e
    log_value = extend_log_hyp_gamma(z, params)
    result = {'z': z, 'b': run.b, 'value': complex(np.exp(log_value)), 'log_value': log_value, 'checks': {}}
    check = run.inputs.get("check", "none")
    if check == "inversion":
        error = inversion_error(z, params)
        result['checks']['inversion'] = {'error': error, 'passed': error < CHECK_TOL}
    elif check == "shift":
        for name, error in shift_errors(z, params).items():
            result['checks'][f"shift {name}"] = {'error': error, 'passed': error < CHECK_TOL}
    result['passed'] = all(c['passed'] for c in result['checks'].values())
    return result


def _stencil_from_inputs(run: RunConfig, picture: Picture) -> Stencil5:
    if run.inputs.get("which", "l") not in ("i", "j", "k", "l"):
        raise ConfigurationError(f"unknown corner {run.inputs.get('which')!r}")
    data = run.inputs.get("stencil")
    if data is None:
        rng = np.random.default_rng(run.seed)
        return random_stencil(run.n, picture, rng, run.lattice.u, run.lattice.v,
                              color=run.inputs.get("color", "black"),
                              unknown=run.inputs.get("which", "l"))
    try:
        corners = tuple(variable_from_dict(data['corners'][c]) if data['corners'].get(c) else None
                        for c in "ijkl")
        return Stencil5(variable_from_dict(data['center']), corners,
                        RapidityPair.from_dict(data['alpha']), RapidityPair.from_dict(data['beta']),
                        color=data.get('color', 'black'), picture=picture)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"malformed stencil input: {e}") from e


def cmd_solve(run: RunConfig) -> Dict:
    picture = Picture(run.picture)
    st = _stencil_from_inputs(run, picture)
    which = run.inputs.get("which", "l")
    report = solve_for_corner(st, which, run.solver)
    return {
        'n': st.n,
        'picture': picture.value,
        'color': st.color,
        'alpha': st.alpha.to_dict(),
        'beta': st.beta.to_dict(),
        'center': st.center.to_dict(),
        'corners': {c: (v.to_dict() if v is not None else None) for c, v in zip("ijkl", st.corners)},
        'report': report.to_dict(),
    }


def cmd_evolve(run: RunConfig):
    size = run.lattice.size
    lat = init_lattice(size, size, InitialCondition(run.lattice.ic), run.seed, n=run.n,
                       picture=Picture(run.picture), u=run.lattice.u, v=run.lattice.v)
    evolved, report = evolve_ne(lat, run.solver, BranchPolicy(run.lattice.branch),
                                run.lattice.branch_index, seed=run.seed)
    payload = {'lattice': evolved.to_dict(), 'report': report.to_dict()}
    return payload, evolved.residual_map(), report.complete


def cmd_cafcc(run: RunConfig):
    summary = cafcc_batch(run.n, run.cafcc.trials, run.seed, run.cafcc, Picture(run.picture),
                          solver_cfg=run.solver)
    return summary, pd.DataFrame(summary['rows']), summary['budget']['state'] != "exhausted"


def cmd_ssr(run: RunConfig) -> Dict:
    p = tuple(run.inputs.get("p") or (0.7, 0.5))
    q = tuple(run.inputs.get("q") or (0.1, 0.0))
    try:
        wp = WeightParams(HyperbolicParams(run.b), p, q)
    except DomainError as e:
        raise ConfigurationError(str(e)) from e
    if run.n == 3 and not run.quadrature.expensive:
        raise ConfigurationError("n=3 star-star needs --expensive")
    if run.n not in (2, 3):
        raise ConfigurationError(f"ssr supports n=2 and n=3, got n={run.n}")
    boundary = random_boundary(run.n, np.random.default_rng(run.seed))
    sides = star_star_sides(boundary, wp, run.quadrature)
    sides.update({'b': run.b, 'p': list(p), 'q': list(q),
                  'boundary': [s.to_dict() for s in boundary]})
    return sides


def _emit(run: RunConfig, metadata: RunMetadata, payload: Dict, frame: Optional[pd.DataFrame] = None):
    if run.output.format == "csv":
        if frame is None:
            scalars = {k: v for k, v in payload.items() if isinstance(v, (int, float, bool, str, complex))}
            frame = pd.DataFrame([{k: (str(v) if isinstance(v, complex) else v) for k, v in scalars.items()}])
        if run.output.path:
            write_csv(frame, metadata, run.output.path)
        else:
            header = "".join(f"# {k}: {v}\n" for k, v in metadata.to_dict().items())
            sys.stdout.write(header + frame.to_csv(index=False, float_format="%.12g"))
        return
    if run.output.path:
        write_json(payload, metadata, run.output.path)
    else:
        print(dumps_report(payload, metadata))


def run_command(run: RunConfig) -> int:
    metadata = RunMetadata.create(run.command, run.seed, config_hash(run), run.output.deterministic)
    ok = True
    frame = None
    if run.command == "gamma":
        payload = cmd_gamma(run)
        ok = payload['passed']
    elif run.command == "solve":
        payload = cmd_solve(run)
    elif run.command == "evolve":
        payload, frame, ok = cmd_evolve(run)
    elif run.command == "cafcc":
        payload, frame, ok = cmd_cafcc(run)
    elif run.command == "ssr":
        payload = cmd_ssr(run)
    else:
        raise UsageError(f"unknown command {run.command!r}")
    _emit(run, metadata, payload, frame)
    return EXIT_OK if ok else EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            set_verbosity("INFO")
        run = load_run_config(args)
    except ConfigurationError as e:
        print(f"qcstar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run_command(run)
    except (ConfigurationError, DomainError) as e:
        print(f"qcstar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QCStarError as e:
        log_error(run.command, e)
        print(f"qcstar: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
