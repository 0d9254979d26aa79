"""Command-line interface: ``satsense {eval,optimize,sweep,simulate}``.

Detunings are in units of the unbroadened linewidth gamma_0 and detuning
Fisher information is per gamma_0^2. Every subcommand accepts
``--config FILE``: a JSON object whose keys are the long flag names without
dashes prefix (e.g. ``"n-sat": 1.0``). Explicit flags override the file.

Exit codes: 0 success, 1 computation or I/O error, 2 usage error,
3 optimum on a search bound.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .errors import BoundaryOptimum, BracketExcludesOptimum, SensingError
from .fisher import NormalLocation, NormalLogVariance, Target, fisher_information
from .medium import Medium, complex_response, output_quadrature_stats
from .montecarlo import SimConfig, crb_check
from .optimizer import OptimizerConfig, StateFamily, optimize, quantum_advantage
from .state import ProbeState, mean_photon_number, validate_state
from .sweep import AxisSpec, GridSpec, run_sweep, write_table

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_BOUNDARY = 0, 1, 2, 3
HOOKS = {"normal-location": NormalLocation, "normal-log-variance": NormalLogVariance}


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _finite(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not math.isfinite(value):
            raise argparse.ArgumentTypeError(f"{name} must be finite")
        return value
    return parse


def _positive(name):
    base = _finite(name)

    def parse(text):
        value = base(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be > 0")
        return value
    return parse


def _nonnegative(name):
    base = _finite(name)

    def parse(text):
        value = base(text)
        if value < 0:
            raise argparse.ArgumentTypeError(f"{name} must be ≥ 0")
        return value
    return parse


def _count(name, minimum=1):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be ≥ {minimum}")
        return value
    return parse


def _target(text):
    try:
        return Target.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_medium(p, required=True):
    p.add_argument("--T", dest="T", type=_positive("T"), required=required,
                   help="on-resonance optical depth")
    p.add_argument("--n-sat", type=_positive("n-sat"), required=required,
                   help="saturation photon number")


def _add_state(p):
    p.add_argument("--delta-bar", type=_finite("delta-bar"), default=0.0,
                   help="detuning in units of gamma_0")
    p.add_argument("--R", dest="R", type=_nonnegative("R"), default=0.0, help="displacement magnitude")
    p.add_argument("--theta", type=_finite("theta"), default=0.0, help="displacement phase (rad)")
    p.add_argument("--r", dest="r", type=_nonnegative("r"), default=0.0, help="squeeze magnitude")
    p.add_argument("--psi", type=_finite("psi"), default=0.0, help="squeeze phase (rad)")


def _add_optimizer(p):
    g = p.add_argument_group("optimizer")
    g.add_argument("--n-starts", type=_count("n-starts", 0), default=None)
    g.add_argument("--r-max", type=_positive("r-max"), default=None)
    g.add_argument("--delta-max", type=_positive("delta-max"), default=None)
    g.add_argument("--nbar-max", type=_positive("nbar-max"), default=None)
    g.add_argument("--opt-seed", type=int, default=None, help="seed of the low-discrepancy starts")


def _optimizer_config(args) -> OptimizerConfig:
    names = {"n_starts": "n_starts", "r_max": "r_max", "delta_max": "delta_max",
             "nbar_max": "nbar_max", "opt_seed": "seed"}
    overrides = {field: getattr(args, arg) for arg, field in names.items()
                 if getattr(args, arg, None) is not None}
    return OptimizerConfig(**overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satsense",
        description="Number-optimized Fisher information for Gaussian probing of a saturable "
                    "absorber. Detunings are in units of gamma_0; detuning Fisher information "
                    "is per gamma_0^2.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="output statistics and Fisher information at one point")
    p.add_argument("--config", help="JSON config file")
    _add_medium(p)
    _add_state(p)
    p.add_argument("--target", type=_target, required=True, help="detuning | od")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="number-optimized Fisher information and quantum advantage")
    p.add_argument("--config", help="JSON config file")
    _add_medium(p)
    p.add_argument("--target", type=_target, required=True, help="detuning | od")
    p.add_argument("--family", choices=["both", "gaussian", "coherent"], default="both")
    p.add_argument("--json-out", default=None, help="write the JSON result here (default stdout)")
    _add_optimizer(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="advantage map over a log-spaced (n_sat, T) grid")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--grid", default=None, help="JSON grid file {n_sat:{min,max,points}, T:{...}, target}")
    for axis in ("n-sat", "T"):
        p.add_argument(f"--{axis}-min", type=_positive(f"{axis}-min"), default=None)
        p.add_argument(f"--{axis}-max", type=_positive(f"{axis}-max"), default=None)
        p.add_argument(f"--{axis}-points", type=_count(f"{axis}-points"), default=None)
    p.add_argument("--target", type=_target, default=None, help="detuning | od")
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--threads", type=_count("threads"), default=None,
                   help="worker cap (default: available cores); output does not depend on it")
    p.add_argument("--quiet", action="store_true")
    _add_optimizer(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo Fisher information and Cramer-Rao check")
    p.add_argument("--config", help="JSON config file")
    _add_medium(p, required=False)
    _add_state(p)
    p.add_argument("--target", type=_target, default=Target.DETUNING, help="detuning | od")
    p.add_argument("--coherent-optimum", action="store_true",
                   help="replace the state and detuning by the coherent-family optimum")
    p.add_argument("--hook", choices=sorted(HOOKS), default=None,
                   help="bypass the medium with a reference Gaussian family")
    p.add_argument("--samples", type=_count("samples"), default=100)
    p.add_argument("--reps", type=_count("reps"), default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bracket", type=_finite("bracket"), nargs=2, metavar=("LO", "HI"), default=None)
    p.add_argument("--threads", type=_count("threads"), default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def _config_path(argv):
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    """Parse ``argv`` with values from ``--config`` as defaults for the chosen subcommand."""
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    if not path or not argv or argv[0] not in subparsers:
        return parser.parse_args(argv)
    sub = subparsers[argv[0]]
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        sub.error(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        sub.error("config file must hold a JSON object")
    actions = {a.option_strings[0].lstrip("-"): a for a in sub._actions
               if a.option_strings and a.dest not in ("help", "config")}
    unknown = sorted(set(data) - set(actions))
    if unknown:
        sub.error(f"unknown config keys: {', '.join(unknown)}")
    # replay the file as command-line tokens placed before the real flags, so
    # the same type checks apply and explicit flags win
    tokens = []
    for key, value in data.items():
        action = actions[key]
        if action.nargs == 0:
            if value:
                tokens.append(f"--{key}")
        elif isinstance(value, list):
            tokens += [f"--{key}", *map(str, value)]
        else:
            tokens += [f"--{key}", str(value)]
    return parser.parse_args([argv[0], *tokens, *argv[1:]])


def cmd_eval(args) -> int:
    state = validate_state(ProbeState(args.R, args.theta, args.r, args.psi))
    medium = Medium(args.T, args.n_sat)
    resp = complex_response(medium, args.delta_bar, mean_photon_number(state))
    out = output_quadrature_stats(state, medium, args.delta_bar)
    fi = fisher_information(state, medium, args.delta_bar, args.target)
    _dump({"mu": out.mu, "v": out.v, "phi": resp.phi, "xi": resp.xi,
           "gamma_bar": resp.gamma_bar, "target": args.target.value, "fisher": fi.as_dict()})
    return EXIT_OK


def cmd_optimize(args) -> int:
    medium = Medium(args.T, args.n_sat)
    config = _optimizer_config(args)
    code = EXIT_OK
    if args.family == "both":
        try:
            result = quantum_advantage(medium, args.target, config)
        except BoundaryOptimum as exc:
            result, code = exc.result, EXIT_BOUNDARY
        payload = result.as_dict()
        summary = (f"I_sq={result.i_sq:.6g} I_coh={result.i_coh:.6g} A={result.advantage:.6g} "
                   f"regime={result.sq_result.regime.value} boundary={result.boundary_flag}")
    else:
        try:
            result = optimize(medium, args.target, StateFamily(args.family), config)
        except BoundaryOptimum as exc:
            result, code = exc.result, EXIT_BOUNDARY
        payload = result.as_dict()
        summary = (f"I={result.value:.6g} nbar={result.nbar:.6g} delta_bar={result.delta_bar:.6g} "
                   f"regime={result.regime.value} boundary={result.boundary_flag}")
    payload["medium"] = {"T": medium.T, "n_sat": medium.n_sat}
    payload["optimizer"] = config.as_dict()
    _dump(payload, args.json_out)
    print(summary, file=sys.stderr if args.json_out in (None, "-") else sys.stdout)
    return code


def _grid_from_args(args) -> GridSpec:
    grid = GridSpec()
    if args.grid:
        with open(args.grid) as fh:
            grid = GridSpec.from_dict(json.load(fh))
    axes = {}
    for name, attr, current in (("n_sat", "n_sat", grid.n_sat_range), ("T", "T", grid.T_range)):
        lo = getattr(args, f"{attr}_min")
        hi = getattr(args, f"{attr}_max")
        pts = getattr(args, f"{attr}_points")
        axes[name] = AxisSpec(current.min if lo is None else lo, current.max if hi is None else hi,
                              current.points if pts is None else pts)
    target = grid.target if args.target is None else args.target
    return GridSpec(axes["n_sat"], axes["T"], target)


def cmd_sweep(args) -> int:
    try:
        grid = _grid_from_args(args)
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"satsense sweep: invalid grid: {exc}", file=sys.stderr)
        return EXIT_USAGE
    threads = args.threads or os.cpu_count() or 1
    progress = None
    if not args.quiet:
        def progress(done, total):
            print(f"\r{done}/{total} cells", end="", file=sys.stderr, flush=True)
    table = run_sweep(grid, _optimizer_config(args), threads=threads, progress=progress)
    if progress:
        print(file=sys.stderr)
    try:
        if args.out in (None, "-"):
            write_table(table, args.format, sys.stdout)
        else:
            write_table(table, args.format, args.out)
    except OSError as exc:
        print(f"satsense sweep: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{table.flagged} of {len(table.cells)} cells flagged (boundary optimum or failure)",
          file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    sim_kwargs = dict(n_samples=args.samples, n_repetitions=args.reps, seed=args.seed,
                      target=args.target, bracket=tuple(args.bracket) if args.bracket else None)
    threads = args.threads or os.cpu_count() or 1
    info = {"target": args.target.value}
    if args.hook:
        model = HOOKS[args.hook](0.0)
        sim = SimConfig(true_value=model.value, **sim_kwargs)
        info["hook"] = args.hook
        call = lambda: crb_check(None, None, None, args.target, sim, model=model, threads=threads)
    else:
        if args.T is None or args.n_sat is None:
            print("satsense simulate: --T and --n-sat are required without --hook", file=sys.stderr)
            return EXIT_USAGE
        medium = Medium(args.T, args.n_sat)
        if args.coherent_optimum:
            opt = optimize(medium, args.target, StateFamily.COHERENT, raise_on_boundary=False)
            state, delta = opt.state, opt.delta_bar
        else:
            state, delta = validate_state(ProbeState(args.R, args.theta, args.r, args.psi)), args.delta_bar
        true_value = delta if args.target is Target.DETUNING else medium.T
        sim = SimConfig(true_value=true_value, **sim_kwargs)
        info.update(medium={"T": medium.T, "n_sat": medium.n_sat}, state=state.as_dict(),
                    delta_bar=delta)
        call = lambda: crb_check(state, medium, delta, args.target, sim, threads=threads)
    try:
        report = call()
        code = EXIT_OK
    except BracketExcludesOptimum as exc:
        report, code = exc.report, EXIT_RUNTIME
        print(f"satsense simulate: {exc}", file=sys.stderr)
    payload = {**info, **report.as_dict()}
    _dump(payload, args.json_out)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except SensingError as exc:
        print(f"satsense {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, OSError) as exc:
        print(f"satsense {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
