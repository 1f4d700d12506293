"""
qdu command line interface.

    qdu demo ellsberg
    qdu check-seut ellsberg --pattern "f1>f2,f4>f3"
    qdu baselines ellsberg --model choquet --format md
    qdu fit-state ellsberg --mechanism contextual --seed 7
    qdu fit-choice ellsberg --seed 7
    qdu interference ellsberg --a 0.6,0 --b 0,0.8

Exit status is 0 on success, including infeasible SEUT verdicts, 2 on
input errors and 3 when a search finds nothing.
"""
from typing import List, Optional, Tuple
import argparse
import logging
import sys

from . import __version__
from .baseline_mixin import BASELINE_MODELS
from .config import FORMATS, RunConfig
from .ellsberg import MECHANISMS
from .exceptions import OutOfRange, QduError
from .experiment_spec import ExperimentSpec
from .report import Report, render, write_report
from .runner import ExperimentRunner
from .seut import DEFAULT_GRID

logger = logging.getLogger("quantum_decision_lib")


def _complex(text: str) -> complex:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE[,IM], got '{text}'") from None
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected RE[,IM], got '{text}'")
    return complex(parts[0], parts[1] if len(parts) == 2 else 0.0)


def _component(text: str) -> Tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected Y_WEIGHT,PHASE_Y,PHASE_B, got '{text}'"
        )
    return parts


def cmd_demo(runner: ExperimentRunner, args) -> Report:
    return runner.demo(args.target)


def cmd_check_seut(runner: ExperimentRunner, args) -> Report:
    return runner.check_seut(ExperimentSpec.load(args.spec), args.pattern, args.grid)


def cmd_baselines(runner: ExperimentRunner, args) -> Report:
    return runner.baselines(ExperimentSpec.load(args.spec), args.model)


def cmd_fit_state(runner: ExperimentRunner, args) -> Report:
    return runner.fit_state(ExperimentSpec.load(args.spec), args.mechanism, args.pattern)


def cmd_fit_choice(runner: ExperimentRunner, args) -> Report:
    return runner.fit_choice(ExperimentSpec.load(args.spec), args.check_real)


def cmd_interference(runner: ExperimentRunner, args) -> Report:
    coefficients = None
    if args.a is not None or args.b is not None:
        if args.a is None or args.b is None:
            raise OutOfRange("--a and --b must be given together")
        coefficients = (args.a, args.b)
    components = args.component
    if components is not None and len(components) != 2:
        raise OutOfRange(f"--component must be given twice, got {len(components)}")
    return runner.interference(ExperimentSpec.load(args.spec), components, coefficients)


def _global_options() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS,
                        help="Report format (default: json)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="Master seed; overrides QDU_SEED")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                        help="Fit tolerance (default: 1e-6)")
    common.add_argument("--out", "-o", default=argparse.SUPPRESS,
                        help="Write the report here instead of stdout")
    common.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS,
                        help="Debug logging on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="qdu",
        description="Quantum and classical models of decisions under ambiguity",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    p = subparsers.add_parser("demo", parents=[common],
                              help="Run a bundled walkthrough")
    p.add_argument("target", choices=["ellsberg", "machina"])
    p.set_defaults(func=cmd_demo)

    p = subparsers.add_parser("check-seut", parents=[common],
                              help="Decide whether a pattern is SEUT consistent")
    p.add_argument("spec", help="Experiment JSON, or a built-in name")
    p.add_argument("--pattern", required=True, help='Preferences, e.g. "f1>f2,f4>f3"')
    p.add_argument("--grid", type=int, default=DEFAULT_GRID,
                   help=f"Prior grid points per free color (default: {DEFAULT_GRID})")
    p.set_defaults(func=cmd_check_seut)

    p = subparsers.add_parser("baselines", parents=[common],
                              help="Evaluate acts under a classical ambiguity model")
    p.add_argument("spec", help="Experiment JSON, or a built-in name")
    p.add_argument("--model", choices=BASELINE_MODELS, required=True)
    p.set_defaults(func=cmd_baselines)

    p = subparsers.add_parser("fit-state", parents=[common],
                              help="Search a quantum model reproducing a pattern")
    p.add_argument("spec", help="Experiment JSON, or a built-in name")
    p.add_argument("--mechanism", choices=MECHANISMS, default="rotated")
    p.add_argument("--pattern", default=None,
                   help="Preferences to reproduce (default: observed majority)")
    p.set_defaults(func=cmd_fit_state)

    p = subparsers.add_parser("fit-choice", parents=[common],
                              help="Fit a state and commuting choice pair to counts")
    p.add_argument("spec", help="Experiment JSON with observed counts")
    p.add_argument("--check-real", action="store_true",
                   help="Also run the real and complex representability searches")
    p.set_defaults(func=cmd_fit_choice)

    p = subparsers.add_parser("interference", parents=[common],
                              help="Decompose a superposition into interference terms")
    p.add_argument("spec", help="Experiment JSON, or a built-in name")
    p.add_argument("--component", type=_component, action="append", default=None,
                   metavar="Y,PY,PB", help="Component state; give twice")
    p.add_argument("--a", type=_complex, default=None, metavar="RE[,IM]")
    p.add_argument("--b", type=_complex, default=None, metavar="RE[,IM]")
    p.set_defaults(func=cmd_interference)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    verbose = getattr(args, "verbose", False)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        config = RunConfig.from_env(
            seed=getattr(args, "seed", None),
            tol=getattr(args, "tol", None),
            format=getattr(args, "format", None),
            out=getattr(args, "out", None),
            verbose=verbose,
        )
        runner = ExperimentRunner(config, logger)
        report = args.func(runner, args)
        write_report(render(report, config.format), config.out)
    except QduError as e:
        print(f"qdu: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"qdu: {e}", file=sys.stderr)
        return OutOfRange.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
