"""Command-line interface: ``unikey ui | bounds | blackwell | keyrate | verify | random``.

Exit codes: 0 success, 1 input error, 2 tolerance not met or a solver subproblem
failed, 3 hard invariant violated, 4 property-suite violations.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from typing import Any

from pydantic import ValidationError

from unikey import __version__
from unikey.bounds.chain import bounds_chain
from unikey.bounds.keyrate import one_way_rate, trivial_two_way_bounds
from unikey.cli.config import RunConfig
from unikey.cli.files import DistributionFile, RoleSpec, load_file, load_fixture, load_joint, write_file
from unikey.core.joint import DEFAULT_NAMES, JointDist, random_dirichlet
from unikey.decomposition.blackwell import blackwell_dominates
from unikey.decomposition.polytope import Roles
from unikey.decomposition.unique import compute_ui, compute_ui_oracle
from unikey.errors import DistributionError, InputFileError, InvariantViolation
from unikey.harness.suite import PropertyReport, SuiteConfig, run_suite
from unikey.utils.serializer import PRECISION, replace_unserializable_fields

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONVERGENCE = 2
EXIT_INVARIANT = 3
EXIT_VIOLATIONS = 4

LOWER_MARK = "↑ lower estimate"
UPPER_MARK = "↓ upper estimate"


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.{PRECISION}f}"


def _emit(config: RunConfig, payload: dict[str, Any], table: list[str]) -> None:
    if config.output_format == "json":
        print(json.dumps(replace_unserializable_fields(payload), indent=2, sort_keys=True))
    else:
        print("\n".join(table))


def _rows(pairs: Sequence[tuple[str, str]]) -> list[str]:
    width = max((len(label) for label, _ in pairs), default=0)
    return [f"{label:<{width}}  {value}" for label, value in pairs]


def _group(value: str | None) -> list[str] | None:
    if value is None:
        return None
    names = [name.strip() for name in value.split(",") if name.strip()]
    if not names:
        raise InputFileError(f"empty role group '{value}'")
    return names


def _load(args: argparse.Namespace) -> tuple[JointDist, Roles | None]:
    if args.fixture is not None:
        content = load_fixture(args.fixture)
    elif args.file is not None:
        content = load_file(args.file)
    else:
        raise InputFileError("a distribution file or --fixture is required")
    d = load_joint(content)

    stored = content.roles.triple() if content.roles is not None else None
    flags = (_group(args.s), _group(args.y), _group(args.z))
    if any(flag is not None for flag in flags):
        defaults = stored or tuple([name] for name in d.names[:3])
        if len(defaults) < 3:
            raise InputFileError("roles need at least three variables")
        groups = [flag if flag is not None else default for flag, default in zip(flags, defaults, strict=True)]
        return d, Roles.of(*groups)
    return d, Roles.of(*stored) if stored else None


def cmd_ui(args: argparse.Namespace, config: RunConfig) -> int:
    """UI, SI and CI with the certified gap."""
    d, roles = _load(args)
    solve = compute_ui_oracle if args.method == "oracle" else compute_ui
    result = solve(d, roles, config.to_solver_options())
    payload = {
        "ui": result.ui,
        "si": result.si,
        "ci": result.ci,
        "gap": result.gap,
        "iterations": result.iterations,
        "method": result.method,
        "converged": result.converged,
    }
    table = _rows(
        [
            ("UI", f"{_fmt(result.ui)}  (gap {_fmt(result.gap)})"),
            ("SI", f"{_fmt(result.si)}  (gap {_fmt(result.gap)})"),
            ("CI", f"{_fmt(result.ci)}  (gap {_fmt(result.gap)})"),
            ("gap", _fmt(result.gap)),
            ("iterations", str(result.iterations)),
            ("method", result.method),
            ("converged", str(result.converged).lower()),
        ]
    )
    _emit(config, payload, table)
    return EXIT_OK if result.converged else EXIT_CONVERGENCE


def cmd_bounds(args: argparse.Namespace, config: RunConfig) -> int:
    """The chain of key-rate bounds around UI."""
    d, roles = _load(args)
    report = bounds_chain(d, roles, config.to_bounds_options(), include_sui=args.sui)
    marks = {"lower": LOWER_MARK, "upper": UPPER_MARK, "exact": ""}
    pairs = []
    for label, value, direction in report.chain():
        gap = f"  (gap {_fmt(report.ui_gap)})" if label == "ui" else ""
        pairs.append((label, f"{_fmt(value)}{gap}  {marks[direction]}".rstrip()))
    pairs.append(("trivial_lower", _fmt(report.trivial_lower)))
    pairs.append(("trivial_upper", _fmt(report.trivial_upper)))
    pairs.extend((f"flag[{name}]", status) for name, status in sorted(report.flags.items()))
    if report.soft_violations:
        pairs.append(("soft_violations", ", ".join(report.soft_violations)))
    _emit(config, report.model_dump(), _rows(pairs))
    return EXIT_OK if report.flags["ui"] == "converged" else EXIT_CONVERGENCE


def cmd_blackwell(args: argparse.Namespace, config: RunConfig) -> int:
    """Whether Z dominates Y with respect to S, with the witness channel."""
    d, roles = _load(args)
    verdict = blackwell_dominates(d, roles)
    payload: dict[str, Any] = {"dominates": verdict.dominates, "residual": verdict.residual, "witness": verdict.witness}
    pairs = [("dominates", str(verdict.dominates).lower()), ("residual", _fmt(verdict.residual))]
    if verdict.witness is not None:
        for row, probs in enumerate(verdict.witness.kernel):
            pairs.append((f"witness[{row}]", " ".join(_fmt(p) for p in probs)))
    _emit(config, payload, _rows(pairs))
    return EXIT_OK


def cmd_keyrate(args: argparse.Namespace, config: RunConfig) -> int:
    """One-way key rate lower estimate and the elementary two-way bounds."""
    d, roles = _load(args)
    estimate = one_way_rate(d, roles, config.to_bounds_options())
    trivial = trivial_two_way_bounds(d, roles)
    payload = {
        "one_way_lower": estimate.value,
        "status": estimate.status,
        "witnesses": estimate.witnesses,
        "two_way_lower": trivial.lower,
        "two_way_upper": trivial.upper,
    }
    pairs = [
        ("one_way_lower", f"{_fmt(estimate.value)}  {LOWER_MARK}"),
        ("status", estimate.status),
        ("two_way_lower", _fmt(trivial.lower)),
        ("two_way_upper", _fmt(trivial.upper)),
    ]
    for name, channel in estimate.witnesses.items():
        for row, probs in enumerate(channel.kernel):
            pairs.append((f"{name}[{row}]", " ".join(_fmt(p) for p in probs)))
    _emit(config, payload, _rows(pairs))
    return EXIT_OK


def _report_row(report: PropertyReport) -> tuple[str, str]:
    shape = "x".join(str(n) for n in report.shape)
    text = f"{report.violations}/{report.instances} violations  worst slack {_fmt(report.worst_slack)}"
    if report.failed_seeds:
        text += f"  failed seeds {report.failed_seeds}"
    return f"{report.property_id} {shape}", text


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> int:
    """Run the property suite; any violation fails the command."""
    suite = SuiteConfig.from_toml(args.config) if args.config else SuiteConfig.default(args.count)
    if not args.config:
        suite = suite.model_copy(
            update={"seed": config.seed, "options": config.to_solver_options(), "bounds": config.to_bounds_options()}
        )
    reports = run_suite(suite)
    violations = sum(report.violations for report in reports)
    payload = {"reports": [report.model_dump() for report in reports], "violations": violations}
    _emit(config, payload, [*_rows([_report_row(report) for report in reports]), f"total violations: {violations}"])
    return EXIT_VIOLATIONS if violations else EXIT_OK


def _shape(value: str) -> tuple[int, ...]:
    try:
        shape = tuple(int(part) for part in value.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid shape '{value}'") from e
    if not shape or min(shape) < 1:
        raise argparse.ArgumentTypeError(f"invalid shape '{value}'")
    return shape


def cmd_random(args: argparse.Namespace, config: RunConfig) -> int:
    """Write a seeded Dirichlet distribution file."""
    names = args.names.split(",") if args.names else None
    d = random_dirichlet(args.shape, args.concentration, config.seed, names)
    roles = RoleSpec(s=[d.names[0]], y=[d.names[1]], z=[d.names[2]]) if len(d.names) >= 3 else None
    write_file(args.out, DistributionFile.from_joint(d, roles))
    _emit(config, {"out": str(args.out), "shape": list(d.shape), "seed": config.seed}, [f"wrote {args.out}"])
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-6, help="target optimality gap in bits")
    common.add_argument("--restarts", type=int, default=20, help="random restarts of the bound searches")
    common.add_argument("--seed", type=int, default=0, help="seed of every randomized step")
    common.add_argument("--max-iters", type=int, default=10_000, help="Frank-Wolfe iteration cap")
    common.add_argument("--max-evals", type=int, default=200, help="evaluation budget of nested-UI searches")
    common.add_argument("--workers", type=int, default=1, help="threads for independent restarts")
    common.add_argument("--format", choices=("table", "json"), default="table", dest="output_format")
    common.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    return common


def _input_parser() -> argparse.ArgumentParser:
    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("file", nargs="?", help="distribution file (.json or .toml)")
    inputs.add_argument("--fixture", help="bundled fixture name instead of a file")
    inputs.add_argument("--s", help="comma-separated variables of Alice's role")
    inputs.add_argument("--y", help="comma-separated variables of Bob's role")
    inputs.add_argument("--z", help="comma-separated variables of Eve's role")
    return inputs


def build_parser() -> argparse.ArgumentParser:
    """The full argument parser."""
    common, inputs = _common_parser(), _input_parser()
    parser = argparse.ArgumentParser(prog="unikey", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    ui = commands.add_parser("ui", parents=[common, inputs], help="unique, shared and synergistic information")
    ui.add_argument("--method", choices=("frank_wolfe", "oracle"), default="frank_wolfe")
    ui.set_defaults(handler=cmd_ui)

    bounds = commands.add_parser("bounds", parents=[common, inputs], help="chain of secret-key-rate bounds")
    bounds.add_argument("--sui", action="store_true", help="also compute the second nested-UI bound")
    bounds.set_defaults(handler=cmd_bounds)

    blackwell = commands.add_parser("blackwell", parents=[common, inputs], help="Blackwell dominance of Z over Y")
    blackwell.set_defaults(handler=cmd_blackwell)

    keyrate = commands.add_parser("keyrate", parents=[common, inputs], help="one-way key rate lower estimate")
    keyrate.set_defaults(handler=cmd_keyrate)

    verify = commands.add_parser("verify", parents=[common], help="run the property suite")
    verify.add_argument("config", nargs="?", help="suite configuration (.toml); the default suite otherwise")
    verify.add_argument("--count", type=int, default=100, help="draws per property of the default suite")
    verify.set_defaults(handler=cmd_verify)

    random = commands.add_parser("random", parents=[common], help="write a random distribution file")
    random.add_argument("--shape", type=_shape, default=(2, 2, 2), help="comma-separated alphabet sizes")
    random.add_argument("--concentration", type=float, default=1.0)
    random.add_argument("--names", help=f"comma-separated variable names, default {','.join(DEFAULT_NAMES)}")
    random.add_argument("--out", required=True, help="output path (.json or .toml)")
    random.set_defaults(handler=cmd_random)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # usage errors are input errors; --help and --version exit cleanly
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)
    try:
        config = RunConfig(
            tolerance=args.tol,
            restarts=args.restarts,
            seed=args.seed,
            max_iters=args.max_iters,
            output_format=args.output_format,
            max_evals=args.max_evals,
            workers=args.workers,
        )
        return int(args.handler(args, config))
    except ValidationError as e:
        logger.error("invalid option: %s", e)
        return EXIT_INPUT
    except InvariantViolation as e:
        logger.error("invariant violated: %s", e)
        return EXIT_INVARIANT
    except DistributionError as e:
        logger.error("%s", e)
        return EXIT_INPUT
    except ArithmeticError as e:
        logger.error("solver failed: %s", e)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
