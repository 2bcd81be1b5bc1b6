#!/usr/bin/env python3
"""
Main entry point for the nested-resonator toolkit.

Usage:
    python src/run_resonators.py freqs --config config/runs/equidistant_50.json
    python src/run_resonators.py table1 --out results/table1
    python src/run_resonators.py modes --layers 8 --delta 1.6666666666666666e-4
    python src/run_resonators.py asymptotic --layers 4 --delta 0.01
    python src/run_resonators.py splitting --layers 8
    python src/run_resonators.py selftest
    python src/run_resonators.py freqs --config run.json --dry-run
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

# Add project root to path so imports work when script is in src/
_project_root = Path(__file__).parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

from src.cli.commands import (  # noqa: E402
    cmd_asymptotic,
    cmd_freqs,
    cmd_modes,
    cmd_splitting,
    cmd_table1,
)
from src.cli.interface import (  # noqa: E402
    display_error,
    display_info,
    display_success,
    display_warning,
)
from src.cli.selftest import run_selftest  # noqa: E402
from src.config.run_loader import load_run_config  # noqa: E402
from src.resonance.asymptotics import AsymptoticInputError, NoClosedFormError  # noqa: E402
from src.resonance.modes import ModeError  # noqa: E402
from src.resonance.rootfind import ConvergenceError  # noqa: E402
from src.utils.config import ConfigurationError, load_environment, setup_logging  # noqa: E402

logger = logging.getLogger(__name__)

COMMANDS = {
    "freqs": cmd_freqs,
    "table1": cmd_table1,
    "modes": cmd_modes,
    "asymptotic": cmd_asymptotic,
    "splitting": cmd_splitting,
}


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=None, help="Output directory")
    common.add_argument(
        "--delta", type=float, default=None, help="Contrast rho_r / rho (unit resonator)"
    )
    common.add_argument("--layers", type=int, default=None, help="Number of layers N")
    common.add_argument(
        "--scale", type=float, default=None, help="Geometric radius ratio s in (0, 1)"
    )
    common.add_argument(
        "--r1", type=float, default=None, help="Outermost radius for geometric radii"
    )
    common.add_argument("--omega-max", type=float, default=None, help="Real scan ceiling")
    common.add_argument("--grid", type=int, default=None, help="Number of scan grid points")
    common.add_argument("--tol", type=float, default=None, help="Absolute Muller tolerance")
    common.add_argument(
        "--format",
        choices=["csv", "json", "svg", "all"],
        default=None,
        help="Output formats (default: all)",
    )
    common.add_argument("--debug", action="store_true", help="Enable debug logging")
    common.add_argument(
        "--dry-run",
        action="store_true",
        help="Validate configuration without computing",
    )
    return common


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    common = _common_flags()
    parser = argparse.ArgumentParser(
        description="Subwavelength resonances of nested concentric resonators",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    %(prog)s freqs --layers 50 --delta 1.6666666666666666e-4   50-layer spectrum
    %(prog)s table1                                            Four-layer regression
    %(prog)s modes --layers 7 --scale 0.8 --r1 7               Geometric eigenmodes
    %(prog)s selftest                                          Invariant suite
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("freqs", parents=[common], help="Subwavelength roots of det A_N")
    sub.add_parser("table1", parents=[common], help="Four-layer regression table")
    sub.add_parser("modes", parents=[common], help="Eigenmodes at every root")
    sub.add_parser("asymptotic", parents=[common], help="Closed-form frequencies (N <= 4)")
    sub.add_parser("splitting", parents=[common], help="Root lists for N = 1..layers")
    sub.add_parser("selftest", parents=[common], help="Run the invariant suite")
    return parser.parse_args(argv)


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "out": args.out,
        "delta": args.delta,
        "layers": args.layers,
        "scale": args.scale,
        "r1": args.r1,
        "omega_max": args.omega_max,
        "grid_points": args.grid,
        "tol_abs": args.tol,
        "format": args.format,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    args = parse_args(argv)

    try:
        env = load_environment()
        setup_logging(env.log_level, args.debug)

        if args.command == "selftest":
            if args.dry_run:
                display_success("Dry run successful - nothing to validate for selftest")
                return 0
            report, exit_code = run_selftest(args.out)
            print(json.dumps(report, indent=2))
            return exit_code

        config = load_run_config(args.config, _overrides(args), env)
        display_info(
            f"Configuration: N = {config.geometry.n_layers}, delta = {config.medium.delta:.6g}"
        )

        if args.dry_run:
            display_success("Dry run successful - configuration is valid")
            return 0

        return COMMANDS[args.command](config)

    except ConfigurationError as e:
        display_error(f"Configuration error: {e}")
        logger.error("Configuration error: %s", e)
        return 1

    except NoClosedFormError as e:
        display_error(f"No closed form implemented: {e}")
        return 1

    except (AsymptoticInputError, ConvergenceError, ModeError) as e:
        display_error(str(e))
        logger.exception("Computation failed")
        return 1

    except KeyboardInterrupt:
        display_warning("Interrupted by user")
        return 130

    except Exception as e:
        display_error(f"Unexpected error: {e}")
        logger.exception("Unexpected error during command execution")
        return 1


if __name__ == "__main__":
    sys.exit(main())
