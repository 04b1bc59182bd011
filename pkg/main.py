"""
Main entry point.

Verbs:
1. run     - simulate one scenario and export trajectory, event logs and summary
2. sweep   - repeat a scenario over omega_scale or sigma_scale values
3. report  - print the stability report of a scenario as JSON
"""
import argparse
import logging
import sys
from typing import List, Optional

from src.cli.commands import EXIT_INVALID, SweepParameter, cmd_report, cmd_run, cmd_sweep
from src.sim.scenario import Mode


def _parse_values(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Event-triggered extremum seeking for two-player quadratic games"
    )
    parser.add_argument("--verbose", action="store_true", help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="Simulate one scenario")
    run_parser.add_argument("scenario", help="Path to a scenario JSON file")
    run_parser.add_argument("--out", default="output/run", help="Output directory")
    run_parser.add_argument("--mode", choices=[m.value for m in Mode], help="Override simulation mode")
    run_parser.add_argument("--dt", type=float, help="Override the integration step (s)")
    run_parser.add_argument("--t-final", type=float, dest="t_final", help="Override the horizon (s)")
    run_parser.add_argument("--html", action="store_true", help="Also write report.html")

    sweep_parser = subparsers.add_parser("sweep", help="Repeat a scenario over parameter values")
    sweep_parser.add_argument("scenario", help="Path to a scenario JSON file")
    sweep_parser.add_argument("--param", required=True, choices=[p.value for p in SweepParameter])
    sweep_parser.add_argument("--values", required=True, help="Comma-separated list of values")
    sweep_parser.add_argument("--out", default="output/sweep", help="Output directory")

    report_parser = subparsers.add_parser("report", help="Print the stability report as JSON")
    report_parser.add_argument("scenario", help="Path to a scenario JSON file")
    report_parser.add_argument("--q-scale", type=float, default=1.0, dest="q_scale",
                               help="Use Q = c I in the Lyapunov equation")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function.

    Returns:
        Exit code (0 for success)
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG)

    if args.command == "report":
        return cmd_report(args.scenario, q_scale=args.q_scale)

    print("=" * 80)
    print("EVENT-TRIGGERED NASH EQUILIBRIUM SEEKING")
    print("=" * 80)

    if args.command == "run":
        print("\nRunning scenario...")
        print("-" * 80)
        code = cmd_run(args.scenario, args.out, mode=args.mode, dt=args.dt,
                       t_final=args.t_final, html=args.html)
    else:
        try:
            values = _parse_values(args.values)
        except ValueError:
            print(f"Error: values must be numbers, got {args.values!r}", file=sys.stderr)
            return EXIT_INVALID
        print(f"\nSweeping {args.param} over {values}...")
        print("-" * 80)
        code = cmd_sweep(args.scenario, args.param, values, args.out)

    print("=" * 80)
    print("Done!" if code == 0 else f"Failed with exit code {code}")
    print("=" * 80)
    return code


if __name__ == "__main__":
    sys.exit(main())
