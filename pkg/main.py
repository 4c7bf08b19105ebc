import argparse
import logging
import sys

from icecream import ic

from core.abstract import App
from core.config import get_settings
from core.errors import ConfigError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="RIS-assisted OFDM relay: subcarrier matching and passive beamforming"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON scenario (run, snr-report) or sweep file")
    common.add_argument("--seed", type=int, default=None, help="Base RNG seed override")
    common.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials override")
    common.add_argument("--out-dir", default=None, help="Output directory (default: results)")
    common.add_argument(
        "--schemes", default=None, help="Comma separated schemes, e.g. BnB-I,DCP-I,RelayOnly"
    )
    common.add_argument("--workers", type=int, default=None, help="Worker processes for sweeps")
    common.add_argument("--debug", action="store_true", help="Enable icecream tracing")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("run", parents=[common], help="Optimize a single scenario")
    commands.add_parser("sweep", parents=[common], help="Run a sweep and emit CSV + plot script")
    commands.add_parser("snr-report", parents=[common], help="Per-pair SNR balance table")
    commands.add_parser("bench", parents=[common], help="Runtime table over subcarriers")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    debug = args.debug or settings.debug

    ic.configureOutput(prefix="🍦 DEBUG | ")
    if not debug:
        ic.disable()
    logging.basicConfig(
        level=logging.DEBUG if debug else settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    from harness.app import EXIT_CONFIG_ERROR, BenchApp, RunApp, SnrReportApp, SweepApp

    apps: dict[str, type[App]] = {
        "run": RunApp,
        "sweep": SweepApp,
        "snr-report": SnrReportApp,
        "bench": BenchApp,
    }
    app = apps[args.command](settings, args)
    try:
        return app.run()
    except ConfigError as e:
        logging.getLogger(__name__).error(str(e))
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
