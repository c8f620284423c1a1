"""Command line: ``propagate``, ``sweep`` and ``verify``.

Exit codes: 0 success, 1 numerical failure (e.g. Lanczos did not converge),
2 configuration error, 3 reference cross-validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .checks import run_checks
from .harness import (
    ConfigError,
    CrossValidationError,
    SweepResult,
    load_config,
    make_reference,
    propagate,
    sweep,
)
from .lanczos import KrylovError

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_CROSSCHECK = 0, 1, 2, 3

log = logging.getLogger("laserprop")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laserprop",
        description="Magnus-based propagators for the semiclassical Schroedinger equation "
                    "with laser potentials.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", help="run one scheme at one step size")
    p.add_argument("--config", required=True, help="flat JSON experiment config")
    p.add_argument("--scheme", help="scheme id (default: first configured scheme)")
    p.add_argument("--h", type=float, help="time step (default: first configured step)")
    p.add_argument("--full", action="store_true", help="use the full-scale preset")
    p.add_argument("--out", help="CSV output path; a JSON mirror is written next to it")
    p.add_argument("--no-reference", action="store_true",
                   help="skip the reference run; the error column is then nan")

    s = sub.add_parser("sweep", help="run every configured scheme over every step size")
    s.add_argument("--config", required=True, help="flat JSON experiment config")
    s.add_argument("--full", action="store_true", help="use the full-scale preset")
    s.add_argument("--out", help="CSV output path (overrides the config's 'output')")

    sub.add_parser("verify", help="run the operator-identity and oracle self-checks")
    return parser


def _emit(result: SweepResult, out: str | None) -> None:
    if out:
        csv_path, json_path = result.write(out)
        log.info("wrote %s and %s", csv_path, json_path)
    else:
        sys.stdout.write(result.to_csv())


def _cmd_propagate(args) -> int:
    config = load_config(args.config, full=args.full or None)
    scheme = args.scheme or config.schemes[0]
    overrides = {"schemes": (scheme,)}
    if args.h is not None:
        overrides["h"] = (args.h,)
        overrides["h_geometric"] = None
        if config.reference_h is not None and config.reference_h > args.h / 20:
            # keep the reference at least twenty times finer than the run
            overrides["reference_h"] = args.h / 20
    config = config.replace(**overrides)
    reference = None if args.no_reference else make_reference(config)
    _, record = propagate(config, scheme, config.step_sizes()[0], reference)
    _emit(SweepResult(config, reference, [record], {}, 0.0), args.out or config.output)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config, full=args.full or None)
    result = sweep(config)
    _emit(result, args.out or config.output)
    for sid, slope in result.slopes.items():
        log.info("%s fitted order %.3f", sid, slope)
    return EXIT_OK


def _cmd_verify(args) -> int:
    results = run_checks()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


COMMANDS = {"propagate": _cmd_propagate, "sweep": _cmd_sweep, "verify": _cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CrossValidationError as exc:
        print(f"cross-validation failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except KrylovError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
