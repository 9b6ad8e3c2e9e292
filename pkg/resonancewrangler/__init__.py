"""resonance-wrangler: periodic solutions of semilinear parabolic equations at resonance, computed and checked on discretized elliptic operators."""

import argparse
import logging
import sys

__version__ = "0.1"

log = logging.getLogger(__name__)


def make_parser():
    from resonancewrangler import command

    parser = argparse.ArgumentParser(prog="rw", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="Log numeric progress at DEBUG level.")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for cls in command.all_commands():
        sub = subparsers.add_parser(cls.name, help=getattr(cls, "_help", None),
                                    description=getattr(cls, "_description", None))
        cls.specify_args(sub)
    return parser


def main(argv=None):
    """Entry point of the rw script. Returns 0 when every check passed, 1 on a failed check or numeric breakdown and 2 on a usage or configuration error."""
    from resonancewrangler import command, errors, runfolder

    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return command.get_command(args.command)().run(args)
    except (errors.ConfigurationError, command.UserError, runfolder.IncompleteRunFolderError) as e:
        log.error("%s", e)
        return 2
    except OSError as e:
        log.error("cannot write the run: %s", e)
        return 2
    except errors.ResonanceError as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
