"""
Command-line entry point: `phaseless <subcommand> [flags]`.

Runs the management command of the same name and maps failures onto exit codes:
0 success, 2 usage or input errors, 3 numerical failure, 4 resource refusal.
"""

import logging
import os
import sys

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SUBCOMMANDS = ('simulate', 'retrieve', 'propagate', 'reconstruct', 'pipeline', 'oracle', 'bound', 'export')

USAGE = '''usage: phaseless <subcommand> [--config PATH] [--out DIR] [--noise LEVEL] [--seed N]
                 [--k-scale S] [--threads T] [subcommand flags]

subcommands: %s
''' % ', '.join(SUBCOMMANDS)

logger = logging.getLogger("rainbow")


def setup():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'phaseless.settings')
    import django
    django.setup()


def cli(argv):
    "run one subcommand and return its exit code"
    if not argv or argv[0] in ('-h', '--help', 'help'):
        sys.stderr.write(USAGE)
        return EXIT_USAGE
    name, args = argv[0], list(argv[1:])
    if name not in SUBCOMMANDS:
        sys.stderr.write('unknown subcommand %r\n' % name)
        sys.stderr.write(USAGE)
        return EXIT_USAGE

    setup()
    from django.core.management import call_command
    from django.core.management.base import CommandError
    from numpy.linalg import LinAlgError
    from .errors import PhaselessError

    try:
        call_command(name, *args)
    except CommandError as e:
        sys.stderr.write('%s: %s\n' % (name, e))
        return EXIT_USAGE
    except SystemExit as e:
        # argparse --help and usage errors
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    except PhaselessError as e:
        logger.error('%s failed: %s' % (name, e))
        sys.stderr.write('%s: %s\n' % (name, e))
        return e.exit_code
    except (ArithmeticError, ValueError, LinAlgError) as e:
        logger.exception('%s: numerical failure outside a tagged stage' % name)
        sys.stderr.write('%s: numerical failure: %s: %s\n' % (name, type(e).__name__, e))
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(cli(sys.argv[1:]))


if __name__ == '__main__':
    main()
