import functools
import json
import sys

import click

from ..lib import canonical_json
from ..lib.errors import (
    DegenerateLift,
    GluingMismatch,
    NotInvariant,
    NotInvertible,
    ParseError,
    PreconditionFailed,
    ResourceError,
    StructuralViolation,
    ValidationError,
    VerificationFailure,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_RESOURCE = 4
EXIT_PARTIAL = 5

# order matters: ParseError is also a ValueError
_EXIT_CODES = [
    (ParseError, EXIT_PARSE),
    (VerificationFailure, EXIT_VERIFY),
    (ResourceError, EXIT_RESOURCE),
    (
        (
            ValidationError,
            NotInvariant,
            NotInvertible,
            StructuralViolation,
            PreconditionFailed,
            DegenerateLift,
            GluingMismatch,
        ),
        EXIT_INVALID,
    ),
]


def exit_codes(func):
    """Turn torictriv errors raised by a command into its exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except OSError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_PARSE)
        except Exception as e:
            for exc_types, code in _EXIT_CODES:
                if isinstance(e, exc_types):
                    click.echo(f"Error: {e}", err=True)
                    sys.exit(code)
            raise

    return wrapper


def get_map(nproc):
    """``(map, pool)``: the builtin map, or ``imap`` of a process pool."""
    if nproc > 1:
        from multiprocess import Pool

        pool = Pool(nproc)
        return pool.imap, pool
    return map, None


def emit_table(df, fmt, extra=None):
    """Print a report table as tsv (with ``# key: value`` lines) or as JSON."""
    extra = extra or {}
    if fmt == "json":
        out = dict(extra)
        out["table"] = json.loads(df.to_json(orient="records"))
        click.echo(canonical_json(out), nl=False)
        return
    for key, value in extra.items():
        click.echo(f"# {key}: {value}")
    click.echo(df.to_csv(sep="\t", index=False), nl=False)


format_option = click.option(
    "--format",
    "fmt",
    help="Report format.",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
)

budget_option = click.option(
    "--budget",
    help="Lattice points allowed in a single enumeration.",
    type=int,
    default=None,
)
