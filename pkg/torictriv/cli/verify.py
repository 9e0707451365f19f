import sys

import click

from . import cli
from .util import EXIT_VERIFY, budget_option, exit_codes
from ..lib import read_certificate_from_file
from .. import api


@cli.command()
@click.argument("cert_path", metavar="CERT_PATH", type=str, nargs=1)
@click.argument("problem_path", metavar="PROBLEM_PATH", type=str, nargs=1)
@budget_option
@exit_codes
def verify(cert_path, problem_path, budget):
    """
    Replay every identity of a certificate against a problem. Prints "ok"
    or the first failing identity (exit code 1).

    CERT_PATH : Certificate written by `torictriv trivialize --out`.

    PROBLEM_PATH : The problem file the certificate was issued for.

    """
    cert = read_certificate_from_file(cert_path)
    loaded = api.problem.load_problem(problem_path, budget=budget)
    for check in api.verify.replay(cert, loaded):
        if not check.ok:
            click.echo(f"FAILED {check.identity}: {check.message}")
            sys.exit(EXIT_VERIFY)
    click.echo("ok")
