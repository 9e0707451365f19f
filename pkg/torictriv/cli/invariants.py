import click
import pandas as pd

from . import cli
from .util import budget_option, emit_table, exit_codes, format_option
from ..lib import schemas
from .. import api


@cli.command()
@click.argument("problem_path", metavar="PROBLEM_PATH", type=str, nargs=1)
@format_option
@budget_option
@exit_codes
def invariants(problem_path, fmt, budget):
    """
    Print generators of the invariant monoid and the presentation of the
    invariant ring A^G as a monomial algebra.

    PROBLEM_PATH : Problem file (JSON).

    """
    loaded = api.problem.load_problem(problem_path, budget=budget)
    alg = loaded.alg
    gens = alg.invariant_generators()
    table = pd.DataFrame(
        [
            {
                "generator": list(x.support[0]),
                "weight": list(alg.weight(x.support[0]).coords),
                "element": x.render(),
            }
            for x in gens
        ],
        columns=schemas.invariants_report_columns,
    )
    ring = alg.coeff.name
    presentation = f"{ring}[{', '.join(x.render() for x in gens)}]" if gens else ring
    emit_table(table, fmt, {"invariant_ring": presentation})
