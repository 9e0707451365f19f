import sys

import click
import pandas as pd

from . import cli
from .util import EXIT_PARTIAL, budget_option, emit_table, exit_codes, format_option, get_map
from ..lib import schemas, write_json
from ..lib.errors import ValidationError
from .. import api


@cli.command()
@click.argument("problem_path", metavar="PROBLEM_PATH", type=str, nargs=1)
@click.option(
    "--out",
    "-o",
    help="Write the certificate (or the partial result) to this JSON file.",
    type=str,
    required=False,
)
@click.option(
    "--seed",
    help="Seed of the candidate orders of the basis searches.",
    type=int,
    default=0,
    show_default=True,
)
@budget_option
@click.option(
    "--max-rank",
    help="Largest module size accepted.",
    type=int,
    default=schemas.DEFAULTS["max_rank"],
    show_default=True,
)
@click.option(
    "--method",
    help="Search a basis directly, always recurse over faces, or try both.",
    type=click.Choice(["auto", "direct", "faces"]),
    default="auto",
    show_default=True,
)
@format_option
@click.option(
    "-p",
    "--nproc",
    help="Number of processes to split the faces of one dimension between."
    " [default: 1, i.e. no process pool]",
    default=1,
    type=int,
)
@exit_codes
def trivialize(problem_path, out, seed, budget, max_rank, method, fmt, nproc):
    """
    Find a graded free module F and an equivariant isomorphism E -> F for
    the module of a problem. Prints the weights of F and its K0 class; the
    certificate goes to --out. Exits with 5 and prints the partial result
    when the cover factorization is not supported.

    PROBLEM_PATH : Problem file (JSON) declaring a module.

    """
    loaded = api.problem.load_problem(problem_path, budget=budget)
    if loaded.problem is None:
        raise ValidationError(f"{problem_path} declares no module")

    _map, pool = get_map(nproc)
    try:
        result = api.trivializer.trivialize(
            loaded.problem, seed=seed, method=method, max_rank=max_rank, map_functor=_map
        )
    finally:
        if pool is not None:
            pool.close()

    if isinstance(result, api.trivializer.PartialResult):
        doc = api.problem.partial_document(result, loaded)
        if out:
            write_json(doc, out)
        click.echo(write_json(doc), nl=False)
        sys.exit(EXIT_PARTIAL)

    doc = api.problem.certificate_document(result, loaded)
    if out:
        write_json(doc, out)
    table = pd.DataFrame(doc["k0_class"], columns=schemas.k0_report_columns)
    extra = {
        "rank": result.rank,
        "target_weights": " ".join(str(w) for w in result.target_weights),
    }
    emit_table(table, fmt, extra)
