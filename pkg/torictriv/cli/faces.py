import click
import pandas as pd

from . import cli
from .util import budget_option, emit_table, exit_codes, format_option
from ..lib import schemas
from .. import api


def faces_table(alg):
    """One row per face of the cone, smallest first."""
    rows = []
    for f in alg.cone.faces():
        rows.append(
            {
                "face": f.label,
                "dim": f.dim,
                "codim": f.codim,
                "rays": [list(r) for r in f.rays],
                "zero_set": list(f.zero_set),
                "span_basis": [[int(x) for x in col] for col in f.span_basis.T],
            }
        )
    return pd.DataFrame(rows, columns=schemas.faces_report_columns)


@cli.command()
@click.argument("problem_path", metavar="PROBLEM_PATH", type=str, nargs=1)
@format_option
@budget_option
@exit_codes
def faces(problem_path, fmt, budget):
    """
    Print the face lattice of the cone of a problem: dimensions, the
    codimension-1 faces, the smallest face and the generators of the ideal J
    of interior monomials.

    PROBLEM_PATH : Problem file (JSON).

    """
    loaded = api.problem.load_problem(problem_path, budget=budget)
    alg = loaded.alg
    table = faces_table(alg)
    extra = {
        "codim1_faces": " ".join(f.label for f in alg.cone.codim1_faces()),
        "smallest_face": alg.cone.smallest_face().label,
        "J_generators": " ".join(x.render() for x in alg.interior_generators()),
    }
    emit_table(table, fmt, extra)
