"""
Problem documents to algebra objects and certificates back to documents.

Group coordinates in a problem file follow the order of its ``group``
(torsion factors first, then the free part) and may use arbitrary cyclic
orders; everything inside torictriv, certificates included, uses the
canonical invariant-factor coordinates of ``FinAbGroup``.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np

from ..lib import io, schemas
from ..lib.cone import cone_from_functionals, cone_from_rays
from ..lib.errors import ParseError
from ..lib.lattice import FinAbGroup, as_intmat, as_intvec, matmul
from ..lib.monoid import AffineMonoid
from .graded_algebra import CoeffRing, ToricGAlgebra
from .graded_linalg import GradedIdempotent, GradedMatrix, render_weights
from .trivializer import GActionProblem, PartialResult, TrivializationCertificate

logger = logging.getLogger(__name__)


class LoadedProblem(NamedTuple):
    """A problem document with the objects built from it."""

    doc: dict
    alg: ToricGAlgebra
    problem: Optional[GActionProblem]
    coords: np.ndarray

    @property
    def hash(self) -> str:
        return io.problem_hash(self.doc)

    def weight(self, vec):
        """A weight given in the file's group coordinates."""
        return self.alg.P.element(matmul(self.coords, as_intvec(vec)))


def build_algebra(doc, budget=None):
    """
    The graded algebra of a validated problem document.

    Returns
    -------
    alg : ToricGAlgebra
    coords : IntMat
        Maps file group coordinates to canonical ones.
    """
    n = doc["rank"]
    coeff = CoeffRing.from_name(doc["coefficients"])
    (kind, vectors), = doc["cone"].items()
    if kind == "rays":
        cone = cone_from_rays(n, [tuple(v) for v in vectors])
    else:
        cone = cone_from_functionals(n, [tuple(v) for v in vectors])
    group = doc["group"]
    torsion = list(group.get("torsion", []))
    P, coords = FinAbGroup.from_orders(torsion + [0] * group["free_rank"])
    psi = matmul(coords, as_intmat(doc["psi"], shape=(len(torsion) + group["free_rank"], n)))
    for j in range(psi.shape[1]):
        psi[:, j] = as_intvec(P.reduce(psi[:, j]))
    monoid = AffineMonoid(cone, budget=budget)
    alg = ToricGAlgebra(coeff, monoid, P, psi)
    logger.info(f"Built {alg!r}")
    return alg, coords


def build_problem(doc, budget=None) -> LoadedProblem:
    """
    Objects of a validated problem document; ``problem`` is None when the
    document declares no module.
    """
    alg, coords = build_algebra(doc, budget)
    module = doc.get("module")
    if module is None:
        return LoadedProblem(doc, alg, None, coords)

    def weight(vec):
        return alg.P.element(matmul(coords, as_intvec(vec)))

    if "free" in module:
        p = GActionProblem(alg, tuple(weight(w) for w in module["free"]), doc.get("name", ""))
        return LoadedProblem(doc, alg, p, coords)
    weights = tuple(weight(w) for w in module["weights"])
    rows = []
    for i, row in enumerate(module["idempotent"]):
        out = []
        for j, text in enumerate(row):
            try:
                out.append(alg.parse(str(text)))
            except ParseError as e:
                raise ParseError(f"module.idempotent[{i}][{j}]: {e}", e.line, e.column) from e
        rows.append(out)
    e = GradedIdempotent(GradedMatrix(alg, weights, weights, rows))
    return LoadedProblem(doc, alg, GActionProblem(alg, e, doc.get("name", "")), coords)


def load_problem(fname, budget=None) -> LoadedProblem:
    return build_problem(io.read_problem_from_file(fname), budget)


def certificate_document(cert: TrivializationCertificate, loaded: LoadedProblem) -> dict:
    """The canonical JSON-compatible form of a certificate."""
    return {
        "version": schemas.FORMAT_VERSION,
        "problem_hash": loaded.hash,
        "group": str(cert.problem.alg.P),
        "source_weights": render_weights(cert.problem.weights),
        "target_weights": render_weights(cert.target_weights),
        "iso_entries": cert.S.render()["entries"],
        "inverse_entries": cert.T.render()["entries"],
        "trace": cert.trace,
        "k0_class": cert.k0_class().render(),
        "seed": cert.seed,
    }


def partial_document(partial: PartialResult, loaded: LoadedProblem) -> dict:
    out = partial.render()
    out["problem_hash"] = loaded.hash
    return out
