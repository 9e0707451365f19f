"""
Independent replay of a certificate against its problem.

Only element arithmetic of the graded algebra is used here; none of the
trivializer's constructions are called.
"""
import logging
from collections import Counter
from typing import List, NamedTuple

from ..lib.errors import ParseError, ValidationError, VerificationFailure
from .graded_algebra import ToricGAlgebra
from .problem import LoadedProblem

logger = logging.getLogger(__name__)


class Check(NamedTuple):
    identity: str
    ok: bool
    message: str = ""


def _matmul(alg: ToricGAlgebra, A, B):
    zero = alg.zero()
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for l in range(k):
                if not A[i][l].is_zero and not B[l][j].is_zero:
                    acc = acc + A[i][l] * B[l][j]
            row.append(acc)
        out.append(row)
    return out


def _parse_matrix(alg: ToricGAlgebra, rows, name):
    try:
        return [[alg.parse(str(x)) for x in row] for row in rows]
    except (ParseError, ValidationError) as e:
        raise VerificationFailure(f"{name} parses into the algebra", str(e))


def _graded(alg, M, col_weights, row_weights):
    for i, row in enumerate(M):
        for j, x in enumerate(row):
            if not alg.is_homogeneous(x, col_weights[j] - row_weights[i]):
                return False, f"entry ({i},{j}) = {x.render()} has the wrong weight"
    return True, ""


def _first_difference(M, N):
    for i, (a, b) in enumerate(zip(M, N)):
        for j, (x, y) in enumerate(zip(a, b)):
            if x != y:
                return f"entry ({i},{j}): {x.render()} != {y.render()}"
    return ""


def replay(cert: dict, loaded: LoadedProblem) -> List[Check]:
    """
    Replay every identity of a certificate.

    Parameters
    ----------
    cert : dict
        Certificate document (layout already validated).
    loaded : LoadedProblem
        The problem the certificate claims to solve.

    Returns
    -------
    checks : list of Check
        In replay order; replay stops at the first failure.
    """
    alg = loaded.alg
    P = alg.P
    checks = []

    def add(identity, ok, message=""):
        checks.append(Check(identity, bool(ok), message))
        return ok

    if not add("problem hash", cert["problem_hash"] == loaded.hash, "certificate was issued for another problem"):
        return checks
    if not add("grading group", cert["group"] == str(P), f"{cert['group']} != {P}"):
        return checks
    if loaded.problem is None:
        add("module present", False, "the problem declares no module")
        return checks
    p = loaded.problem
    try:
        E = tuple(P.element(w) for w in cert["source_weights"])
        F = tuple(P.element(w) for w in cert["target_weights"])
    except ValueError as e:
        add("weights in the grading group", False, str(e))
        return checks
    if not add("source weights", E == p.weights, "source weights differ from the problem"):
        return checks
    try:
        S = _parse_matrix(alg, cert["iso_entries"], "iso_entries")
        T = _parse_matrix(alg, cert["inverse_entries"], "inverse_entries")
    except VerificationFailure as e:
        add(e.identity, False, str(e))
        return checks
    add("support in the monoid", True)
    ok, msg = _graded(alg, S, F, E)
    if not add("S graded", ok, msg):
        return checks
    ok, msg = _graded(alg, T, E, F)
    if not add("T graded", ok, msg):
        return checks
    r = len(F)
    one = [[alg.one() if i == j else alg.zero() for j in range(r)] for i in range(r)]
    TS = _matmul(alg, T, S) if r else []
    msg = _first_difference(TS, one)
    if not add("T*S=1", not msg, msg):
        return checks
    e = [list(row) for row in p.idempotent().matrix.entries]
    n = len(E)
    ST = _matmul(alg, S, T) if r else [[alg.zero()] * n for _ in range(n)]
    msg = _first_difference(ST, e)
    if not add("S*T=e", not msg, msg):
        return checks
    k0 = Counter(tuple(w["weight"]) for w in cert["k0_class"] for _ in range(w["multiplicity"]))
    expected = Counter(f.coords for f in F)
    if not add("k0 class", k0 == expected, "k0 class does not count the target weights"):
        return checks
    failed = [rec.get("identity") for rec in cert["trace"] if not rec.get("ok", False)]
    add("trace records", not failed, f"records marked failed: {failed}" if failed else "")
    return checks


def verify_certificate(cert: dict, loaded: LoadedProblem, raise_errors=False) -> bool:
    """
    True when every identity replays.

    Raises
    ------
    VerificationFailure
        With ``raise_errors``, naming the first failing identity.
    """
    for check in replay(cert, loaded):
        logger.debug(f"{check.identity}: {'ok' if check.ok else 'FAILED'} {check.message}")
        if not check.ok:
            if raise_errors:
                raise VerificationFailure(check.identity, check.message)
            return False
    return True
