from numbers import Integral

from . import schemas
from .errors import ValidationError


def _is_int_list(v, length=None):
    if not isinstance(v, (list, tuple)):
        return False
    if length is not None and len(v) != length:
        return False
    return all(isinstance(x, Integral) and not isinstance(x, bool) for x in v)


def _is_int_matrix(M, ncols=None):
    return isinstance(M, (list, tuple)) and all(_is_int_list(row, ncols) for row in M)


def _fail(message, raise_errors):
    if raise_errors:
        raise ValidationError(message)
    return False


def is_valid_problem(doc, raise_errors=False):
    """
    Check that a problem document is self-consistent before anything is
    computed from it:
     - has the required keys and the supported ``version``
     - cone rays / inequalities live in ``Z^rank``
     - ``psi`` has one row per cyclic factor of the group and ``rank`` columns
     - module weights have one coordinate per cyclic factor, and the
       idempotent (if any) is square of the size of its weight vector

    Parameters
    ----------
    doc : dict
        Parsed problem file.
    raise_errors : bool
        raise ValidationError instead of returning False

    Returns
    -------
    is_valid_problem : bool
    """
    if not isinstance(doc, dict):
        return _fail(f"Problem must be a JSON object, got {type(doc).__name__}", raise_errors)
    missing = [k for k, required in schemas.problem_keys.items() if required and k not in doc]
    if missing:
        return _fail(f"Problem is missing the keys {missing}", raise_errors)
    unknown = set(doc) - set(schemas.problem_keys)
    if unknown:
        return _fail(f"Problem has unknown keys {sorted(unknown)}", raise_errors)
    if doc["version"] != schemas.FORMAT_VERSION:
        return _fail(
            f"Unsupported problem version {doc['version']}, expected {schemas.FORMAT_VERSION}",
            raise_errors,
        )
    n = doc["rank"]
    if not isinstance(n, Integral) or isinstance(n, bool) or n < 0:
        return _fail(f"Lattice rank must be a non-negative integer, got {n!r}", raise_errors)

    cone = doc["cone"]
    if not isinstance(cone, dict) or len(cone) != 1 or next(iter(cone)) not in schemas.cone_keys:
        return _fail(
            f"Cone must be given by exactly one of {list(schemas.cone_keys)}", raise_errors
        )
    (kind, vectors), = cone.items()
    if not _is_int_matrix(vectors, n):
        return _fail(f"Cone {kind} must be integer vectors of length {n}", raise_errors)

    group = doc["group"]
    if not isinstance(group, dict) or "free_rank" not in group:
        return _fail("Group needs a 'free_rank'", raise_errors)
    torsion = group.get("torsion", [])
    free_rank = group["free_rank"]
    if not isinstance(free_rank, Integral) or free_rank < 0 or not _is_int_list(torsion):
        return _fail(f"Malformed group {group}", raise_errors)
    if any(t < 1 for t in torsion):
        return _fail(f"Torsion orders must be positive, got {torsion}", raise_errors)
    ngens = len(torsion) + free_rank

    psi = doc["psi"]
    if not _is_int_matrix(psi, n) or len(psi) != ngens:
        return _fail(f"psi must be a {ngens} x {n} integer matrix", raise_errors)

    module = doc.get("module")
    if module is None:
        return True
    if not isinstance(module, dict) or not set(module) <= set(schemas.module_keys):
        return _fail(f"Module must use the keys {list(schemas.module_keys)}", raise_errors)
    if "free" in module:
        if set(module) != {"free"}:
            return _fail("A free module takes no other keys", raise_errors)
        weights = module["free"]
    else:
        if set(module) != {"weights", "idempotent"}:
            return _fail("A module needs both 'weights' and 'idempotent'", raise_errors)
        weights = module["weights"]
    if not _is_int_matrix(weights, ngens):
        return _fail(f"Module weights must be integer vectors of length {ngens}", raise_errors)
    if "idempotent" in module:
        e = module["idempotent"]
        size = len(weights)
        if not isinstance(e, list) or len(e) != size or any(
            not isinstance(row, list) or len(row) != size for row in e
        ):
            return _fail(f"Idempotent must be a {size} x {size} matrix", raise_errors)
        if any(not isinstance(x, (str, Integral)) for row in e for x in row):
            return _fail("Idempotent entries must be element strings", raise_errors)
    return True


def is_valid_certificate(doc, raise_errors=False):
    """
    Check the layout of a certificate document (not its mathematics, which
    ``torictriv.api.verify`` replays).

    Parameters
    ----------
    doc : dict
    raise_errors : bool
        raise ValidationError instead of returning False

    Returns
    -------
    is_valid_certificate : bool
    """
    if not isinstance(doc, dict):
        return _fail("Certificate must be a JSON object", raise_errors)
    missing = [k for k in schemas.certificate_keys if k not in doc]
    if missing:
        return _fail(f"Certificate is missing the keys {missing}", raise_errors)
    if doc["version"] != schemas.FORMAT_VERSION:
        return _fail(f"Unsupported certificate version {doc['version']}", raise_errors)
    E, F = doc["source_weights"], doc["target_weights"]
    if not _is_int_matrix(E) or not _is_int_matrix(F):
        return _fail("Certificate weights must be integer vectors", raise_errors)
    S, T = doc["iso_entries"], doc["inverse_entries"]
    if len(S) != len(E) or any(len(row) != len(F) for row in S):
        return _fail(f"iso_entries must be a {len(E)} x {len(F)} matrix", raise_errors)
    if len(T) != len(F) or any(len(row) != len(E) for row in T):
        return _fail(f"inverse_entries must be a {len(F)} x {len(E)} matrix", raise_errors)
    if not isinstance(doc["trace"], list):
        return _fail("Certificate trace must be a list", raise_errors)
    return True
