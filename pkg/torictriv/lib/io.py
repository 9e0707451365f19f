import hashlib
import json

from .checks import is_valid_certificate, is_valid_problem
from .errors import ParseError, ValidationError


def canonical_json(obj) -> str:
    """Sorted keys, two-space indent, trailing newline: byte-stable output."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def problem_hash(doc) -> str:
    """sha256 hex digest of the canonical rendering of a problem document."""
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def parse_json(text, source="<string>"):
    """
    Parse JSON text, reporting decode errors as ParseError with line and
    column.
    """
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}: {e.msg}", e.lineno, e.colno) from e


def _read_text(fname):
    with open(fname, "r") as f:
        return f.read()


def read_problem_from_file(fname, raise_errors=True):
    """
    Read a problem document from a JSON file.

    Parameters
    ----------
    fname : str
        Path to the problem file.
    raise_errors : bool
        Raise ValidationError on an inconsistent document, otherwise return
        None for it.

    Returns
    -------
    doc : dict
    """
    doc = parse_json(_read_text(fname), fname)
    try:
        is_valid_problem(doc, raise_errors=True)
    except ValidationError as e:
        if raise_errors:
            raise ValidationError(f"{fname}: {e}") from e
        return None
    return doc


def read_certificate_from_file(fname, raise_errors=True):
    """
    Read a certificate document from a JSON file.

    Returns
    -------
    doc : dict
    """
    doc = parse_json(_read_text(fname), fname)
    try:
        is_valid_certificate(doc, raise_errors=True)
    except ValidationError as e:
        if raise_errors:
            raise ValidationError(f"{fname}: {e}") from e
        return None
    return doc


def write_json(obj, fname=None):
    """Write ``obj`` as canonical JSON to ``fname``, or return the text."""
    text = canonical_json(obj)
    if fname is None:
        return text
    with open(fname, "w") as f:
        f.write(text)
    return text
