import copy
import json
import os.path as op

import pytest

import torictriv
from torictriv.lib.errors import ParseError, ValidationError


def read(request, name):
    with open(op.join(request.fspath.dirname, "data", name)) as f:
        return json.load(f)


def test_is_valid_problem(request):
    doc = read(request, "orthant_ea.json")
    assert torictriv.lib.is_valid_problem(doc)
    assert torictriv.lib.is_valid_problem(read(request, "half_plane.json"))
    assert torictriv.lib.is_valid_problem(read(request, "plane_z2.json"))

    # psi needs one row per cyclic factor and rank columns
    assert torictriv.lib.is_valid_problem(read(request, "bad_psi.json")) is False
    with pytest.raises(ValidationError):
        torictriv.lib.is_valid_problem(read(request, "bad_psi.json"), raise_errors=True)

    broken = copy.deepcopy(doc)
    broken["version"] = 99
    assert not torictriv.lib.is_valid_problem(broken)

    broken = copy.deepcopy(doc)
    del broken["coefficients"]
    with pytest.raises(ValidationError, match="missing"):
        torictriv.lib.is_valid_problem(broken, raise_errors=True)

    broken = copy.deepcopy(doc)
    broken["extra"] = 1
    assert not torictriv.lib.is_valid_problem(broken)

    # a cone is given by rays or by inequalities, not both
    broken = copy.deepcopy(doc)
    broken["cone"]["inequalities"] = [[1, 0]]
    assert not torictriv.lib.is_valid_problem(broken)

    broken = copy.deepcopy(doc)
    broken["cone"]["rays"] = [[1, 0, 0]]
    assert not torictriv.lib.is_valid_problem(broken)

    broken = copy.deepcopy(doc)
    broken["group"] = {"free_rank": 1, "torsion": [0]}
    assert not torictriv.lib.is_valid_problem(broken)

    broken = copy.deepcopy(doc)
    broken["module"]["weights"] = [[0]]
    with pytest.raises(ValidationError, match="2 x 2|1 x 1"):
        torictriv.lib.is_valid_problem(broken, raise_errors=True)

    broken = copy.deepcopy(doc)
    broken["module"]["free"] = [[0]]
    assert not torictriv.lib.is_valid_problem(broken)

    assert not torictriv.lib.is_valid_problem([doc])


def test_is_valid_certificate():
    cert = {
        "version": 1,
        "problem_hash": "0" * 64,
        "group": "Z",
        "source_weights": [[0], [1]],
        "target_weights": [[0]],
        "iso_entries": [["1"], ["1*e[0,1]"]],
        "inverse_entries": [["1 + 1*e[1,1]", "-1*e[1,0]"]],
        "trace": [],
        "k0_class": [{"weight": [0], "multiplicity": 1}],
    }
    assert torictriv.lib.is_valid_certificate(cert)
    bad = dict(cert, iso_entries=[["1"]])
    assert not torictriv.lib.is_valid_certificate(bad)
    bad = dict(cert, inverse_entries=[["1"]])
    with pytest.raises(ValidationError):
        torictriv.lib.is_valid_certificate(bad, raise_errors=True)
    bad = dict(cert)
    del bad["k0_class"]
    assert not torictriv.lib.is_valid_certificate(bad)


def test_read_problem(request, tmpdir):
    fname = op.join(request.fspath.dirname, "data", "bad_syntax.json")
    with pytest.raises(ParseError) as excinfo:
        torictriv.lib.read_problem_from_file(fname)
    assert excinfo.value.line is not None

    fname = op.join(request.fspath.dirname, "data", "bad_psi.json")
    with pytest.raises(ValidationError, match="bad_psi.json"):
        torictriv.lib.read_problem_from_file(fname)
    assert torictriv.lib.read_problem_from_file(fname, raise_errors=False) is None

    doc = read(request, "wedge.json")
    out = str(tmpdir.join("wedge.json"))
    text = torictriv.lib.write_json(doc, out)
    assert text.endswith("\n")
    assert torictriv.lib.read_problem_from_file(out) == doc
    # key order does not change the hash
    shuffled = dict(reversed(list(doc.items())))
    assert torictriv.lib.problem_hash(shuffled) == torictriv.lib.problem_hash(doc)
