import copy
import os.path as op

import pytest

from torictriv.api.problem import certificate_document, load_problem
from torictriv.api.trivializer import trivialize
from torictriv.api.verify import replay, verify_certificate
from torictriv.lib.errors import VerificationFailure


@pytest.fixture
def issued(request):
    loaded = load_problem(op.join(request.fspath.dirname, "data", "orthant_eb.json"))
    cert = trivialize(loaded.problem, seed=0)
    return certificate_document(cert, loaded), loaded


def failing(doc, loaded):
    checks = replay(doc, loaded)
    assert not checks[-1].ok
    return checks[-1].identity


def test_certificate_replays(issued):
    doc, loaded = issued
    assert doc["target_weights"] == [[1]]
    assert doc["k0_class"] == [{"weight": [1], "multiplicity": 1}]
    checks = replay(doc, loaded)
    assert all(c.ok for c in checks)
    assert [c.identity for c in checks][-3:] == ["S*T=e", "k0 class", "trace records"]
    assert verify_certificate(doc, loaded)


def test_tampered_certificates(request, issued):
    doc, loaded = issued

    bad = copy.deepcopy(doc)
    bad["iso_entries"][0][0] = "0"
    assert failing(bad, loaded) == "T*S=1"
    assert not verify_certificate(bad, loaded)
    with pytest.raises(VerificationFailure) as excinfo:
        verify_certificate(bad, loaded, raise_errors=True)
    assert excinfo.value.identity == "T*S=1"

    # a misplaced monomial breaks the grading before any product is taken
    bad = copy.deepcopy(doc)
    bad["inverse_entries"][0][0] += " + 1*e[1,0]"
    assert failing(bad, loaded) == "T graded"

    bad = copy.deepcopy(doc)
    bad["iso_entries"][0][0] = "1*e[-1,0]"
    assert failing(bad, loaded) == "iso_entries parses into the algebra"

    bad = copy.deepcopy(doc)
    bad["k0_class"] = [{"weight": [0], "multiplicity": 1}]
    assert failing(bad, loaded) == "k0 class"

    bad = copy.deepcopy(doc)
    bad["trace"].append({"identity": "made up", "ok": False})
    assert failing(bad, loaded) == "trace records"

    bad = copy.deepcopy(doc)
    bad["group"] = "Z/2 + Z"
    assert failing(bad, loaded) == "grading group"

    other = load_problem(op.join(request.fspath.dirname, "data", "orthant_ea.json"))
    assert failing(doc, other) == "problem hash"
