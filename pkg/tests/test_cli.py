import json
import os.path as op

from click.testing import CliRunner

import torictriv
from torictriv.api import trivializer
from torictriv.cli import cli
from torictriv.lib.errors import UnsupportedFactorization


def data(request, name):
    return op.join(request.fspath.dirname, "data", name)


def test_version():
    result = CliRunner().invoke(cli, ["-V"])
    assert result.exit_code == 0
    assert torictriv.__version__ in result.output


def test_faces(request):
    runner = CliRunner()
    result = runner.invoke(cli, ["faces", data(request, "orthant_ea.json")])
    assert result.exit_code == 0, result.output
    assert "# codim1_faces: {0} {1}" in result.output
    assert "# smallest_face: {}" in result.output
    assert "# J_generators: 1*e[1,1]" in result.output
    assert "face\tdim\tcodim\trays\tzero_set\tspan_basis" in result.output

    result = runner.invoke(cli, ["faces", data(request, "half_plane.json")])
    assert result.exit_code == 0, result.output
    # the x axis is both the smallest face and the only facet
    assert "# codim1_faces: {1,2}" in result.output
    assert "# smallest_face: {1,2}" in result.output
    assert "# J_generators: 1*e[0,1]" in result.output


def test_invariants(request):
    runner = CliRunner()
    result = runner.invoke(cli, ["invariants", data(request, "plane_z2.json")])
    assert result.exit_code == 0, result.output
    assert "# invariant_ring: QQ[1*e[2,0], 1*e[1,1], 1*e[0,2]]" in result.output

    result = runner.invoke(cli, ["invariants", data(request, "wedge.json")])
    assert result.exit_code == 0, result.output
    # psi = (0, 1) keeps only the x axis
    assert "# invariant_ring: QQ[1*e[1,0]]" in result.output


def test_trivialize_and_verify(request, tmpdir):
    runner = CliRunner()
    out = str(tmpdir.join("cert.json"))
    problem = data(request, "orthant_eb.json")
    result = runner.invoke(cli, ["trivialize", problem, "--out", out, "--seed", "0"])
    assert result.exit_code == 0, result.output
    assert "# rank: 1" in result.output
    assert "# target_weights: (1)" in result.output
    with open(out) as f:
        cert = json.load(f)
    assert cert["target_weights"] == [[1]]

    result = runner.invoke(cli, ["verify", out, problem])
    assert result.exit_code == 0, result.output
    assert result.output.strip().endswith("ok")

    # the same certificate does not fit another problem
    result = runner.invoke(cli, ["verify", out, data(request, "orthant_ea.json")])
    assert result.exit_code == 1
    assert "FAILED problem hash" in result.output

    cert["iso_entries"][1][0] = "0"
    tampered = str(tmpdir.join("tampered.json"))
    with open(tampered, "w") as f:
        json.dump(cert, f)
    result = runner.invoke(cli, ["verify", tampered, problem])
    assert result.exit_code == 1
    assert "FAILED" in result.output


def test_trivialize_free(request, tmpdir):
    runner = CliRunner()
    out = str(tmpdir.join("cert.json"))
    problem = data(request, "laurent_free.json")
    result = runner.invoke(cli, ["trivialize", problem, "-o", out, "--method", "direct"])
    assert result.exit_code == 0, result.output
    assert "# rank: 2" in result.output
    result = runner.invoke(cli, ["verify", out, problem])
    assert result.exit_code == 0, result.output


def test_exit_codes(request):
    runner = CliRunner()
    result = runner.invoke(cli, ["faces", data(request, "bad_syntax.json")])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["trivialize", data(request, "bad_element.json")])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["faces", data(request, "does_not_exist.json")])
    assert result.exit_code == 2

    result = runner.invoke(cli, ["faces", data(request, "bad_psi.json")])
    assert result.exit_code == 3
    # no module to trivialize
    result = runner.invoke(cli, ["trivialize", data(request, "wedge.json")])
    assert result.exit_code == 3

    result = runner.invoke(cli, ["faces", data(request, "orthant_ea.json"), "--budget", "1"])
    assert result.exit_code == 4
    result = runner.invoke(cli, ["trivialize", data(request, "orthant_ea.json"), "--max-rank", "1"])
    assert result.exit_code == 4


def test_partial_exit(request, tmpdir, monkeypatch):
    def no_basis(e, seed=0, **kwargs):
        raise UnsupportedFactorization("no basis")

    monkeypatch.setattr(trivializer, "find_basis", no_basis)
    out = str(tmpdir.join("partial.json"))
    runner = CliRunner()
    result = runner.invoke(cli, ["trivialize", data(request, "orthant_ea.json"), "-o", out])
    assert result.exit_code == 5
    with open(out) as f:
        doc = json.load(f)
    assert doc["status"] == "partial"
    assert doc["step"] == "base"
    assert len(doc["problem_hash"]) == 64


def test_trivialize_with_a_pool(request, tmpdir):
    runner = CliRunner()
    out = str(tmpdir.join("cert.json"))
    problem = data(request, "orthant_ea.json")
    result = runner.invoke(cli, ["trivialize", problem, "--method", "faces", "-p", "2", "-o", out])
    assert result.exit_code == 0, result.output
    assert "# target_weights: (0)" in result.output
    result = runner.invoke(cli, ["verify", out, problem])
    assert result.exit_code == 0, result.output


def test_unsupported_cover_exit(request, tmpdir):
    runner = CliRunner()
    problem = data(request, "unsupported_cover.json")
    docs = []
    for name in ("first.json", "second.json"):
        out = str(tmpdir.join(name))
        result = runner.invoke(cli, ["trivialize", problem, "--method", "faces", "-o", out])
        assert result.exit_code == 5
        with open(out) as f:
            docs.append(json.load(f))
    doc = docs[0]
    assert doc["status"] == "partial"
    assert doc["step"] == "factor_cover"
    assert doc["trace"][0]["identity"] == "faithful reduction"
    assert docs[0] == docs[1]


def test_glue_and_verify(request, tmpdir):
    runner = CliRunner()
    out = str(tmpdir.join("cert.json"))
    problem = data(request, "orthant_glue.json")
    result = runner.invoke(cli, ["trivialize", problem, "--method", "faces", "-o", out])
    assert result.exit_code == 0, result.output
    with open(out) as f:
        cert = json.load(f)
    assert "cover factorization" in [rec["identity"] for rec in cert["trace"]]
    result = runner.invoke(cli, ["verify", out, problem])
    assert result.exit_code == 0, result.output
