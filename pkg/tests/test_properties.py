"""
Randomized checks against brute force enumeration.

Cases are generated from fixed seeds, so every failure replays.
"""
import itertools
import json
from collections import Counter
from functools import lru_cache

import numpy as np
import pytest
from click.testing import CliRunner

from torictriv.api.graded_algebra import CoeffRing, ToricGAlgebra
from torictriv.api.graded_linalg import GradedIdempotent, GradedMatrix, render_weights
from torictriv.api.problem import build_problem
from torictriv.api.trivializer import (
    GActionProblem,
    TrivializationCertificate,
    canonical_weights,
    k0_class,
    refine_matrix,
    trivialize,
)
from torictriv.cli import cli
from torictriv.lib.cone import cone_from_rays
from torictriv.lib.errors import ValidationError
from torictriv.lib.lattice import FinAbGroup
from torictriv.lib.monoid import AffineMonoid


def box(n, r):
    return itertools.product(range(-r, r + 1), repeat=n)


def random_cone(rng, n):
    """A pointed full-dimensional cone spanned by small random rays."""
    while True:
        k = int(rng.integers(n, n + 2))
        rays = [tuple(int(a) for a in rng.integers(-2, 3, size=n)) for _ in range(k)]
        if any(not any(r) for r in rays):
            continue
        try:
            cone = cone_from_rays(n, rays)
        except ValidationError:
            continue
        if cone.is_pointed and cone.dim == n:
            return cone


def random_algebra(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    cone = random_cone(rng, n)
    if rng.integers(2):
        P = FinAbGroup(1, (2,))
        psi = [[int(a) for a in rng.integers(0, 2, size=n)], [int(a) for a in rng.integers(-3, 4, size=n)]]
    else:
        P = FinAbGroup(1)
        psi = [[int(a) for a in rng.integers(-3, 4, size=n)]]
    return ToricGAlgebra(CoeffRing("QQ"), AffineMonoid(cone), P, psi)


def generated_by(gens, contains):
    """Membership in the monoid generated by ``gens`` inside a pointed cone."""
    gens = [g for g in gens if any(g)]

    @lru_cache(maxsize=None)
    def member(m):
        if not any(m):
            return True
        for g in gens:
            rest = tuple(a - b for a, b in zip(m, g))
            if contains(rest) and member(rest):
                return True
        return False

    return member


@pytest.mark.parametrize("seed", range(50))
def test_invariant_generators_against_enumeration(seed):
    alg = random_algebra(seed)
    cone = alg.cone
    gens = [x.support[0] for x in alg.invariant_generators()]
    for g in gens:
        assert cone.contains(g)
        assert alg.weight(g).is_zero
    member = generated_by(gens, cone.contains)
    for m in box(alg.rank, 6):
        if cone.contains(m) and alg.weight(m).is_zero:
            assert member(m), (m, gens)


@pytest.mark.parametrize("seed", range(50))
def test_monoid_generators_against_enumeration(seed):
    alg = random_algebra(seed)
    cone = alg.cone
    gens = alg.monoid.generators()
    assert all(cone.contains(g) for g in gens)
    member = generated_by(gens, cone.contains)
    for m in box(alg.rank, 6):
        if cone.contains(m):
            assert member(m), (m, gens)


@pytest.mark.parametrize("seed", range(5))
def test_large_N_clears_every_element_of_J_power(seed):
    alg = random_algebra(seed)
    rng = np.random.default_rng(100 + seed)
    interior = [x.support[0] for x in alg.interior_generators()]
    points = [m for m in box(alg.rank, 2) if alg.monoid.contains(m)]
    assert interior
    for _ in range(10):
        m = tuple(int(a) for a in rng.integers(-4, 5, size=alg.rank))
        N = alg.large_N(m)
        f = alg.zero()
        for _ in range(2):
            p = points[int(rng.integers(len(points)))]
            for _ in range(N):
                g = interior[int(rng.integers(len(interior)))]
                p = tuple(a + b for a, b in zip(p, g))
            f = f + alg.monomial(p, int(rng.integers(1, 4)))
        assert all(alg.monoid.contains(tuple(a - b for a, b in zip(p, m))) for p in f.support), (m, N)


@pytest.mark.parametrize("seed", range(10))
def test_face_retractions(seed):
    alg = random_algebra(seed)
    rng = np.random.default_rng(200 + seed)
    points = [m for m in box(alg.rank, 3) if alg.monoid.contains(m)]

    def random_element(pts):
        x = alg.zero()
        for _ in range(3):
            x = x + alg.monomial(pts[int(rng.integers(len(pts)))], int(rng.integers(-3, 4)) or 1)
        return x

    for tau in alg.faces():
        on_face = [m for m in points if tau.contains(m)]
        off_face = [m for m in points if not tau.contains(m)]
        for _ in range(10):
            x = random_element(on_face)
            assert alg.face_restrict(tau, alg.face_section(tau, x)) == x
            y, z = random_element(points), random_element(points)
            assert alg.face_restrict(tau, y * z) == alg.face_restrict(tau, y) * alg.face_restrict(tau, z)
        if off_face:
            with pytest.raises(ValidationError):
                alg.face_section(tau, alg.monomial(off_face[0]))


# -- graded matrices over linear actions -------------------------------------------------

LINEAR_ACTIONS = {
    "QQ[x,y]/Gm": {"coefficients": "QQ", "rank": 2, "cone": {"rays": [[1, 0], [0, 1]]},
                   "group": {"free_rank": 1}, "psi": [[1, -1]]},
    "QQ[x,y]/Gm*mu2": {"coefficients": "QQ", "rank": 2, "cone": {"rays": [[1, 0], [0, 1]]},
                       "group": {"free_rank": 1, "torsion": [2]}, "psi": [[1, 0], [1, -1]]},
    "QQ[x,y,z]/Gm": {"coefficients": "QQ", "rank": 3, "cone": {"rays": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
                     "group": {"free_rank": 1}, "psi": [[1, 1, -1]]},
    "QQ[x,y,z]/Gm*mu2": {"coefficients": "QQ", "rank": 3, "cone": {"rays": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
                         "group": {"free_rank": 1, "torsion": [2]}, "psi": [[1, 0, 0], [1, 1, -1]]},
    "QQ[x,y,1/y]/Gm": {"coefficients": "QQ", "rank": 2, "cone": {"rays": [[1, 0], [0, 1], [0, -1]]},
                       "group": {"free_rank": 1}, "psi": [[1, -1]]},
    "QQ[x,y,1/y]/Gm*mu2": {"coefficients": "QQ", "rank": 2, "cone": {"rays": [[1, 0], [0, 1], [0, -1]]},
                           "group": {"free_rank": 1, "torsion": [2]}, "psi": [[1, 0], [1, -1]]},
    "ZZ[x,y]/Gm": {"coefficients": "ZZ", "rank": 2, "cone": {"rays": [[1, 0], [0, 1]]},
                   "group": {"free_rank": 1}, "psi": [[1, -1]]},
    "ZZ[x,y]/Gm*mu2": {"coefficients": "ZZ", "rank": 2, "cone": {"rays": [[1, 0], [0, 1]]},
                       "group": {"free_rank": 1, "torsion": [2]}, "psi": [[1, 0], [1, -1]]},
}


def action_doc(name):
    doc = {"version": 1, "name": name}
    doc.update(json.loads(json.dumps(LINEAR_ACTIONS[name])))
    return doc


def random_file_weight(doc, rng):
    w = [int(rng.integers(-1, 2))]
    if doc["group"].get("torsion"):
        w = [int(rng.integers(0, 2))] + w
    return w


class Homogeneous:
    """Random homogeneous elements from the monoid points of a small box."""

    def __init__(self, alg, radius=2):
        self.alg = alg
        self.buckets = {}
        for m in box(alg.rank, radius):
            if alg.monoid.contains(m):
                self.buckets.setdefault(alg.weight(m), []).append(m)

    def __call__(self, w, rng, terms=2):
        points = self.buckets.get(w, [])
        x = self.alg.zero()
        if not points:
            return x
        for _ in range(terms):
            c = int(rng.choice([-2, -1, 1, 2]))
            x = x + self.alg.monomial(points[int(rng.integers(len(points)))], c)
        return x


def elementary(alg, W, i, j, c):
    n = len(W)
    rows = [[alg.one() if a == b else alg.zero() for b in range(n)] for a in range(n)]
    rows[i][j] = c
    return GradedMatrix(alg, W, W, rows)


def random_summand(alg, W, rng, homogeneous):
    """``U proj U^-1`` for a triangular product ``U`` of graded elementary matrices."""
    n = len(W)
    r = int(rng.integers(1, n + 1))
    upper = bool(rng.integers(2))
    U = Uinv = GradedMatrix.identity(alg, W)
    for _ in range(int(rng.integers(1, 4)) if n > 1 else 0):
        i, j = sorted(int(a) for a in rng.choice(n, size=2, replace=False))
        if not upper:
            i, j = j, i
        c = homogeneous(W[j] - W[i], rng)
        U = U @ elementary(alg, W, i, j, c)
        Uinv = elementary(alg, W, i, j, -c) @ Uinv
    proj = GradedMatrix.standard_projector(alg, W, [k < r for k in range(n)])
    return GradedIdempotent(U @ proj @ Uinv), r


@pytest.mark.parametrize("name", ["QQ[x,y]/Gm", "QQ[x,y]/Gm*mu2", "QQ[x,y,z]/Gm", "QQ[x,y,1/y]/Gm", "ZZ[x,y]/Gm"])
def test_determinant_is_invariant(name):
    loaded = build_problem(action_doc(name))
    alg = loaded.alg
    rng = np.random.default_rng(len(name))
    homogeneous = Homogeneous(alg)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        W = tuple(loaded.weight(random_file_weight(loaded.doc, rng)) for _ in range(n))
        rows = [[homogeneous(W[j] - W[i], rng) for j in range(n)] for i in range(n)]
        f = GradedMatrix(alg, W, W, rows)
        d = f.det_endo()
        assert alg.is_invariant(d)
        assert d.is_zero or alg.element_weight(d).is_zero


REFINE_ACTIONS = [
    ((2, [(1, 0), (0, 1)]), [[1, -1]]),
    ((3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)]), [[1, 1, -2]]),
]


@pytest.mark.parametrize("seed", range(30))
def test_refine_matrix_contract(seed):
    (n, rays), psi = REFINE_ACTIONS[seed % 2]
    A = ToricGAlgebra(CoeffRing("QQ"), AffineMonoid(cone_from_rays(n, rays)), FinAbGroup(1), psi)
    inv = A.invariant_algebra()
    rng = np.random.default_rng(300 + seed)
    invariant = [m for m in box(n, 2) if A.monoid.contains(m) and A.weight(m).is_zero]
    interior = [m for m in invariant if A.cone.strict_interior(m)]
    assert interior
    size = int(rng.integers(2, 4))
    upper = bool(rng.integers(2))
    rows = []
    for i in range(size):
        row = []
        for j in range(size):
            x = inv.one() if i == j else inv.zero()
            if (i < j) == upper and i != j:
                x = x + inv.monomial(invariant[int(rng.integers(len(invariant)))], int(rng.choice([-2, -1, 1, 2])))
            # perturbation inside J
            x = x + inv.monomial(interior[int(rng.integers(len(interior)))], int(rng.choice([-2, -1, 1, 2])))
            row.append(x)
        rows.append(row)
    W = tuple(A.P.zero() for _ in range(size))
    P = GradedMatrix(inv, W, W, rows)
    N = seed % 3 + 1
    refined = refine_matrix(A, P, N)
    assert inv.is_unit(refined.P_tilde.det())
    assert refined.product == P @ refined.P_tilde
    for i, j in itertools.product(range(size), repeat=2):
        if i != j:
            assert A.ideal_J_power_member(refined.product[i, j], N)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("name", sorted(LINEAR_ACTIONS))
def test_round_trip_through_the_cli(name, seed, tmpdir):
    doc = action_doc(name)
    loaded = build_problem(doc)
    alg = loaded.alg
    rng = np.random.default_rng(seed)
    homogeneous = Homogeneous(alg)
    n = int(rng.integers(1, 4))
    file_weights = [random_file_weight(doc, rng) for _ in range(n)]
    W = tuple(loaded.weight(w) for w in file_weights)
    e, r = random_summand(alg, W, rng, homogeneous)
    doc["module"] = {"weights": file_weights, "idempotent": e.matrix.render()["entries"]}
    problem = str(tmpdir.join("problem.json"))
    out = str(tmpdir.join("cert.json"))
    with open(problem, "w") as f:
        json.dump(doc, f)

    runner = CliRunner()
    result = runner.invoke(cli, ["trivialize", problem, "-o", out, "--seed", str(seed)])
    assert result.exit_code == 0, result.output
    with open(out) as f:
        cert = json.load(f)
    expected = canonical_weights(alg, W[:r])[0]
    assert sorted(cert["target_weights"]) == sorted(render_weights(expected))
    result = runner.invoke(cli, ["verify", out, problem])
    assert result.exit_code == 0, result.output


@pytest.mark.parametrize("name", sorted(LINEAR_ACTIONS))
def test_k0_is_additive_on_random_summands(name):
    loaded = build_problem(action_doc(name))
    alg = loaded.alg
    rng = np.random.default_rng(400 + len(name))
    homogeneous = Homogeneous(alg)
    problems = []
    for _ in range(2):
        n = int(rng.integers(1, 3))
        W = tuple(loaded.weight(random_file_weight(loaded.doc, rng)) for _ in range(n))
        e, _ = random_summand(alg, W, rng, homogeneous)
        problems.append(GActionProblem(alg, e))
    certs = [trivialize(p) for p in problems + [problems[0].direct_sum(problems[1])]]
    assert all(isinstance(c, TrivializationCertificate) for c in certs)
    assert k0_class(certs[2]) == Counter(k0_class(certs[0])) + Counter(k0_class(certs[1]))
