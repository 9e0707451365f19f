import pytest

from torictriv.api.graded_algebra import CoeffRing, ToricGAlgebra
from torictriv.api.graded_linalg import (
    GradedIdempotent,
    GradedMatrix,
    LocalGradedMatrix,
    find_basis,
    invert,
    is_module_basis,
    shortest_preimage,
    torus_basis,
    weight_split,
    weight_vector,
)
from torictriv.lib.cone import cone_from_rays
from torictriv.lib.errors import NotInvertible, StructuralViolation, ValidationError
from torictriv.lib.lattice import FinAbGroup
from torictriv.lib.monoid import AffineMonoid

E_A = [["1 + 1*e[1,1]", "-1*e[1,0]"], ["1*e[0,1] + 1*e[1,2]", "-1*e[1,1]"]]
E_B = [["-1*e[1,1]", "1*e[1,0]"], ["-1*e[0,1] - 1*e[1,2]", "1 + 1*e[1,1]"]]


@pytest.fixture
def plane():
    monoid = AffineMonoid(cone_from_rays(2, [(1, 0), (0, 1)]))
    return ToricGAlgebra(CoeffRing("QQ"), monoid, FinAbGroup(1), [[1, -1]])


def test_graded_matrix(plane):
    W = weight_vector(plane.P, [[0], [1]])
    U = GradedMatrix(plane, W, W, [[1, "e[1,0]"], ["e[0,1]", "1 + e[1,1]"]])
    assert U.entry_weight(0, 1) == plane.P.element([1])
    assert U.det() == plane.one()
    Uinv = invert(U)
    assert U @ Uinv == GradedMatrix.identity(plane, W)
    assert Uinv[0, 1] == plane.parse("-1*e[1,0]")

    # x has weight 1, so it cannot sit where weight -1 is expected
    with pytest.raises(ValidationError):
        GradedMatrix(plane, W, W, [[1, 0], ["e[1,0]", 1]])
    with pytest.raises(ValidationError):
        GradedMatrix(plane, W, W, [[1, 0]])
    with pytest.raises(NotInvertible):
        GradedMatrix(plane, W[:1], W[:1], [["1 + e[1,1]"]]).invert()

    T = U.transpose()
    assert T.shape == (2, 2)
    assert U.direct_sum(U).shape == (4, 4)
    assert U.hstack(U).shape == (2, 4)


def test_idempotent(plane):
    W = weight_vector(plane.P, [[0], [1]])
    e = GradedIdempotent(GradedMatrix(plane, W, W, E_A))
    assert e.rank() == 1
    assert e.trace() == plane.one()
    assert e.complement().matrix == GradedMatrix(plane, W, W, E_B)
    with pytest.raises(ValidationError):
        GradedIdempotent(GradedMatrix(plane, W, W, [[1, "e[1,0]"], [0, 1]]))

    x_axis = [f for f in plane.faces() if f.rays == ((1, 0),)][0]
    ex = e.restrict_to_face(x_axis)
    assert ex.matrix[0, 0] == plane.one()
    assert ex.matrix[1, 0].is_zero
    assert ex.matrix[1, 1].is_zero


def test_find_basis(plane):
    W = weight_vector(plane.P, [[0], [1]])
    e = GradedIdempotent(GradedMatrix(plane, W, W, E_A))
    basis = find_basis(e, seed=0)
    assert basis.target_weights == (plane.P.element([0]),)
    assert is_module_basis(e, basis.S, basis.T)

    e = GradedIdempotent(GradedMatrix(plane, W, W, E_B))
    basis = find_basis(e, seed=0)
    assert basis.target_weights == (plane.P.element([1]),)
    assert is_module_basis(e, basis.S, basis.T)

    # constant idempotents are handled one weight block at a time
    W3 = weight_vector(plane.P, [[0], [0], [2]])
    p = GradedMatrix.standard_projector(plane, W3, [True, True, False])
    basis = find_basis(GradedIdempotent(p))
    assert basis.strategy == "constant"
    assert sorted(basis.target_weights) == [plane.P.element([0])] * 2

    zero = GradedIdempotent(GradedMatrix.zero(plane, W, W))
    assert find_basis(zero).S.shape == (2, 0)


def test_weight_split():
    # psi = (2, -2) only reaches even weights
    monoid = AffineMonoid(cone_from_rays(2, [(1, 0), (0, 1)]))
    A = ToricGAlgebra(CoeffRing("QQ"), monoid, FinAbGroup(1), [[2, -2]])
    W = weight_vector(A.P, [[0], [2], [1]])
    e = GradedMatrix(A, W[:2], W[:2], E_A).direct_sum(GradedMatrix.identity(A, W[2:]))
    blocks = weight_split(GradedIdempotent(e), [[1]], FinAbGroup(0, (2,)))
    assert [b.indices for b in blocks] == [(0, 1), (2,)]
    assert blocks[0].idempotent.rank() == 1

    # an entry joining two classes is rejected
    W = weight_vector(A.P, [[0], [1]])
    bad = GradedIdempotent(GradedMatrix(A, W, W, [[1, 0], [1, 0]], check=False), check=False)
    with pytest.raises(StructuralViolation):
        weight_split(bad, [[1]], FinAbGroup(0, (2,)))


def test_torus_basis_and_preimage(plane):
    torus = plane.torus_algebra()
    W = weight_vector(plane.P, [[0], [1]])
    e = GradedIdempotent(GradedMatrix(torus, W, W, E_A))
    target = weight_vector(plane.P, [[3]])
    basis = torus_basis(e, target_weights=target)
    assert basis.target_weights == target
    assert is_module_basis(e, basis.S, basis.T)

    with pytest.raises(ValidationError):
        torus_basis(GradedIdempotent(GradedMatrix(plane, W, W, E_A)))

    assert shortest_preimage(plane, plane.P.element([2])) == (0, -2)
    assert shortest_preimage(plane, plane.P.element([0])) == (0, 0)


def test_local_matrix(plane):
    h = plane.parse("1 - e[1,1]")
    loc = plane.localize(h)
    W = weight_vector(plane.P, [[0]])
    M = LocalGradedMatrix(loc, GradedMatrix(plane, W, W, [["1 - 2*e[1,1] + e[2,2]"]]), 1)
    assert M.regular() == GradedMatrix(plane, W, W, [["1 - e[1,1]"]])
    Minv = M.invert()
    assert (M @ Minv) == LocalGradedMatrix.identity(loc, W)
    assert Minv.regular() is None
    with pytest.raises(NotInvertible):
        LocalGradedMatrix(loc, GradedMatrix(plane, W, W, [["e[1,1]"]])).invert()


def test_entry_mask_and_determinant():
    # psi = (2, -2): nothing has odd weight
    monoid = AffineMonoid(cone_from_rays(2, [(1, 0), (0, 1)]))
    A = ToricGAlgebra(CoeffRing("QQ"), monoid, FinAbGroup(1), [[2, -2]])
    W = weight_vector(A.P, [[0], [1]])
    f = GradedMatrix(A, W, W, [["1 + e[1,1]", 0], [0, 2]])
    assert f.invariant_entry_mask().tolist() == [[True, False], [False, True]]
    assert f.det_endo() == A.parse("2 + 2*e[1,1]")
    with pytest.raises(ValidationError):
        GradedMatrix.zero(A, W, W[:1]).det_endo()


def test_shortest_preimage_on_a_torus():
    monoid = AffineMonoid(cone_from_rays(2, [(1, 0), (-1, 0), (0, 1), (0, -1)]))
    torus = ToricGAlgebra(CoeffRing("QQ"), monoid, FinAbGroup(1), [[11, 13]])
    assert shortest_preimage(torus, torus.P.element([1])) == (6, -5)
    assert shortest_preimage(torus, torus.P.element([-1])) == (-6, 5)
