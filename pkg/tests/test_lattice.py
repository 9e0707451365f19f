import numpy as np
import pytest

from torictriv.lib.lattice import (
    FinAbGroup,
    as_intmat,
    cokernel,
    hom_image_group,
    identity,
    kernel_basis,
    matmul,
    minor_gcd,
    quotient_group,
    saturation_basis,
    shortest_coset_point,
    smith_normal_form,
    solve_integer,
)


def test_smith_normal_form():
    M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    snf = smith_normal_form(M)
    assert snf.d == (2, 6, 12)
    assert snf.rank == 3
    D = matmul(matmul(snf.U, as_intmat(M)), snf.V)
    assert (D == snf.diagonal((3, 3))).all()
    # the transforms are unimodular with the stored inverses
    assert (matmul(snf.U, snf.Uinv) == np.eye(3, dtype=int)).all()
    assert (matmul(snf.V, snf.Vinv) == np.eye(3, dtype=int)).all()
    # invariant factors agree with the gcd of minors
    assert minor_gcd(M, 1) == 2
    assert minor_gcd(M, 2) == 2 * 6


def test_smith_normal_form_rectangular():
    snf = smith_normal_form([[2, 0, 0], [0, 3, 0]])
    assert snf.d == (1, 6)
    snf = smith_normal_form([[0, 0], [0, 0]])
    assert snf.rank == 0
    # entries beyond the int64 range stay exact
    big = 2**70
    snf = smith_normal_form([[big, 0], [0, big * 3]])
    assert snf.d == (big, 3 * big)


def test_kernel_and_solve():
    M = [[1, 2, 3], [2, 4, 6]]
    K = kernel_basis(M)
    assert K.shape == (3, 2)
    assert not matmul(as_intmat(M), K).any()

    x = solve_integer([[2, 0], [0, 3]], [4, 9])
    assert list(x) == [2, 3]
    assert solve_integer([[2, 0], [0, 3]], [1, 9]) is None

    # (2, 2) spans a line whose saturation is generated by (1, 1)
    B = saturation_basis([[2], [2]])
    assert sorted(abs(int(v)) for v in B[:, 0]) == [1, 1]


def test_finabgroup_canonical_form():
    P, coords = FinAbGroup.from_orders([2, 3, 0])
    assert P == FinAbGroup(1, (6,))
    assert str(P) == "Z/6 + Z"
    # (1, 0, 0) and (0, 1, 0) generate Z/6 together
    a = P.element(matmul(coords, as_intmat([[1], [0], [0]]))[:, 0])
    b = P.element(matmul(coords, as_intmat([[0], [1], [0]]))[:, 0])
    assert (a * 2).is_zero
    assert (b * 3).is_zero
    assert not (a + b).is_zero

    with pytest.raises(ValueError):
        FinAbGroup(0, (4, 6))
    with pytest.raises(ValueError):
        FinAbGroup(0, (1,))
    assert FinAbGroup(0).is_trivial
    assert str(FinAbGroup(0)) == "0"


def test_group_elements():
    P = FinAbGroup(1, (4,))
    x = P.element([5, -2])
    assert x.coords == (1, -2)
    assert x.torsion_part == (1,)
    assert x.free_part == (-2,)
    assert (x - x).is_zero
    assert -x == P.element([3, 2])
    assert P.zero() < x
    with pytest.raises(ValueError):
        x + FinAbGroup(1).zero()


def test_image_and_quotient():
    # psi = (2, -2): L -> Z has image 2Z
    P = FinAbGroup(1)
    image = hom_image_group([[2, -2]], P)
    assert image.group == FinAbGroup(1)
    assert abs(int(image.inclusion[0, 0])) == 2
    assert image.coordinates(P, [4]) is not None
    assert image.coordinates(P, [3]) is None
    P3, projection = quotient_group(P, image.inclusion)
    assert P3 == FinAbGroup(0, (2,))

    # onto Z/2 + Z
    P = FinAbGroup(1, (2,))
    image = hom_image_group([[1, 0], [0, 1]], P)
    assert image.group == P
    P3, _ = quotient_group(P, image.inclusion)
    assert P3.is_trivial


def test_cokernel():
    # Z^2 / <(2, 0)>
    group, projection, section = cokernel(as_intmat([[2], [0]]), return_section=True)
    assert group == FinAbGroup(1, (2,))
    assert group.reduce(matmul(projection, np.array([[2], [0]], dtype=object))[:, 0]) == (0, 0)
    assert group.reduce(matmul(projection, np.array([[1], [0]], dtype=object))[:, 0]) != (0, 0)
    lifted = matmul(projection, section)
    for j in range(group.ngens):
        unit = tuple(1 if i == j else 0 for i in range(group.ngens))
        assert group.reduce(lifted[:, j]) == unit


def test_matmul_shapes():
    M = as_intmat([[1, 2], [3, 4], [5, 6]])
    assert matmul([1, 0, -1], M).tolist() == [-4, -4]
    assert matmul(M, [1, 1]).tolist() == [3, 7, 11]
    assert matmul([1, 2], [3, 4]).tolist() == [11]
    assert matmul(M, as_intmat([[1], [0]])).shape == (3, 1)
    assert matmul(as_intmat([[]], shape=(2, 0)), as_intmat([], shape=(0, 3))).shape == (2, 3)


def test_shortest_coset_point():
    # x + y odd in Z/2
    assert shortest_coset_point(identity(2), [[1, 1]], FinAbGroup(0, (2,)), [1]) == (-1, 0)
    assert shortest_coset_point(identity(2), [[1, 1]], FinAbGroup(0, (2,)), [0]) == (0, 0)
    # 11 * 6 - 13 * 5 = 1 lies far outside a small box around the weight
    assert shortest_coset_point(identity(2), [[11, 13]], FinAbGroup(1), [1]) == (6, -5)
    # only even weights, and only on the sublattice spanned by (1, 1)
    assert shortest_coset_point(identity(2), [[2, -2]], FinAbGroup(1), [1]) is None
    assert shortest_coset_point([[1], [1]], [[1, 0]], FinAbGroup(1), [3]) == (3, 3)
    assert shortest_coset_point(as_intmat([], shape=(2, 0)), [[1, 0]], FinAbGroup(1), [1]) is None
