import pytest

from torictriv.lib.cone import cone_from_functionals, cone_from_rays
from torictriv.lib.errors import ResourceError, ValidationError
from torictriv.lib.lattice import FinAbGroup
from torictriv.lib.monoid import AffineMonoid, GeneratedMonoid, generators, invariant_monoid


def test_orthant_generators():
    m = AffineMonoid(cone_from_rays(2, [(1, 0), (0, 1)]))
    assert generators(m) == [(1, 0), (0, 1)]
    assert m.units_basis() == []
    assert not m.has_nontrivial_units()
    assert m.contains((3, 4))
    assert not m.contains((-1, 0))
    assert m.is_unit((0, 0))
    assert not m.is_unit((1, 0))


def test_wedge_generators():
    # the Hilbert basis of <(1,0), (1,2)> has the extra point (1,1)
    m = AffineMonoid(cone_from_rays(2, [(1, 0), (1, 2)]))
    assert m.generators() == [(1, 0), (1, 1), (1, 2)]
    assert m.is_normal()
    assert m.is_seminormal_sampled(radius=2)


def test_sublattice():
    # even points of the orthant
    m = AffineMonoid(cone_from_rays(2, [(1, 0), (0, 1)]), lattice_embed=[[2, 0], [0, 1]])
    assert m.contains((2, 1))
    assert not m.contains((1, 1))
    assert m.generators() == [(0, 1), (2, 0)]


def test_units():
    half = AffineMonoid(cone_from_functionals(2, [(0, 1)]))
    gens = half.generators()
    assert set(gens) == {(0, 1), (1, 0), (-1, 0)}
    assert half.has_nontrivial_units()
    assert half.is_unit((-3, 0))
    assert not half.is_unit((0, 1))


def test_invariant_monoid():
    orthant = AffineMonoid(cone_from_rays(2, [(1, 0), (0, 1)]))
    # Z/2 acting by -1 on both coordinates
    inv = invariant_monoid(orthant, [[1, 1]], FinAbGroup(0, (2,)))
    assert inv.generators() == [(2, 0), (1, 1), (0, 2)]
    assert inv.contains((3, 1))
    assert not inv.contains((1, 0))

    # G_m with weights (1, -1)
    inv = orthant.invariant_monoid([[1, -1]], FinAbGroup(1))
    assert inv.generators() == [(1, 1)]

    # weight 1 is generated over the invariants by x
    assert orthant.module_generators([[1, -1]], FinAbGroup(1), [1]) == [(1, 0)]
    assert orthant.module_generators([[1, -1]], FinAbGroup(1), [-2]) == [(0, 2)]

    with pytest.raises(ValidationError):
        orthant.invariant_monoid([[1, -1, 0]], FinAbGroup(1))


def test_budget():
    m = AffineMonoid(cone_from_rays(2, [(1, 0), (1, 50)]), budget=10)
    with pytest.raises(ResourceError):
        m.generators()


def test_generated_monoid():
    # <2, 3> in N misses 1 and is not normal
    q = GeneratedMonoid(1, [(2,), (3,)])
    assert q.contains((5,))
    assert not q.contains((1,))
    assert not q.is_normal()
    assert not q.is_seminormal_sampled(radius=2)
    assert q.saturation().generators() == [(1,)]

    # <(1,0), (1,1), (1,2)> is the saturated wedge monoid
    w = GeneratedMonoid(2, [(1, 0), (1, 1), (1, 2)])
    assert w.is_normal()

    with pytest.raises(ValidationError):
        GeneratedMonoid(1, [(1,), (-1,)])
