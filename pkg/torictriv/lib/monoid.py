"""
Affine monoids ``σ ∩ M`` for a cone ``σ`` and a sublattice ``M`` of ``Z^n``.

Points are always written in the ambient coordinates of ``Z^n``; the
sublattice is given by the columns of ``lattice_embed``.

"""
import itertools
import logging
import threading
from functools import lru_cache
from typing import List, Optional

import numpy as np

from . import schemas
from .cone import Cone, _dot, cone_from_functionals, cone_from_rays, primitive
from .errors import ResourceError, ValidationError
from .lattice import (
    FinAbGroup,
    as_intmat,
    as_intvec,
    identity,
    image_basis,
    kernel_basis,
    matmul,
    solve_integer,
    zeros,
)

logger = logging.getLogger(__name__)


def _l1(v) -> int:
    return sum(abs(int(x)) for x in v)


def _sort_key(v):
    return (_l1(v), tuple(-int(x) for x in v))


def _box_points(lower, upper):
    return itertools.product(*[range(lo, hi + 1) for lo, hi in zip(lower, upper)])


class AffineMonoid:
    """
    The monoid ``σ ∩ M``.

    Parameters
    ----------
    cone : Cone
    lattice_embed : IntMat, optional
        ``n x k`` matrix whose columns are a basis of ``M``; identity if omitted.
    budget : int, optional
        Maximal number of lattice points enumerated while computing generators.

    Notes
    -----
    Generators are computed lazily, once, under a lock.
    """

    def __init__(self, cone: Cone, lattice_embed=None, budget: Optional[int] = None):
        self.cone = cone
        n = cone.ambient_rank
        if lattice_embed is None:
            lattice_embed = identity(n)
        self.lattice_embed = as_intmat(lattice_embed, shape=(n, 0))
        if self.lattice_embed.shape[0] != n:
            raise ValidationError(
                f"Lattice basis has {self.lattice_embed.shape[0]} rows, expected {n}"
            )
        self.budget = schemas.DEFAULTS["budget"] if budget is None else budget
        self._lock = threading.Lock()
        self._gens = None
        self._units = None

    @property
    def ambient_rank(self) -> int:
        return self.cone.ambient_rank

    @property
    def lattice_rank(self) -> int:
        return self.lattice_embed.shape[1]

    def __repr__(self):
        return f"AffineMonoid(cone={self.cone!r}, lattice_rank={self.lattice_rank})"

    # locks do not pickle; workers of a process pool get their own
    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    # -- intrinsic coordinates -------------------------------------------------

    def to_intrinsic(self, x):
        """Coordinates ``y`` of ``x = lattice_embed @ y``, or None when ``x`` is off ``M``."""
        return solve_integer(self.lattice_embed, as_intvec(x))

    def to_ambient(self, y) -> tuple:
        return tuple(int(v) for v in matmul(self.lattice_embed, as_intvec(y)))

    def intrinsic_cone(self) -> Cone:
        """``σ`` pulled back to the coordinates of ``M``."""
        E = self.lattice_embed
        k = E.shape[1]
        functionals = [tuple(int(v) for v in matmul(as_intvec(l), E)) for l in self.cone.functionals]
        equations = [tuple(int(v) for v in matmul(as_intvec(e), E)) for e in self.cone.equations]
        functionals = [primitive(l) for l in functionals if any(l)]
        equations = [primitive(e) for e in equations if any(e)]
        return cone_from_functionals(k, functionals, equations)

    # -- membership ------------------------------------------------------------

    def contains(self, x) -> bool:
        """``x ∈ σ`` and ``x ∈ M``."""
        x = as_intvec(x)
        if len(x) != self.ambient_rank:
            raise ValueError(f"Point of length {len(x)} in a rank {self.ambient_rank} lattice")
        return self.cone.contains(x) and self.to_intrinsic(x) is not None

    def is_unit(self, x) -> bool:
        return self.contains(x) and all(v == 0 for v in self.cone.evaluate(x))

    # -- generators ------------------------------------------------------------

    def generators(self) -> List[tuple]:
        """
        A finite generating set, minimal modulo units, in ambient coordinates.

        Lattice points of ``{Σ t_j v_j + Σ s_i b_i : 0 <= t, s <= 1}`` over
        the extreme rays ``v_j`` and a lattice basis ``b_i`` of the units are
        enumerated, the decomposable ones dropped, and ``±b_i`` appended.

        Raises
        ------
        ResourceError
            When the enumeration box holds more than ``budget`` points.
        """
        with self._lock:
            if self._gens is None:
                self._gens, self._units = self._compute_generators()
        return list(self._gens)

    def units_basis(self) -> List[tuple]:
        """A lattice basis of the unit group, in ambient coordinates."""
        self.generators()
        return list(self._units)

    def has_nontrivial_units(self) -> bool:
        return len(self.units_basis()) > 0

    def _compute_generators(self):
        ic = self.intrinsic_cone()
        k = ic.ambient_rank
        units = [tuple(b) for b in ic.lineality]
        extreme = [r for r in ic.rays[: len(ic.rays) - 2 * len(units)]]
        columns = extreme + units
        lower = [sum(min(0, c[i]) for c in columns) for i in range(k)]
        upper = [sum(max(0, c[i]) for c in columns) for i in range(k)]
        npoints = 1
        for lo, hi in zip(lower, upper):
            npoints *= hi - lo + 1
        if npoints > self.budget:
            raise ResourceError(
                f"Generator enumeration needs {npoints} lattice points, budget is {self.budget}"
            )
        logger.debug(f"Enumerating {npoints} box points for a rank {k} monoid")

        def nonunit(y):
            return any(v > 0 for v in ic.evaluate(y))

        candidates = [
            y for y in _box_points(lower, upper) if ic.contains(y) and nonunit(y)
        ]
        candidates.sort(key=_sort_key)

        def reducible(y):
            for a in candidates:
                if a == y:
                    continue
                rest = tuple(yi - ai for yi, ai in zip(y, a))
                if ic.contains(rest) and nonunit(rest):
                    return True
            return False

        irreducible = [y for y in candidates if not reducible(y)]
        # one representative per class modulo units
        reps = []
        for y in irreducible:
            if not any(
                all(v == 0 for v in ic.evaluate(tuple(a - b for a, b in zip(y, r))))
                for r in reps
            ):
                reps.append(y)
        gens = [self.to_ambient(y) for y in reps]
        unit_gens = [self.to_ambient(b) for b in units]
        gens = sorted(gens, key=_sort_key)
        for b in unit_gens:
            gens.append(b)
            gens.append(tuple(-x for x in b))
        return gens, unit_gens

    # -- derived monoids -------------------------------------------------------

    def invariant_monoid(self, u, group: FinAbGroup) -> "AffineMonoid":
        """
        The monoid ``σ ∩ M ∩ ker(u)`` for ``u: Z^n -> group``.

        Torsion rows ``u_r(x) ≡ 0 mod d_r`` are linearized with auxiliary
        variables before taking the kernel.
        """
        u = as_intmat(u, shape=(group.ngens, self.ambient_rank))
        if u.shape != (group.ngens, self.ambient_rank):
            raise ValidationError(
                f"Weight map has shape {u.shape}, expected {(group.ngens, self.ambient_rank)}"
            )
        A = matmul(u, self.lattice_embed)
        k = A.shape[1]
        rel = group.relations()
        K = kernel_basis(np.concatenate([A, -rel], axis=1))
        Ky = K[:k, :].reshape(k, K.shape[1])
        basis = image_basis(Ky)
        return AffineMonoid(self.cone, matmul(self.lattice_embed, basis), budget=self.budget)

    def module_generators(self, u, group: FinAbGroup, weight) -> List[tuple]:
        """
        Generators of ``{x ∈ σ ∩ M : u(x) = weight}`` as a module over the
        invariant monoid.

        They are the generators with last coordinate 1 of the invariant monoid
        of ``(σ × Q_+) ∩ (M × Z)`` under ``(x, t) -> u(x) - t * weight``.
        """
        n = self.ambient_rank
        u = as_intmat(u, shape=(group.ngens, n))
        w = as_intvec(weight).reshape(-1, 1)
        ext_functionals = [tuple(l) + (0,) for l in self.cone.functionals] + [(0,) * n + (1,)]
        ext_equations = [tuple(e) + (0,) for e in self.cone.equations]
        ext_cone = cone_from_functionals(n + 1, ext_functionals, ext_equations)
        E = self.lattice_embed
        ext_embed = zeros(n + 1, E.shape[1] + 1)
        ext_embed[:n, : E.shape[1]] = E
        ext_embed[n, E.shape[1]] = 1
        ext = AffineMonoid(ext_cone, ext_embed, budget=self.budget)
        ext_u = np.concatenate([u, -w], axis=1)
        inv = ext.invariant_monoid(ext_u, group)
        return sorted(
            (g[:n] for g in inv.generators() if g[n] == 1), key=_sort_key
        )

    # -- predicates ------------------------------------------------------------

    def is_normal(self) -> bool:
        """Monoids of the form ``σ ∩ M`` are always normal."""
        return True

    def is_seminormal_sampled(self, radius: int = 3) -> bool:
        """``2x, 3x ∈ Q ⇒ x ∈ Q`` on lattice points of ``M`` with ``|y|_inf <= radius``."""
        return _seminormal_sample(self.contains, self.lattice_embed, radius)


def _seminormal_sample(contains, embed, radius) -> bool:
    k = embed.shape[1]
    for y in _box_points([-radius] * k, [radius] * k):
        x = matmul(embed, as_intvec(y))
        if contains(2 * x) and contains(3 * x) and not contains(x):
            return False
    return True


class GeneratedMonoid:
    """
    The monoid generated by an explicit list of lattice vectors.

    Only pointed monoids are supported: membership is a bounded search
    ordered by a grading that is positive on every generator.
    """

    def __init__(self, ambient_rank, gens, budget: Optional[int] = None):
        self.ambient_rank = ambient_rank
        self.gens = [tuple(int(x) for x in g) for g in gens]
        self.budget = schemas.DEFAULTS["budget"] if budget is None else budget
        self.cone = cone_from_rays(ambient_rank, [g for g in self.gens if any(g)])
        if not self.cone.is_pointed:
            raise ValidationError("Generated monoids with units are not supported")
        grading = [0] * ambient_rank
        for l in self.cone.functionals:
            grading = [a + b for a, b in zip(grading, l)]
        # functionals vanish on nothing but 0 inside a pointed cone; equations fix the span
        self._grading = tuple(grading)
        self._member = lru_cache(maxsize=None)(self._member_impl)

    def group_basis(self) -> np.ndarray:
        return image_basis(as_intmat(self.gens, shape=(0, self.ambient_rank)).T.copy())

    def contains(self, x) -> bool:
        x = tuple(int(v) for v in as_intvec(x))
        if not self.cone.contains(x):
            return False
        return self._member(x)

    def _member_impl(self, x) -> bool:
        if not any(x):
            return True
        if _dot(self._grading, x) <= 0:
            return False
        for g in self.gens:
            if not any(g):
                continue
            rest = tuple(a - b for a, b in zip(x, g))
            if self.cone.contains(rest) and self._member(rest):
                return True
        return False

    def has_nontrivial_units(self) -> bool:
        return False

    def saturation(self) -> AffineMonoid:
        """``cone(gens) ∩ G(Q)``."""
        return AffineMonoid(self.cone, self.group_basis(), budget=self.budget)

    def is_normal(self) -> bool:
        """Every generator of the saturation must already lie in the monoid."""
        return all(self.contains(g) for g in self.saturation().generators())

    def is_seminormal_sampled(self, radius: int = 3) -> bool:
        return _seminormal_sample(self.contains, self.group_basis(), radius)


def generators(m: AffineMonoid) -> List[tuple]:
    return m.generators()


def contains(m, x) -> bool:
    return m.contains(x)


def invariant_monoid(m: AffineMonoid, u, group: FinAbGroup) -> AffineMonoid:
    return m.invariant_monoid(u, group)


def is_normal(m) -> bool:
    return m.is_normal()


def has_nontrivial_units(m) -> bool:
    return m.has_nontrivial_units()
