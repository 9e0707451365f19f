"""
Rational polyhedral cones in a lattice ``Z^n``.

A Cone keeps both descriptions: generator rays and supporting functionals
``l_i`` (facet normals, taken modulo the equations of the span), plus a
lattice basis of the equations ``σ^⊥``. Functionals are computed by an
incremental double description. Faces are identified by the set of parent
rays they contain.

"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd, lcm
from typing import List, Tuple

import numpy as np
import sympy as sp

from . import schemas
from .errors import ResourceError, ValidationError
from .lattice import (
    as_intmat,
    as_intvec,
    kernel_basis,
    matmul,
    rank,
    saturation_basis,
    smith_normal_form,
    zeros,
)

logger = logging.getLogger(__name__)


def primitive(v) -> tuple:
    """Divide an integer vector by the gcd of its entries (sign kept)."""
    v = [int(x) for x in v]
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        return tuple(v)
    return tuple(x // g for x in v)


def _dot(a, b) -> int:
    return sum(int(x) * int(y) for x, y in zip(a, b))


def _columns(vectors, n) -> np.ndarray:
    """Stack vectors as the columns of an ``n x len(vectors)`` IntMat."""
    if not vectors:
        return zeros(n, 0)
    return as_intmat(vectors).T.copy()


def _rows(vectors, n) -> np.ndarray:
    if not vectors:
        return zeros(0, n)
    return as_intmat(vectors)


def _double_description(constraints, dim):
    """
    Generators of ``{x in Q^dim : c.x >= 0 for c in constraints}``.

    Returns
    -------
    lineality : list of tuple
        Lattice basis of the lineality space.
    extreme : list of tuple
        One primitive representative of each extreme ray modulo lineality.
    """
    lineality = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    pointed = []
    processed = []
    for c in constraints:
        c = tuple(int(x) for x in c)
        h = [_dot(c, b) for b in lineality]
        nonzero = [i for i, hb in enumerate(h) if hb != 0]
        if nonzero:
            i0 = nonzero[0]
            b0, h0 = lineality[i0], h[i0]
            sign = 1 if h0 > 0 else -1
            new_lineality = []
            for i, b in enumerate(lineality):
                if i == i0:
                    continue
                v = primitive(h0 * bi - h[i] * b0i for bi, b0i in zip(b, b0))
                if any(v):
                    new_lineality.append(v)
            new_pointed = []
            for g in pointed:
                hg = _dot(c, g)
                v = primitive(abs(h0) * gi - sign * hg * b0i for gi, b0i in zip(g, b0))
                if any(v):
                    new_pointed.append(v)
            new_pointed.append(primitive(sign * x for x in b0))
            lineality, pointed = new_lineality, new_pointed
        else:
            pos, null, neg = [], [], []
            for g in pointed:
                hg = _dot(c, g)
                (pos if hg > 0 else neg if hg < 0 else null).append((g, hg))
            new_pointed = [g for g, _ in pos] + [g for g, _ in null]
            for p, hp in pos:
                for q, hq in neg:
                    v = primitive(hp * qi - hq * pi for pi, qi in zip(p, q))
                    if any(v):
                        new_pointed.append(v)
            pointed = new_pointed
        processed.append(c)
        pointed = _extreme_only(pointed, processed, dim)
    return lineality, pointed


def _extreme_only(pointed, processed, dim):
    # a generator is extreme iff its tight constraints have rank rank(processed) - 1
    full = rank(_rows(processed, dim))
    seen = set()
    out = []
    for g in pointed:
        tight = tuple(i for i, c in enumerate(processed) if _dot(c, g) == 0)
        if tight in seen:
            continue
        tight_rank = rank(_rows([processed[i] for i in tight], dim)) if tight else 0
        if tight_rank == full - 1:
            seen.add(tight)
            out.append(g)
    return out


def _project_onto_span(vec, basis) -> tuple:
    """Primitive integer multiple of the orthogonal projection of ``vec`` onto the column span of ``basis``."""
    if basis.shape[1] == 0:
        return tuple(0 for _ in vec)
    B = sp.Matrix(basis.tolist())
    z = (B.T * B).LUsolve(B.T * sp.Matrix([int(x) for x in vec]))
    proj = B * z
    denom = lcm(*[sp.Rational(x).q for x in proj])
    return primitive(int(x * denom) for x in proj)


@dataclass(frozen=True)
class Cone:
    """
    A rational polyhedral cone ``σ`` in ``Q^ambient_rank``.

    ``σ = {x : l(x) >= 0 for l in functionals, e(x) = 0 for e in equations}``
    and ``σ`` is the non-negative span of ``rays``. The rays list the extreme
    rays (modulo lineality) followed by ``±`` a lattice basis of the lineality
    space.
    """

    ambient_rank: int
    rays: Tuple[tuple, ...]
    functionals: Tuple[tuple, ...]
    equations: Tuple[tuple, ...] = ()
    lineality: Tuple[tuple, ...] = ()

    def __post_init__(self):
        for r in self.rays:
            for l in self.functionals:
                if _dot(l, r) < 0:
                    raise ValidationError(f"Ray {r} is negative on functional {l}")
            for e in self.equations:
                if _dot(e, r) != 0:
                    raise ValidationError(f"Ray {r} is off the span equation {e}")

    @property
    def dim(self) -> int:
        return self.ambient_rank - len(self.equations)

    @property
    def spans_ambient(self) -> bool:
        return not self.equations

    @property
    def is_pointed(self) -> bool:
        return not self.lineality

    def functional_matrix(self) -> np.ndarray:
        return _rows(list(self.functionals), self.ambient_rank)

    def equation_matrix(self) -> np.ndarray:
        return _rows(list(self.equations), self.ambient_rank)

    def ray_matrix(self) -> np.ndarray:
        return _columns(list(self.rays), self.ambient_rank)

    def lineality_basis(self) -> np.ndarray:
        return _columns(list(self.lineality), self.ambient_rank)

    def evaluate(self, x) -> tuple:
        return tuple(_dot(l, x) for l in self.functionals)

    def contains(self, x) -> bool:
        x = as_intvec(x)
        if len(x) != self.ambient_rank:
            raise ValueError(f"Point of length {len(x)} in a rank {self.ambient_rank} lattice")
        return all(_dot(e, x) == 0 for e in self.equations) and all(
            v >= 0 for v in self.evaluate(x)
        )

    def strict_interior(self, x) -> bool:
        x = as_intvec(x)
        return all(_dot(e, x) == 0 for e in self.equations) and all(
            v > 0 for v in self.evaluate(x)
        )

    @cached_property
    def _face_list(self) -> List["Face"]:
        all_rays = frozenset(range(len(self.rays)))
        facet_sets = [
            frozenset(j for j, r in enumerate(self.rays) if _dot(l, r) == 0)
            for l in self.functionals
        ]
        found = {all_rays}
        frontier = [all_rays]
        while frontier:
            nxt = []
            for s in frontier:
                for fs in facet_sets:
                    t = s & fs
                    if t not in found:
                        found.add(t)
                        nxt.append(t)
            frontier = nxt
        faces = [Face.from_ray_indices(self, s) for s in found]
        faces.sort(key=lambda f: (f.dim, sorted(f.ray_indices)))
        return faces

    def faces(self) -> List["Face"]:
        return list(self._face_list)

    def codim1_faces(self) -> List["Face"]:
        return [f for f in self._face_list if f.dim == self.dim - 1]

    def smallest_face(self) -> "Face":
        return self._face_list[0]

    def full_face(self) -> "Face":
        return self._face_list[-1]

    def __repr__(self):
        return (
            f"Cone(ambient_rank={self.ambient_rank}, rays={list(self.rays)}, "
            f"functionals={list(self.functionals)})"
        )


@dataclass(frozen=True, eq=False)
class Face:
    """
    A face ``τ = σ ∩ {l_i = 0 : i in zero_set}`` of a parent cone.

    ``span_basis`` is a lattice basis (as columns) of ``span(τ) ∩ L``.
    """

    parent: Cone
    ray_indices: frozenset
    zero_set: tuple
    span_basis: np.ndarray = field(repr=False)

    @classmethod
    def from_ray_indices(cls, parent: Cone, ray_indices) -> "Face":
        ray_indices = frozenset(ray_indices)
        rays = [parent.rays[j] for j in sorted(ray_indices)]
        zero_set = tuple(
            i for i, l in enumerate(parent.functionals) if all(_dot(l, r) == 0 for r in rays)
        )
        basis = saturation_basis(_columns(rays, parent.ambient_rank))
        return cls(parent, ray_indices, zero_set, basis)

    @property
    def rays(self) -> tuple:
        return tuple(self.parent.rays[j] for j in sorted(self.ray_indices))

    @property
    def dim(self) -> int:
        return self.span_basis.shape[1]

    @property
    def codim(self) -> int:
        return self.parent.dim - self.dim

    @property
    def is_linear(self) -> bool:
        """True when the face is a linear subspace (its own negative)."""
        return self.ray_indices == self.parent.smallest_face().ray_indices

    def contains(self, x) -> bool:
        if not self.parent.contains(x):
            return False
        return all(_dot(self.parent.functionals[i], x) == 0 for i in self.zero_set)

    def in_span(self, x) -> bool:
        """Is ``x`` in the lattice ``span(τ) ∩ L``?"""
        x = as_intvec(x)
        if self.dim == 0:
            return not any(x)
        return rank(np.concatenate([self.span_basis, x.reshape(-1, 1)], axis=1)) == self.dim

    def cone(self) -> Cone:
        """The face as a cone of its own in the ambient lattice."""
        return cone_from_rays(self.parent.ambient_rank, list(self.rays))

    def is_subface_of(self, other: "Face") -> bool:
        return self.ray_indices <= other.ray_indices

    def __eq__(self, other):
        return (
            isinstance(other, Face)
            and self.parent == other.parent
            and self.ray_indices == other.ray_indices
        )

    def __hash__(self):
        return hash((self.parent, self.ray_indices))

    def __repr__(self):
        return f"Face(dim={self.dim}, rays={list(self.rays)})"

    @property
    def label(self) -> str:
        """Short stable name used in reports and traces."""
        return "{" + ",".join(str(j) for j in sorted(self.ray_indices)) + "}"


def _check_ambient(ambient_rank, max_ambient):
    if max_ambient is None:
        max_ambient = schemas.DEFAULTS["max_cone_ambient"]
    if ambient_rank > max_ambient:
        raise ResourceError(
            f"Cone dualization supports ambient rank <= {max_ambient}, got {ambient_rank}"
        )


def cone_from_rays(ambient_rank, rays, max_ambient=None) -> Cone:
    """
    Build a cone from generating rays.

    Parameters
    ----------
    ambient_rank : int
        Rank of the lattice ``L``.
    rays : list of integer vectors
        Nonzero generators; redundant ones are allowed and dropped.
    max_ambient : int, optional
        Limit on ``ambient_rank``, default ``DEFAULTS["max_cone_ambient"]``.

    Returns
    -------
    Cone
    """
    _check_ambient(ambient_rank, max_ambient)
    rays = [primitive(as_intvec(r)) for r in rays]
    for r in rays:
        if len(r) != ambient_rank:
            raise ValidationError(f"Ray {r} does not live in a rank {ambient_rank} lattice")
        if not any(r):
            raise ValidationError("Rays must be nonzero vectors")
    n = ambient_rank
    R = _columns(rays, n)

    equations = [tuple(int(x) for x in col) for col in kernel_basis(R.T).T]

    # dualize inside span(σ) ∩ L where σ is full dimensional
    snf = smith_normal_form(R)
    k = snf.rank
    B = snf.Uinv[:, :k].reshape(n, k)
    C = snf.U[:k, :].reshape(k, n)
    ys = [tuple(int(x) for x in matmul(C, as_intvec(r))) for r in rays]
    _, ext = _double_description(ys, k)
    functionals = []
    for y_star in ext:
        l = tuple(int(x) for x in matmul(as_intvec(y_star), C))
        functionals.append(_project_onto_span(l, B))
    functionals = sorted(set(functionals))
    logger.debug(f"Dualized {len(rays)} rays into {len(functionals)} functionals")
    return _normalize(n, functionals, equations)


def cone_from_functionals(ambient_rank, functionals, equations=(), max_ambient=None) -> Cone:
    """
    Build a cone ``{x : l(x) >= 0, e(x) = 0}`` from inequalities (and equations).
    """
    _check_ambient(ambient_rank, max_ambient)
    constraints = [as_intvec(l) for l in functionals]
    for e in equations:
        e = as_intvec(e)
        constraints += [e, -e]
    for c in constraints:
        if len(c) != ambient_rank:
            raise ValidationError(f"Functional {tuple(c)} does not live in a rank {ambient_rank} lattice")
    lin, ext = _double_description(constraints, ambient_rank)
    rays = list(ext) + list(lin) + [tuple(-x for x in b) for b in lin]
    return cone_from_rays(ambient_rank, rays, max_ambient=max_ambient)


def _normalize(n, functionals, equations) -> Cone:
    """Canonical rays from the functional side."""
    lin_basis = kernel_basis(_rows(list(functionals) + list(equations), n))
    lineality = [tuple(int(x) for x in col) for col in lin_basis.T]
    F = list(functionals) + list(equations)
    full = rank(_rows(F, n))
    # extreme rays of σ modulo lineality, by the double description of σ itself
    cons = [as_intvec(l) for l in functionals]
    for e in equations:
        cons += [as_intvec(e), -as_intvec(e)]
    _, ext = _double_description(cons, n)
    complement = kernel_basis(_rows(lineality, n)) if lineality else None
    extreme = set()
    for g in ext:
        if complement is not None:
            g = _project_onto_span(g, complement)
        if not any(g):
            continue
        tight = [l for l in functionals if _dot(l, g) == 0]
        if rank(_rows(tight + list(equations), n)) == full - 1:
            extreme.add(primitive(g))
    rays = sorted(extreme) + lineality + [tuple(-x for x in b) for b in lineality]
    return Cone(n, tuple(rays), tuple(functionals), tuple(equations), tuple(lineality))


def faces(c: Cone) -> List[Face]:
    """All faces of ``c``, from the smallest face up to ``c`` itself."""
    return c.faces()


def codim1_faces(c: Cone) -> List[Face]:
    return c.codim1_faces()


def strict_interior(c: Cone, m) -> bool:
    """True iff ``l_i(m) > 0`` for every functional (inside the span of ``c``)."""
    return c.strict_interior(m)


def smallest_face(c: Cone) -> Face:
    """The lineality face ``σ ∩ (-σ)``."""
    return c.smallest_face()


def span_reduce(c: Cone):
    """
    Re-express ``c`` in the lattice ``L ∩ span(c)``.

    Returns
    -------
    cone : Cone
        Spans its ambient space.
    embedding : IntMat
        ``ambient_rank x dim`` matrix mapping new coordinates back into ``L``.
    """
    n = c.ambient_rank
    R = c.ray_matrix()
    snf = smith_normal_form(R)
    k = snf.rank
    E = snf.Uinv[:, :k].reshape(n, k)
    C = snf.U[:k, :].reshape(k, n)
    new_rays = [tuple(int(x) for x in matmul(C, as_intvec(r))) for r in c.rays]
    return cone_from_rays(k, new_rays), E
