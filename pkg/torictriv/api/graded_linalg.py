"""
Graded matrices over a ``ToricGAlgebra``.

A ``GradedMatrix`` with source weights ``v`` (columns) and target weights
``w`` (rows) is an equivariant map ``⊕ R_{v_j} ⊗ A -> ⊕ R_{w_i} ⊗ A``; its
entry ``(i, j)`` is homogeneous of weight ``v_j - w_i``, so multiplication by
an element of ``A_c`` raises weights by ``c``.

Graded idempotents present equivariant projective modules. The module basis
engine at the bottom of this file looks for graded ``S: F -> E`` and
``T: E -> F`` with ``T S = 1`` and ``S T = e``.

"""
import itertools
import logging
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.matrices import DomainMatrix

from ..lib.cone import Face
from ..lib.errors import (
    NotInvertible,
    StructuralViolation,
    UnsupportedFactorization,
    ValidationError,
)
from ..lib.lattice import (
    FinAbGroup,
    GroupElem,
    as_intmat,
    as_intvec,
    identity,
    kernel_basis,
    matmul,
    shortest_coset_point,
    smith_normal_form,
)
from .graded_algebra import (
    AlgebraElem,
    Localization,
    LocalizedElem,
    ToricGAlgebra,
    exact_divide,
    laurent_gcd,
)

logger = logging.getLogger(__name__)

WeightVector = Tuple[GroupElem, ...]


def weight_vector(P: FinAbGroup, coords) -> WeightVector:
    """Weights from a list of coordinate vectors of ``P``."""
    return tuple(P.element(as_intvec(c)) for c in coords)


def render_weights(weights: Sequence[GroupElem]) -> List[List[int]]:
    return [[int(c) for c in w.coords] for w in weights]


def _is_constant(x: AlgebraElem) -> bool:
    return all(not any(m) for m in x.support)


def _augmentation(x: AlgebraElem):
    # evaluation at the identity of the torus: every monomial goes to 1
    return x.ring(sum(c for _, c in x.items())) if not x.is_zero else x.ring.zero


def _determinant(entries: np.ndarray, one, zero):
    """Laplace expansion along rows, memoized on the remaining columns."""
    n = entries.shape[0]
    memo = {}

    def minor(cols):
        if not cols:
            return one
        if cols in memo:
            return memo[cols]
        row = n - len(cols)
        total = zero
        for pos, j in enumerate(cols):
            a = entries[row, j]
            if a.is_zero:
                continue
            term = a * minor(cols[:pos] + cols[pos + 1:])
            total = total - term if pos % 2 else total + term
        memo[cols] = total
        return total

    return minor(tuple(range(n)))


def _domain_matrix(coeff, rows, shape) -> DomainMatrix:
    K = coeff.sympy_domain()
    data = [[K.from_sympy(coeff.to_sympy(c)) for c in row] for row in rows]
    return DomainMatrix(data, shape, K)


def constant_rank(coeff, rows) -> int:
    """Rank over the fraction field of a matrix of coefficients."""
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    dm = _domain_matrix(coeff, rows, (len(rows), len(rows[0])))
    if not coeff.is_field:
        dm = dm.to_field()
    return dm.rank()


class GradedMatrix:
    """
    A matrix of homogeneous algebra elements.

    Parameters
    ----------
    alg : ToricGAlgebra
    source_weights : sequence of GroupElem
        Column weights ``v_j``.
    target_weights : sequence of GroupElem
        Row weights ``w_i``.
    entries : nested sequence or object ndarray
        ``AlgebraElem``, coefficient, or element text per entry.
    check : bool
        Verify support and homogeneity of every entry.

    Raises
    ------
    ValidationError
        On shape mismatch, support outside the monoid, or a wrongly graded entry.
    """

    __slots__ = ("alg", "source_weights", "target_weights", "entries")

    def __init__(self, alg: ToricGAlgebra, source_weights, target_weights, entries, check=True):
        self.alg = alg
        self.source_weights = tuple(source_weights)
        self.target_weights = tuple(target_weights)
        nrows, ncols = len(self.target_weights), len(self.source_weights)
        grid = np.empty((nrows, ncols), dtype=object)
        if isinstance(entries, np.ndarray):
            if entries.shape != (nrows, ncols):
                raise ValidationError(f"Entries have shape {entries.shape}, expected {(nrows, ncols)}")
            rows = entries.tolist()
        else:
            rows = [list(r) for r in entries]
            if len(rows) != nrows or any(len(r) != ncols for r in rows):
                raise ValidationError(f"Entries do not form a {nrows} x {ncols} matrix")
        for i in range(nrows):
            for j in range(ncols):
                grid[i, j] = self._coerce(rows[i][j])
        self.entries = grid
        if check:
            self.check()

    def _coerce(self, x) -> AlgebraElem:
        if isinstance(x, AlgebraElem):
            return x
        if isinstance(x, str):
            return self.alg.parse(x)
        return AlgebraElem(self.alg.coeff, {(0,) * self.alg.rank: x})

    # -- construction -----------------------------------------------------------------

    @classmethod
    def identity(cls, alg: ToricGAlgebra, weights) -> "GradedMatrix":
        weights = tuple(weights)
        n = len(weights)
        rows = [[alg.one() if i == j else alg.zero() for j in range(n)] for i in range(n)]
        return cls(alg, weights, weights, rows, check=False)

    @classmethod
    def zero(cls, alg: ToricGAlgebra, source_weights, target_weights) -> "GradedMatrix":
        rows = [[alg.zero()] * len(source_weights) for _ in target_weights]
        return cls(alg, source_weights, target_weights, rows, check=False)

    @classmethod
    def standard_projector(cls, alg: ToricGAlgebra, weights, hit) -> "GradedMatrix":
        """Diagonal projector onto the summands with ``hit[i]`` true."""
        weights = tuple(weights)
        n = len(weights)
        rows = [
            [alg.one() if i == j and hit[i] else alg.zero() for j in range(n)] for i in range(n)
        ]
        return cls(alg, weights, weights, rows, check=False)

    @classmethod
    def diagonal(cls, alg: ToricGAlgebra, source_weights, target_weights, diag) -> "GradedMatrix":
        n = len(diag)
        rows = [[diag[i] if i == j else alg.zero() for j in range(n)] for i in range(n)]
        return cls(alg, source_weights, target_weights, rows)

    # -- shape and access -------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def is_square(self) -> bool:
        return self.shape[0] == self.shape[1]

    @property
    def is_endomorphism(self) -> bool:
        return self.source_weights == self.target_weights

    def __getitem__(self, ij) -> AlgebraElem:
        return self.entries[ij]

    def entry_weight(self, i, j) -> GroupElem:
        return self.source_weights[j] - self.target_weights[i]

    def check(self) -> "GradedMatrix":
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                x = self.entries[i, j]
                if x.is_zero:
                    continue
                if not self.alg.contains_element(x):
                    raise ValidationError(f"Entry ({i},{j}) = {x.render()} is not in the algebra")
                if not self.alg.is_homogeneous(x, self.entry_weight(i, j)):
                    raise ValidationError(
                        f"Entry ({i},{j}) = {x.render()} is not homogeneous "
                        f"of weight {self.entry_weight(i, j)}"
                    )
        return self

    def is_constant(self) -> bool:
        return all(_is_constant(x) for x in self.entries.flat)

    def is_zero(self) -> bool:
        return all(x.is_zero for x in self.entries.flat)

    def submatrix(self, rows, cols) -> "GradedMatrix":
        rows, cols = list(rows), list(cols)
        grid = np.empty((len(rows), len(cols)), dtype=object)
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                grid[a, b] = self.entries[i, j]
        return GradedMatrix(
            self.alg,
            [self.source_weights[j] for j in cols],
            [self.target_weights[i] for i in rows],
            grid,
            check=False,
        )

    def map_entries(self, fn: Callable, alg: Optional[ToricGAlgebra] = None, check=True) -> "GradedMatrix":
        grid = np.empty(self.shape, dtype=object)
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                grid[i, j] = fn(self.entries[i, j])
        alg = self.alg if alg is None else alg
        return GradedMatrix(alg, self.source_weights, self.target_weights, grid, check=check)

    def with_alg(self, alg: ToricGAlgebra) -> "GradedMatrix":
        """The same entries read in another algebra (checked)."""
        return GradedMatrix(alg, self.source_weights, self.target_weights, self.entries)

    def transpose(self) -> "GradedMatrix":
        """The transpose, graded with negated weights."""
        return GradedMatrix(
            self.alg,
            [-w for w in self.target_weights],
            [-v for v in self.source_weights],
            self.entries.T.copy(),
            check=False,
        )

    # -- arithmetic -------------------------------------------------------------------

    def compose(self, other: "GradedMatrix") -> "GradedMatrix":
        """``self ∘ other``."""
        if self.source_weights != other.target_weights:
            raise ValidationError(
                f"Cannot compose: source weights {[str(w) for w in self.source_weights]} "
                f"differ from target weights {[str(w) for w in other.target_weights]}"
            )
        n, k = self.shape
        m = other.shape[1]
        grid = np.empty((n, m), dtype=object)
        for i in range(n):
            for j in range(m):
                total = self.alg.zero()
                for l in range(k):
                    a, b = self.entries[i, l], other.entries[l, j]
                    if a.is_zero or b.is_zero:
                        continue
                    total = total + a * b
                grid[i, j] = total
        return GradedMatrix(self.alg, other.source_weights, self.target_weights, grid)

    __matmul__ = compose

    def _same_shape(self, other):
        if (self.source_weights, self.target_weights) != (other.source_weights, other.target_weights):
            raise ValidationError("Graded matrices with different weights")

    def __add__(self, other: "GradedMatrix") -> "GradedMatrix":
        self._same_shape(other)
        return GradedMatrix(
            self.alg, self.source_weights, self.target_weights, self.entries + other.entries, check=False
        )

    def __sub__(self, other: "GradedMatrix") -> "GradedMatrix":
        self._same_shape(other)
        return GradedMatrix(
            self.alg, self.source_weights, self.target_weights, self.entries - other.entries, check=False
        )

    def __neg__(self) -> "GradedMatrix":
        return self.map_entries(lambda x: -x, check=False)

    def scale(self, c: AlgebraElem) -> "GradedMatrix":
        """Multiply every entry by an invariant element."""
        if not self.alg.is_invariant(c):
            raise ValidationError(f"Scalar {c.render()} is not invariant")
        return self.map_entries(lambda x: x * c, check=False)

    def __eq__(self, other):
        if not isinstance(other, GradedMatrix):
            return NotImplemented
        return (
            self.source_weights == other.source_weights
            and self.target_weights == other.target_weights
            and all(a == b for a, b in zip(self.entries.flat, other.entries.flat))
        )

    def __hash__(self):
        return hash((self.source_weights, self.target_weights, tuple(self.entries.flat)))

    def direct_sum(self, other: "GradedMatrix") -> "GradedMatrix":
        n1, m1 = self.shape
        n2, m2 = other.shape
        grid = np.empty((n1 + n2, m1 + m2), dtype=object)
        for i in range(n1 + n2):
            for j in range(m1 + m2):
                if i < n1 and j < m1:
                    grid[i, j] = self.entries[i, j]
                elif i >= n1 and j >= m1:
                    grid[i, j] = other.entries[i - n1, j - m1]
                else:
                    grid[i, j] = self.alg.zero()
        return GradedMatrix(
            self.alg,
            self.source_weights + other.source_weights,
            self.target_weights + other.target_weights,
            grid,
            check=False,
        )

    def hstack(self, other: "GradedMatrix") -> "GradedMatrix":
        if self.target_weights != other.target_weights:
            raise ValidationError("Cannot stack columns with different target weights")
        return GradedMatrix(
            self.alg,
            self.source_weights + other.source_weights,
            self.target_weights,
            np.concatenate([self.entries, other.entries], axis=1),
            check=False,
        )

    def vstack(self, other: "GradedMatrix") -> "GradedMatrix":
        if self.source_weights != other.source_weights:
            raise ValidationError("Cannot stack rows with different source weights")
        return GradedMatrix(
            self.alg,
            self.source_weights,
            self.target_weights + other.target_weights,
            np.concatenate([self.entries, other.entries], axis=0),
            check=False,
        )

    # -- determinants and inverses ----------------------------------------------------

    def trace(self) -> AlgebraElem:
        if not self.is_endomorphism:
            raise ValidationError("Trace of a matrix that is not an endomorphism")
        total = self.alg.zero()
        for i in range(self.shape[0]):
            total = total + self.entries[i, i]
        return total

    def det(self) -> AlgebraElem:
        """Determinant of a square matrix; homogeneous of weight ``Σv - Σw``."""
        if not self.is_square:
            raise ValidationError(f"Determinant of a {self.shape} matrix")
        return _determinant(self.entries, self.alg.one(), self.alg.zero())

    def det_endo(self) -> AlgebraElem:
        if not self.is_endomorphism:
            raise ValidationError("det_endo needs equal source and target weights")
        return self.det()

    def adjugate_entries(self) -> np.ndarray:
        """Raw cofactor transpose: ``adj @ self == det * 1``."""
        n = self.shape[0]
        adj = np.empty((n, n), dtype=object)
        one, zero = self.alg.one(), self.alg.zero()
        for i in range(n):
            for j in range(n):
                rows = [r for r in range(n) if r != i]
                cols = [c for c in range(n) if c != j]
                sub = self.entries[np.ix_(rows, cols)] if n > 1 else np.empty((0, 0), dtype=object)
                minor = _determinant(sub, one, zero)
                adj[j, i] = -minor if (i + j) % 2 else minor
        return adj

    def invert(self) -> "GradedMatrix":
        """
        Exact inverse through the adjugate.

        Raises
        ------
        NotInvertible
            When the determinant is not a unit of the algebra.
        """
        d = self.det()
        if not self.alg.is_unit(d):
            raise NotInvertible(f"Determinant {d.render()} is not a unit")
        dinv = self.alg.unit_inverse(d)
        adj = self.adjugate_entries()
        grid = np.empty(adj.shape, dtype=object)
        for idx, x in np.ndenumerate(adj):
            grid[idx] = x * dinv
        return GradedMatrix(self.alg, self.target_weights, self.source_weights, grid)

    def is_invertible(self) -> bool:
        return self.is_square and self.alg.is_unit(self.det())

    def is_idempotent(self) -> bool:
        return self.is_endomorphism and self.compose(self) == self

    # -- grading ----------------------------------------------------------------------

    def invariant_entry_mask(self) -> np.ndarray:
        """``mask[i, j]``: the weight component ``A_{v_j - w_i}`` is nonzero."""
        mask = np.zeros(self.shape, dtype=bool)
        cache = {}
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                c = self.entry_weight(i, j)
                if c not in cache:
                    cache[c] = self.alg.weight_realizable(c)
                mask[i, j] = cache[c]
        return mask

    def restrict_to_face(self, tau: Face) -> "GradedMatrix":
        """Reduce modulo the face ideal ``I_τ``; entries land in ``R[τ ∩ M]``."""
        face_alg = self.alg.face_algebra(tau)
        return self.map_entries(lambda x: self.alg.face_restrict(tau, x), alg=face_alg)

    def evaluate_at_identity(self) -> List[list]:
        return [[_augmentation(x) for x in row] for row in self.entries]

    def rank_at_identity(self) -> int:
        return constant_rank(self.alg.coeff, self.evaluate_at_identity())

    def render(self) -> dict:
        return {
            "source_weights": render_weights(self.source_weights),
            "target_weights": render_weights(self.target_weights),
            "entries": [[x.render() for x in row] for row in self.entries],
        }

    def __repr__(self):
        return f"GradedMatrix({self.shape[0]}x{self.shape[1]}, {self.render()['entries']})"


class GradedIdempotent:
    """A graded endomorphism ``e`` with ``e e = e``."""

    def __init__(self, matrix: GradedMatrix, check=True):
        if not matrix.is_endomorphism:
            raise ValidationError("An idempotent needs equal source and target weights")
        if check and not matrix.is_idempotent():
            raise ValidationError("Matrix is not idempotent")
        self.matrix = matrix

    @property
    def alg(self) -> ToricGAlgebra:
        return self.matrix.alg

    @property
    def weights(self) -> WeightVector:
        return self.matrix.source_weights

    @property
    def size(self) -> int:
        return len(self.weights)

    def rank(self) -> int:
        """Rank of the presented projective module."""
        return self.matrix.rank_at_identity()

    def trace(self) -> AlgebraElem:
        return self.matrix.trace()

    def restrict_to_face(self, tau: Face) -> "GradedIdempotent":
        return GradedIdempotent(self.matrix.restrict_to_face(tau), check=False)

    def with_alg(self, alg: ToricGAlgebra) -> "GradedIdempotent":
        return GradedIdempotent(self.matrix.with_alg(alg), check=False)

    def direct_sum(self, other: "GradedIdempotent") -> "GradedIdempotent":
        return GradedIdempotent(self.matrix.direct_sum(other.matrix), check=False)

    def complement(self) -> "GradedIdempotent":
        return GradedIdempotent(GradedMatrix.identity(self.alg, self.weights) - self.matrix, check=False)

    def __repr__(self):
        return f"GradedIdempotent({self.matrix!r})"


class WeightBlock(NamedTuple):
    """One block of ``weight_split``: the class, the basis indices, the idempotent."""

    weight_class: GroupElem
    indices: Tuple[int, ...]
    idempotent: GradedIdempotent


def weight_split(e: GradedIdempotent, projection, quotient: FinAbGroup) -> List[WeightBlock]:
    """
    Split ``e`` along the classes of its weights in a quotient ``P -> P3``.

    Parameters
    ----------
    e : GradedIdempotent
    projection : IntMat
        ``quotient.ngens x P.ngens``; the class of ``w`` is
        ``quotient.element(projection @ w.coords)``.
    quotient : FinAbGroup

    Returns
    -------
    list of WeightBlock
        One block per inhabited class, ordered by class.

    Raises
    ------
    StructuralViolation
        If an entry joining two different classes is nonzero.
    """
    P = e.alg.P
    projection = as_intmat(projection, shape=(quotient.ngens, P.ngens))
    classes = [quotient.element(matmul(projection, as_intvec(w.coords))) for w in e.weights]
    m = e.matrix
    for i, j in itertools.product(range(e.size), repeat=2):
        if classes[i] != classes[j] and not m[i, j].is_zero:
            raise StructuralViolation(
                f"Entry ({i},{j}) = {m[i, j].render()} joins the classes {classes[i]} and {classes[j]}"
            )
    blocks = []
    for cls in sorted(set(classes)):
        idx = tuple(i for i, c in enumerate(classes) if c == cls)
        blocks.append(WeightBlock(cls, idx, GradedIdempotent(m.submatrix(idx, idx), check=False)))
    logger.debug(f"Weight split into {len(blocks)} blocks")
    return blocks


class LocalGradedMatrix:
    """
    ``numerator / h^power`` over the localization ``A_h``.

    ``h`` is invariant, so the grading is read off the numerator.
    """

    def __init__(self, loc: Localization, numerator: GradedMatrix, power: int = 0):
        if numerator.alg is not loc.alg:
            numerator = numerator.with_alg(loc.alg)
        self.loc = loc
        self.numerator = numerator
        self.power = power

    @property
    def source_weights(self) -> WeightVector:
        return self.numerator.source_weights

    @property
    def target_weights(self) -> WeightVector:
        return self.numerator.target_weights

    @property
    def shape(self):
        return self.numerator.shape

    def entry(self, i, j) -> LocalizedElem:
        return self.loc(self.numerator[i, j], self.power)

    def compose(self, other: "LocalGradedMatrix") -> "LocalGradedMatrix":
        return LocalGradedMatrix(self.loc, self.numerator @ other.numerator, self.power + other.power)

    __matmul__ = compose

    def _lift(self, k: int) -> GradedMatrix:
        return self.numerator.scale(self.loc.h_power(k)) if k else self.numerator

    def equal(self, other: "LocalGradedMatrix") -> bool:
        return self._lift(other.power) == other._lift(self.power)

    def __eq__(self, other):
        if not isinstance(other, LocalGradedMatrix):
            return NotImplemented
        return self.equal(other)

    __hash__ = None

    def reduce(self) -> "LocalGradedMatrix":
        """Cancel common powers of ``h`` between the numerator and the denominator."""
        num, k = self.numerator, self.power
        while k > 0 and not num.is_zero():
            grid = np.empty(num.shape, dtype=object)
            for idx, x in np.ndenumerate(num.entries):
                grid[idx] = x if x.is_zero else self.loc.alg.exact_divide(x, self.loc.h)
            if any(q is None for q in grid.flat):
                break
            num = GradedMatrix(num.alg, num.source_weights, num.target_weights, grid, check=False)
            k -= 1
        if num.is_zero():
            k = 0
        return LocalGradedMatrix(self.loc, num, k)

    def regular(self) -> Optional[GradedMatrix]:
        """The matrix over ``A`` equal to this one, or None."""
        red = self.reduce()
        return red.numerator if red.power == 0 else None

    def det(self) -> LocalizedElem:
        return self.loc(self.numerator.det(), self.power * self.shape[0])

    def invert(self) -> "LocalGradedMatrix":
        """
        Inverse over ``A_h``: the determinant of the numerator must be a unit
        of ``A`` times a power of ``h``.
        """
        d = self.numerator.det()
        if d.is_zero:
            raise NotInvertible("Zero determinant")
        j = 0
        while not self.loc.alg.is_unit(self.loc.h):
            q = self.loc.alg.exact_divide(d, self.loc.h)
            if q is None:
                break
            d, j = q, j + 1
        if not self.loc.alg.is_unit(d):
            raise NotInvertible(f"Determinant {d.render()} is not a unit times a power of h")
        dinv = self.loc.alg.unit_inverse(d)
        hk = self.loc.h_power(self.power)
        adj = self.numerator.adjugate_entries()
        grid = np.empty(adj.shape, dtype=object)
        for idx, x in np.ndenumerate(adj):
            grid[idx] = x * dinv * hk
        num = GradedMatrix(self.loc.alg, self.target_weights, self.source_weights, grid)
        return LocalGradedMatrix(self.loc, num, j).reduce()

    @classmethod
    def identity(cls, loc: Localization, weights) -> "LocalGradedMatrix":
        return cls(loc, GradedMatrix.identity(loc.alg, weights), 0)

    def render(self) -> dict:
        out = self.numerator.render()
        out["h"] = self.loc.h.render()
        out["power"] = self.power
        return out


# -- module-level operations ----------------------------------------------------------


def compose(f: GradedMatrix, g: GradedMatrix) -> GradedMatrix:
    return f.compose(g)


def det_endo(f: GradedMatrix) -> AlgebraElem:
    return f.det_endo()


def is_unit(alg: ToricGAlgebra, x: AlgebraElem) -> bool:
    return alg.is_unit(x)


def unit_inverse(alg: ToricGAlgebra, x: AlgebraElem) -> AlgebraElem:
    return alg.unit_inverse(x)


def invert(f: GradedMatrix) -> GradedMatrix:
    return f.invert()


def invariant_entry_mask(f: GradedMatrix) -> np.ndarray:
    return f.invariant_entry_mask()


def restrict_to_face(f: GradedMatrix, tau: Face) -> GradedMatrix:
    return f.restrict_to_face(tau)


# -- module bases ---------------------------------------------------------------------


class ModuleBasis(NamedTuple):
    """Graded ``S: F -> E`` and ``T: E -> F`` with ``T S = 1`` and ``S T = e``."""

    S: GradedMatrix
    T: GradedMatrix
    strategy: str

    @property
    def target_weights(self) -> WeightVector:
        return self.S.source_weights


def is_module_basis(e: GradedIdempotent, S: GradedMatrix, T: GradedMatrix) -> bool:
    F = S.source_weights
    return T @ S == GradedMatrix.identity(e.alg, F) and S @ T == e.matrix


def _empty_basis(e: GradedIdempotent) -> ModuleBasis:
    alg = e.alg
    S = GradedMatrix(alg, (), e.weights, [[] for _ in e.weights], check=False)
    T = GradedMatrix(alg, e.weights, (), [], check=False)
    return ModuleBasis(S, T, "zero")


def _constant_basis(e: GradedIdempotent) -> Optional[ModuleBasis]:
    """Idempotents with constant entries, one weight block at a time."""
    m = e.matrix
    if not m.is_constant():
        return None
    alg, coeff = e.alg, e.alg.coeff
    zero_point = (0,) * alg.rank
    n = e.size
    columns, rows, F = [], [], []
    for w in sorted(set(e.weights)):
        idx = [i for i in range(n) if e.weights[i] == w]
        sub = [[m[i, j].coeff(zero_point) for j in idx] for i in idx]
        r = constant_rank(coeff, sub)
        if r == 0:
            continue
        if coeff.is_field:
            dm = _domain_matrix(coeff, sub, (len(idx), len(idx)))
            rref, pivots = dm.rref()
            rref_rows = [[coeff.from_sympy(a) for a in row] for row in rref.to_Matrix().tolist()]
            block_S = [[sub[a][p] for p in pivots] for a in range(len(idx))]
            block_T = rref_rows[: len(pivots)]
        else:
            I = identity(len(idx))
            basis = kernel_basis(I - as_intmat(sub))
            snf = smith_normal_form(basis)
            left = matmul(snf.V, snf.U[: snf.rank, :])
            block_S = basis.tolist()
            block_T = matmul(left, as_intmat(sub)).tolist()
        for k in range(r):
            col = [0] * n
            row = [0] * n
            for a, i in enumerate(idx):
                col[i] = block_S[a][k]
                row[i] = block_T[k][a]
            columns.append(col)
            rows.append(row)
            F.append(w)
    S = GradedMatrix(alg, F, e.weights, [[columns[k][i] for k in range(len(F))] for i in range(n)])
    T = GradedMatrix(alg, e.weights, F, rows)
    return ModuleBasis(S, T, "constant")


def _unit_minor_basis(e: GradedIdempotent, r: int, rng, max_candidates: int) -> Optional[ModuleBasis]:
    """``S = e[:, J]`` and ``T = e[I, J]^-1 e[I, :]`` for a unit minor."""
    n = e.size
    m = e.matrix
    subsets = list(itertools.combinations(range(n), r))
    order = [subsets[k] for k in rng.permutation(len(subsets))]
    pairs = [(I, I) for I in order] + [(I, J) for I in order for J in order if I != J]
    for count, (I, J) in enumerate(pairs):
        if count >= max_candidates:
            logger.debug(f"Unit minor search stopped after {max_candidates} candidates")
            return None
        minor = m.submatrix(I, J)
        d = minor.det()
        if not e.alg.is_unit(d):
            continue
        inv = minor.invert()
        S = m.submatrix(range(n), J)
        T = inv @ m.submatrix(I, range(n))
        logger.debug(f"Unit minor on rows {I} and columns {J}")
        return ModuleBasis(S, T, "unit-minor")
    return None


def _monomial_shift(alg: ToricGAlgebra, ups, downs, budget: int) -> Optional[tuple]:
    """A lattice point ``c`` with ``ups + c`` and ``downs - c`` inside the monoid."""
    contains = alg.monoid.contains

    def fits(c):
        return all(contains(tuple(a + b for a, b in zip(p, c))) for p in ups) and all(
            contains(tuple(a - b for a, b in zip(q, c))) for q in downs
        )

    n = alg.rank
    seen = set()
    first = [(0,) * n] + [tuple(-a for a in p) for p in ups] + list(downs)
    for c in first:
        if c not in seen:
            seen.add(c)
            if fits(c):
                return c
    bound = 1 + max([abs(a) for p in list(ups) + list(downs) for a in p] + [0])
    if (2 * bound + 1) ** n > budget:
        return None
    box = sorted(
        itertools.product(range(-bound, bound + 1), repeat=n),
        key=lambda c: (sum(abs(a) for a in c), c),
    )
    for c in box:
        if c not in seen and fits(c):
            return c
    return None


def _primitive_column(e: GradedIdempotent, j: int):
    """Column ``j`` of ``e`` divided by the gcd of its entries, as Laurent elements."""
    alg = e.alg
    col = [e.matrix[i, j] for i in range(e.size)]
    if all(x.is_zero for x in col):
        return None
    g = alg.zero()
    for x in col:
        if not x.is_zero:
            g = laurent_gcd(g, x, alg.rank)
    u = [x if x.is_zero else exact_divide(x, g, alg.rank) for x in col]
    if any(x is None for x in u):
        return None
    weights = set()
    for i, x in enumerate(u):
        if x.is_zero:
            continue
        w = alg.element_weight(x)
        if w is None:
            return None
        weights.add(w + e.weights[i])
    if len(weights) != 1:
        return None
    return u


def _rank_one_basis(e: GradedIdempotent, rng, budget: int) -> Optional[ModuleBasis]:
    """``e = u w`` with ``u`` the primitive part of a column."""
    alg = e.alg
    n = e.size
    for j in rng.permutation(n):
        u = _primitive_column(e, int(j))
        if u is None:
            continue
        for i in range(n):
            if u[i].is_zero:
                continue
            w = [exact_divide(e.matrix[i, k], u[i], alg.rank) for k in range(n)]
            if any(x is None for x in w):
                continue
            ups = [p for x in u for p in x.support]
            downs = [p for x in w for p in x.support]
            c = _monomial_shift(alg, ups, downs, budget)
            if c is None:
                continue
            neg = tuple(-a for a in c)
            u_c = [x.shift(c) for x in u]
            w_c = [x.shift(neg) for x in w]
            f = alg.element_weight(u_c[i]) + e.weights[i]
            S = GradedMatrix(alg, (f,), e.weights, [[x] for x in u_c])
            T = GradedMatrix(alg, e.weights, (f,), [w_c])
            return ModuleBasis(S, T, "rank-one")
    return None


def _peel_basis(e: GradedIdempotent, r: int, rng, depth: int, budget: int, max_candidates: int):
    """
    Split off one rank-1 summand ``u w`` through a unit entry of a primitive
    column ``u`` and recurse on ``e - u w``.
    """
    alg = e.alg
    n = e.size
    for j in rng.permutation(n):
        u = _primitive_column(e, int(j))
        if u is None:
            continue
        for i in range(n):
            x = u[i]
            if not x.is_monomial:
                continue
            (p, c0), = x.items()
            if not alg.coeff.is_unit(c0):
                continue
            # shift the pivot to a constant; the rest of the column must stay in the monoid
            shift = tuple(-a for a in p)
            if not all(
                alg.monoid.contains(tuple(a + b for a, b in zip(q, shift)))
                for y in u
                for q in y.support
            ):
                continue
            u_c = [y.shift(shift) for y in u]
            pivot_inv = alg.unit_inverse(u_c[i])
            w = [e.matrix[i, k] * pivot_inv for k in range(n)]
            f = alg.element_weight(u_c[i]) + e.weights[i]
            S1 = GradedMatrix(alg, (f,), e.weights, [[y] for y in u_c])
            T1 = GradedMatrix(alg, e.weights, (f,), [w])
            rest = GradedIdempotent(e.matrix - S1 @ T1, check=False)
            sub = _find_basis(rest, r - 1, rng, depth + 1, budget, max_candidates, allow_transpose=False)
            if sub is None:
                continue
            S = S1.hstack(sub.S)
            T = T1.vstack(sub.T)
            return ModuleBasis(S, T, f"peel+{sub.strategy}")
    return None


def _find_basis(e, r, rng, depth, budget, max_candidates, allow_transpose=True) -> Optional[ModuleBasis]:
    if r == 0:
        return _empty_basis(e) if e.matrix.is_zero() else None
    attempts = [
        lambda: _constant_basis(e),
        lambda: _unit_minor_basis(e, r, rng, max_candidates),
    ]
    if r == 1:
        attempts.append(lambda: _rank_one_basis(e, rng, budget))
    if depth < e.size:
        attempts.append(lambda: _peel_basis(e, r, rng, depth, budget, max_candidates))
    for attempt in attempts:
        try:
            found = attempt()
        except (ValidationError, NotInvertible) as err:
            logger.debug(f"Basis strategy abandoned: {err}")
            continue
        if found is not None and is_module_basis(e, found.S, found.T):
            return found
    if allow_transpose:
        et = GradedIdempotent(e.matrix.transpose(), check=False)
        found = _find_basis(et, r, rng, depth, budget, max_candidates, allow_transpose=False)
        if found is not None:
            S, T = found.T.transpose(), found.S.transpose()
            if is_module_basis(e, S, T):
                return ModuleBasis(S, T, f"transpose+{found.strategy}")
    return None


def find_basis(
    e: GradedIdempotent, seed: int = 0, budget: Optional[int] = None, max_candidates: int = 5000
) -> ModuleBasis:
    """
    A graded basis of the projective module presented by ``e``.

    Strategies, in order: constant entries (row reduction per weight block),
    a unit ``r x r`` minor, the primitive part of a column (rank 1), and
    peeling a rank-1 summand through a unit pivot; each is retried on the
    transpose. Candidate orders are shuffled by ``seed``.

    Raises
    ------
    UnsupportedFactorization
        When no strategy applies.
    """
    budget = e.alg.monoid.budget if budget is None else budget
    rng = np.random.default_rng(seed)
    r = e.rank()
    found = _find_basis(e, r, rng, 0, budget, max_candidates)
    if found is None:
        raise UnsupportedFactorization(f"No graded basis found for a rank {r} idempotent of size {e.size}")
    logger.info(f"Found a rank {r} basis by {found.strategy}")
    return found


def retarget(basis: ModuleBasis, target_weights, units: Sequence[AlgebraElem]) -> ModuleBasis:
    """Move column ``k`` to weight ``target_weights[k]`` through the unit ``units[k]``."""
    S, T = basis.S, basis.T
    alg = S.alg
    r = S.shape[1]
    S_cols = np.empty(S.shape, dtype=object)
    T_rows = np.empty(T.shape, dtype=object)
    for k in range(r):
        inv = alg.unit_inverse(units[k])
        for i in range(S.shape[0]):
            S_cols[i, k] = S[i, k] * inv
            T_rows[k, i] = units[k] * T[k, i]
    S2 = GradedMatrix(alg, target_weights, S.target_weights, S_cols)
    T2 = GradedMatrix(alg, T.source_weights, target_weights, T_rows)
    return ModuleBasis(S2, T2, basis.strategy)


def torus_basis(e: GradedIdempotent, target_weights=None, seed: int = 0) -> ModuleBasis:
    """
    A graded basis over a Laurent algebra, optionally moved onto the given
    target weights by monomial units (any weight is a unit weight when the
    grading is onto).
    """
    if not e.alg.is_torus:
        raise ValidationError("torus_basis needs a Laurent algebra")
    basis = find_basis(e, seed=seed)
    if target_weights is None:
        return basis
    target_weights = tuple(target_weights)
    if len(target_weights) != basis.S.shape[1]:
        raise ValidationError(
            f"Module of rank {basis.S.shape[1]} cannot carry {len(target_weights)} target weights"
        )
    units = []
    for f_old, f_new in zip(basis.target_weights, target_weights):
        m = shortest_preimage(e.alg, f_old - f_new)
        if m is None:
            raise ValidationError(f"Weight {f_old - f_new} is not realized by a monomial")
        units.append(e.alg.monomial(m))
    return retarget(basis, target_weights, units)


def shortest_preimage(alg: ToricGAlgebra, w: GroupElem) -> Optional[tuple]:
    """
    The lattice point of ``M`` with weight ``w`` and smallest ``l1`` norm
    (ties broken lexicographically), or None when ``w`` is not a weight of
    ``M``.
    """
    return shortest_coset_point(alg.monoid.lattice_embed, alg.psi, alg.P, w.coords, budget=alg.monoid.budget)
