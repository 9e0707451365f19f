"""
Exact integer linear algebra over lattices and finitely generated abelian
groups.

Matrices are numpy arrays of ``dtype=object`` holding Python ints, so no
intermediate value can overflow. Group elements are laid out with the
torsion coordinates first and the free coordinates last.

"""
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import schemas
from .errors import ResourceError


def as_intmat(M, shape=None) -> np.ndarray:
    """Copy ``M`` into a 2D object array of Python ints.

    Parameters
    ----------
    M : array_like
        Nested sequence or array of integers.
    shape : tuple of int, optional
        Shape to use when ``M`` is empty (a bare ``[]`` carries no column count).

    Returns
    -------
    IntMat : np.ndarray of dtype object
    """
    A = np.array(M, dtype=object)
    if A.size == 0:
        if shape is None:
            shape = A.shape if A.ndim == 2 else (0, 0)
        return np.empty(shape, dtype=object)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise ValueError(f"Expected a 2D integer matrix, got {A.ndim} dimensions")
    out = np.empty(A.shape, dtype=object)
    for idx in np.ndindex(A.shape):
        value = A[idx]
        if int(value) != value:
            raise ValueError(f"Non-integer entry {value!r} in integer matrix")
        out[idx] = int(value)
    return out


def as_intvec(v) -> np.ndarray:
    v = np.array(v, dtype=object).reshape(-1)
    out = np.empty(len(v), dtype=object)
    for i, value in enumerate(v):
        out[i] = int(value)
    return out


def identity(n) -> np.ndarray:
    I = np.zeros((n, n), dtype=object)
    for i in range(n):
        I[i, i] = 1
    return I


def zeros(rows, cols) -> np.ndarray:
    Z = np.empty((rows, cols), dtype=object)
    Z.fill(0)
    return Z


def matmul(A, B) -> np.ndarray:
    """Exact product of two integer matrices, also for empty inner dimensions."""
    A = np.asarray(A, dtype=object)
    B = np.asarray(B, dtype=object)
    row = A.ndim == 1
    if row:
        A = A.reshape(1, -1)
    col = B.ndim == 1
    if col:
        B = B.reshape(-1, 1)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"Cannot multiply {A.shape} by {B.shape}")
    if A.shape[1] == 0:
        out = zeros(A.shape[0], B.shape[1])
    else:
        out = A.dot(B)
    return out.reshape(-1) if (row or col) else out


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Extended Euclid: returns ``(g, s, t)`` with ``s*a + t*b == g >= 0``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _bezout_matrix(a: int, b: int) -> np.ndarray:
    """A 2x2 integer matrix G of determinant 1 with G @ [a, b] = [gcd(a, b), 0]."""
    g, s, t = xgcd(a, b)
    if g == 0:
        return identity(2)
    if a != 0 and b % a == 0:
        # pivot already divides: plain elimination
        g, s, t = abs(a), (1 if a > 0 else -1), 0
    return np.array([[s, t], [-b // g, a // g]], dtype=object)


def _inv2(G: np.ndarray) -> np.ndarray:
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    if det not in (1, -1):
        raise ValueError(f"2x2 transform has determinant {det}, not a unit")
    return det * np.array([[G[1, 1], -G[0, 1]], [-G[1, 0], G[0, 0]]], dtype=object)


class SNFResult(NamedTuple):
    """Smith normal form ``U @ M @ V == diag(d)``.

    ``Uinv`` and ``Vinv`` are the exact inverses of the unimodular transforms
    and ``rank`` counts the nonzero invariant factors.
    """

    d: tuple
    U: np.ndarray
    V: np.ndarray
    Uinv: np.ndarray
    Vinv: np.ndarray
    rank: int

    def diagonal(self, shape) -> np.ndarray:
        D = zeros(*shape)
        for i, di in enumerate(self.d):
            D[i, i] = di
        return D


def smith_normal_form(M) -> SNFResult:
    """
    Smith normal form of an integer matrix.

    Rows and columns are cleared with 2x2 Bezout transforms until the matrix
    is diagonal, then neighbouring invariant factors are replaced by their
    gcd and lcm until they form a divisibility chain.

    Parameters
    ----------
    M : array_like
        Integer matrix with shape (rows, cols).

    Returns
    -------
    SNFResult
        ``d`` has ``min(rows, cols)`` non-negative entries, zeros last, and
        ``d[i]`` divides ``d[i+1]``.
    """
    D = as_intmat(M)
    nrows, ncols = D.shape
    U, Uinv = identity(nrows), identity(nrows)
    V, Vinv = identity(ncols), identity(ncols)

    def row_op(i, j, G):
        D[[i, j]] = G.dot(D[[i, j]])
        U[[i, j]] = G.dot(U[[i, j]])
        Uinv[:, [i, j]] = Uinv[:, [i, j]].dot(_inv2(G))

    def col_op(i, j, G):
        D[:, [i, j]] = D[:, [i, j]].dot(G)
        V[:, [i, j]] = V[:, [i, j]].dot(G)
        Vinv[[i, j]] = _inv2(G).dot(Vinv[[i, j]])

    swap = np.array([[0, 1], [1, 0]], dtype=object)
    rank = 0
    for t in range(min(nrows, ncols)):
        block = [
            (abs(D[i, j]), i, j)
            for i in range(t, nrows)
            for j in range(t, ncols)
            if D[i, j] != 0
        ]
        if not block:
            break
        _, pi, pj = min(block)
        if pi != t:
            row_op(t, pi, swap)
        if pj != t:
            col_op(t, pj, swap)
        while True:
            for i in range(t + 1, nrows):
                if D[i, t] != 0:
                    row_op(t, i, _bezout_matrix(D[t, t], D[i, t]))
            if all(D[t, j] == 0 for j in range(t + 1, ncols)):
                break
            for j in range(t + 1, ncols):
                if D[t, j] != 0:
                    col_op(t, j, _bezout_matrix(D[t, t], D[t, j]).T)
            if all(D[i, t] == 0 for i in range(t + 1, nrows)):
                break
        if D[t, t] < 0:
            D[t] = -D[t]
            U[t] = -U[t]
            Uinv[:, t] = -Uinv[:, t]
        rank += 1

    # divisibility chain
    for i in range(rank):
        for j in range(i + 1, rank):
            a, b = D[i, i], D[j, j]
            if b % a == 0:
                continue
            g, s, t = xgcd(a, b)
            row_op(i, j, np.array([[s, t], [-b // g, a // g]], dtype=object))
            col_op(i, j, np.array([[1, -t * b // g], [1, s * a // g]], dtype=object))
            if D[j, j] < 0:
                D[j] = -D[j]
                U[j] = -U[j]
                Uinv[:, j] = -Uinv[:, j]

    d = tuple(int(D[i, i]) for i in range(min(nrows, ncols)))
    return SNFResult(d, U, V, Uinv, Vinv, rank)


def rank(M) -> int:
    return smith_normal_form(M).rank


def kernel_basis(M) -> np.ndarray:
    """Columns form a lattice basis of ``{v : M v = 0}``; the basis is saturated."""
    M = as_intmat(M)
    snf = smith_normal_form(M)
    return snf.V[:, snf.rank:].copy()


def saturation_basis(M) -> np.ndarray:
    """Columns form a basis of the saturation of the column span of ``M``."""
    M = as_intmat(M)
    snf = smith_normal_form(M)
    return snf.Uinv[:, : snf.rank].copy()


def image_basis(M) -> np.ndarray:
    """Columns form a lattice basis of the column span of ``M`` (not saturated)."""
    M = as_intmat(M)
    snf = smith_normal_form(M)
    B = snf.Uinv[:, : snf.rank].copy()
    for i in range(snf.rank):
        B[:, i] = B[:, i] * snf.d[i]
    return B


def solve_integer(A, b) -> Optional[np.ndarray]:
    """An integer solution ``x`` of ``A x = b``, or ``None`` when there is none."""
    A = as_intmat(A)
    b = as_intvec(b)
    if A.shape[0] != len(b):
        raise ValueError(f"Right hand side has length {len(b)}, expected {A.shape[0]}")
    snf = smith_normal_form(A)
    c = matmul(snf.U, b)
    y = np.zeros(A.shape[1], dtype=object)
    for i in range(len(c)):
        if i < snf.rank:
            q, r = divmod(c[i], snf.d[i])
            if r != 0:
                return None
            y[i] = q
        elif c[i] != 0:
            return None
    return matmul(snf.V, y)


def minor_gcd(M, k) -> int:
    """gcd of all k x k minors of ``M`` (independent check of invariant factors)."""
    from itertools import combinations
    from math import gcd

    import sympy as sp

    M = as_intmat(M)
    g = 0
    for rows in combinations(range(M.shape[0]), k):
        for cols in combinations(range(M.shape[1]), k):
            sub = sp.Matrix(M[np.ix_(rows, cols)].tolist())
            g = gcd(g, int(sub.det()))
    return g


@dataclass(frozen=True)
class FinAbGroup:
    """
    A finitely generated abelian group ``Z/d_1 + ... + Z/d_k + Z^r`` in
    invariant-factor form: ``torsion = (d_1, ..., d_k)`` with every ``d_i >= 2``
    dividing ``d_{i+1}``, and ``free_rank = r``.
    """

    free_rank: int
    torsion: tuple = ()

    def __post_init__(self):
        torsion = tuple(int(t) for t in self.torsion)
        object.__setattr__(self, "torsion", torsion)
        if self.free_rank < 0:
            raise ValueError(f"Negative free rank {self.free_rank}")
        for i, t in enumerate(torsion):
            if t < 2:
                raise ValueError(f"Invariant factors must be >= 2, got {torsion}")
            if i > 0 and t % torsion[i - 1] != 0:
                raise ValueError(f"Invariant factors {torsion} do not form a divisibility chain")

    @classmethod
    def from_orders(cls, orders):
        """
        Canonicalize ``Z/o_1 + ... + Z/o_n`` (``o_i = 0`` meaning ``Z``).

        Returns
        -------
        group : FinAbGroup
        coords : IntMat
            Matrix sending input coordinates to canonical coordinates.
        """
        orders = [int(o) for o in orders]
        if any(o < 0 for o in orders):
            raise ValueError(f"Cyclic orders must be non-negative, got {orders}")
        rel = zeros(len(orders), len(orders))
        for i, o in enumerate(orders):
            rel[i, i] = o
        return cokernel(rel)

    @property
    def ngens(self) -> int:
        return len(self.torsion) + self.free_rank

    @property
    def orders(self) -> tuple:
        return self.torsion + (0,) * self.free_rank

    @property
    def is_trivial(self) -> bool:
        return self.ngens == 0

    def relations(self) -> np.ndarray:
        """Diagonal relation matrix: the group is ``Z^ngens / im(relations)``."""
        rel = zeros(self.ngens, self.ngens)
        for i, o in enumerate(self.orders):
            rel[i, i] = o
        return rel

    def reduce(self, vec) -> tuple:
        vec = as_intvec(vec)
        if len(vec) != self.ngens:
            raise ValueError(f"Vector of length {len(vec)} is not in a group with {self.ngens} generators")
        return tuple(int(x % o) if o else int(x) for x, o in zip(vec, self.orders))

    def element(self, vec) -> "GroupElem":
        return GroupElem(self, self.reduce(vec))

    def zero(self) -> "GroupElem":
        return GroupElem(self, (0,) * self.ngens)

    def contains(self, sub_generators, vec) -> bool:
        """Is ``vec`` in the subgroup generated by the columns of ``sub_generators``?"""
        return self.subgroup_coordinates(sub_generators, vec) is not None

    def subgroup_coordinates(self, sub_generators, vec):
        """Integer ``x`` with ``sub_generators @ x == vec`` in this group, or None."""
        S = as_intmat(sub_generators, shape=(self.ngens, 0))
        A = np.concatenate([S, -self.relations()], axis=1)
        sol = solve_integer(A, as_intvec(vec))
        if sol is None:
            return None
        return sol[: S.shape[1]]

    def __str__(self):
        parts = [f"Z/{t}" for t in self.torsion] + ["Z"] * self.free_rank
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class GroupElem:
    """An element of a FinAbGroup, stored reduced (torsion coordinates first)."""

    group: FinAbGroup
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", self.group.reduce(self.coords))

    @property
    def torsion_part(self) -> tuple:
        return self.coords[: len(self.group.torsion)]

    @property
    def free_part(self) -> tuple:
        return self.coords[len(self.group.torsion):]

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)

    def _check(self, other):
        if other.group != self.group:
            raise ValueError(f"Elements of different groups {self.group} and {other.group}")

    def __add__(self, other):
        self._check(other)
        return GroupElem(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return GroupElem(self.group, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return GroupElem(self.group, tuple(-a for a in self.coords))

    def __mul__(self, n: int):
        return GroupElem(self.group, tuple(n * a for a in self.coords))

    __rmul__ = __mul__

    def __lt__(self, other):
        return self.coords < other.coords

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def cokernel(M, return_section=False):
    """
    Canonical presentation of ``Z^rows / im(M)``.

    Parameters
    ----------
    M : array_like
        Integer matrix; pass ``shape`` through ``as_intmat`` for empty maps.
    return_section : bool
        Also return a matrix whose columns lift the canonical generators.

    Returns
    -------
    group : FinAbGroup
    projection : IntMat
        ``group.reduce(projection @ x)`` is the class of ``x``.
    section : IntMat, optional
        ``projection @ section`` reduces to the identity of the group.
    """
    M = as_intmat(M)
    nrows = M.shape[0]
    snf = smith_normal_form(M)
    tors_idx = [i for i in range(snf.rank) if snf.d[i] > 1]
    free_idx = list(range(snf.rank, nrows))
    group = FinAbGroup(len(free_idx), tuple(snf.d[i] for i in tors_idx))
    keep = tors_idx + free_idx
    projection = snf.U[keep, :].reshape(len(keep), nrows)
    if return_section:
        section = snf.Uinv[:, keep].reshape(nrows, len(keep))
        return group, projection, section
    return group, projection


class GroupImage(NamedTuple):
    """The subgroup ``Q = psi(L)`` of ``P``.

    ``onto`` maps L onto Q (canonical Q coordinates) and ``inclusion`` sends
    Q coordinates to P coordinates, so ``inclusion @ onto == psi`` in P.
    """

    group: FinAbGroup
    onto: np.ndarray
    inclusion: np.ndarray

    def coordinates(self, P: FinAbGroup, vec):
        """Q coordinates of an element of P lying in Q, or None."""
        x = P.subgroup_coordinates(self.inclusion, vec)
        if x is None:
            return None
        return self.group.reduce(x)


def hom_image_group(psi, P: FinAbGroup) -> GroupImage:
    """
    The image ``psi(L)`` of a lattice homomorphism ``psi: Z^n -> P``.

    Parameters
    ----------
    psi : array_like
        ``P.ngens x n`` integer matrix in the canonical coordinates of ``P``.
    P : FinAbGroup

    Returns
    -------
    GroupImage
    """
    psi = as_intmat(psi, shape=(P.ngens, 0))
    if psi.shape[0] != P.ngens:
        raise ValueError(f"psi has {psi.shape[0]} rows but {P} has {P.ngens} generators")
    n = psi.shape[1]
    # ker(L -> P) is the projection of ker [psi | -rel] onto L
    K = kernel_basis(np.concatenate([psi, -P.relations()], axis=1))
    Kx = K[:n, :].reshape(n, K.shape[1])
    Q, onto, section = cokernel(Kx, return_section=True)
    inclusion = matmul(psi, section)
    for j in range(inclusion.shape[1]):
        inclusion[:, j] = as_intvec(P.reduce(inclusion[:, j]))
    return GroupImage(Q, onto, inclusion)


def quotient_group(P: FinAbGroup, sub_generators):
    """The quotient of ``P`` by the subgroup generated by the given columns.

    Returns ``(group, projection)`` as ``cokernel`` does.
    """
    S = as_intmat(sub_generators, shape=(P.ngens, 0))
    return cokernel(np.concatenate([S, P.relations()], axis=1))


def _l1_sphere(n: int, r: int):
    """Integer points of ``Z^n`` with l1 norm exactly ``r``."""
    if n == 0:
        if r == 0:
            yield ()
        return
    for a in range(-r, r + 1):
        for rest in _l1_sphere(n - 1, r - abs(a)):
            yield (a,) + rest


def _reduce_near_origin(x0, L):
    """``x0`` minus the lattice point of ``L`` (columns) nearest to it after LLL."""
    import sympy as sp
    from sympy.polys.domains import ZZ
    from sympy.polys.matrices import DomainMatrix

    n, d = L.shape
    rows = [[ZZ(int(L[i, j])) for i in range(n)] for j in range(d)]
    reduced = DomainMatrix(rows, (d, n), ZZ).lll().to_Matrix().T
    x = sp.Matrix([int(v) for v in x0])
    t = (reduced.T * reduced).LUsolve(reduced.T * x)
    t = sp.Matrix([sp.floor(c + sp.Rational(1, 2)) for c in t])
    return as_intvec(list(x - reduced * t))


def shortest_coset_point(basis, psi, P: FinAbGroup, w, budget: Optional[int] = None) -> Optional[tuple]:
    """
    The point ``x`` of the lattice spanned by the columns of ``basis`` with
    ``psi @ x == w`` in ``P`` and the smallest l1 norm, ties broken
    lexicographically; ``None`` when no lattice point has that weight.

    One solution is found exactly, moved close to the origin along the
    weight-zero sublattice, and its norm bounds the shell-by-shell search.

    Raises
    ------
    ResourceError
        When the search visits more than ``budget`` points.
    """
    budget = schemas.DEFAULTS["budget"] if budget is None else budget
    psi = as_intmat(psi)
    n = psi.shape[1]
    B = as_intmat(basis, shape=(n, 0))
    k = B.shape[1]
    w = as_intvec(w)
    tors = [i for i, o in enumerate(P.orders) if o]
    R = zeros(P.ngens, len(tors))
    for j, i in enumerate(tors):
        R[i, j] = P.orders[i]
    A = np.concatenate([matmul(psi, B).reshape(P.ngens, k), -R], axis=1)
    sol = solve_integer(A, w)
    if sol is None:
        return None
    x0 = matmul(B, sol[:k]) if k else zeros(n, 1).reshape(-1)
    K = kernel_basis(A)[:k, :]
    if K.shape[1]:
        x0 = _reduce_near_origin(x0, matmul(B, K).reshape(n, K.shape[1]))
    target = P.reduce(w)
    seen = 0
    for r in range(sum(abs(int(v)) for v in x0) + 1):
        hits = []
        for x in _l1_sphere(n, r):
            seen += 1
            if seen > budget:
                raise ResourceError(f"Preimage search of weight {target} exceeds the budget {budget}")
            if P.reduce(matmul(psi, as_intvec(x))) != target:
                continue
            if solve_integer(B, as_intvec(x)) is not None:
                hits.append(x)
        if hits:
            return min(hits)
    return tuple(int(v) for v in x0)
