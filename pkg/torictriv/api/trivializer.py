"""
Trivialization of equivariant projective modules over ``A = R[σ ∩ M]``.

The engine first reduces to a grading ``ψ`` onto its group, then builds an
isomorphism ``E -> F_A`` face by face, starting from the smallest face of
``σ``. Each face either gets a graded basis directly, or goes through the
patching route:

  patch the isomorphisms of its codimension-1 faces to one modulo ``J``,
  lift it to ``A_h`` for an invariant ``h ≡ 1 mod J``,
  compare with an isomorphism over the big torus,
  factor the comparison over a cover of the quotient,
  and glue.

Only the cover factorization is allowed to fail; it then yields a
``PartialResult`` naming the step instead of a certificate.

"""
import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ..lib import schemas
from ..lib.cone import Face
from ..lib.errors import (
    DegenerateLift,
    GluingMismatch,
    NotInvariant,
    NotInvertible,
    PreconditionFailed,
    ResourceError,
    StructuralViolation,
    UnsupportedFactorization,
    ValidationError,
)
from ..lib.lattice import (
    GroupElem,
    GroupImage,
    as_intmat,
    as_intvec,
    cokernel,
    hom_image_group,
    identity,
    matmul,
    quotient_group,
    shortest_coset_point,
)
from .graded_algebra import AlgebraElem, Localization, ToricGAlgebra
from .graded_linalg import (
    GradedIdempotent,
    GradedMatrix,
    LocalGradedMatrix,
    ModuleBasis,
    WeightVector,
    find_basis,
    is_module_basis,
    retarget,
    shortest_preimage,
    torus_basis,
    weight_split,
)

logger = logging.getLogger(__name__)


# -- problems ---------------------------------------------------------------------------


@dataclass
class GActionProblem:
    """
    A graded algebra together with a module over it.

    ``module`` is a ``GradedIdempotent``, or a weight vector when the module
    is known to be free with those weights.
    """

    alg: ToricGAlgebra
    module: Union[GradedIdempotent, WeightVector]
    name: str = ""

    def __post_init__(self):
        if isinstance(self.module, GradedIdempotent):
            if self.module.alg is not self.alg:
                self.module = self.module.with_alg(self.alg)
        else:
            self.module = tuple(self.module)
            for w in self.module:
                if w.group != self.alg.P:
                    raise ValidationError(f"Weight {w} is not in the grading group {self.alg.P}")

    @property
    def is_free(self) -> bool:
        return not isinstance(self.module, GradedIdempotent)

    @property
    def weights(self) -> WeightVector:
        return self.module if self.is_free else self.module.weights

    @property
    def size(self) -> int:
        return len(self.weights)

    def idempotent(self) -> GradedIdempotent:
        if self.is_free:
            return GradedIdempotent(GradedMatrix.identity(self.alg, self.module), check=False)
        return self.module

    def direct_sum(self, other: "GActionProblem") -> "GActionProblem":
        if self.is_free and other.is_free:
            return GActionProblem(self.alg, self.module + other.module, self.name)
        return GActionProblem(self.alg, self.idempotent().direct_sum(other.idempotent()), self.name)


class FaithfulBlock(NamedTuple):
    """One weight class of a reduction: the rows it owns, its twist, its subproblem."""

    indices: Tuple[int, ...]
    twist: GroupElem
    problem: GActionProblem
    inclusion: np.ndarray

    def lift_weight(self, w: GroupElem, P) -> GroupElem:
        """A weight of the subproblem back in ``P``."""
        return P.element(matmul(self.inclusion, as_intvec(w.coords))) + self.twist


class FaithfulReduction(NamedTuple):
    image: GroupImage
    surjective: bool
    blocks: List[FaithfulBlock]


def reduce_to_faithful(p: GActionProblem) -> FaithfulReduction:
    """
    Replace ``P`` by ``Q = ψ(L)``.

    The module splits along ``P/Q``; the block of class ``b`` is twisted by
    ``R_{-a}`` for the first weight ``a`` of the block so that all its weights
    lie in ``Q``.
    """
    alg = p.alg
    P = alg.P
    image = hom_image_group(alg.psi, P)
    P3, projection = quotient_group(P, image.inclusion)
    if P3.is_trivial:
        block = FaithfulBlock(tuple(range(p.size)), P.zero(), p, identity(P.ngens))
        return FaithfulReduction(image, True, [block])
    Q = image.group
    alg_q = ToricGAlgebra(alg.coeff, alg.monoid, Q, image.onto)

    def to_q(w: GroupElem) -> GroupElem:
        coords = image.coordinates(P, w.coords)
        if coords is None:
            raise ValidationError(f"Weight {w} is not in the image of psi")
        return Q.element(coords)

    if p.is_free:
        classes = [P3.element(matmul(projection, as_intvec(w.coords))) for w in p.weights]
        groups = [(c, tuple(i for i, d in enumerate(classes) if d == c)) for c in sorted(set(classes))]
    else:
        groups = [(b.weight_class, b.indices) for b in weight_split(p.module, projection, P3)]
    blocks = []
    for _, idx in groups:
        a = p.weights[idx[0]]
        weights = tuple(to_q(p.weights[i] - a) for i in idx)
        if p.is_free:
            sub = GActionProblem(alg_q, weights, p.name)
        else:
            m = p.module.matrix.submatrix(idx, idx)
            sub = GActionProblem(
                alg_q, GradedIdempotent(GradedMatrix(alg_q, weights, weights, m.entries), check=False), p.name
            )
        blocks.append(FaithfulBlock(idx, a, sub, image.inclusion))
    logger.info(f"Reduced {P} to the image {Q} of psi: {len(blocks)} blocks")
    return FaithfulReduction(image, False, blocks)


# -- certificates ---------------------------------------------------------------------


def _record(trace: list, identity: str, ok: bool = True, **info) -> dict:
    entry = {"identity": identity, "ok": bool(ok)}
    entry.update(info)
    trace.append(entry)
    return entry


class K0Class(Counter):
    """An element of ``Z[P]``: weights with multiplicities."""

    def render(self) -> List[dict]:
        return [
            {"weight": [int(c) for c in w.coords], "multiplicity": int(k)}
            for w, k in sorted(self.items())
            if k
        ]


@dataclass
class TrivializationCertificate:
    """
    A graded isomorphism ``T: E -> F_A`` with inverse ``S``.

    ``T S = 1`` and ``S T = e``; ``trace`` lists the identities checked while
    the certificate was built.
    """

    problem: GActionProblem
    S: GradedMatrix
    T: GradedMatrix
    trace: list = field(default_factory=list)
    seed: int = 0

    @property
    def target_weights(self) -> WeightVector:
        return self.S.source_weights

    @property
    def rank(self) -> int:
        return len(self.target_weights)

    def k0_class(self) -> K0Class:
        return K0Class(self.target_weights)


@dataclass
class PartialResult:
    """What is left when the cover factorization cannot split an automorphism."""

    problem: GActionProblem
    step: str
    face: str
    message: str
    trace: list = field(default_factory=list)

    def render(self) -> dict:
        return {
            "version": schemas.FORMAT_VERSION,
            "status": "partial",
            "step": self.step,
            "face": self.face,
            "message": self.message,
            "trace": self.trace,
        }


def k0_class(cert: TrivializationCertificate) -> K0Class:
    return cert.k0_class()


# -- patching over the boundary ---------------------------------------------------------


def _truncate(m: GradedMatrix, keep: Callable) -> GradedMatrix:
    return m.map_entries(lambda x: x.restrict(keep), check=False)


class PatchedIso(NamedTuple):
    """``T: E -> F`` and ``S: F -> E`` modulo ``J``, supported on the boundary."""

    T: GradedMatrix
    S: GradedMatrix
    target_weights: WeightVector
    corrections: List[GradedMatrix]


def patch_faces(alg: ToricGAlgebra, faces: Sequence[Face], isos: Dict[Face, ModuleBasis], trace=None) -> PatchedIso:
    """
    One isomorphism modulo ``J`` out of isomorphisms on the codimension-1 faces.

    Faces are added one at a time. The new face's ``η`` and the current ``φ``
    are compared on their common boundary, the comparison ``η φ^-1`` is pulled
    back to the faces already covered, ``φ`` is corrected by it, and the two
    are glued monomial by monomial.

    Raises
    ------
    NotInvertible
        If a comparison is not invertible (the inputs are inconsistent).
    """
    trace = [] if trace is None else trace
    faces = list(faces)
    if not faces:
        raise ValidationError("patch_faces needs at least one face")
    F = isos[faces[0]].target_weights
    for f in faces:
        if isos[f].target_weights != F:
            raise ValidationError(f"Face {f.label} carries target weights different from {faces[0].label}")
    first = isos[faces[0]]
    T, S = first.T.with_alg(alg), first.S.with_alg(alg)
    covered = [faces[0]]
    corrections = []
    for face in faces[1:]:
        cov = tuple(covered)

        def in_covered(m, cov=cov):
            return any(f.contains(m) for f in cov)

        def in_both(m, face=face, in_covered=in_covered):
            return face.contains(m) and in_covered(m)

        T_eta, S_eta = isos[face].T.with_alg(alg), isos[face].S.with_alg(alg)
        C = _truncate(T_eta @ S, in_both)
        C_inv = _truncate(T @ S_eta, in_both)
        if _truncate(C @ C_inv, in_both) != GradedMatrix.identity(alg, F):
            raise NotInvertible(f"Comparison on the boundary of {face.label} is not invertible")
        is_identity = C == GradedMatrix.identity(alg, F)
        _record(trace, "patch-comparison-invertible", face=face.label, correction=not is_identity)
        corrections.append(C)
        T = _truncate(C @ T, in_covered)
        S = _truncate(S @ C_inv, in_covered)
        if _truncate(T, in_both) != _truncate(T_eta, in_both):
            raise GluingMismatch(f"Corrected isomorphism disagrees with the one of {face.label}")
        T = T + T_eta - _truncate(T, in_both)
        S = S + S_eta - _truncate(S, in_both)
        covered.append(face)
    logger.debug(f"Patched {len(faces)} faces with {sum(1 for c in corrections if c != GradedMatrix.identity(alg, F))} corrections")
    return PatchedIso(T, S, F, corrections)


class ExtendedIso(NamedTuple):
    """
    ``T`` and ``T'`` over ``A`` with ``T T'`` invertible over ``A_h``.

    ``S_h = T' (T T')^-1`` inverts ``T`` and ``T_h = (T T')^-1 T`` inverts
    ``T'``; either may turn out regular.
    """

    h: AlgebraElem
    T: GradedMatrix
    T_prime: GradedMatrix
    S_h: LocalGradedMatrix
    T_h: LocalGradedMatrix


def _boundary(alg: ToricGAlgebra) -> Callable:
    faces = alg.cone.codim1_faces()
    return lambda m: any(f.contains(m) for f in faces)


def extend_h(alg: ToricGAlgebra, e: GradedIdempotent, iso: PatchedIso, trace=None) -> ExtendedIso:
    """
    Lift an isomorphism modulo ``J`` to ``A_h`` with ``h = det(T T')``.

    ``T = T_J e`` and ``T' = e S_J`` are the monomial lifts; ``T T'`` is an
    endomorphism of ``F`` congruent to the identity modulo ``J``.

    Raises
    ------
    DegenerateLift
        If ``det(T T') = 0``.
    PreconditionFailed
        If ``T T'`` is not the identity modulo ``J``.
    """
    trace = [] if trace is None else trace
    F = iso.target_weights
    T = iso.T @ e.matrix
    T_prime = e.matrix @ iso.S
    M = T @ T_prime
    on_boundary = _boundary(alg)
    if _truncate(M, on_boundary) != GradedMatrix.identity(alg, F):
        raise PreconditionFailed("The patched isomorphism is not invertible modulo J")
    h = M.det_endo()
    if h.is_zero:
        raise DegenerateLift("det(T T') vanishes")
    h_minus_one = h - alg.one()
    _record(trace, "h=1 mod J", ok=not any(on_boundary(m) for m in h_minus_one.support), h=h.render())
    loc = alg.localize(h)
    adj = GradedMatrix(alg, F, F, M.adjugate_entries())
    S_h = LocalGradedMatrix(loc, T_prime @ adj, 1).reduce()
    T_h = LocalGradedMatrix(loc, adj @ T, 1).reduce()
    return ExtendedIso(h, T, T_prime, S_h, T_h)


def descend(f: GradedMatrix) -> GradedMatrix:
    """
    An endomorphism of a weight-0 free module as a matrix over ``A^G``.

    Raises
    ------
    NotInvariant
        If a weight is nonzero or an entry is not invariant.
    """
    alg = f.alg
    if any(not w.is_zero for w in f.source_weights + f.target_weights):
        raise NotInvariant("Only maps between weight-0 free modules descend")
    for x in f.entries.flat:
        if not alg.is_invariant(x):
            raise NotInvariant(f"Entry {x.render()} is not invariant")
    return f.with_alg(alg.invariant_algebra())


# -- the matrix refinement --------------------------------------------------------------


class RefinedMatrix(NamedTuple):
    P_tilde: GradedMatrix
    product: GradedMatrix
    N: int


def _elementary(alg: ToricGAlgebra, weights, row: int, col: int, c: AlgebraElem) -> GradedMatrix:
    n = len(weights)
    rows = [[alg.one() if i == j else alg.zero() for j in range(n)] for i in range(n)]
    rows[row][col] = c
    return GradedMatrix(alg, weights, weights, rows)


def refine_matrix(alg: ToricGAlgebra, P: GradedMatrix, N: int, trace=None) -> RefinedMatrix:
    """
    ``P̃`` invertible over ``A^G`` with ``(P P̃)_{ij} ∈ J^N`` off the diagonal.

    First ``P`` is multiplied by the inverses of its restrictions to each
    codimension-1 face, which makes it the identity modulo ``J``. Then every
    sweep of column operations ``C_i -> C_i - (P P̃)_{ji} C_j`` raises the
    power of ``J`` holding the off-diagonal entries by one.

    Parameters
    ----------
    alg : ToricGAlgebra
        The algebra ``A`` whose ideal ``J`` is meant.
    P : GradedMatrix
        Square matrix over ``A^G`` (all weights 0).
    N : int

    Raises
    ------
    PreconditionFailed
        If ``P`` is not invertible modulo some face ideal.
    """
    trace = [] if trace is None else trace
    inv = P.alg
    weights = P.source_weights
    if P.source_weights != P.target_weights:
        raise ValidationError("refine_matrix needs an endomorphism")
    one = GradedMatrix.identity(inv, weights)
    Q, P_tilde = P, one
    for face in alg.cone.codim1_faces():
        try:
            Q_face_inv = Q.restrict_to_face(face).invert()
        except NotInvertible:
            raise PreconditionFailed(f"Matrix is not invertible modulo the ideal of {face.label}")
        lift = Q_face_inv.with_alg(inv)
        Q, P_tilde = Q @ lift, P_tilde @ lift
    n = Q.shape[0]
    for _ in range(1, N):
        for i, j in itertools.product(range(n), repeat=2):
            if i == j or Q[j, i].is_zero:
                continue
            E = _elementary(inv, weights, j, i, -Q[j, i])
            Q, P_tilde = Q @ E, P_tilde @ E
    det_ok = inv.is_unit(P_tilde.det())
    off_ok = all(
        alg.ideal_J_power_member(Q[i, j], N) for i in range(n) for j in range(n) if i != j
    )
    _record(trace, "refined det unit", ok=det_ok)
    _record(trace, "refined off-diagonal in J^N", ok=off_ok, N=N)
    if not det_ok or not off_ok:
        raise GluingMismatch("Matrix refinement failed its own checks")
    return RefinedMatrix(P_tilde, Q, N)


# -- cover factorization and gluing -----------------------------------------------------


class CoverFactors(NamedTuple):
    """``f = f2 f1`` with ``f1`` invertible over the torus and ``f2`` over ``A^G_h``."""

    f1: LocalGradedMatrix
    f2: LocalGradedMatrix
    case: str


def factor_cover(alg: ToricGAlgebra, f: LocalGradedMatrix) -> CoverFactors:
    """
    Split an automorphism ``f`` of a weight-0 free module over the torus
    localized at ``h``.

    Supported shapes: ``f`` invertible over the torus itself, ``f`` with
    entries in ``A^G`` and invertible over ``A^G_h``, and diagonal ``f`` whose
    entries split into a monomial times a divisor of a power of ``h``.

    Parameters
    ----------
    alg : ToricGAlgebra
        The algebra ``A``; ``f.loc`` localizes its big torus.

    Raises
    ------
    UnsupportedFactorization
    """
    loc_t = f.loc
    torus = loc_t.alg
    h = loc_t.h
    inv = alg.invariant_algebra()
    loc_i = Localization(inv, h)
    weights = f.source_weights
    red = f.reduce()

    def check(f1, f2, case):
        product = LocalGradedMatrix(loc_t, f2.numerator.with_alg(torus), f2.power) @ f1
        if not product.equal(f):
            raise GluingMismatch(f"Cover factors of case {case} do not multiply back")
        return CoverFactors(f1, f2, case)

    if red.power == 0 and red.numerator.is_invertible():
        return check(red, LocalGradedMatrix.identity(loc_i, weights), "torus")
    try:
        over_inv = LocalGradedMatrix(loc_i, red.numerator.with_alg(inv), red.power)
        over_inv.invert()
    except (ValidationError, NotInvertible):
        pass
    else:
        return check(LocalGradedMatrix.identity(loc_t, weights), over_inv, "invariant")
    diag = _split_diagonal(alg, inv, red)
    if diag is not None:
        d1, d2 = diag
        f1 = LocalGradedMatrix(loc_t, GradedMatrix.diagonal(torus, weights, weights, d1), 0)
        f2 = LocalGradedMatrix(loc_i, GradedMatrix.diagonal(inv, weights, weights, d2), red.power)
        return check(f1, f2, "diagonal")
    raise UnsupportedFactorization(
        f"Cannot split a {f.shape[0]}x{f.shape[1]} automorphism over the cover"
    )


def _divides_power(inv: ToricGAlgebra, q: AlgebraElem, h: AlgebraElem, max_power: int = 8) -> bool:
    hk = inv.one()
    for _ in range(max_power + 1):
        if inv.exact_divide(hk, q) is not None:
            return True
        hk = hk * h
    return False


def _split_diagonal(alg, inv, f: LocalGradedMatrix):
    n = f.shape[0]
    num = f.numerator
    if any(not num[i, j].is_zero for i in range(n) for j in range(n) if i != j):
        return None
    d1, d2 = [], []
    for k in range(n):
        x = num[k, k]
        if x.is_zero:
            return None
        for m in x.support:
            q = x.shift(tuple(-a for a in m))
            if inv.contains_element(q) and _divides_power(inv, q, f.loc.h):
                d1.append(AlgebraElem(alg.coeff, {m: 1}))
                d2.append(q)
                break
        else:
            return None
    return d1, d2


def _monomial_diagonal(torus: ToricGAlgebra, F: WeightVector):
    """``d_k`` of weight ``F_k``: shortest lattice preimages."""
    zero = torus.P.zero()
    points = []
    for w in F:
        m = shortest_preimage(torus, w)
        if m is None:
            raise UnsupportedFactorization(f"No monomial of weight {w} on the torus")
        points.append(m)
    d = [torus.monomial(m) for m in points]
    d_inv = [torus.unit_inverse(x) for x in d]
    F0 = tuple(zero for _ in F)
    D = GradedMatrix.diagonal(torus, F, F0, d)
    D_inv = GradedMatrix.diagonal(torus, F0, F, d_inv)
    return points, D, D_inv


def glue(
    alg: ToricGAlgebra,
    e: GradedIdempotent,
    ext: ExtendedIso,
    eta: ModuleBasis,
    factors: CoverFactors,
    D: GradedMatrix,
    D_inv: GradedMatrix,
    points: Sequence[tuple],
    trace=None,
) -> ModuleBasis:
    """
    Glue ``φ`` over ``A_h`` and ``η`` over the torus into an isomorphism over ``A``.

    With ``f2 = h^-s P`` and ``P̃`` from ``refine_matrix`` (with ``N`` large
    enough for the conjugation by ``D``), ``θ1 = D^-1 P̃^-1 f1 D`` corrects
    ``η``; the result ``θ1 η`` must agree with ``φ`` on the overlap and have
    its entries in ``A``.

    Raises
    ------
    GluingMismatch
        If the overlap identity fails or the glued maps are not regular.
    """
    trace = [] if trace is None else trace
    torus = eta.S.alg
    loc_t = Localization(torus, ext.h)
    f1 = LocalGradedMatrix(loc_t, factors.f1.numerator.with_alg(torus), factors.f1.power)
    f2 = LocalGradedMatrix(loc_t, factors.f2.numerator.with_alg(torus), factors.f2.power)
    D_l, D_inv_l = LocalGradedMatrix(loc_t, D), LocalGradedMatrix(loc_t, D_inv)
    T_eta = LocalGradedMatrix(loc_t, eta.T)
    S_eta = LocalGradedMatrix(loc_t, eta.S)
    T_phi = LocalGradedMatrix(loc_t, ext.T.with_alg(torus))

    overlap = D_inv_l @ f2 @ f1 @ D_l @ T_eta
    ok = overlap.equal(T_phi)
    _record(trace, "overlap phi = Phi eta", ok=ok)
    if not ok:
        raise GluingMismatch("phi and the factored comparison disagree on the overlap")

    N = max([1] + [alg.large_N(tuple(a - b for a, b in zip(p, q))) for p in points for q in points if p != q])
    refined = refine_matrix(alg, factors.f2.numerator, N, trace)
    P_tilde = LocalGradedMatrix(loc_t, refined.P_tilde.with_alg(torus))
    P_tilde_inv = LocalGradedMatrix(loc_t, refined.P_tilde.invert().with_alg(torus))

    theta1 = D_inv_l @ P_tilde_inv @ f1 @ D_l
    theta1_inv = D_inv_l @ f1.invert() @ P_tilde @ D_l
    T = (theta1 @ T_eta).regular()
    S = (S_eta @ theta1_inv).regular()
    if T is None or S is None:
        raise GluingMismatch("Glued isomorphism keeps a denominator")
    try:
        T, S = T.with_alg(alg), S.with_alg(alg)
    except ValidationError as err:
        raise GluingMismatch(f"Glued isomorphism leaves the algebra: {err}")
    ok = is_module_basis(e, S, T)
    _record(trace, "glued T*S=1 and S*T=e", ok=ok)
    if not ok:
        raise GluingMismatch("Glued maps are not mutually inverse")
    return ModuleBasis(S, T, "glue")


# -- the orchestrator -------------------------------------------------------------------


def _unit_of_weight(alg: ToricGAlgebra, w: GroupElem) -> Optional[AlgebraElem]:
    """The shortest unit monomial of weight ``w``, if the unit lattice has one."""
    if w.is_zero:
        return alg.one()
    units = as_intmat([list(u) for u in alg.monoid.units_basis()], shape=(0, alg.rank)).T.copy()
    m = shortest_coset_point(units, alg.psi, alg.P, w.coords, budget=alg.monoid.budget)
    return None if m is None else alg.monomial(m)


def canonical_weights(alg: ToricGAlgebra, F: WeightVector) -> Tuple[WeightVector, List[AlgebraElem]]:
    """
    Representatives of the weights ``F`` modulo the weights of unit monomials.

    Returns the representatives and, for each ``F_k``, a unit of weight
    ``F_k`` minus its representative. Two isomorphic graded free modules get
    the same representatives.
    """
    P = alg.P
    units = as_intmat([list(u) for u in alg.monoid.units_basis()], shape=(0, alg.rank)).T.copy()
    unit_weights = matmul(alg.psi, units).reshape(P.ngens, units.shape[1])
    Q, projection, section = cokernel(np.concatenate([unit_weights, P.relations()], axis=1), return_section=True)
    reps, moves = [], []
    for f in F:
        cls = Q.reduce(matmul(projection, as_intvec(f.coords)))
        rep = P.element(matmul(section, as_intvec(cls)))
        u = _unit_of_weight(alg, f - rep)
        if u is None:
            raise StructuralViolation(f"No unit monomial of weight {f - rep}")
        reps.append(rep)
        moves.append(u)
    return tuple(reps), moves


def _canonical_basis(alg: ToricGAlgebra, S: GradedMatrix, T: GradedMatrix, trace: list) -> Tuple[GradedMatrix, GradedMatrix]:
    F = S.source_weights
    reps, moves = canonical_weights(alg, F)
    if reps == tuple(F):
        return S, T
    moved = retarget(ModuleBasis(S, T, "assembled"), reps, moves)
    _record(trace, "canonical weights", moved=sum(1 for a, b in zip(F, reps) if a != b))
    return moved.S, moved.T


def match_weights(basis: ModuleBasis, F: WeightVector, alg: ToricGAlgebra) -> Optional[ModuleBasis]:
    """Reorder and retarget a basis onto ``F`` through unit monomials, if possible."""
    old = list(basis.target_weights)
    if len(old) != len(F):
        return None
    used, perm, units = set(), [], []
    for f in F:
        for k, g in enumerate(old):
            if k in used:
                continue
            u = _unit_of_weight(alg, g - f)
            if u is not None:
                used.add(k)
                perm.append(k)
                units.append(u)
                break
        else:
            return None
    n = basis.S.shape[0]
    S = basis.S.submatrix(range(n), perm)
    T = basis.T.submatrix(perm, range(n))
    return retarget(ModuleBasis(S, T, basis.strategy), F, units)


class FaceFailure(UnsupportedFactorization):
    """An unsupported step inside the face recursion, with where it happened."""

    def __init__(self, step: str, face: str, message: str):
        super().__init__(message)
        self.step = step
        self.face = face

    def __reduce__(self):
        return FaceFailure, (self.step, self.face, str(self))


def _solve_face(face: Face, alg: ToricGAlgebra, e: GradedIdempotent, F: WeightVector, memo, seed: int, method: str):
    """
    Solve one face against the isomorphisms of its codimension-1 faces.

    Module level with plain arguments, so that it can be mapped with
    ``pool.imap``. Returns ``(basis, records, failure)`` where ``failure`` is
    None or ``(step, message)``.
    """
    records = []
    where = {"step": "face basis"}
    try:
        return _solve(face, alg, e, F, memo, seed, method, records, where), records, None
    except UnsupportedFactorization as err:
        return None, records, (where["step"], str(err))


def _solve(face, alg, e, F, memo, seed, method, records: list, where: dict) -> ModuleBasis:
    alg_f = alg.face_algebra(face)
    e_f = e.restrict_to_face(face)
    if method != "faces":
        try:
            found = match_weights(find_basis(e_f, seed=seed), F, alg_f)
        except UnsupportedFactorization:
            found = None
        if found is not None and is_module_basis(e_f, found.S, found.T):
            _record(records, "face basis", face=face.label, strategy=found.strategy)
            return found
    subfaces = [g for g in alg.cone.faces() if g.dim == face.dim - 1 and g.is_subface_of(face)]
    where["step"] = "patch_faces"
    patched = patch_faces(alg_f, subfaces, {g: memo[g] for g in subfaces}, records)
    where["step"] = "extend_h"
    ext = extend_h(alg_f, e_f, patched, records)
    S = ext.S_h.regular()
    if S is not None and is_module_basis(e_f, S, ext.T):
        _record(records, "face iso from lift", face=face.label, h=ext.h.render())
        return ModuleBasis(S, ext.T, "extend")
    T = ext.T_h.regular()
    if T is not None and is_module_basis(e_f, ext.T_prime, T):
        _record(records, "face iso from lift", face=face.label, h=ext.h.render(), cancelled=True)
        return ModuleBasis(ext.T_prime, T, "extend-cancel")
    where["step"] = "torus"
    torus = alg.torus_algebra(face)
    eta = torus_basis(e_f.with_alg(torus), target_weights=F, seed=seed)
    points, D, D_inv = _monomial_diagonal(torus, F)
    loc_t = Localization(torus, ext.h)
    Phi = LocalGradedMatrix(loc_t, ext.T.with_alg(torus) @ eta.S)
    Phi_tilde = LocalGradedMatrix(loc_t, D) @ Phi @ LocalGradedMatrix(loc_t, D_inv)
    where["step"] = "descend"
    descend(Phi_tilde.numerator)
    where["step"] = "factor_cover"
    factors = factor_cover(alg_f, Phi_tilde)
    _record(records, "cover factorization", face=face.label, case=factors.case)
    where["step"] = "glue"
    return glue(alg_f, e_f, ext, eta, factors, D, D_inv, points, records)


def _face_recursion(p: GActionProblem, seed: int, method: str, trace: list, map_functor=map) -> ModuleBasis:
    """Isomorphisms ``E|τ -> F`` for every face ``τ``, by increasing dimension."""
    alg, e = p.alg, p.idempotent()
    cone = alg.cone
    base = cone.smallest_face()
    try:
        b0 = find_basis(e.restrict_to_face(base), seed=seed)
    except UnsupportedFactorization as err:
        raise FaceFailure("base", base.label, str(err))
    F = b0.target_weights
    _record(trace, "base basis", face=base.label, strategy=b0.strategy, rank=len(F))
    memo: Dict[Face, ModuleBasis] = {base: b0}
    for dim in range(base.dim + 1, cone.dim + 1):
        layer = [f for f in cone.faces() if f.dim == dim]
        logger.info(f"Solving {len(layer)} faces of dimension {dim}")
        lower = {g: b for g, b in memo.items() if g.dim == dim - 1}
        job = partial(_solve_face, alg=alg, e=e, F=F, memo=lower, seed=seed, method=method)
        for face, (basis, records, failure) in zip(layer, map_functor(job, layer)):
            trace.extend(records)
            if failure is not None:
                raise FaceFailure(failure[0], face.label, failure[1])
            memo[face] = basis
    return memo[cone.full_face()]


def _check_limits(p: GActionProblem, max_rank: Optional[int], max_ambient: Optional[int]):
    max_rank = schemas.DEFAULTS["max_rank"] if max_rank is None else max_rank
    max_ambient = schemas.DEFAULTS["max_ambient"] if max_ambient is None else max_ambient
    if p.size > max_rank:
        raise ResourceError(f"Module of size {p.size} exceeds the rank limit {max_rank}")
    if p.alg.rank > max_ambient:
        raise ResourceError(f"Lattice of rank {p.alg.rank} exceeds the limit {max_ambient}")
    if not p.alg.coeff.satisfies_dagger:
        raise PreconditionFailed(f"Coefficient ring {p.alg.coeff.name} is not supported")
    if p.alg.coeff.kind == "ZZ" and p.alg.P.torsion:
        logger.warning("Integer coefficients with a torsion grading group: results are checked, not guaranteed")


def _solve_faithful(p: GActionProblem, seed: int, method: str, trace: list, map_functor) -> ModuleBasis:
    e = p.idempotent()
    if method in ("auto", "direct"):
        try:
            basis = find_basis(e, seed=seed)
            _record(trace, "direct basis", strategy=basis.strategy)
            return basis
        except UnsupportedFactorization:
            if method == "direct":
                raise
            logger.info("No direct basis; recursing over faces")
    return _face_recursion(p, seed, method, trace, map_functor)


def _assemble(p: GActionProblem, reduction: FaithfulReduction, bases: List[ModuleBasis]) -> Tuple[GradedMatrix, GradedMatrix]:
    alg, P = p.alg, p.alg.P
    n = p.size
    F, cols = [], []
    for block, basis in zip(reduction.blocks, bases):
        for k, f in enumerate(basis.target_weights):
            F.append(block.lift_weight(f, P) if not reduction.surjective else f)
            cols.append((block, basis, k))
    r = len(F)
    S = np.empty((n, r), dtype=object)
    T = np.empty((r, n), dtype=object)
    for i in range(n):
        for k in range(r):
            S[i, k] = alg.zero()
            T[k, i] = alg.zero()
    for k, (block, basis, kk) in enumerate(cols):
        for a, i in enumerate(block.indices):
            S[i, k] = basis.S[a, kk]
            T[k, i] = basis.T[kk, a]
    return GradedMatrix(alg, F, p.weights, S), GradedMatrix(alg, p.weights, F, T)


def trivialize(
    p: GActionProblem,
    seed: int = 0,
    method: str = "auto",
    max_rank: Optional[int] = None,
    max_ambient: Optional[int] = None,
    map_functor=map,
) -> Union[TrivializationCertificate, PartialResult]:
    """
    Find ``F`` and a graded isomorphism ``E -> F_A``.

    Parameters
    ----------
    p : GActionProblem
    seed : int
        Seeds the candidate orders of the basis searches.
    method : {"auto", "direct", "faces"}
        ``direct`` only searches a basis over ``A``; ``faces`` always takes
        the face recursion; ``auto`` tries the first and falls back to the
        second.
    max_rank, max_ambient : int, optional
        Limits on the module size and the lattice rank.
    map_functor : callable
        Map used over the faces of one dimension, e.g. ``pool.imap``.

    Returns
    -------
    TrivializationCertificate or PartialResult
    """
    if method not in ("auto", "direct", "faces"):
        raise ValueError(f"Unknown method {method!r}")
    _check_limits(p, max_rank, max_ambient)
    trace = []
    if p.is_free:
        one = GradedMatrix.identity(p.alg, p.weights)
        _record(trace, "free module", rank=p.size)
        S, T = _canonical_basis(p.alg, one, one, trace)
        return TrivializationCertificate(p, S, T, trace, seed)
    reduction = reduce_to_faithful(p)
    _record(trace, "faithful reduction", blocks=len(reduction.blocks), surjective=reduction.surjective)
    bases = []
    for block in reduction.blocks:
        try:
            bases.append(_solve_faithful(block.problem, seed, method, trace, map_functor))
        except UnsupportedFactorization as err:
            step, face = getattr(err, "step", "direct"), getattr(err, "face", "")
            logger.warning(f"Partial result at {step} {face}: {err}")
            return PartialResult(p, step, face, str(err), trace)
    S, T = _assemble(p, reduction, bases)
    S, T = _canonical_basis(p.alg, S, T, trace)
    ok = is_module_basis(p.idempotent(), S, T)
    _record(trace, "T*S=1 and S*T=e", ok=ok)
    if not ok:
        raise GluingMismatch("Assembled blocks do not form an isomorphism")
    cert = TrivializationCertificate(p, S, T, trace, seed)
    logger.info(f"Trivialized: F has weights {[str(w) for w in cert.target_weights]}")
    return cert
