"""
Monoid algebras ``A = R[σ ∩ L]`` graded by ``ψ: L -> P``.

Elements are sparse maps from lattice points to nonzero coefficients. Every
subalgebra used by the trivializer (face algebras ``R[L_τ]``, tori, the
invariant ring) keys its elements by the same ambient lattice points, so the
inclusions between them are the identity on keys.

"""
import itertools
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import sympy as sp
from sympy.polys.polyerrors import ExactQuotientFailed

from ..lib import schemas
from ..lib.cone import Face, cone_from_rays
from ..lib.errors import NotInvariant, ParseError, ResourceError, ValidationError
from ..lib.lattice import FinAbGroup, GroupElem, as_intmat, as_intvec, kernel_basis, matmul
from ..lib.monoid import AffineMonoid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoeffRing:
    """
    Coefficient ring: ``QQ`` (as ``Fraction``), ``ZZ`` (as ``int``) or ``GF``
    with prime ``p`` (as ints in ``[0, p)``).
    """

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind not in schemas.COEFFICIENT_KINDS:
            raise ValidationError(f"Unknown coefficient ring {self.kind!r}")
        if self.kind == "GF" and not sp.isprime(self.p):
            raise ValidationError(f"GF(p) needs a prime p, got {self.p}")

    @classmethod
    def from_name(cls, name: str) -> "CoeffRing":
        name = name.strip()
        m = re.fullmatch(r"GF\((\d+)\)", name)
        if m:
            return cls("GF", int(m.group(1)))
        if name in ("QQ", "ZZ"):
            return cls(name)
        raise ValidationError(f"Unknown coefficient ring {name!r}; use QQ, ZZ or GF(p)")

    @property
    def name(self) -> str:
        return f"GF({self.p})" if self.kind == "GF" else self.kind

    # capability flags: all supported rings are PIDs, hence satisfy both
    # extension conditions for projective modules over monoid algebras
    @property
    def is_field(self) -> bool:
        return self.kind != "ZZ"

    @property
    def is_pid(self) -> bool:
        return True

    @property
    def is_domain(self) -> bool:
        return True

    @property
    def satisfies_dagger(self) -> bool:
        return self.is_pid

    @property
    def satisfies_double_dagger(self) -> bool:
        return self.is_pid

    def __call__(self, c):
        if self.kind == "QQ":
            return Fraction(c)
        if self.kind == "ZZ":
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise ValidationError(f"Coefficient {c} is not an integer")
                c = c.numerator
            return int(c)
        if isinstance(c, Fraction):
            return (c.numerator * pow(c.denominator, -1, self.p)) % self.p
        return int(c) % self.p

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def is_unit(self, c) -> bool:
        if self.kind == "ZZ":
            return c in (1, -1)
        return c != 0

    def inverse(self, c):
        if not self.is_unit(c):
            raise ZeroDivisionError(f"{c} is not a unit of {self.name}")
        if self.kind == "QQ":
            return 1 / Fraction(c)
        if self.kind == "ZZ":
            return c
        return pow(int(c), -1, self.p)

    def divide(self, a, b):
        """Exact quotient ``a / b`` in the ring, or None."""
        if b == 0:
            return None
        if self.kind == "ZZ":
            q, r = divmod(a, b)
            return q if r == 0 else None
        return self(a) * self.inverse(self(b)) if self.kind == "GF" else Fraction(a) / b

    def parse(self, text: str):
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return self(Fraction(int(num), int(den)))
        return self(int(text))

    def render(self, c) -> str:
        if isinstance(c, Fraction) and c.denominator == 1:
            return str(c.numerator)
        return str(c)

    def sympy_domain(self):
        if self.kind == "QQ":
            return sp.QQ
        if self.kind == "ZZ":
            return sp.ZZ
        return sp.GF(self.p)

    def to_sympy(self, c):
        if self.kind == "QQ":
            c = Fraction(c)
            return sp.Rational(c.numerator, c.denominator)
        return sp.Integer(int(c))

    def from_sympy(self, c):
        c = sp.Rational(c)
        return self(Fraction(int(c.p), int(c.q)))


class AlgebraElem:
    """
    A finite sum ``Σ c_m e_m`` over lattice points ``m``.

    Immutable; zero coefficients are never stored.
    """

    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: CoeffRing, terms=None):
        self.ring = ring
        clean = {}
        for m, c in (terms or {}).items():
            c = ring(c)
            if c != 0:
                clean[tuple(int(x) for x in m)] = c
        self._terms = clean
        self._hash = None

    # -- access ----------------------------------------------------------------

    def items(self):
        return sorted(self._terms.items())

    @property
    def support(self) -> Tuple[tuple, ...]:
        return tuple(sorted(self._terms))

    def coeff(self, m):
        return self._terms.get(tuple(m), self.ring.zero)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    # -- arithmetic --------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, AlgebraElem):
            if other.ring != self.ring:
                raise ValueError(f"Cannot combine elements over {self.ring.name} and {other.ring.name}")
            return other
        return None

    def __eq__(self, other):
        if isinstance(other, AlgebraElem):
            return self.ring == other.ring and self._terms == other._terms
        if other == 0:
            return self.is_zero
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, tuple(self.items())))
        return self._hash

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0) + c
        return AlgebraElem(self.ring, terms)

    def __neg__(self):
        return AlgebraElem(self.ring, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AlgebraElem):
            self._coerce(other)
            terms: Dict[tuple, object] = {}
            for m1, c1 in self._terms.items():
                for m2, c2 in other._terms.items():
                    m = tuple(a + b for a, b in zip(m1, m2))
                    terms[m] = terms.get(m, 0) + c1 * c2
            return AlgebraElem(self.ring, terms)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("Negative powers need a localization")
        if not self._terms:
            return self if k else AlgebraElem(self.ring, {})
        dim = len(next(iter(self._terms)))
        out = AlgebraElem(self.ring, {(0,) * dim: 1})
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c):
        c = self.ring(c)
        return AlgebraElem(self.ring, {m: c * v for m, v in self._terms.items()})

    def shift(self, q):
        """Multiply by the monomial ``e_q``."""
        return AlgebraElem(
            self.ring, {tuple(a + b for a, b in zip(m, q)): c for m, c in self._terms.items()}
        )

    def restrict(self, keep) -> "AlgebraElem":
        """Keep only the terms whose point satisfies ``keep``."""
        return AlgebraElem(self.ring, {m: c for m, c in self._terms.items() if keep(m)})

    # -- text --------------------------------------------------------------------

    def render(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for i, (m, c) in enumerate(self.items()):
            mono = "e[" + ",".join(str(x) for x in m) + "]"
            neg = (c < 0) if self.ring.kind != "GF" else False
            lit = self.ring.render(-c if neg else c)
            term = f"{lit}*{mono}"
            if i == 0:
                out.append(f"-{term}" if neg else term)
            else:
                out.append(f" - {term}" if neg else f" + {term}")
        return "".join(out)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"AlgebraElem({self.render()!r})"


_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?P<coeff>\d+(?:/\d+)?)?\s*(?P<star>\*)?\s*(?P<mono>e\[\s*-?\d+(?:\s*,\s*-?\d+)*\s*\])?\s*"
)


def parse_element(ring: CoeffRing, text: str, rank: int) -> AlgebraElem:
    """
    Parse the canonical element syntax ``c1*e[2,1] + c2*e[0,3]``.

    A bare coefficient stands for a multiple of ``e[0,...,0]`` and a bare
    monomial has coefficient 1. Raises ParseError with the column (1-based)
    of the first character that does not fit.
    """
    text = text if text is not None else ""
    if text.strip() == "0":
        return AlgebraElem(ring, {})
    pos = 0
    terms: Dict[tuple, object] = {}
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"Unexpected character {text[pos]!r} in element {text!r}", 1, pos + 1)
        if not m.group("coeff") and not m.group("mono"):
            if m.group("sign") or text[m.end():].strip():
                raise ParseError(f"Expected a term in element {text!r}", 1, m.end() + 1)
            break
        if not first and not m.group("sign"):
            raise ParseError(f"Missing '+' or '-' between terms of {text!r}", 1, pos + 1)
        if m.group("star") and not (m.group("coeff") and m.group("mono")):
            raise ParseError(f"Dangling '*' in element {text!r}", 1, pos + 1)
        coeff = ring.parse(m.group("coeff")) if m.group("coeff") else ring.one
        if m.group("sign") == "-":
            coeff = -coeff
        if m.group("mono"):
            point = tuple(int(x) for x in m.group("mono")[2:-1].split(","))
            if len(point) != rank:
                raise ParseError(
                    f"Monomial {m.group('mono')} has {len(point)} exponents, expected {rank}",
                    1,
                    m.start("mono") + 1,
                )
        else:
            point = (0,) * rank
        terms[point] = terms.get(point, 0) + coeff
        first = False
        pos = m.end()
    if first:
        raise ParseError(f"Empty element {text!r}", 1, 1)
    return AlgebraElem(ring, terms)


# -- polynomial helpers through sympy --------------------------------------------


def _poly_ring(ring: CoeffRing, dim: int):
    # one extra variable keeps sympy happy for rank-0 lattices
    names = [f"x{i}" for i in range(dim + 1)]
    R, *_ = sp.ring(names, ring.sympy_domain())
    return R


def _to_poly(x: AlgebraElem, R, shift) -> "sp.polys.rings.PolyElement":
    domain = R.domain
    data = {}
    for m, c in x.items():
        exps = tuple(int(a - s) for a, s in zip(m, shift)) + (0,)
        data[exps] = domain.from_sympy(x.ring.to_sympy(c))
    return R.from_dict(data) if data else R.zero


def _from_poly(p, ring: CoeffRing, shift) -> AlgebraElem:
    domain = p.ring.domain
    terms = {}
    for exps, c in p.items():
        m = tuple(int(e + s) for e, s in zip(exps[:-1], shift))
        terms[m] = ring.from_sympy(domain.to_sympy(c))
    return AlgebraElem(ring, terms)


def _min_exponents(x: AlgebraElem, dim: int):
    if x.is_zero:
        return (0,) * dim
    return tuple(min(m[i] for m in x.support) for i in range(dim))


def exact_divide(a: AlgebraElem, b: AlgebraElem, dim: int) -> Optional[AlgebraElem]:
    """The quotient ``a / b`` in the Laurent ring ``R[Z^dim]`` if it exists."""
    if b.is_zero:
        raise ZeroDivisionError("Division by the zero element")
    if a.is_zero:
        return a
    R = _poly_ring(a.ring, dim)
    sa, sb = _min_exponents(a, dim), _min_exponents(b, dim)
    pa, pb = _to_poly(a, R, sa), _to_poly(b, R, sb)
    try:
        q = pa.exquo(pb)
    except ExactQuotientFailed:
        return None
    return _from_poly(q, a.ring, tuple(x - y for x, y in zip(sa, sb)))


def laurent_gcd(a: AlgebraElem, b: AlgebraElem, dim: int) -> AlgebraElem:
    """gcd in ``R[Z^dim]``, normalized to have minimal exponents zero."""
    if a.is_zero:
        a, b = b, a
    if b.is_zero:
        s = _min_exponents(a, dim)
        return a.shift(tuple(-x for x in s))
    R = _poly_ring(a.ring, dim)
    pa = _to_poly(a, R, _min_exponents(a, dim))
    pb = _to_poly(b, R, _min_exponents(b, dim))
    return _from_poly(pa.gcd(pb), a.ring, (0,) * dim)


# -- the algebra ------------------------------------------------------------------


class ToricGAlgebra:
    """
    ``A = R[σ ∩ M]`` with the grading ``ψ: Z^n -> P``.

    Parameters
    ----------
    coeff : CoeffRing
    monoid : AffineMonoid
    P : FinAbGroup
    psi : IntMat
        ``P.ngens x n`` matrix in the canonical coordinates of ``P``.
    """

    def __init__(self, coeff: CoeffRing, monoid: AffineMonoid, P: FinAbGroup, psi):
        self.coeff = coeff
        self.monoid = monoid
        self.P = P
        n = monoid.ambient_rank
        self.psi = as_intmat(psi, shape=(P.ngens, n))
        if self.psi.shape != (P.ngens, n):
            raise ValidationError(
                f"Weight map has shape {self.psi.shape}, expected {(P.ngens, n)}"
            )
        self._face_algebras = {}

    @property
    def rank(self) -> int:
        return self.monoid.ambient_rank

    @property
    def cone(self):
        return self.monoid.cone

    def __repr__(self):
        return f"ToricGAlgebra({self.coeff.name}, {self.monoid!r}, P={self.P})"

    def with_monoid(self, monoid: AffineMonoid) -> "ToricGAlgebra":
        return ToricGAlgebra(self.coeff, monoid, self.P, self.psi)

    # -- elements ------------------------------------------------------------------

    def element(self, terms) -> AlgebraElem:
        x = AlgebraElem(self.coeff, terms)
        self.check_element(x)
        return x

    def check_element(self, x: AlgebraElem) -> AlgebraElem:
        for m in x.support:
            if len(m) != self.rank or not self.monoid.contains(m):
                raise ValidationError(f"Point {m} of {x.render()} is not in the monoid")
        return x

    def contains_element(self, x: AlgebraElem) -> bool:
        return all(len(m) == self.rank and self.monoid.contains(m) for m in x.support)

    def monomial(self, m, c=1) -> AlgebraElem:
        return self.element({tuple(m): c})

    def zero(self) -> AlgebraElem:
        return AlgebraElem(self.coeff, {})

    def one(self) -> AlgebraElem:
        return AlgebraElem(self.coeff, {(0,) * self.rank: 1})

    def parse(self, text: str) -> AlgebraElem:
        return self.check_element(parse_element(self.coeff, text, self.rank))

    def mul(self, x: AlgebraElem, y: AlgebraElem) -> AlgebraElem:
        return x * y

    # -- grading ---------------------------------------------------------------------

    def weight(self, m) -> GroupElem:
        """Class of ``ψ(m)`` in ``P``."""
        return self.P.element(matmul(self.psi, as_intvec(m)))

    def element_weight(self, x: AlgebraElem) -> Optional[GroupElem]:
        """The weight of a nonzero homogeneous element; None if zero or mixed."""
        weights = {self.weight(m) for m in x.support}
        return weights.pop() if len(weights) == 1 else None

    def is_homogeneous(self, x: AlgebraElem, w: GroupElem) -> bool:
        """``x ∈ A_w``; zero is homogeneous of every weight."""
        return all(self.weight(m) == w for m in x.support)

    def is_invariant(self, x: AlgebraElem) -> bool:
        return self.is_homogeneous(x, self.P.zero())

    def homogeneous_part(self, x: AlgebraElem, w: GroupElem) -> AlgebraElem:
        return x.restrict(lambda m: self.weight(m) == w)

    @cached_property
    def _invariant_monoid(self) -> AffineMonoid:
        return self.monoid.invariant_monoid(self.psi, self.P)

    def invariant_monoid(self) -> AffineMonoid:
        return self._invariant_monoid

    @cached_property
    def _invariant_algebra(self) -> "ToricGAlgebra":
        return self.with_monoid(self._invariant_monoid)

    def invariant_algebra(self) -> "ToricGAlgebra":
        """``A^G = R[σ ∩ ker ψ]``, keyed by the same lattice points as ``A``."""
        return self._invariant_algebra

    def invariant_generators(self) -> List[AlgebraElem]:
        """Monomials ``e_q`` for ``q`` in the generators of ``σ ∩ ker ψ``."""
        return [self.monomial(q) for q in self._invariant_monoid.generators()]

    def weight_realizable(self, w: GroupElem) -> bool:
        """Does ``A_w`` contain a nonzero element?"""
        return bool(self.monoid.module_generators(self.psi, self.P, w.coords))

    # -- faces -------------------------------------------------------------------------

    def faces(self) -> List[Face]:
        return self.cone.faces()

    def face_restrict(self, tau: Face, x: AlgebraElem) -> AlgebraElem:
        """The surjection ``i_τ``: drop every monomial outside ``τ``."""
        return x.restrict(tau.contains)

    def face_section(self, tau: Face, x: AlgebraElem) -> AlgebraElem:
        """The inclusion ``π_τ: R[L_τ] -> A``."""
        for m in x.support:
            if not tau.contains(m):
                raise ValidationError(f"Point {m} is not on the face {tau.label}")
        return x

    def face_algebra(self, tau: Face) -> "ToricGAlgebra":
        """``R[τ ∩ M]`` with the restricted grading."""
        if tau not in self._face_algebras:
            monoid = AffineMonoid(tau.cone(), self.monoid.lattice_embed, budget=self.monoid.budget)
            self._face_algebras[tau] = self.with_monoid(monoid)
        return self._face_algebras[tau]

    def torus_algebra(self, tau: Optional[Face] = None) -> "ToricGAlgebra":
        """The Laurent algebra ``R[span(τ) ∩ M]`` (``τ = σ`` by default)."""
        if tau is None:
            tau = self.cone.full_face()
        n = self.rank
        basis = [tuple(int(v) for v in col) for col in tau.span_basis.T]
        rays = basis + [tuple(-v for v in b) for b in basis]
        cone = cone_from_rays(n, rays)
        E = self.monoid.lattice_embed
        eqs = cone.equation_matrix()
        lattice = matmul(E, kernel_basis(matmul(eqs, E))) if eqs.shape[0] else E
        return self.with_monoid(AffineMonoid(cone, lattice, budget=self.monoid.budget))

    @property
    def is_torus(self) -> bool:
        return self.cone.dim == len(self.cone.lineality)

    # -- the ideal J of interior monomials --------------------------------------------

    @cached_property
    def _interior_generators(self) -> List[tuple]:
        gens = self.monoid.generators()
        units = set(self.monoid.units_basis())
        units |= {tuple(-x for x in u) for u in units}
        nonunits = [g for g in gens if g not in units]
        if 2 ** len(nonunits) > self.monoid.budget:
            raise ResourceError(
                f"Interior search over {len(nonunits)} generators exceeds budget {self.monoid.budget}"
            )
        cone = self.cone
        interior = set()
        for r in range(len(nonunits) + 1):
            for subset in itertools.combinations(nonunits, r):
                m = tuple(sum(col) for col in zip(*subset)) if subset else (0,) * self.rank
                if cone.strict_interior(m):
                    interior.add(m)
        interior = sorted(interior, key=lambda v: (sum(abs(x) for x in v), v))

        def below(a, b):
            # b = a + (nonunit monoid element)
            d = tuple(x - y for x, y in zip(b, a))
            return self.monoid.contains(d) and not self.monoid.is_unit(d)

        minimal = [m for m in interior if not any(below(a, m) for a in interior if a != m)]
        reps = []
        for m in minimal:
            if not any(self.monoid.is_unit(tuple(x - y for x, y in zip(m, r))) for r in reps):
                reps.append(m)
        return reps

    def interior_generators(self) -> List[AlgebraElem]:
        """Monomial generators of the ideal ``J`` spanned by strictly interior monomials."""
        return [self.monomial(m) for m in self._interior_generators]

    @cached_property
    def _J_slack(self) -> tuple:
        # lower bound of each functional on interior monoid points
        gens = self._interior_generators
        return tuple(
            min(sum(a * b for a, b in zip(l, g)) for g in gens) if gens else 0
            for l in self.cone.functionals
        )

    def ideal_J_power_member(self, x: AlgebraElem, N: int, budget: Optional[int] = None) -> bool:
        """
        Is ``x ∈ J^N``?

        Every support point ``m`` must split as ``m_1 + ... + m_N + m'`` with
        interior points ``m_k`` and ``m'`` in the monoid. Decided by a memoized
        search over the generators of ``J``; a functional inequality prunes it.
        """
        if N < 0:
            raise ValueError(f"N must be non-negative, got {N}")
        budget = self.monoid.budget if budget is None else budget
        gens = self._interior_generators
        slack = self._J_slack
        functionals = self.cone.functionals
        memo: Dict[Tuple[tuple, int], bool] = {}
        calls = [0]

        def member(m, k):
            key = (m, k)
            if key in memo:
                return memo[key]
            calls[0] += 1
            if calls[0] > budget:
                raise ResourceError(f"J-power membership search exceeded budget {budget}")
            if k == 0:
                result = self.monoid.contains(m)
            elif any(
                sum(a * b for a, b in zip(l, m)) < k * s for l, s in zip(functionals, slack)
            ):
                result = False
            else:
                result = any(
                    member(tuple(a - b for a, b in zip(m, g)), k - 1) for g in gens
                )
            memo[key] = result
            return result

        return all(member(m, N) for m in x.support)

    @cached_property
    def _min_positive_pairing(self) -> int:
        values = [
            sum(a * b for a, b in zip(l, v))
            for l in self.cone.functionals
            for v in self.monoid.generators()
        ]
        values = [v for v in values if v > 0]
        return min(values) if values else 1

    def large_N(self, m) -> int:
        """
        ``max(0, max_i ceil(l_i(m) / s))`` with ``s`` the smallest positive
        value of a functional on a monoid generator: ``f / e_m`` has monoid
        support for every ``f ∈ J^N``.
        """
        s = self._min_positive_pairing
        values = [sum(a * b for a, b in zip(l, m)) for l in self.cone.functionals]
        return max([0] + [-(-v // s) for v in values])

    # -- invariant ideals ---------------------------------------------------------------

    def invariant_part_of_monomial_ideal(self, ideal) -> List[AlgebraElem]:
        """
        Monomial generators of ``I ∩ A^G`` as an ideal of ``A^G``.

        Parameters
        ----------
        ideal : "interior", "unit" or list of lattice points
            ``"interior"`` is the ideal ``J``, ``"unit"`` is ``A`` itself and a
            list gives monomial generators (empty list: the zero ideal).
        """
        if ideal == "unit":
            return [self.one()]
        if ideal == "interior":
            points = list(self._interior_generators)
        else:
            points = [tuple(int(x) for x in as_intvec(p)) for p in ideal]
            for p in points:
                if not self.monoid.contains(p):
                    raise ValidationError(f"Ideal generator {p} is not in the monoid")
        found = set()
        for g in points:
            w = -self.weight(g)
            for n in self.monoid.module_generators(self.psi, self.P, w.coords):
                found.add(tuple(a + b for a, b in zip(n, g)))
        inv = self._invariant_monoid
        found = sorted(found, key=lambda v: (sum(abs(x) for x in v), v))
        minimal = []
        for m in found:
            if any(inv.contains(tuple(a - b for a, b in zip(m, r))) for r in minimal):
                continue
            minimal.append(m)
        minimal = [
            m
            for m in minimal
            if not any(
                r != m
                and inv.contains(tuple(a - b for a, b in zip(m, r)))
                and not inv.is_unit(tuple(a - b for a, b in zip(m, r)))
                for r in minimal
            )
        ]
        return [self.monomial(m) for m in minimal]

    # -- units --------------------------------------------------------------------------

    def is_unit(self, x: AlgebraElem) -> bool:
        """``x = r e_q`` with ``r`` a unit of ``R`` and ``q`` a unit of the monoid."""
        if not x.is_monomial:
            return False
        (m, c), = x.items()
        return self.coeff.is_unit(c) and self.monoid.is_unit(m)

    def unit_inverse(self, x: AlgebraElem) -> AlgebraElem:
        if not self.is_unit(x):
            raise ValueError(f"{x.render()} is not a unit")
        (m, c), = x.items()
        return AlgebraElem(self.coeff, {tuple(-v for v in m): self.coeff.inverse(c)})

    def exact_divide(self, a: AlgebraElem, b: AlgebraElem) -> Optional[AlgebraElem]:
        """``a / b`` if it exists in ``A``."""
        q = exact_divide(a, b, self.rank)
        if q is None or not self.contains_element(q):
            return None
        return q

    # -- localization -----------------------------------------------------------------

    def localize(self, h: AlgebraElem) -> "Localization":
        return Localization(self, h)


@dataclass(frozen=True)
class LocalizedElem:
    """``numerator / h^power`` for the ``h`` of its Localization."""

    numerator: AlgebraElem
    power: int


class Localization:
    """
    Arithmetic in ``A_h`` for an invariant nonzero ``h``.

    Equality is tested by cross-multiplication, valid since ``R`` is a domain.
    """

    def __init__(self, alg: ToricGAlgebra, h: AlgebraElem):
        if not alg.coeff.is_domain:
            raise ValidationError("Localization needs a domain of coefficients")
        if h.is_zero:
            raise ValidationError("Cannot localize at zero")
        if not alg.is_invariant(h):
            raise NotInvariant(f"Localizing element {h.render()} is not invariant")
        self.alg = alg
        self.h = h
        self._powers = [alg.one()]

    def h_power(self, k: int) -> AlgebraElem:
        while len(self._powers) <= k:
            self._powers.append(self._powers[-1] * self.h)
        return self._powers[k]

    def __call__(self, a: AlgebraElem, power: int = 0) -> LocalizedElem:
        return LocalizedElem(a, power)

    def one(self) -> LocalizedElem:
        return LocalizedElem(self.alg.one(), 0)

    def zero(self) -> LocalizedElem:
        return LocalizedElem(self.alg.zero(), 0)

    def _common(self, x: LocalizedElem, y: LocalizedElem):
        k = max(x.power, y.power)
        return x.numerator * self.h_power(k - x.power), y.numerator * self.h_power(k - y.power), k

    def add(self, x: LocalizedElem, y: LocalizedElem) -> LocalizedElem:
        a, b, k = self._common(x, y)
        return LocalizedElem(a + b, k)

    def sub(self, x: LocalizedElem, y: LocalizedElem) -> LocalizedElem:
        a, b, k = self._common(x, y)
        return LocalizedElem(a - b, k)

    def neg(self, x: LocalizedElem) -> LocalizedElem:
        return LocalizedElem(-x.numerator, x.power)

    def mul(self, x: LocalizedElem, y: LocalizedElem) -> LocalizedElem:
        return LocalizedElem(x.numerator * y.numerator, x.power + y.power)

    def equal(self, x: LocalizedElem, y: LocalizedElem) -> bool:
        return x.numerator * self.h_power(y.power) == y.numerator * self.h_power(x.power)

    def is_zero(self, x: LocalizedElem) -> bool:
        return x.numerator.is_zero

    def clear(self, x: LocalizedElem) -> Tuple[AlgebraElem, int]:
        """Clear denominators: returns ``(a, k)`` with ``x = a / h^k``."""
        return x.numerator, x.power

    def reduce(self, x: LocalizedElem) -> LocalizedElem:
        """Cancel powers of ``h`` from the numerator while the division is exact."""
        a, k = self.clear(x)
        while k > 0 and not a.is_zero:
            q = self.alg.exact_divide(a, self.h)
            if q is None:
                break
            a, k = q, k - 1
        if a.is_zero:
            k = 0
        return LocalizedElem(a, k)

    def regular_part(self, x: LocalizedElem) -> Optional[AlgebraElem]:
        """The element of ``A`` equal to ``x``, or None if ``x`` needs a denominator."""
        y = self.reduce(x)
        return y.numerator if y.power == 0 else None

    def render(self, x: LocalizedElem) -> str:
        if x.power == 0:
            return x.numerator.render()
        return f"({x.numerator.render()}) / h^{x.power}"


# -- module-level operations ---------------------------------------------------------


def mul(x: AlgebraElem, y: AlgebraElem) -> AlgebraElem:
    return x * y


def weight(alg: ToricGAlgebra, m) -> GroupElem:
    return alg.weight(m)


def is_homogeneous(alg: ToricGAlgebra, x: AlgebraElem, w: GroupElem) -> bool:
    return alg.is_homogeneous(x, w)


def invariant_generators(alg: ToricGAlgebra) -> List[AlgebraElem]:
    return alg.invariant_generators()


def face_restrict(alg: ToricGAlgebra, tau: Face, x: AlgebraElem) -> AlgebraElem:
    return alg.face_restrict(tau, x)


def face_section(alg: ToricGAlgebra, tau: Face, x: AlgebraElem) -> AlgebraElem:
    return alg.face_section(tau, x)


def ideal_J_power_member(alg: ToricGAlgebra, x: AlgebraElem, N: int) -> bool:
    return alg.ideal_J_power_member(x, N)


def large_N(alg: ToricGAlgebra, m) -> int:
    return alg.large_N(m)


def localize(alg: ToricGAlgebra, h: AlgebraElem) -> Localization:
    return alg.localize(h)


def invariant_part_of_monomial_ideal(alg: ToricGAlgebra, ideal) -> List[AlgebraElem]:
    return alg.invariant_part_of_monomial_ideal(ideal)
