"""
Graded rings over F2 in r variables.

S = F2[x1..xr] with x_i in degree -1, its dual coalgebra S_c (same container,
monomial-dual basis), the exterior algebra Λ on t1..tr and the group algebra of
(Z/2)^r with the identification t_i = 1 + g_i.

Variable and generator indices are 1-based in every public function.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union
import re

from app.algebra.errors import DimensionMismatchError, InvalidModuleError, SchemaError
from app.algebra.gf2 import Gf2Matrix


# Degree of every symbol that carries one, in homological grading.
DEGREE_CONVENTIONS: Dict[str, int] = {
    "x_i": -1,          # polynomial generator of S
    "gamma_m": +1,      # per unit of |m|, dual basis of S_c
    # t_i sits in degree 0 even in Ω_κ, so the twist Σ t_i ⊗ x_i has degree -1
    "t_i": 0,           # exterior generator, also inside the cobar twist
    "g_i": 0,           # group element
    "differential": -1,
    "homotopy": +1,
    "sigma_i": -1,      # sigma_i lowers the S_c weight by one
    "suspension": +1,   # bar complexes of operads
}


@dataclass(frozen=True, order=True)
class Monomial:
    """x1^e1 * ... * xr^er"""

    exponents: Tuple[int, ...]

    @classmethod
    def one(cls, r: int) -> "Monomial":
        return cls((0,) * r)

    @classmethod
    def variable(cls, r: int, i: int) -> "Monomial":
        _check_index(r, i)
        return cls(tuple(1 if k == i - 1 else 0 for k in range(r)))

    @property
    def r(self) -> int:
        return len(self.exponents)

    @property
    def weight(self) -> int:
        return sum(self.exponents)

    @property
    def degree(self) -> int:
        return -self.weight

    def __mul__(self, other: "Monomial") -> "Monomial":
        if self.r != other.r:
            raise DimensionMismatchError(f"monomials in {self.r} and {other.r} variables")
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def divides(self, other: "Monomial") -> bool:
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def divide(self, i: int) -> Optional["Monomial"]:
        """m / x_i, or None when x_i does not divide m"""
        _check_index(self.r, i)
        if self.exponents[i - 1] == 0:
            return None
        exps = list(self.exponents)
        exps[i - 1] -= 1
        return Monomial(tuple(exps))

    def __str__(self) -> str:
        factors = []
        for k, e in enumerate(self.exponents, start=1):
            if e == 1:
                factors.append(f"x{k}")
            elif e > 1:
                factors.append(f"x{k}^{e}")
        return "*".join(factors) or "1"


def _check_index(r: int, i: int) -> None:
    if not 1 <= i <= r:
        raise DimensionMismatchError(f"index {i} out of range for r={r}")


@lru_cache(maxsize=None)
def monomials_of_weight(r: int, w: int) -> Tuple[Monomial, ...]:
    """All monomials of total weight w, x1-heavy first"""
    if w < 0:
        return ()
    out = []
    for combo in combinations_with_replacement(range(r), w):
        exps = [0] * r
        for k in combo:
            exps[k] += 1
        out.append(Monomial(tuple(exps)))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(r: int, w: int) -> Dict[Monomial, int]:
    return {m: k for k, m in enumerate(monomials_of_weight(r, w))}


def monomials_up_to(r: int, w: int) -> List[Monomial]:
    return [m for k in range(w + 1) for m in monomials_of_weight(r, k)]


def _term_key(m: Monomial):
    return (m.weight, tuple(-e for e in m.exponents))


@dataclass(frozen=True)
class GradedPoly:
    """Element of S (or of S_c in the monomial-dual basis); coefficients are all 1"""

    r: int
    terms: FrozenSet[Monomial] = frozenset()

    @classmethod
    def zero(cls, r: int) -> "GradedPoly":
        return cls(r, frozenset())

    @classmethod
    def one(cls, r: int) -> "GradedPoly":
        return cls(r, frozenset({Monomial.one(r)}))

    @classmethod
    def variable(cls, r: int, i: int) -> "GradedPoly":
        return cls(r, frozenset({Monomial.variable(r, i)}))

    @classmethod
    def of(cls, r: int, monomials: Iterable[Monomial]) -> "GradedPoly":
        """Sum with cancellation of repeated monomials"""
        acc = set()
        for m in monomials:
            acc ^= {m}
        return cls(r, frozenset(acc))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "GradedPoly") -> "GradedPoly":
        if self.r != other.r:
            raise DimensionMismatchError(f"polynomials in {self.r} and {other.r} variables")
        return GradedPoly(self.r, self.terms ^ other.terms)

    def __mul__(self, other: "GradedPoly") -> "GradedPoly":
        return poly_mul(self, other)

    def weights(self) -> FrozenSet[int]:
        return frozenset(m.weight for m in self.terms)

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    @property
    def weight(self) -> Optional[int]:
        """Common weight of the terms; None for zero"""
        ws = self.weights()
        if not ws:
            return None
        if len(ws) > 1:
            raise DimensionMismatchError(f"inhomogeneous polynomial {self}")
        return next(iter(ws))

    @property
    def constant_term(self) -> int:
        return int(Monomial.one(self.r) in self.terms)

    def sorted_terms(self) -> List[Monomial]:
        return sorted(self.terms, key=_term_key)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(m) for m in self.sorted_terms())


def poly_mul(a: GradedPoly, b: GradedPoly) -> GradedPoly:
    if a.r != b.r:
        raise DimensionMismatchError(f"polynomials in {a.r} and {b.r} variables")
    return GradedPoly.of(a.r, (m * n for m in a.terms for n in b.terms))


def sigma(i: int, phi: GradedPoly) -> GradedPoly:
    """Dual of multiplication by x_i on S_c: γ_m ↦ γ_{m/x_i}"""
    _check_index(phi.r, i)
    return GradedPoly.of(phi.r, (q for q in (m.divide(i) for m in phi.terms) if q is not None))


def pairing(s: GradedPoly, phi: GradedPoly) -> int:
    """⟨s, φ⟩ for s in S and φ in S_c (monomial-dual bases)"""
    return len(s.terms & phi.terms) % 2


_FACTOR = re.compile(r"^x(\d+)(?:\^(\d+))?$")


def parse_poly(text: str, r: int) -> GradedPoly:
    """Parse "x1^2*x3 + x2 + 1"; "0" is the zero polynomial"""
    cleaned = str(text).replace(" ", "")
    if cleaned in ("", "0"):
        return GradedPoly.zero(r)
    monomials = []
    for term in cleaned.split("+"):
        if not term:
            raise SchemaError(f"empty term in polynomial {text!r}")
        exps = [0] * r
        for factor in term.split("*"):
            if factor == "1":
                continue
            match = _FACTOR.match(factor)
            if not match:
                raise SchemaError(f"cannot parse factor {factor!r} in polynomial {text!r}")
            index = int(match.group(1))
            if not 1 <= index <= r:
                raise SchemaError(f"variable x{index} out of range for r={r} in {text!r}")
            exps[index - 1] += int(match.group(2) or 1)
        monomials.append(Monomial(tuple(exps)))
    return GradedPoly.of(r, monomials)


def format_poly(p: GradedPoly) -> str:
    return str(p)


# Exterior algebra and group algebra. Subsets of {1..r} are bit masks: bit i-1 is t_i (or g_i).

def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return mask


def indices_of(mask: int) -> List[int]:
    return [k + 1 for k in range(mask.bit_length()) if mask >> k & 1]


def _subsets(mask: int) -> Iterable[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class ExtElement:
    """Sum of t(I) = ∏_{i∈I} t_i in Λ"""

    r: int
    terms: FrozenSet[int] = frozenset()

    @classmethod
    def of(cls, r: int, masks: Iterable[int]) -> "ExtElement":
        acc = set()
        for mask in masks:
            if mask >> r:
                raise DimensionMismatchError(f"t-index beyond r={r}")
            acc ^= {mask}
        return cls(r, frozenset(acc))

    @classmethod
    def t(cls, r: int, indices: Iterable[int] = ()) -> "ExtElement":
        return cls.of(r, [mask_of(indices)])

    def __add__(self, other: "ExtElement") -> "ExtElement":
        if self.r != other.r:
            raise DimensionMismatchError(f"exterior elements in {self.r} and {other.r} generators")
        return ExtElement(self.r, self.terms ^ other.terms)

    def __mul__(self, other: "ExtElement") -> "ExtElement":
        return ext_mul(self, other)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def constant_term(self) -> int:
        return int(0 in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mask in sorted(self.terms, key=lambda m: (bin(m).count("1"), indices_of(m))):
            parts.append("1" if mask == 0 else "t{" + ",".join(map(str, indices_of(mask))) + "}")
        return "+".join(parts)


def ext_mul(a: ExtElement, b: ExtElement) -> ExtElement:
    if a.r != b.r:
        raise DimensionMismatchError(f"exterior elements in {a.r} and {b.r} generators")
    return ExtElement.of(a.r, (i | j for i in a.terms for j in b.terms if not i & j))


_T_TERM = re.compile(r"^t\{([\d,]*)\}$")


def parse_ext(text: str, r: int) -> ExtElement:
    """Parse "t{1,3}+1"; "t{}" and "1" both denote t(∅)"""
    cleaned = str(text).replace(" ", "")
    if cleaned in ("", "0"):
        return ExtElement(r)
    masks = []
    for term in cleaned.split("+"):
        if term == "1":
            masks.append(0)
            continue
        match = _T_TERM.match(term)
        if not match:
            raise SchemaError(f"cannot parse exterior term {term!r} in {text!r}")
        indices = [int(s) for s in match.group(1).split(",") if s]
        if any(not 1 <= i <= r for i in indices):
            raise SchemaError(f"t-index out of range for r={r} in {text!r}")
        masks.append(mask_of(indices))
    return ExtElement.of(r, masks)


@dataclass(frozen=True, order=True)
class GroupElement:
    """∏_{j∈J} g_j in (Z/2)^r"""

    r: int
    bits: int = 0

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.r, self.bits ^ other.bits)

    def __str__(self) -> str:
        return "*".join(f"g{j}" for j in indices_of(self.bits)) or "1"


@dataclass(frozen=True)
class GroupAlgebraElement:
    """Element of kG as a set of group elements (bit masks)"""

    r: int
    terms: FrozenSet[int] = frozenset()

    @classmethod
    def of(cls, r: int, masks: Iterable[int]) -> "GroupAlgebraElement":
        acc = set()
        for mask in masks:
            acc ^= {mask}
        return cls(r, frozenset(acc))

    def __add__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        return GroupAlgebraElement(self.r, self.terms ^ other.terms)

    def __mul__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        return GroupAlgebraElement.of(self.r, (a ^ b for a in self.terms for b in other.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(str(GroupElement(self.r, m)) for m in sorted(self.terms))


def parse_groupword(word: str, r: int) -> int:
    """"g1*g3" → mask; "1" is the identity"""
    cleaned = str(word).replace(" ", "")
    if cleaned in ("", "1"):
        return 0
    mask = 0
    for factor in cleaned.split("*"):
        match = re.match(r"^g(\d+)$", factor)
        if not match or not 1 <= int(match.group(1)) <= r:
            raise SchemaError(f"cannot parse group word {word!r} for r={r}")
        mask ^= 1 << (int(match.group(1)) - 1)
    return mask


def _moebius(r: int, terms: Iterable[int]) -> FrozenSet[int]:
    # Σ over subsets; over F2 this transform is its own inverse
    acc = set()
    for mask in terms:
        for sub in _subsets(mask):
            acc ^= {sub}
    return frozenset(acc)


def group_to_t_basis(e: Union[GroupElement, GroupAlgebraElement]) -> ExtElement:
    """g_J = ∏_{j∈J} (1 + t_j) expanded in the t(I) basis"""
    if isinstance(e, GroupElement):
        e = GroupAlgebraElement(e.r, frozenset({e.bits}))
    return ExtElement(e.r, _moebius(e.r, e.terms))


def t_to_group_basis(e: ExtElement) -> GroupAlgebraElement:
    """t(I) = ∏_{i∈I} (1 + g_i) expanded in the group basis"""
    return GroupAlgebraElement(e.r, _moebius(e.r, e.terms))


def lambda_action_matrices(size: int, permutations: Sequence[Sequence[int]]) -> List[Gf2Matrix]:
    """T_i = Id + P_{g_i} from the basis permutations of the generators g_i.

    ``permutations[i][b]`` is the index of g_{i+1}·(basis vector b).
    """
    problems = []
    perms = [list(p) for p in permutations]
    for k, perm in enumerate(perms, start=1):
        if sorted(perm) != list(range(size)):
            problems.append(f"g{k} is not a permutation of {size} basis vectors")
            continue
        if any(perm[perm[b]] != b for b in range(size)):
            problems.append(f"g{k} does not square to the identity")
    if not problems:
        for a in range(len(perms)):
            for b in range(a + 1, len(perms)):
                pa, pb = perms[a], perms[b]
                if any(pa[pb[v]] != pb[pa[v]] for v in range(size)):
                    problems.append(f"g{a + 1} and g{b + 1} do not commute")
    if problems:
        raise InvalidModuleError("permutations do not define a (Z/2)^r action", problems)

    identity = Gf2Matrix.identity(size)
    return [identity + Gf2Matrix.from_entries(size, size, ((perm[b], b) for b in range(size)))
            for perm in perms]
