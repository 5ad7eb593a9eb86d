"""
Planar trees, the free non-symmetric operad on {t1..tr, mu}, and the operad W̃.

Trees are immutable; a leaf has label None. Generator labels are "mu" (arity 2)
and "t1".."tr" (arity 1). W̃ is presented by four rewriting rules:

    interchange  t_i(mu(A, B))      -> mu(t_i A, t_i B)
    associate    mu(mu(A, B), C)    -> mu(A, mu(B, C))
    commute      t_i(t_j A), i < j  -> t_j(t_i A)
    nilpotent    t_i(t_i A)         -> 0

Normal forms are right combs whose leaf edges carry t-chains with indices
decreasing towards the leaf; ``PathSequence`` records them by their leaf sets.
Every rewrite strictly lowers ``path_order_key``, so a composite reduces to zero
or to terms at or below it in that order.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, FrozenSet, Hashable, List, Optional, Protocol, Tuple
import logging
import random

from app.algebra.errors import BoundsExceededError, InternalAssertionError, InvalidComplexError
from app.algebra.gf2 import Gf2Matrix, GradedKComplex, homology_ranks
from app.algebra.graded import indices_of

logger = logging.getLogger(__name__)

MU = "mu"


@dataclass(frozen=True)
class PlanarTree:
    label: Optional[Hashable] = None
    children: Tuple["PlanarTree", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return self.label is None

    @property
    def arity(self) -> int:
        if self.is_leaf:
            return 1
        return sum(c.arity for c in self.children)

    @property
    def weight(self) -> int:
        """Number of labelled vertices"""
        if self.is_leaf:
            return 0
        return 1 + sum(c.weight for c in self.children)

    def leaf_words(self) -> List[Tuple[Hashable, ...]]:
        """Labels met from the root down to each leaf, leaves left to right"""
        if self.is_leaf:
            return [()]
        return [(self.label,) + word for c in self.children for word in c.leaf_words()]

    def vertices(self) -> int:
        return self.weight

    def __str__(self) -> str:
        if self.is_leaf:
            return "|"
        return f"{self.label}(" + ",".join(str(c) for c in self.children) + ")"


LEAF = PlanarTree()


def corolla(label: Hashable, arity: int) -> PlanarTree:
    return PlanarTree(label, (LEAF,) * arity)


def t_label(i: int) -> str:
    return f"t{i}"


def t_index(label: Hashable) -> Optional[int]:
    if isinstance(label, str) and label.startswith("t") and label[1:].isdigit():
        return int(label[1:])
    return None


def graft(outer: PlanarTree, leaf_index: int, inner: PlanarTree) -> PlanarTree:
    """Substitute ``inner`` for leaf ``leaf_index`` (0-based, left to right)"""
    if not 0 <= leaf_index < outer.arity:
        raise BoundsExceededError(f"leaf index {leaf_index} out of range for arity {outer.arity}")

    def walk(node: PlanarTree, index: int) -> PlanarTree:
        if node.is_leaf:
            return inner
        children, offset = [], 0
        for c in node.children:
            if offset <= index < offset + c.arity:
                children.append(walk(c, index - offset))
            else:
                children.append(c)
            offset += c.arity
        return PlanarTree(node.label, tuple(children))

    return walk(outer, leaf_index)


def _check_free_bounds(weight: int, arity: int) -> None:
    from app.config import settings
    if weight > settings.operad_max_weight or arity > settings.operad_max_arity:
        raise BoundsExceededError(
            f"free operad enumeration limited to weight ≤ {settings.operad_max_weight} "
            f"and arity ≤ {settings.operad_max_arity}"
        )


@lru_cache(maxsize=None)
def _free_trees(r: int, weight: int, arity: int) -> Tuple[PlanarTree, ...]:
    if weight == 0:
        return (LEAF,) if arity == 1 else ()
    out: List[PlanarTree] = []
    for i in range(1, r + 1):
        out += [PlanarTree(t_label(i), (c,)) for c in _free_trees(r, weight - 1, arity)]
    for w1 in range(weight):
        w2 = weight - 1 - w1
        for a1 in range(1, arity):
            for left in _free_trees(r, w1, a1):
                for right in _free_trees(r, w2, arity - a1):
                    out.append(PlanarTree(MU, (left, right)))
    return tuple(out)


def enumerate_free(r: int, weight: int, arity: int) -> List[PlanarTree]:
    """All trees on {t1..tr, mu} with the given vertex count and arity; r = 0 means mu only"""
    _check_free_bounds(weight, arity)
    return list(_free_trees(r, weight, arity))


# Rewriting

RULES = ("interchange", "associate", "commute", "nilpotent")


def _match(rule: str, node: PlanarTree) -> bool:
    if node.is_leaf:
        return False
    i = t_index(node.label)
    child = node.children[0]
    if rule == "associate":
        return node.label == MU and child.label == MU
    if i is None:
        return False
    if rule == "interchange":
        return child.label == MU
    j = t_index(child.label)
    if j is None:
        return False
    if rule == "commute":
        return i < j
    if rule == "nilpotent":
        return i == j
    return False


def _apply(rule: str, node: PlanarTree) -> Optional[PlanarTree]:
    child = node.children[0]
    if rule == "interchange":
        a, b = child.children
        return PlanarTree(MU, (PlanarTree(node.label, (a,)), PlanarTree(node.label, (b,))))
    if rule == "associate":
        (a, b), c = child.children, node.children[1]
        return PlanarTree(MU, (a, PlanarTree(MU, (b, c))))
    if rule == "commute":
        return PlanarTree(child.label, (PlanarTree(node.label, child.children),))
    return None


@dataclass(frozen=True)
class RewriteSystem:
    rules: FrozenSet[str] = frozenset(RULES)

    def without(self, rule: str) -> "RewriteSystem":
        return RewriteSystem(self.rules - {rule})

    def root_redexes(self, node: PlanarTree) -> List[str]:
        return [rule for rule in RULES if rule in self.rules and _match(rule, node)]

    def redexes(self, tree: PlanarTree, path: Tuple[int, ...] = ()) -> List[Tuple[Tuple[int, ...], str]]:
        """(position, rule) pairs in pre-order"""
        if tree.is_leaf:
            return []
        found = [(path, rule) for rule in self.root_redexes(tree)]
        for k, c in enumerate(tree.children):
            found += self.redexes(c, path + (k,))
        return found

    def is_irreducible(self, tree: PlanarTree) -> bool:
        return not self.redexes(tree)

    def step(self, tree: PlanarTree, position: Tuple[int, ...], rule: str) -> Optional[PlanarTree]:
        if not position:
            return _apply(rule, tree)
        k = position[0]
        replaced = self.step(tree.children[k], position[1:], rule)
        if replaced is None:
            return None
        children = tree.children[:k] + (replaced,) + tree.children[k + 1:]
        return PlanarTree(tree.label, children)

    def reduce(self, tree: PlanarTree, rng: Optional[random.Random] = None,
               max_steps: int = 10_000) -> Optional[PlanarTree]:
        """Irreducible form, or None for zero; leftmost-outermost unless ``rng`` picks redexes"""
        current: Optional[PlanarTree] = tree
        for _ in range(max_steps):
            found = self.redexes(current)
            if not found:
                return current
            position, rule = rng.choice(found) if rng is not None else found[0]
            current = self.step(current, position, rule)
            if current is None:
                return None
        raise InternalAssertionError(f"rewriting did not terminate within {max_steps} steps on {tree}")


DEFAULT_SYSTEM = RewriteSystem()


def path_order_key(tree: PlanarTree, r: int) -> Tuple:
    """Arity, then leaf words left to right: each by length, then letters from the
    leaf end with t1 < ... < tr < mu"""
    def rank(label: Hashable) -> int:
        i = t_index(label)
        return i if i is not None else r + 1
    return (
        tree.arity,
        tuple((len(word), tuple(rank(x) for x in reversed(word))) for word in tree.leaf_words()),
    )


# Path sequences

@dataclass(frozen=True, order=True)
class PathSequence:
    """Right comb with t(I_k) on the k-th leaf edge; ``subsets`` are bit masks"""

    n: int
    subsets: Tuple[int, ...]

    def depth(self, k: int) -> int:
        """mu-power on the path to leaf k (0-based)"""
        if self.n == 1:
            return 0
        return k + 1 if k < self.n - 1 else self.n - 1

    @property
    def weight(self) -> int:
        return (self.n - 1) + sum(bin(m).count("1") for m in self.subsets)

    @property
    def is_identity(self) -> bool:
        return self.n == 1 and self.subsets == (0,)

    def to_tree(self) -> PlanarTree:
        def chain(mask: int) -> PlanarTree:
            node = LEAF
            for i in indices_of(mask):
                node = PlanarTree(t_label(i), (node,))
            return node

        node = chain(self.subsets[-1])
        for mask in reversed(self.subsets[:-1]):
            node = PlanarTree(MU, (chain(mask), node))
        return node

    def __str__(self) -> str:
        def entry(k: int) -> str:
            power = self.depth(k)
            mu = "" if power == 0 else ("mu" if power == 1 else f"mu^{power}")
            mask = self.subsets[k]
            t = "t{" + ",".join(map(str, indices_of(mask))) + "}" if mask else ""
            text = " ".join(part for part in (mu, t) if part)
            return text or "1"

        if self.n == 1:
            return entry(0)
        return "(" + ", ".join(entry(k) for k in range(self.n)) + ")"


def tree_to_path_sequence(tree: PlanarTree) -> Optional[PathSequence]:
    """The path sequence of a right comb with decreasing t-chains; None for any other shape"""
    def chain_mask(node: PlanarTree) -> Optional[int]:
        mask, last = 0, None
        while not node.is_leaf:
            i = t_index(node.label)
            if i is None or (last is not None and i >= last):
                return None
            mask |= 1 << (i - 1)
            last = i
            node = node.children[0]
        return mask

    masks: List[int] = []
    node = tree
    while node.label == MU:
        left, node = node.children
        mask = chain_mask(left)
        if mask is None:
            return None
        masks.append(mask)
    mask = chain_mask(node)
    if mask is None:
        return None
    masks.append(mask)
    return PathSequence(len(masks), tuple(masks))


def normal_form(tree: PlanarTree, system: RewriteSystem = DEFAULT_SYSTEM,
                rng: Optional[random.Random] = None) -> FrozenSet[PathSequence]:
    """F2 sum of path sequences equal to ``tree`` in W̃ (empty for zero)"""
    reduced = system.reduce(tree, rng)
    if reduced is None:
        return frozenset()
    sequence = tree_to_path_sequence(reduced)
    if sequence is None:
        raise InternalAssertionError(f"irreducible tree {reduced} is not a path sequence")
    return frozenset({sequence})


def _check_basis_bounds(n: int, r: int, limit_name: str) -> None:
    from app.config import settings
    limit = getattr(settings, limit_name)
    if n < 1 or r < 1:
        raise BoundsExceededError(f"need n ≥ 1 and r ≥ 1, got n={n}, r={r}")
    if n * r > limit:
        raise BoundsExceededError(f"n·r = {n * r} exceeds the limit {limit}")


def wtilde_basis(n: int, r: int) -> List[PathSequence]:
    """All 2^(rn) path sequences of arity n, ordered by (I_1, ..., I_n)"""
    _check_basis_bounds(n, r, "basis_max_size")
    return [PathSequence(n, masks) for masks in product(range(2 ** r), repeat=n)]


def wtilde_compose(a: PathSequence, slot: int, b: PathSequence) -> FrozenSet[PathSequence]:
    if not 0 <= slot < a.n:
        raise BoundsExceededError(f"slot {slot} out of range for arity {a.n}")
    return normal_form(graft(a.to_tree(), slot, b.to_tree()))


def irreducible_trees(n: int, r: int, system: RewriteSystem = DEFAULT_SYSTEM,
                      max_weight: Optional[int] = None) -> List[PlanarTree]:
    """Trees of arity n with no redex, built only from irreducible subtrees"""
    cap = max_weight if max_weight is not None else (n - 1) + r * n

    @lru_cache(maxsize=None)
    def build(arity: int, weight: int) -> Tuple[PlanarTree, ...]:
        if weight == 0:
            return (LEAF,) if arity == 1 else ()
        out = []
        for i in range(1, r + 1):
            for c in build(arity, weight - 1):
                node = PlanarTree(t_label(i), (c,))
                if not system.root_redexes(node):
                    out.append(node)
        for w1 in range(weight):
            for a1 in range(1, arity):
                for left in build(a1, w1):
                    for right in build(arity - a1, weight - 1 - w1):
                        node = PlanarTree(MU, (left, right))
                        if not system.root_redexes(node):
                            out.append(node)
        return tuple(out)

    return [t for w in range(cap + 1) for t in build(n, w)]


# Operads for the bar construction

class Operad(Protocol):
    name: str

    def basis(self, arity: int, weight: int) -> List[Hashable]: ...

    def arity(self, x: Hashable) -> int: ...

    def weight(self, x: Hashable) -> int: ...

    def compose(self, a: Hashable, slot: int, b: Hashable) -> FrozenSet[Hashable]: ...


class AssociativeOperad:
    """As: one operation per arity k ≥ 2 (the k-fold product), weight k - 1"""

    name = "As"

    def basis(self, arity: int, weight: int) -> List[int]:
        return [arity] if arity >= 2 and weight == arity - 1 else []

    def arity(self, x: int) -> int:
        return x

    def weight(self, x: int) -> int:
        return x - 1

    def compose(self, a: int, slot: int, b: int) -> FrozenSet[int]:
        return frozenset({a + b - 1})


class ExteriorOperad:
    """Λ on t1..tr as a unary operad; elements are non-empty masks"""

    def __init__(self, r: int):
        self.r = r
        self.name = f"Lambda(r={r})"

    def basis(self, arity: int, weight: int) -> List[int]:
        if arity != 1 or weight < 1:
            return []
        return [m for m in range(1, 2 ** self.r) if bin(m).count("1") == weight]

    def arity(self, x: int) -> int:
        return 1

    def weight(self, x: int) -> int:
        return bin(x).count("1")

    def compose(self, a: int, slot: int, b: int) -> FrozenSet[int]:
        return frozenset() if a & b else frozenset({a | b})


class WTildeOperad:
    """W̃ graded by vertex count of normal forms.

    The interchange relation makes composition raise this weight whenever a
    t-chain is copied onto several leaves; ``compose`` keeps the weight-additive
    part, which is the associated graded operad of the weight filtration.
    """

    def __init__(self, r: int):
        self.r = r
        self.name = f"W~(r={r})"

    def basis(self, arity: int, weight: int) -> List[PathSequence]:
        if arity < 1 or weight < 1:
            return []
        return [p for p in _all_sequences(arity, self.r) if p.weight == weight]

    def arity(self, x: PathSequence) -> int:
        return x.n

    def weight(self, x: PathSequence) -> int:
        return x.weight

    def compose(self, a: PathSequence, slot: int, b: PathSequence) -> FrozenSet[PathSequence]:
        target = a.weight + b.weight
        return frozenset(p for p in wtilde_compose(a, slot, b) if p.weight == target)


@lru_cache(maxsize=None)
def _all_sequences(n: int, r: int) -> Tuple[PathSequence, ...]:
    return tuple(PathSequence(n, masks) for masks in product(range(2 ** r), repeat=n))


def _bar_trees(operad: Operad, weight: int, arity: int) -> Dict[int, List[PlanarTree]]:
    """Bar trees of total weight and arity, keyed by vertex count"""
    memo: Dict[Tuple[int, int], List[PlanarTree]] = {}

    def trees(w: int, a: int) -> List[PlanarTree]:
        key = (w, a)
        if key in memo:
            return memo[key]
        out: List[PlanarTree] = []
        for k in range(1, a + 1):
            for wv in range(1, w + 1):
                for label in operad.basis(k, wv):
                    out += [PlanarTree(label, kids) for kids in forests(k, w - wv, a)]
        memo[key] = out
        return out

    def forests(slots: int, w: int, a: int) -> List[Tuple[PlanarTree, ...]]:
        if slots == 0:
            return [()] if w == 0 and a == 0 else []
        out = []
        # first slot is a leaf
        out += [(LEAF,) + rest for rest in forests(slots - 1, w, a - 1)] if a >= 1 else []
        for w1 in range(1, w + 1):
            for a1 in range(1, a - (slots - 1) + 1):
                for first in trees(w1, a1):
                    out += [(first,) + rest for rest in forests(slots - 1, w - w1, a - a1)]
        return out

    by_vertices: Dict[int, List[PlanarTree]] = {}
    for t in trees(weight, arity):
        by_vertices.setdefault(t.vertices(), []).append(t)
    return by_vertices


def _contractions(operad: Operad, tree: PlanarTree) -> List[PlanarTree]:
    """Terms of d₂(tree): every internal edge contracted, labels composed"""
    out: List[PlanarTree] = []
    for k, child in enumerate(tree.children):
        if child.is_leaf:
            continue
        for label in operad.compose(tree.label, k, child.label):
            kids = tree.children[:k] + child.children + tree.children[k + 1:]
            out.append(PlanarTree(label, kids))
    for k, child in enumerate(tree.children):
        if child.is_leaf:
            continue
        for replaced in _contractions(operad, child):
            out.append(PlanarTree(tree.label, tree.children[:k] + (replaced,) + tree.children[k + 1:]))
    return out


@dataclass
class BarHomology:
    operad: str
    weight: int
    arity: int
    dims: Dict[int, int]
    basis_sizes: Dict[int, int]

    @property
    def koszul_dual_dim(self) -> int:
        """dim K^(n): homology in the top degree, where every vertex has weight one"""
        return self.dims.get(self.weight, 0)


def bar_complex(operad: Operad, weight: int, arity: int) -> Tuple[GradedKComplex, Dict[int, List[PlanarTree]]]:
    by_vertices = _bar_trees(operad, weight, arity)
    index = {v: {t: k for k, t in enumerate(ts)} for v, ts in by_vertices.items()}
    d = {}
    for v, ts in by_vertices.items():
        if v - 1 not in by_vertices:
            continue
        entries = []
        for col, t in enumerate(ts):
            for term in _contractions(operad, t):
                entries.append((index[v - 1][term], col))
        d[v] = Gf2Matrix.from_entries(len(by_vertices[v - 1]), len(ts), entries)
    complex_ = GradedKComplex({v: len(ts) for v, ts in by_vertices.items()}, d)
    failures = complex_.square_zero_failures()
    if failures:
        raise InvalidComplexError(f"d₂∘d₂ ≠ 0 in the bar complex of {operad.name} out of degrees {failures}")
    return complex_, by_vertices


def bar_homology(operad: Operad, weight: int, arity: int) -> BarHomology:
    """Homology of the weight-``weight`` arity-``arity`` part of the bar construction"""
    from app.config import settings
    if weight > settings.bar_max_weight or arity > settings.bar_max_arity:
        raise BoundsExceededError(
            f"bar homology limited to weight ≤ {settings.bar_max_weight} and arity ≤ {settings.bar_max_arity}"
        )
    complex_, by_vertices = bar_complex(operad, weight, arity)
    dims = homology_ranks(complex_)
    logger.debug(f"Bar complex of {operad.name} at weight {weight}, arity {arity}: sizes {complex_.dims}")
    return BarHomology(operad.name, weight, arity, dict(dims), dict(complex_.dims))


# PBW certificate

@dataclass
class PbwReport:
    n: int
    r: int
    pairs_checked: int
    failures: List[str]
    reducible_basis_elements: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures and not self.reducible_basis_elements


def pbw_certificate(n: int, r: int, system: RewriteSystem = DEFAULT_SYSTEM) -> PbwReport:
    """Every composite of two basis elements of arity ≤ n, in every slot, reduces to
    zero or to a basis element not above the composite; every basis element is irreducible"""
    _check_basis_bounds(n, r, "pbw_max_size")
    bases = {k: wtilde_basis(k, r) for k in range(1, n + 1)}
    failures: List[str] = []
    reducible = [str(p) for k in bases for p in bases[k] if not system.is_irreducible(p.to_tree())]

    checked = 0
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            for a in bases[p]:
                for b in bases[q]:
                    for slot in range(p):
                        checked += 1
                        composite = graft(a.to_tree(), slot, b.to_tree())
                        reduced = system.reduce(composite)
                        if reduced is None:
                            continue
                        sequence = tree_to_path_sequence(reduced)
                        if sequence is None:
                            failures.append(f"{a} ∘{slot + 1} {b} reduces to {reduced}, not a basis element")
                        elif path_order_key(reduced, r) > path_order_key(composite, r):
                            failures.append(f"{a} ∘{slot + 1} {b} reduces to {sequence}, above the composite")
    logger.info(f"PBW certificate n={n}, r={r}: {checked} composites, {len(failures)} failures")
    return PbwReport(n, r, checked, failures, reducible)
