"""
Semifree dg-modules over S = F2[x1..xr] and finite dg-modules over Λ.

An S-module is stored as a generator list and a square matrix of polynomials:
entry ``diff[a][b]`` is the coefficient of generator a in ∂(generator b), and
its weight is deg(a) - deg(b) + 1. Homology is computed degreewise in a finite
window after expanding every S·gen into monomials.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from app.algebra.errors import (
    InconsistentSystemError,
    InvalidModuleError,
    NotFreeError,
    SchemaError,
    WindowError,
    WindowTooSmallError,
)
from app.algebra.gf2 import (
    Gf2Matrix,
    GradedKComplex,
    HomologyData,
    homology_dims,
    homology_ranks,
)
from app.algebra.graded import (
    ExtElement,
    GradedPoly,
    Monomial,
    format_poly,
    lambda_action_matrices,
    monomial_index,
    monomials_of_weight,
    parse_ext,
    parse_poly,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int


@dataclass(frozen=True)
class Window:
    """Degree window [lo, hi]; homology is trusted on [lo+1, hi-1]"""

    lo: int
    hi: int

    def __post_init__(self):
        if self.hi - self.lo < 2:
            raise WindowError(f"window [{self.lo}, {self.hi}] has no interior degrees")

    @property
    def interior(self) -> List[int]:
        return list(range(self.lo + 1, self.hi))

    @property
    def margins(self) -> Tuple[int, int]:
        return (self.lo + 1, self.hi - 1)

    @property
    def height(self) -> int:
        return self.hi - self.lo

    def as_list(self) -> List[int]:
        return [self.lo, self.hi]


def as_window(window: Union[Window, Sequence[int]]) -> Window:
    if isinstance(window, Window):
        return window
    lo, hi = window
    return Window(int(lo), int(hi))


@dataclass
class ValidationReport:
    problems: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.problems

    def add(self, problem: str) -> None:
        self.problems.append(problem)

    def raise_if_invalid(self, what: str) -> None:
        if self.problems:
            raise InvalidModuleError(f"{what} failed validation: {self.problems[0]}", self.problems)


# S-modules

@dataclass(frozen=True)
class DgSModule:
    r: int
    generators: Tuple[Generator, ...]
    diff: Tuple[Tuple[GradedPoly, ...], ...]

    @classmethod
    def build(cls, r: int, generators: Iterable[Tuple[str, int]],
              entries: Mapping[Tuple[int, int], GradedPoly] = None) -> "DgSModule":
        """Module from (name, degree) pairs and sparse entries {(a, b): poly}"""
        gens = tuple(Generator(name, int(degree)) for name, degree in generators)
        size = len(gens)
        rows = [[GradedPoly.zero(r) for _ in range(size)] for _ in range(size)]
        for (a, b), poly in (entries or {}).items():
            rows[a][b] = poly
        return cls(r, gens, tuple(tuple(row) for row in rows))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def degree_of(self, a: int) -> int:
        return self.generators[a].degree

    def entry_weight(self, a: int, b: int) -> int:
        return self.degree_of(a) - self.degree_of(b) + 1

    def nonzero_entries(self) -> Iterable[Tuple[int, int, GradedPoly]]:
        for a, row in enumerate(self.diff):
            for b, poly in enumerate(row):
                if poly:
                    yield a, b, poly

    def column(self, b: int) -> List[Tuple[int, GradedPoly]]:
        return [(a, self.diff[a][b]) for a in range(self.rank) if self.diff[a][b]]


def validate_s_module(m: DgSModule) -> ValidationReport:
    """Degree compatibility of every entry and ∂² = 0 over S; never raises"""
    report = ValidationReport()
    n = m.rank
    if len(m.diff) != n or any(len(row) != n for row in m.diff):
        report.add(f"differential is not a {n}x{n} matrix")
        return report

    for a, b, poly in m.nonzero_entries():
        if poly.r != m.r:
            report.add(f"entry ({m.generators[a].name}, {m.generators[b].name}) uses {poly.r} variables, expected {m.r}")
            continue
        expected = m.entry_weight(a, b)
        if expected < 0:
            report.add(
                f"entry ({m.generators[a].name}, {m.generators[b].name}) = {poly} must be zero: "
                f"it would need positive degree {-expected}"
            )
        elif poly.weights() != {expected}:
            report.add(
                f"entry ({m.generators[a].name}, {m.generators[b].name}) = {poly} must have degree {-expected}"
            )

    if report.valid:
        for a in range(n):
            for c in range(n):
                total = GradedPoly.zero(m.r)
                for b in range(n):
                    if m.diff[a][b] and m.diff[b][c]:
                        total = total + m.diff[a][b] * m.diff[b][c]
                if total:
                    report.add(
                        f"∂² has entry {total} at ({m.generators[a].name}, {m.generators[c].name})"
                    )
    return report


@dataclass(frozen=True, eq=False)
class WindowExpansion:
    """Degreewise slice of a semifree module with its monomial basis.

    ``basis[n]`` lists (generator index, monomial) pairs spanning degree n.
    """

    module: DgSModule
    window: Window
    complex: GradedKComplex
    basis: Dict[int, List[Tuple[int, Monomial]]]
    offsets: Dict[int, Dict[int, int]]

    def index(self, n: int, gen: int, mono: Monomial) -> int:
        return self.offsets[n][gen] + monomial_index(self.module.r, mono.weight)[mono]

    def multiplication(self, i: int, n: int) -> Gf2Matrix:
        """x_i: degree n → degree n-1"""
        src, tgt = self.basis.get(n, []), self.basis.get(n - 1, [])
        out = np.zeros((len(tgt), len(src)), dtype=np.uint8)
        if n - 1 >= self.window.lo:
            x = Monomial.variable(self.module.r, i)
            for col, (gen, mono) in enumerate(src):
                out[self.index(n - 1, gen, mono * x), col] = 1
        return Gf2Matrix.from_array(out)


def _slot_basis(m: DgSModule, n: int) -> Tuple[List[Tuple[int, Monomial]], Dict[int, int]]:
    basis, offsets = [], {}
    for g, gen in enumerate(m.generators):
        offsets[g] = len(basis)
        basis.extend((g, mono) for mono in monomials_of_weight(m.r, gen.degree - n))
    return basis, offsets


def expand_with_basis(m: DgSModule, window: Union[Window, Sequence[int]]) -> WindowExpansion:
    window = as_window(window)
    basis, offsets = {}, {}
    for n in range(window.lo, window.hi + 1):
        basis[n], offsets[n] = _slot_basis(m, n)

    d = {}
    for n in range(window.lo + 1, window.hi + 1):
        out = np.zeros((len(basis[n - 1]), len(basis[n])), dtype=np.int64)
        for col, (b, mono) in enumerate(basis[n]):
            for a, poly in m.column(b):
                index = monomial_index(m.r, m.degree_of(a) - (n - 1))
                for term in poly.terms:
                    out[offsets[n - 1][a] + index[term * mono], col] += 1
        d[n] = Gf2Matrix.from_array(out)

    complex_ = GradedKComplex({n: len(basis[n]) for n in basis}, d)
    return WindowExpansion(m, window, complex_, basis, offsets)


def expand_in_window(m: DgSModule, lo: int, hi: int) -> GradedKComplex:
    return expand_with_basis(m, Window(lo, hi)).complex


def default_window(m: DgSModule, padding: Optional[int] = None) -> Window:
    """Window from generator degrees and the largest entry weight, padded on both sides.

    Heuristic: the margin check rejects it when homology reaches the edges.
    """
    if padding is None:
        from app.config import settings
        padding = settings.window_padding
    if not m.generators:
        return Window(-padding, padding)
    degrees = [g.degree for g in m.generators]
    reach = max((m.entry_weight(a, b) for a, b, _ in m.nonzero_entries()), default=0)
    return Window(min(degrees) - reach - padding, max(degrees) + padding)


def _check_margins(window: Window, dims: Mapping[int, int]) -> None:
    for n in sorted(set(window.margins)):
        if dims.get(n, 0):
            raise WindowTooSmallError(n, dims[n])


@dataclass(frozen=True, eq=False)
class HomologyModule:
    """Homology with induced actions.

    ``side`` is "S" (x_i acting H_n → H_{n-1}) or "Lambda" (t_i acting H_n → H_n).
    ``actions[i-1][n]`` is the matrix of the i-th generator out of degree n.
    """

    r: int
    side: str
    dims: Dict[int, int]
    actions: Tuple[Dict[int, Gf2Matrix], ...]
    representatives: Dict[int, Gf2Matrix] = field(default_factory=dict)

    @property
    def action_degree(self) -> int:
        return -1 if self.side == "S" else 0

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    @property
    def degrees(self) -> List[int]:
        return sorted(n for n, v in self.dims.items() if v)

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def action(self, i: int, n: int) -> Gf2Matrix:
        target = n + self.action_degree
        matrix = self.actions[i - 1].get(n)
        if matrix is None:
            return Gf2Matrix.zeros(self.dim(target), self.dim(n))
        return matrix

    def action_problems(self) -> List[str]:
        problems = []
        shift = self.action_degree
        for n in self.degrees:
            for i in range(1, self.r + 1):
                if self.side == "Lambda" and not (self.action(i, n) @ self.action(i, n)).is_zero():
                    problems.append(f"t{i}² ≠ 0 on H_{n}")
                for j in range(i + 1, self.r + 1):
                    ij = self.action(i, n + shift) @ self.action(j, n)
                    ji = self.action(j, n + shift) @ self.action(i, n)
                    if ij != ji:
                        problems.append(f"generators {i} and {j} do not commute on H_{n}")
        return problems

    def parity_classes(self) -> List[int]:
        return sorted({n % 2 for n in self.degrees})


def _express_in_homology(data: HomologyData, n: int, vectors: Gf2Matrix) -> Gf2Matrix:
    """Coordinates of cycles in the homology basis of degree n"""
    reps = data.representatives.get(n)
    if reps is None or reps.cols == 0:
        return Gf2Matrix.zeros(0, vectors.cols)
    frame = Gf2Matrix.hstack([data.boundaries[n], reps])
    try:
        coords = frame.solve(vectors)
    except InconsistentSystemError as e:
        raise InvalidModuleError("induced action sends a cycle outside the cycles", [str(e)])
    nb = data.boundaries[n].cols
    return coords.select_rows(range(nb, nb + reps.cols))


def homology_of_s_module(m: DgSModule, window: Union[Window, Sequence[int]]) -> HomologyModule:
    validate_s_module(m).raise_if_invalid("S-module")
    expansion = expand_with_basis(m, window)
    window = expansion.window
    data = homology_dims(expansion.complex)
    dims = {n: data.dims[n] for n in window.interior}
    _check_margins(window, dims)

    actions = []
    for i in range(1, m.r + 1):
        per_degree = {}
        for n in window.interior:
            if not dims[n] or not dims.get(n - 1, 0):
                continue
            image = expansion.multiplication(i, n) @ data.representatives[n]
            per_degree[n] = _express_in_homology(data, n - 1, image)
        actions.append(per_degree)

    logger.debug(f"S-module homology in window {window.as_list()}: {dims}")
    return HomologyModule(
        r=m.r,
        side="S",
        dims=dims,
        actions=tuple(actions),
        representatives={n: data.representatives[n] for n in window.interior},
    )


def homology_dims_in_window(m: DgSModule, window: Union[Window, Sequence[int]]) -> Dict[int, int]:
    """Interior homology dimensions from ranks alone, with the margin check"""
    validate_s_module(m).raise_if_invalid("S-module")
    window = as_window(window)
    complex_ = expand_with_basis(m, window).complex
    dims = homology_ranks(complex_, window.interior)
    _check_margins(window, dims)
    return dims


def dual_homology(h: HomologyModule) -> HomologyModule:
    """Graded k-dual: degrees negated, actions transposed"""
    dims = {-n: v for n, v in h.dims.items()}
    actions = []
    for per_degree in h.actions:
        dual = {}
        for n, matrix in per_degree.items():
            # matrix: H_n → H_{n+s}; dual: H^∨_{-(n+s)} → H^∨_{-n}
            dual[-(n + h.action_degree)] = matrix.transpose()
        actions.append(dual)
    return HomologyModule(r=h.r, side=h.side, dims=dims, actions=tuple(actions))


# Λ-modules

@dataclass(frozen=True, eq=False)
class DgLambdaModule:
    """Finite dg-module over Λ: a graded complex with commuting square-zero t_i"""

    r: int
    names: Dict[int, Tuple[str, ...]]
    complex: GradedKComplex
    t_action: Tuple[Dict[int, Gf2Matrix], ...]

    @property
    def basis(self) -> List[Tuple[str, int]]:
        return [(name, n) for n in sorted(self.names) for name in self.names[n]]

    @property
    def degrees(self) -> List[int]:
        return self.complex.degrees

    def dim(self, n: int) -> int:
        return self.complex.dim(n)

    def t(self, i: int, n: int) -> Gf2Matrix:
        matrix = self.t_action[i - 1].get(n)
        if matrix is None:
            return Gf2Matrix.zeros(self.dim(n), self.dim(n))
        return matrix


def validate_lambda_module(c: DgLambdaModule) -> ValidationReport:
    report = ValidationReport()
    for n in c.complex.square_zero_failures():
        report.add(f"d∘d ≠ 0 out of degree {n}")
    for n in c.degrees:
        for i in range(1, c.r + 1):
            ti = c.t(i, n)
            if ti.shape != (c.dim(n), c.dim(n)):
                report.add(f"t{i} in degree {n} has shape {ti.shape}")
                continue
            if not (ti @ ti).is_zero():
                report.add(f"t{i}² ≠ 0 in degree {n}")
            if c.complex.differential(n) @ ti != c.t(i, n - 1) @ c.complex.differential(n):
                report.add(f"∂ does not commute with t{i} out of degree {n}")
            for j in range(i + 1, c.r + 1):
                if ti @ c.t(j, n) != c.t(j, n) @ ti:
                    report.add(f"t{i} and t{j} do not commute in degree {n}")
    return report


def homology_of_lambda_module(c: DgLambdaModule) -> HomologyModule:
    validate_lambda_module(c).raise_if_invalid("Λ-module")
    data = homology_dims(c.complex)
    actions = []
    for i in range(1, c.r + 1):
        per_degree = {}
        for n in c.degrees:
            if data.dims[n]:
                per_degree[n] = _express_in_homology(data, n, c.t(i, n) @ data.representatives[n])
        actions.append(per_degree)
    return HomologyModule(
        r=c.r,
        side="Lambda",
        dims=dict(data.dims),
        actions=tuple(actions),
        representatives=dict(data.representatives),
    )


@dataclass(frozen=True, eq=False)
class FreenessCertificate:
    """Per degree, columns whose Λ-translates form a basis (one per free orbit)"""

    representatives: Dict[int, Gf2Matrix]
    orbit_names: Dict[int, Tuple[str, ...]] = field(default_factory=dict)

    def rank(self, n: int) -> int:
        reps = self.representatives.get(n)
        return reps.cols if reps is not None else 0


def _augmentation_image(c: DgLambdaModule, n: int) -> Gf2Matrix:
    return Gf2Matrix.hstack([c.t(i, n) for i in range(1, c.r + 1)], rows=c.dim(n))


def certify_free(c: DgLambdaModule) -> FreenessCertificate:
    """Certificate for any free module, via dim C_n = 2^r · dim(k ⊗_Λ C)_n"""
    reps = {}
    for n in c.degrees:
        image = _augmentation_image(c, n)
        quotient = c.dim(n) - image.rank()
        if c.dim(n) != (2 ** c.r) * quotient:
            raise NotFreeError(
                f"degree {n}: dimension {c.dim(n)} is not 2^{c.r} times the quotient dimension {quotient}"
            )
        stacked = Gf2Matrix.hstack([image, Gf2Matrix.identity(c.dim(n))])
        chosen = [p - image.cols for p in stacked.pivots() if p >= image.cols]
        reps[n] = Gf2Matrix.identity(c.dim(n)).select_columns(chosen)
    return FreenessCertificate(reps)


def _quotient_map(c: DgLambdaModule, certificate: FreenessCertificate, n: int) -> Gf2Matrix:
    reps = certificate.representatives.get(n, Gf2Matrix.zeros(c.dim(n), 0))
    image = _augmentation_image(c, n)
    frame = Gf2Matrix.hstack([reps, image])
    try:
        coords = frame.solve(Gf2Matrix.identity(c.dim(n)))
    except InconsistentSystemError:
        raise NotFreeError(f"degree {n}: representatives and t-images do not span")
    return coords.select_rows(range(reps.cols))


def reduce_mod_augmentation(
    module: Union[DgSModule, DgLambdaModule],
    certificate: Optional[FreenessCertificate] = None,
) -> GradedKComplex:
    """k ⊗_S M (constant terms of ∂) or k ⊗_Λ C (quotient by all t_i images)"""
    if isinstance(module, DgSModule):
        by_degree: Dict[int, List[int]] = {}
        for g, gen in enumerate(module.generators):
            by_degree.setdefault(gen.degree, []).append(g)
        d = {}
        for n, cols in by_degree.items():
            rows = by_degree.get(n - 1, [])
            if rows:
                d[n] = Gf2Matrix.from_rows(
                    [[module.diff[a][b].constant_term for b in cols] for a in rows]
                )
        return GradedKComplex({n: len(v) for n, v in by_degree.items()}, d)

    if certificate is None:
        raise NotFreeError("reduction of a Λ-module needs a freeness certificate")
    dims, d = {}, {}
    for n in module.degrees:
        dims[n] = certificate.rank(n)
    for n in module.degrees:
        if n - 1 in dims:
            reps = certificate.representatives.get(n, Gf2Matrix.zeros(module.dim(n), 0))
            d[n] = _quotient_map(module, certificate, n - 1) @ module.complex.differential(n) @ reps
    return GradedKComplex(dims, d)


@dataclass
class EulerReport:
    chi_c: int
    chi_homology: int
    chi_quotient: int
    group_order: int
    homology_dim: int
    identity_holds: bool
    parity_hypothesis: bool
    homology_dim_equals_abs_chi: bool


def euler_identity_check(c: DgLambdaModule, certificate: FreenessCertificate) -> EulerReport:
    quotient = reduce_mod_augmentation(c, certificate)
    homology = homology_of_lambda_module(c)
    chi_c = c.complex.euler_characteristic()
    chi_h = sum((-1) ** (n % 2) * v for n, v in homology.dims.items())
    chi_q = quotient.euler_characteristic()
    order = 2 ** c.r
    return EulerReport(
        chi_c=chi_c,
        chi_homology=chi_h,
        chi_quotient=chi_q,
        group_order=order,
        homology_dim=homology.total_dim,
        identity_holds=abs(chi_c) == order * abs(chi_q),
        parity_hypothesis=len(homology.parity_classes()) <= 1,
        homology_dim_equals_abs_chi=homology.total_dim == abs(chi_h),
    )


def free_lambda_module(r: int, generators: Sequence[Tuple[str, int]],
                       entries: Mapping[Tuple[int, int], ExtElement]) -> Tuple[DgLambdaModule, FreenessCertificate]:
    """Λ ⊗ span(generators) with ∂(gen_b) = Σ_a entries[a, b]·gen_a.

    Basis of degree n: t(I)·gen for each generator of degree n, I in mask order.
    """
    gens = [Generator(name, int(deg)) for name, deg in generators]
    size = 2 ** r
    by_degree: Dict[int, List[int]] = {}
    for g, gen in enumerate(gens):
        by_degree.setdefault(gen.degree, []).append(g)
    position = {g: k for n, gs in by_degree.items() for k, g in enumerate(gs)}

    problems = []
    for (a, b), value in entries.items():
        if value.is_zero():
            continue
        if gens[a].degree != gens[b].degree - 1:
            problems.append(f"entry ({gens[a].name}, {gens[b].name}) joins degrees {gens[b].degree} → {gens[a].degree}")
    if problems:
        raise InvalidModuleError("Λ-module differential has wrong degrees", problems)

    names = {
        n: tuple(
            (gens[g].name if mask == 0 else f"{ExtElement(r, frozenset({mask}))}.{gens[g].name}")
            for g in gs for mask in range(size)
        )
        for n, gs in by_degree.items()
    }
    d = {}
    for n, gs in by_degree.items():
        rows = by_degree.get(n - 1)
        if not rows:
            continue
        out = np.zeros((len(rows) * size, len(gs) * size), dtype=np.int64)
        for b in gs:
            for a in rows:
                value = entries.get((a, b))
                if value is None or value.is_zero():
                    continue
                for mask in range(size):
                    for prod in (mask | e for e in value.terms if not mask & e):
                        out[position[a] * size + prod, position[b] * size + mask] += 1
        d[n] = Gf2Matrix.from_array(out)

    actions = []
    for i in range(r):
        bit = 1 << i
        per_degree = {}
        for n, gs in by_degree.items():
            per_degree[n] = Gf2Matrix.from_entries(
                len(gs) * size, len(gs) * size,
                ((k * size + (mask | bit), k * size + mask)
                 for k in range(len(gs)) for mask in range(size) if not mask & bit),
            )
        actions.append(per_degree)

    module = DgLambdaModule(r, names, GradedKComplex({n: len(gs) * size for n, gs in by_degree.items()}, d), tuple(actions))
    validate_lambda_module(module).raise_if_invalid("Λ-module")
    certificate = FreenessCertificate(
        {n: Gf2Matrix.from_entries(len(gs) * size, len(gs), ((k * size, k) for k in range(len(gs))))
         for n, gs in by_degree.items()},
        {n: tuple(gens[g].name for g in gs) for n, gs in by_degree.items()},
    )
    return module, certificate


# JSON documents

def _require(doc: Mapping[str, Any], key: str):
    if key not in doc:
        raise SchemaError(f"missing key {key!r}")
    return doc[key]


def _generators_from(doc: Mapping[str, Any]) -> List[Tuple[str, int]]:
    gens = []
    for item in _require(doc, "generators"):
        try:
            gens.append((str(item["name"]), int(item["degree"])))
        except (KeyError, TypeError, ValueError):
            raise SchemaError(f"malformed generator {item!r}")
    names = [name for name, _ in gens]
    if len(set(names)) != len(names):
        raise SchemaError("generator names must be distinct")
    return gens


def _matrix_from(doc: Mapping[str, Any], size: int) -> List[List[str]]:
    rows = _require(doc, "differential")
    if len(rows) != size or any(len(row) != size for row in rows):
        raise SchemaError(f"differential must be a {size}x{size} matrix")
    return rows


def s_module_from_dict(doc: Mapping[str, Any]) -> DgSModule:
    r = int(_require(doc, "r"))
    gens = _generators_from(doc)
    rows = _matrix_from(doc, len(gens))
    entries = {
        (a, b): parse_poly(text, r)
        for a, row in enumerate(rows) for b, text in enumerate(row)
    }
    return DgSModule.build(r, gens, entries)


def s_module_to_dict(m: DgSModule) -> Dict[str, Any]:
    return {
        "r": m.r,
        "generators": [{"name": g.name, "degree": g.degree} for g in m.generators],
        "differential": [[format_poly(p) for p in row] for row in m.diff],
    }


def lambda_module_from_dict(doc: Mapping[str, Any]) -> Tuple[DgLambdaModule, Optional[FreenessCertificate]]:
    """Λ-module from a document.

    Without an "action" block the generators present a free module and the
    differential has "t{...}" entries. With one, the generators are a k-basis,
    the differential has entries "0"/"1" and g_i permutes the basis as given;
    the certificate is None when that action is not free.
    """
    r = int(_require(doc, "r"))
    gens = _generators_from(doc)
    rows = _matrix_from(doc, len(gens))
    if not doc.get("action"):
        entries = {
            (a, b): parse_ext(text, r)
            for a, row in enumerate(rows) for b, text in enumerate(row)
        }
        return free_lambda_module(r, gens, entries)
    module = _permutation_module(r, gens, rows, doc["action"])
    try:
        certificate = certify_free(module)
    except NotFreeError as e:
        logger.info(f"Λ-module document is not free: {e}")
        certificate = None
    return module, certificate


def _permutation_module(r: int, gens: Sequence[Tuple[str, int]], rows: Sequence[Sequence[str]],
                        raw_action: Mapping[str, Any]) -> DgLambdaModule:
    degree_of = dict(gens)
    by_degree: Dict[int, List[str]] = {}
    for name, n in gens:
        by_degree.setdefault(n, []).append(name)
    position = {name: k for names in by_degree.values() for k, name in enumerate(names)}

    perms: List[Dict[str, str]] = []
    for i in range(1, r + 1):
        pairs = raw_action.get(f"g{i}")
        if pairs is None:
            raise SchemaError(f"action of g{i} is missing")
        perm: Dict[str, str] = {}
        for a, b in pairs.items():
            if a not in degree_of or b not in degree_of:
                raise SchemaError(f"action of g{i} names unknown generators {a!r}, {b!r}")
            if degree_of[a] != degree_of[b]:
                raise InvalidModuleError(f"g{i} sends {a} to {b} of another degree")
            for src, dst in ((a, b), (b, a)):
                if perm.get(src, dst) != dst:
                    raise InvalidModuleError(f"g{i} is not an involution at {src}")
                perm[src] = dst
        perms.append(perm)

    actions: List[Dict[int, Gf2Matrix]] = [{} for _ in range(r)]
    for n, names in by_degree.items():
        matrices = lambda_action_matrices(
            len(names), [[position[perm.get(name, name)] for name in names] for perm in perms]
        )
        for i, matrix in enumerate(matrices):
            actions[i][n] = matrix

    entries: Dict[int, List[Tuple[int, int]]] = {}
    for a, row in enumerate(rows):
        for b, text in enumerate(row):
            value = parse_ext(text, r)
            if value.is_zero():
                continue
            if value.terms != frozenset({0}):
                raise SchemaError(f"entry ({gens[a][0]}, {gens[b][0]}) must be 0 or 1 when an action is given")
            if gens[a][1] != gens[b][1] - 1:
                raise InvalidModuleError(
                    f"entry ({gens[a][0]}, {gens[b][0]}) joins degrees {gens[b][1]} → {gens[a][1]}"
                )
            entries.setdefault(gens[b][1], []).append((position[gens[a][0]], position[gens[b][0]]))
    d = {
        n: Gf2Matrix.from_entries(len(by_degree[n - 1]), len(by_degree[n]), entries.get(n, []))
        for n in by_degree if n - 1 in by_degree
    }

    names = {n: tuple(v) for n, v in by_degree.items()}
    module = DgLambdaModule(r, names, GradedKComplex({n: len(v) for n, v in by_degree.items()}, d), tuple(actions))
    validate_lambda_module(module).raise_if_invalid("Λ-module")
    return module


def lambda_module_to_dict(c: DgLambdaModule) -> Dict[str, Any]:
    """Document with an explicit action; every Id + t_i must permute the basis"""
    basis = c.basis
    index = {(name, n): k for k, (name, n) in enumerate(basis)}
    action: Dict[str, Dict[str, str]] = {}
    for i in range(1, c.r + 1):
        pairs: Dict[str, str] = {}
        for n, names in c.names.items():
            moved = (c.t(i, n) + Gf2Matrix.identity(c.dim(n))).to_array()
            if (moved.sum(axis=0) != 1).any() or (moved.sum(axis=1) != 1).any():
                raise SchemaError(f"t{i} in degree {n} is not Id plus a basis permutation")
            for b, name in enumerate(names):
                image = names[int(moved[:, b].argmax())]
                if image != name:
                    pairs[name] = image
        action[f"g{i}"] = pairs

    rows = [["0"] * len(basis) for _ in basis]
    for n in c.degrees:
        if n - 1 not in c.names:
            continue
        block = c.complex.differential(n).to_array()
        for a, b in zip(*np.nonzero(block)):
            rows[index[(c.names[n - 1][a], n - 1)]][index[(c.names[n][b], n)]] = "1"
    return {
        "r": c.r,
        "generators": [{"name": name, "degree": n} for name, n in basis],
        "differential": rows,
        "action": action,
    }
