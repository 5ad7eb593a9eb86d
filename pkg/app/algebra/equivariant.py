"""
Finite cell complexes with a free action of G = (Z/2)^r.

Cells are named; g_i acts by a fixed-point-free involution of the names and
the boundary of each cell is an F2 sum of cells. Simplicial vertex lists are
optional and only needed for the Alexander-Whitney coproduct.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple
import logging
import random

import numpy as np

from app.algebra.dg_module import (
    DgLambdaModule,
    FreenessCertificate,
    free_lambda_module,
    reduce_mod_augmentation,
    validate_lambda_module,
)
from app.algebra.errors import BoundsExceededError, InvalidComplexError, NotFreeError, SchemaError
from app.algebra.gf2 import Gf2Matrix, GradedKComplex
from app.algebra.graded import ExtElement, GroupElement, indices_of, parse_groupword

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cell:
    name: str
    dim: int
    vertices: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class FreeGComplex:
    """Validated free G-complex; ``cells`` are kept in canonical order"""

    r: int
    cells: Tuple[Cell, ...]
    action: Tuple[Dict[str, str], ...]
    boundary: Dict[str, FrozenSet[str]]

    @property
    def group_order(self) -> int:
        return 2 ** self.r

    def cell(self, name: str) -> Cell:
        return self._by_name()[name]

    def _by_name(self) -> Dict[str, Cell]:
        return {c.name: c for c in self.cells}

    def act(self, mask: int, name: str) -> str:
        for i in indices_of(mask):
            name = self.action[i - 1][name]
        return name

    def orbit(self, name: str) -> List[str]:
        return [self.act(mask, name) for mask in range(self.group_order)]

    def orbit_representatives(self) -> List[str]:
        return sorted({min(self.orbit(c.name)) for c in self.cells})

    def dims(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for c in self.cells:
            out[c.dim] = out.get(c.dim, 0) + 1
        return out

    def names_by_dim(self) -> Dict[int, Tuple[str, ...]]:
        out: Dict[int, List[str]] = {}
        for c in self.cells:
            out.setdefault(c.dim, []).append(c.name)
        return {n: tuple(v) for n, v in out.items()}

    @property
    def is_simplicial(self) -> bool:
        return all(c.vertices is not None for c in self.cells)


def _orbit_position(r: int, action: Sequence[Mapping[str, str]], name: str) -> Tuple[str, int]:
    """(least name in the orbit, group mask taking it to ``name``)"""
    def act(mask: int, cell: str) -> str:
        for i in indices_of(mask):
            cell = action[i - 1][cell]
        return cell

    translates = {mask: act(mask, name) for mask in range(2 ** r)}
    rep = min(translates.values())
    mask_to_rep = next(m for m, n in translates.items() if n == rep)
    # masks are their own inverses
    return rep, mask_to_rep


def canonical_order(r: int, cells: Iterable[Cell], action: Sequence[Mapping[str, str]]) -> List[Cell]:
    """Dimension, then orbit representative name, then group element"""
    def key(c: Cell):
        rep, mask = _orbit_position(r, action, c.name)
        return (c.dim, rep, mask)
    return sorted(cells, key=key)


def validate_complex(r: int, cells: Sequence[Cell], action: Sequence[Mapping[str, str]],
                     boundary: Mapping[str, FrozenSet[str]]) -> List[str]:
    problems = []
    by_name = {c.name: c for c in cells}
    if len(by_name) != len(cells):
        problems.append("cell names are not distinct")
    if len(action) != r:
        problems.append(f"expected actions of {r} generators, got {len(action)}")
        return problems

    for i, perm in enumerate(action, start=1):
        for name in by_name:
            image = perm.get(name)
            if image is None or image not in by_name:
                problems.append(f"g{i} is not defined on cell {name}")
            elif perm.get(image) != name:
                problems.append(f"g{i} is not an involution on cell {name}")
            elif by_name[image].dim != by_name[name].dim:
                problems.append(f"g{i} sends {name} to a cell of another dimension")
    if problems:
        return problems

    for i in range(r):
        for j in range(i + 1, r):
            for name in by_name:
                if action[i][action[j][name]] != action[j][action[i][name]]:
                    problems.append(f"g{i + 1} and g{j + 1} do not commute on cell {name}")
                    break
    if problems:
        return problems

    seen = set()
    for name in sorted(by_name):
        if name in seen:
            continue
        orbit = set()
        for mask in range(2 ** r):
            cell = name
            for k in indices_of(mask):
                cell = action[k - 1][cell]
            orbit.add(cell)
        seen |= orbit
        if len(orbit) != 2 ** r:
            problems.append(
                f"orbit {{{', '.join(sorted(orbit))}}} has size {len(orbit)}, a free orbit has size {2 ** r}"
            )
    if problems:
        return problems

    for name, faces in boundary.items():
        if name not in by_name:
            problems.append(f"boundary given for unknown cell {name}")
            continue
        for face in faces:
            if face not in by_name:
                problems.append(f"boundary of {name} names unknown cell {face}")
            elif by_name[face].dim != by_name[name].dim - 1:
                problems.append(f"boundary of {name} contains {face} of dimension {by_name[face].dim}")
    if problems:
        return problems

    for i, perm in enumerate(action, start=1):
        for name in by_name:
            moved = frozenset(perm[f] for f in boundary.get(name, frozenset()))
            if moved != boundary.get(perm[name], frozenset()):
                problems.append(f"boundary is not equivariant: ∂(g{i}·{name}) ≠ g{i}·∂{name}")

    for name in by_name:
        acc = set()
        for face in boundary.get(name, frozenset()):
            acc ^= set(boundary.get(face, frozenset()))
        if acc:
            problems.append(f"∂∂{name} = {' + '.join(sorted(acc))} ≠ 0")
    return problems


def make_complex(r: int, cells: Sequence[Cell], action: Sequence[Mapping[str, str]],
                 boundary: Mapping[str, Iterable[str]]) -> FreeGComplex:
    """Validate and put the cells in canonical order"""
    sums = {}
    for name, faces in boundary.items():
        acc = set()
        for face in faces:
            acc ^= {face}
        sums[name] = frozenset(acc)
    for c in cells:
        sums.setdefault(c.name, frozenset())
    problems = validate_complex(r, cells, action, sums)
    if problems:
        error = NotFreeError if any("orbit" in p for p in problems) else InvalidComplexError
        raise error(f"invalid free G-complex: {problems[0]}")
    ordered = canonical_order(r, cells, action)
    return FreeGComplex(r, tuple(ordered), tuple(dict(a) for a in action), sums)


def to_lambda_module(x: FreeGComplex) -> Tuple[DgLambdaModule, FreenessCertificate]:
    """Cellular chains with T_i = Id + P_{g_i}; one orbit representative per free orbit"""
    names = x.names_by_dim()
    index = {n: {name: k for k, name in enumerate(v)} for n, v in names.items()}
    dim_of = {c.name: c.dim for c in x.cells}

    d = {}
    for n, cols in names.items():
        if n - 1 not in names:
            continue
        d[n] = Gf2Matrix.from_entries(
            len(names[n - 1]), len(cols),
            ((index[n - 1][face], k) for k, name in enumerate(cols) for face in x.boundary[name]),
        )
    complex_ = GradedKComplex({n: len(v) for n, v in names.items()}, d)

    actions = []
    for i in range(x.r):
        per_degree = {}
        for n, cols in names.items():
            size = len(cols)
            perm = Gf2Matrix.from_entries(size, size, ((index[n][x.action[i][name]], k) for k, name in enumerate(cols)))
            per_degree[n] = Gf2Matrix.identity(size) + perm
        actions.append(per_degree)

    module = DgLambdaModule(x.r, names, complex_, tuple(actions))
    validate_lambda_module(module).raise_if_invalid("cellular chains")

    reps = x.orbit_representatives()
    certificate_cols: Dict[int, List[int]] = {}
    orbit_names: Dict[int, List[str]] = {}
    for rep in reps:
        n = dim_of[rep]
        certificate_cols.setdefault(n, []).append(index[n][rep])
        orbit_names.setdefault(n, []).append(rep)
    certificate = FreenessCertificate(
        {n: Gf2Matrix.identity(len(names[n])).select_columns(certificate_cols.get(n, [])) for n in names},
        {n: tuple(v) for n, v in orbit_names.items()},
    )
    return module, certificate


def quotient_complex(x: FreeGComplex) -> GradedKComplex:
    """k ⊗_Λ C: the cellular chains of X/G, one cell per orbit"""
    module, certificate = to_lambda_module(x)
    return reduce_mod_augmentation(module, certificate)


# Builtins

def _translate_name(r: int, mask: int, name: str) -> str:
    return name if mask == 0 else f"{GroupElement(r, mask)}.{name}"


def _orbit_complex(r: int) -> FreeGComplex:
    cells = [Cell(_translate_name(r, mask, "a"), 0) for mask in range(2 ** r)]
    action = [
        {_translate_name(r, mask, "a"): _translate_name(r, mask ^ (1 << i), "a") for mask in range(2 ** r)}
        for i in range(r)
    ]
    return make_complex(r, cells, action, {})


def _sphere_complex(n: int) -> FreeGComplex:
    cells, boundary, action = [], {}, {}
    for k in range(n + 1):
        e, ge = f"e{k}", f"g1.e{k}"
        cells += [Cell(e, k), Cell(ge, k)]
        action[e], action[ge] = ge, e
        if k > 0:
            faces = [f"e{k - 1}", f"g1.e{k - 1}"]
            boundary[e] = faces
            boundary[ge] = faces
    return make_complex(1, cells, [action], boundary)


_CIRCLE_CELLS = {"v0": 0, "v1": 0, "e0": 1, "e1": 1}
_CIRCLE_SWAP = {"v0": "v1", "v1": "v0", "e0": "e1", "e1": "e0"}
_CIRCLE_BOUNDARY = {"v0": [], "v1": [], "e0": ["v0", "v1"], "e1": ["v0", "v1"]}


def _torus_complex(r: int) -> FreeGComplex:
    def name(coords: Sequence[str]) -> str:
        return "(" + ",".join(coords) + ")"

    cells, boundary = [], {}
    action = [dict() for _ in range(r)]
    for coords in product(sorted(_CIRCLE_CELLS), repeat=r):
        cell = name(coords)
        cells.append(Cell(cell, sum(_CIRCLE_CELLS[c] for c in coords)))
        for i in range(r):
            moved = list(coords)
            moved[i] = _CIRCLE_SWAP[coords[i]]
            action[i][cell] = name(moved)
        faces = []
        for i, c in enumerate(coords):
            for face in _CIRCLE_BOUNDARY[c]:
                faces.append(name(list(coords[:i]) + [face] + list(coords[i + 1:])))
        boundary[cell] = faces
    return make_complex(r, cells, action, boundary)


def _simplicial_circle() -> FreeGComplex:
    vertices = [Cell(f"a{k}", 0, (f"a{k}",)) for k in range(4)]
    edges = [Cell(f"b{i}{j}", 1, (f"a{i}", f"a{j}")) for i, j in ((0, 1), (1, 2), (2, 3), (3, 0))]
    action = {f"a{k}": f"a{(k + 2) % 4}" for k in range(4)}
    action.update({"b01": "b23", "b23": "b01", "b12": "b30", "b30": "b12"})
    boundary = {e.name: list(e.vertices) for e in edges}
    return make_complex(1, vertices + edges, [action], boundary)


BUILTIN_NAMES = ("orbit", "sphere", "torus", "simplicial-circle")


def builtin(name: str, r: int = 1, n: int = 1) -> FreeGComplex:
    """Standard free complexes: the orbit G, the antipodal n-sphere, the r-torus, a simplicial circle"""
    if name == "orbit":
        if r < 0:
            raise InvalidComplexError("orbit needs r ≥ 0")
        return _orbit_complex(r)
    if name == "sphere":
        if r != 1 or n < 0:
            raise InvalidComplexError(f"sphere needs r = 1 and n ≥ 0, got r={r}, n={n}")
        return _sphere_complex(n)
    if name == "torus":
        if r < 1:
            raise InvalidComplexError("torus needs r ≥ 1")
        return _torus_complex(r)
    if name == "simplicial-circle":
        if r != 1:
            raise InvalidComplexError("simplicial-circle needs r = 1")
        return _simplicial_circle()
    raise InvalidComplexError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


# JSON documents

def parse_complex(doc: Mapping[str, Any]) -> FreeGComplex:
    """Complex from the JSON document form; the action is completed by symmetry
    and boundaries missing for some cells of an orbit are completed by equivariance"""
    try:
        r = int(doc["r"])
        raw_cells = doc["cells"]
    except (KeyError, TypeError, ValueError):
        raise SchemaError("complex document needs 'r' and 'cells'")

    cells = []
    for item in raw_cells:
        try:
            vertices = item.get("vertices")
            cells.append(Cell(str(item["name"]), int(item["dim"]), tuple(vertices) if vertices is not None else None))
        except (KeyError, TypeError, ValueError, AttributeError):
            raise SchemaError(f"malformed cell {item!r}")
    names = {c.name for c in cells}

    action: List[Dict[str, str]] = []
    raw_action = doc.get("action") or {}
    for i in range(1, r + 1):
        pairs = raw_action.get(f"g{i}")
        if pairs is None:
            raise SchemaError(f"action of g{i} is missing")
        perm: Dict[str, str] = {}
        for a, b in pairs.items():
            if a not in names or b not in names:
                raise SchemaError(f"action of g{i} names unknown cells {a!r}, {b!r}")
            for src, dst in ((a, b), (b, a)):
                if perm.get(src, dst) != dst:
                    raise InvalidComplexError(f"g{i} is not an involution at cell {src}")
                perm[src] = dst
        action.append(perm)

    raw_boundary = doc.get("boundary") or {}
    given: Dict[str, FrozenSet[str]] = {}
    for cell, terms in raw_boundary.items():
        acc = set()
        for term in terms:
            try:
                word, face = term
            except (TypeError, ValueError):
                raise SchemaError(f"boundary term {term!r} of {cell} must be [groupword, cell]")
            mask = parse_groupword(word, r)
            target = face
            for k in indices_of(mask):
                if target not in action[k - 1]:
                    raise SchemaError(f"g{k} is not defined on cell {target}")
                target = action[k - 1][target]
            acc ^= {target}
        given[cell] = frozenset(acc)

    full = dict(given)
    if all(len(p) == len(names) for p in action):
        for c in cells:
            if c.name in full:
                continue
            for mask in range(1, 2 ** r):
                source = c.name
                for k in indices_of(mask):
                    source = action[k - 1][source]
                if source in given:
                    faces = set()
                    for f in given[source]:
                        for k in indices_of(mask):
                            f = action[k - 1][f]
                        faces.add(f)
                    full[c.name] = frozenset(faces)
                    break
    return make_complex(r, cells, action, full)


def serialize_complex(x: FreeGComplex) -> Dict[str, Any]:
    cells = []
    for c in x.cells:
        item: Dict[str, Any] = {"name": c.name, "dim": c.dim}
        if c.vertices is not None:
            item["vertices"] = list(c.vertices)
        cells.append(item)
    action = {}
    for i, perm in enumerate(x.action, start=1):
        pairs = {}
        for c in x.cells:
            a, b = c.name, perm[c.name]
            if a < b:
                pairs[a] = b
        action[f"g{i}"] = pairs
    order = {c.name: k for k, c in enumerate(x.cells)}
    boundary = {
        c.name: [["1", face] for face in sorted(x.boundary[c.name], key=order.get)]
        for c in x.cells if x.boundary[c.name]
    }
    return {"r": x.r, "cells": cells, "action": action, "boundary": boundary}


# Alexander-Whitney coproduct and cochains

def aw_coproduct(x: FreeGComplex) -> Gf2Matrix:
    """Δ(σ) = Σ_k front_k(σ) ⊗ back_{n-k}(σ) as an N²×N matrix in canonical cell order.

    Pair (a, b) has row index a·N + b.
    """
    if not x.is_simplicial:
        raise InvalidComplexError("cells lack simplicial vertex lists")
    by_vertices = {c.vertices: k for k, c in enumerate(x.cells)}
    size = len(x.cells)
    entries = []
    for col, c in enumerate(x.cells):
        verts = c.vertices
        for k in range(len(verts)):
            front, back = verts[: k + 1], verts[k:]
            if front not in by_vertices or back not in by_vertices:
                raise InvalidComplexError(f"face {front} or {back} of {c.name} is not a cell")
            entries.append((by_vertices[front] * size + by_vertices[back], col))
    return Gf2Matrix.from_entries(size * size, size, entries)


def permutation_matrix(x: FreeGComplex, mask: int) -> Gf2Matrix:
    index = {c.name: k for k, c in enumerate(x.cells)}
    size = len(x.cells)
    return Gf2Matrix.from_entries(size, size, ((index[x.act(mask, c.name)], k) for k, c in enumerate(x.cells)))


@dataclass
class CoproductChecks:
    coassociative: bool
    chain_map: bool
    group_equivariant: List[bool]
    t_equivariant: List[bool]


def interchange_defects(x: FreeGComplex) -> CoproductChecks:
    """Δ∘g = (g⊗g)∘Δ in the group basis; the same test for t_i = 1 + g_i"""
    delta = aw_coproduct(x)
    module, _ = to_lambda_module(x)
    size = len(x.cells)
    identity = Gf2Matrix.identity(size)
    boundary = module.complex.global_differential()

    coassociative = identity.kron(delta) @ delta == delta.kron(identity) @ delta
    chain_map = delta @ boundary == (boundary.kron(identity) + identity.kron(boundary)) @ delta

    group_ok, t_ok = [], []
    for i in range(1, x.r + 1):
        g = permutation_matrix(x, 1 << (i - 1))
        t = identity + g
        group_ok.append(delta @ g == g.kron(g) @ delta)
        t_ok.append(delta @ t == t.kron(t) @ delta)
    return CoproductChecks(coassociative, chain_map, group_ok, t_ok)


@dataclass(frozen=True, eq=False)
class CochainAlgebra:
    """Cochains as a homological complex (cochains on n-cells in degree -n), δ = ∂ᵀ,
    with the cup product μ = Δᵀ: N × N² in the complex's global basis"""

    complex: GradedKComplex
    product: Gf2Matrix
    names: Dict[int, Tuple[str, ...]]


def cochain_algebra(x: FreeGComplex) -> CochainAlgebra:
    module, _ = to_lambda_module(x)
    chains = module.complex
    names = {-n: v for n, v in x.names_by_dim().items()}
    d = {}
    for n in chains.degrees:
        if n + 1 in chains.dims:
            d[-n] = chains.differential(n + 1).transpose()
    cochains = GradedKComplex({-n: v for n, v in chains.dims.items()}, d)

    # cell order (dims ascending) to the cochain global order (degrees ascending)
    size = len(x.cells)
    cell_offsets = chains.offsets()
    cochain_offsets = cochains.offsets()
    perm = np.zeros(size, dtype=np.int64)
    for n in chains.degrees:
        for k in range(chains.dim(n)):
            perm[cell_offsets[n] + k] = cochain_offsets[-n] + k

    mu_cells = aw_coproduct(x).transpose().to_array()
    mu = np.zeros_like(mu_cells)
    pair_perm = (perm[:, None] * size + perm[None, :]).reshape(-1)
    mu[np.ix_(perm, pair_perm)] = mu_cells
    return CochainAlgebra(cochains, Gf2Matrix.from_array(mu), names)


# Random instances

def random_free_complex(r: int, seed: int, max_cells: int = 24, top_dim: int = 2,
                        density: float = 0.5) -> Tuple[DgLambdaModule, FreenessCertificate]:
    """Random free Λ-module: each ∂ column is a random element of ker ∂ one degree down"""
    if 2 ** r > max_cells:
        raise BoundsExceededError(f"a single free orbit for r={r} already exceeds {max_cells} cells")
    rng = random.Random(seed)
    orbit_budget = max_cells // (2 ** r)
    counts = []
    for n in range(top_dim + 1):
        remaining = orbit_budget - sum(counts)
        if remaining <= 0:
            break
        counts.append(rng.randint(1, max(1, min(2, remaining))))

    generators = []
    for n, count in enumerate(counts):
        generators += [(f"c{n}_{k}", n) for k in range(count)]

    entries: Dict[Tuple[int, int], ExtElement] = {}
    offset = {n: sum(counts[:n]) for n in range(len(counts))}
    size = 2 ** r
    for n in range(1, len(counts)):
        partial, _ = free_lambda_module(r, generators[: offset[n]], entries)
        cycles = partial.complex.differential(n - 1).kernel_basis() if n - 1 > 0 \
            else Gf2Matrix.identity(partial.dim(0))
        for k in range(counts[n]):
            b = offset[n] + k
            combo = [j for j in range(cycles.cols) if rng.random() < density]
            vector = np.zeros(partial.dim(n - 1), dtype=np.int64)
            for j in combo:
                vector += cycles.column(j)
            vector %= 2
            for a_local in range(counts[n - 1]):
                masks = [m for m in range(size) if vector[a_local * size + m]]
                if masks:
                    entries[(offset[n - 1] + a_local, b)] = ExtElement.of(r, masks)

    return free_lambda_module(r, generators, entries)
