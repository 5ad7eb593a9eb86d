"""
Dense linear algebra over the two-element field.

Matrices keep their rows packed into bytes (little bit order, so column ``c``
lives in byte ``c >> 3`` under mask ``1 << (c & 7)``). Row reduction works on
the packed rows directly; products unpack to small integer arrays.

The second half of the module builds deformation retracts of finite graded
complexes onto their homology, which every higher construction consumes.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
import logging

import numpy as np

from app.algebra.errors import (
    DimensionMismatchError,
    InconsistentSystemError,
    InvalidComplexError,
)

logger = logging.getLogger(__name__)


def _pack(array: np.ndarray) -> np.ndarray:
    return np.packbits(array, axis=1, bitorder="little")


def _eliminate(packed: np.ndarray, n_pivot_cols: int) -> Tuple[np.ndarray, List[int]]:
    """Gauss-Jordan elimination on packed rows; pivots searched in the first columns only"""
    reduced = packed.copy()
    n_rows = reduced.shape[0]
    pivots: List[int] = []
    pivot_row = 0

    for col in range(n_pivot_cols):
        if pivot_row == n_rows:
            break
        byte, mask = col >> 3, np.uint8(1 << (col & 7))

        candidates = np.nonzero(reduced[pivot_row:, byte] & mask)[0]
        if candidates.size == 0:
            continue

        found = pivot_row + int(candidates[0])
        if found != pivot_row:
            reduced[[pivot_row, found]] = reduced[[found, pivot_row]]

        hits = np.nonzero(reduced[:, byte] & mask)[0]
        hits = hits[hits != pivot_row]
        if hits.size:
            reduced[hits] ^= reduced[pivot_row]

        pivots.append(col)
        pivot_row += 1

    return reduced, pivots


class Gf2Matrix:
    """Immutable dense matrix over F2"""

    __slots__ = ("rows", "cols", "_bits")

    def __init__(self, rows: int, cols: int, bits: np.ndarray):
        if rows < 0 or cols < 0:
            raise DimensionMismatchError(f"negative shape {rows}x{cols}")
        expected = (rows, (cols + 7) // 8)
        if bits.shape != expected:
            raise DimensionMismatchError(f"packed storage {bits.shape} does not match {expected}")
        bits = bits.astype(np.uint8, copy=True)
        if cols % 8 and bits.size:
            # padding bits past the last column stay zero
            bits[:, -1] &= np.uint8((1 << (cols % 8)) - 1)
        bits.flags.writeable = False
        self.rows = rows
        self.cols = cols
        self._bits = bits

    # construction

    @classmethod
    def from_array(cls, array) -> "Gf2Matrix":
        arr = np.asarray(array, dtype=np.int64)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-dimensional array, got {arr.ndim}")
        arr = (arr & 1).astype(np.uint8)
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Gf2Matrix":
        return cls(rows, cols, np.zeros((rows, (cols + 7) // 8), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "Gf2Matrix":
        if not rows:
            return cls.zeros(0, cols or 0)
        return cls.from_array(np.array(rows, dtype=np.int64).reshape(len(rows), -1))

    @classmethod
    def from_columns(cls, columns: Sequence[np.ndarray], rows: int) -> "Gf2Matrix":
        if not columns:
            return cls.zeros(rows, 0)
        return cls.from_array(np.stack([np.asarray(c, dtype=np.int64) for c in columns], axis=1))

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[Tuple[int, int]]) -> "Gf2Matrix":
        """Sum of elementary matrices; repeated positions cancel"""
        arr = np.zeros((rows, cols), dtype=np.int64)
        for i, j in entries:
            arr[i, j] += 1
        return cls.from_array(arr)

    @classmethod
    def parse(cls, text: str) -> "Gf2Matrix":
        """Inverse of ``dump``"""
        lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
        return cls.from_rows([[int(ch) for ch in line] for line in lines])

    # views

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def to_array(self) -> np.ndarray:
        if self.cols == 0 or self.rows == 0:
            return np.zeros((self.rows, self.cols), dtype=np.uint8)
        return np.unpackbits(self._bits, axis=1, count=self.cols, bitorder="little")

    def dump(self) -> str:
        """Debug text: one row per line, '0'/'1' characters"""
        return "\n".join("".join(str(int(v)) for v in row) for row in self.to_array())

    def __repr__(self) -> str:
        return f"Gf2Matrix({self.rows}x{self.cols}, rank={self.rank()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Gf2Matrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._bits, other._bits)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._bits.tobytes()))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return int((self._bits[i, j >> 3] >> (j & 7)) & 1)

    # arithmetic

    def __add__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.shape != other.shape:
            raise DimensionMismatchError(f"cannot add {self.shape} and {other.shape}")
        return Gf2Matrix(self.rows, self.cols, self._bits ^ other._bits)

    __sub__ = __add__

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.rows:
            raise DimensionMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return Gf2Matrix.zeros(self.rows, other.cols)
        # float products go through BLAS; counts stay far below 2**53
        product = self.to_array().astype(np.float64) @ other.to_array().astype(np.float64)
        return Gf2Matrix.from_array(np.rint(product).astype(np.int64))

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix.from_array(self.to_array().T)

    @property
    def T(self) -> "Gf2Matrix":
        return self.transpose()

    def is_zero(self) -> bool:
        return not self._bits.any()

    def kron(self, other: "Gf2Matrix") -> "Gf2Matrix":
        """Tensor product; pair (a, b) is indexed a * other.size + b"""
        return Gf2Matrix.from_array(np.kron(self.to_array().astype(np.int64), other.to_array().astype(np.int64)))

    def select_columns(self, indices: Sequence[int]) -> "Gf2Matrix":
        return Gf2Matrix.from_array(self.to_array()[:, list(indices)].reshape(self.rows, len(indices)))

    def select_rows(self, indices: Sequence[int]) -> "Gf2Matrix":
        idx = list(indices)
        return Gf2Matrix(len(idx), self.cols, self._bits[idx].reshape(len(idx), self._bits.shape[1]))

    def column(self, j: int) -> np.ndarray:
        return self.to_array()[:, j].copy()

    @staticmethod
    def hstack(blocks: Sequence["Gf2Matrix"], rows: Optional[int] = None) -> "Gf2Matrix":
        if not blocks:
            return Gf2Matrix.zeros(rows or 0, 0)
        heights = {b.rows for b in blocks}
        if len(heights) != 1:
            raise DimensionMismatchError(f"hstack of blocks with heights {sorted(heights)}")
        return Gf2Matrix.from_array(np.hstack([b.to_array() for b in blocks]))

    @staticmethod
    def vstack(blocks: Sequence["Gf2Matrix"], cols: Optional[int] = None) -> "Gf2Matrix":
        if not blocks:
            return Gf2Matrix.zeros(0, cols or 0)
        widths = {b.cols for b in blocks}
        if len(widths) != 1:
            raise DimensionMismatchError(f"vstack of blocks with widths {sorted(widths)}")
        return Gf2Matrix.from_array(np.vstack([b.to_array() for b in blocks]))

    # elimination

    def rank(self) -> int:
        return len(_eliminate(self._bits, self.cols)[1])

    def rref(self) -> Tuple["Gf2Matrix", List[int], "Gf2Matrix"]:
        """Reduced row-echelon form, pivot columns and the left transform T with T @ self = reduced"""
        augmented = np.hstack([self.to_array(), np.eye(self.rows, dtype=np.uint8)])
        reduced, pivots = _eliminate(_pack(augmented), self.cols)
        full = np.unpackbits(reduced, axis=1, count=self.cols + self.rows, bitorder="little") \
            if reduced.size else np.zeros((self.rows, self.cols + self.rows), dtype=np.uint8)
        return (
            Gf2Matrix.from_array(full[:, : self.cols].reshape(self.rows, self.cols)),
            pivots,
            Gf2Matrix.from_array(full[:, self.cols:].reshape(self.rows, self.rows)),
        )

    def pivots(self) -> List[int]:
        return _eliminate(self._bits, self.cols)[1]

    def kernel_basis(self) -> "Gf2Matrix":
        """Columns form a basis of the null space"""
        reduced, pivots = _eliminate(self._bits, self.cols)
        dense = np.unpackbits(reduced, axis=1, count=self.cols, bitorder="little") \
            if reduced.size and self.cols else np.zeros((self.rows, self.cols), dtype=np.uint8)
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        basis = np.zeros((self.cols, len(free)), dtype=np.uint8)
        for k, f in enumerate(free):
            basis[f, k] = 1
            for row, p in enumerate(pivots):
                basis[p, k] = dense[row, f]
        return Gf2Matrix.from_array(basis)

    def solve(self, rhs: "Gf2Matrix") -> "Gf2Matrix":
        """Some X with self @ X = rhs; free variables are set to zero"""
        if rhs.rows != self.rows:
            raise DimensionMismatchError(f"cannot solve {self.shape} against {rhs.shape}")
        augmented = np.hstack([self.to_array(), rhs.to_array()])
        width = self.cols + rhs.cols
        if self.rows == 0:
            return Gf2Matrix.zeros(self.cols, rhs.cols)
        reduced, pivots = _eliminate(_pack(augmented), self.cols)
        dense = np.unpackbits(reduced, axis=1, count=width, bitorder="little")

        rank = len(pivots)
        if dense[rank:, self.cols:].any():
            raise InconsistentSystemError("right-hand side is not in the column space")

        solution = np.zeros((self.cols, rhs.cols), dtype=np.uint8)
        for row, p in enumerate(pivots):
            solution[p] = dense[row, self.cols:]
        return Gf2Matrix.from_array(solution)

    def inverse(self) -> "Gf2Matrix":
        if self.rows != self.cols:
            raise DimensionMismatchError(f"non-square matrix {self.shape} has no inverse")
        if self.rank() != self.rows:
            raise InconsistentSystemError("matrix is singular")
        return self.solve(Gf2Matrix.identity(self.rows))


def rref(m: Gf2Matrix) -> Tuple[Gf2Matrix, List[int], Gf2Matrix]:
    return m.rref()


def kernel_basis(m: Gf2Matrix) -> Gf2Matrix:
    return m.kernel_basis()


def block_diagonal(blocks: Sequence[Gf2Matrix]) -> Gf2Matrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = np.zeros((rows, cols), dtype=np.uint8)
    r = c = 0
    for b in blocks:
        out[r:r + b.rows, c:c + b.cols] = b.to_array()
        r += b.rows
        c += b.cols
    return Gf2Matrix.from_array(out)


@dataclass(frozen=True, eq=False)
class GradedKComplex:
    """Finite chain complex of F2-vector spaces; ``d[n]`` maps degree n to degree n-1"""

    dims: Mapping[int, int]
    d: Mapping[int, Gf2Matrix] = field(default_factory=dict)

    def __post_init__(self):
        dims = {int(n): int(v) for n, v in self.dims.items()}
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "d", dict(self.d))
        for n, matrix in self.d.items():
            expected = (self.dim(n - 1), self.dim(n))
            if matrix.shape != expected:
                raise DimensionMismatchError(
                    f"differential in degree {n} has shape {matrix.shape}, expected {expected}"
                )

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    @property
    def degrees(self) -> List[int]:
        return sorted(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def differential(self, n: int) -> Gf2Matrix:
        matrix = self.d.get(n)
        if matrix is None:
            return Gf2Matrix.zeros(self.dim(n - 1), self.dim(n))
        return matrix

    def square_zero_failures(self) -> List[int]:
        return [
            n for n in self.degrees
            if not (self.differential(n - 1) @ self.differential(n)).is_zero()
        ]

    def check(self) -> "GradedKComplex":
        failures = self.square_zero_failures()
        if failures:
            raise InvalidComplexError(f"d∘d is nonzero starting in degrees {failures}")
        return self

    def euler_characteristic(self) -> int:
        return sum((-1) ** (n % 2) * v for n, v in self.dims.items())

    def restrict(self, lo: int, hi: int) -> "GradedKComplex":
        dims = {n: self.dim(n) for n in range(lo, hi + 1)}
        d = {n: self.differential(n) for n in range(lo + 1, hi + 1)}
        return GradedKComplex(dims, d)

    def offsets(self) -> Dict[int, int]:
        """Start index of each degree block in the global (degree-ascending) basis"""
        out, position = {}, 0
        for n in self.degrees:
            out[n] = position
            position += self.dim(n)
        return out

    def global_differential(self) -> Gf2Matrix:
        return assemble_global(self, self, {n: self.differential(n) for n in self.degrees}, shift=-1)


def assemble_global(source: GradedKComplex, target: GradedKComplex,
                    maps: Mapping[int, Gf2Matrix], shift: int) -> Gf2Matrix:
    """Block matrix of a graded map of degree ``shift`` in the global bases"""
    src_offsets, tgt_offsets = source.offsets(), target.offsets()
    out = np.zeros((target.total_dim, source.total_dim), dtype=np.uint8)
    for n, matrix in maps.items():
        if n not in src_offsets or (n + shift) not in tgt_offsets or matrix.rows == 0 or matrix.cols == 0:
            continue
        r, c = tgt_offsets[n + shift], src_offsets[n]
        out[r:r + matrix.rows, c:c + matrix.cols] = matrix.to_array()
    return Gf2Matrix.from_array(out)


def split_global(matrix: Gf2Matrix, source: GradedKComplex, target: GradedKComplex,
                 shift: int) -> Dict[int, Gf2Matrix]:
    """Inverse of ``assemble_global``: the degree-n → degree-(n+shift) blocks"""
    src_offsets, tgt_offsets = source.offsets(), target.offsets()
    dense = matrix.to_array()
    out = {}
    for n in source.degrees:
        if (n + shift) not in tgt_offsets:
            continue
        r, c = tgt_offsets[n + shift], src_offsets[n]
        rows, cols = target.dim(n + shift), source.dim(n)
        out[n] = Gf2Matrix.from_array(dense[r:r + rows, c:c + cols].reshape(rows, cols))
    return out


@dataclass(frozen=True, eq=False)
class HomologyData:
    """Homology of a complex with explicit bases.

    ``representatives[n]`` holds cycles (as columns) whose classes form a basis
    of H_n; ``boundaries[n]`` holds a basis of the boundaries B_n, so the two
    together form a basis of the cycles.
    """

    dims: Dict[int, int]
    representatives: Dict[int, Gf2Matrix]
    boundaries: Dict[int, Gf2Matrix]

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    def nonzero_degrees(self) -> List[int]:
        return sorted(n for n, v in self.dims.items() if v)


@dataclass(frozen=True)
class _DegreeSplitting:
    boundary: Gf2Matrix      # columns: d(lift_above), a basis of B_n
    harmonic: Gf2Matrix      # columns: cycle representatives of H_n
    lift: Gf2Matrix          # columns: standard vectors complementing Z_n
    lift_above: Gf2Matrix    # lift of degree n+1, same order as ``boundary``


def _lift_columns(dn: Gf2Matrix) -> Gf2Matrix:
    """Standard basis vectors at the pivot columns of d_n span a complement of ker d_n"""
    pivots = dn.pivots()
    lift = np.zeros((dn.cols, len(pivots)), dtype=np.uint8)
    for k, p in enumerate(pivots):
        lift[p, k] = 1
    return Gf2Matrix.from_array(lift)


def _split_degrees(c: GradedKComplex) -> Dict[int, _DegreeSplitting]:
    lifts = {n: _lift_columns(c.differential(n)) for n in range(c.degrees[0], c.degrees[-1] + 2)} \
        if c.degrees else {}
    splittings = {}
    for n in c.degrees:
        lift_above = lifts[n + 1]
        boundary = c.differential(n + 1) @ lift_above
        cycles = c.differential(n).kernel_basis()
        stacked = Gf2Matrix.hstack([boundary, cycles], rows=c.dim(n))
        chosen = [p - boundary.cols for p in stacked.pivots() if p >= boundary.cols]
        harmonic = cycles.select_columns(chosen)
        splittings[n] = _DegreeSplitting(boundary, harmonic, lifts[n], lift_above)
    return splittings


def homology_dims(c: GradedKComplex) -> HomologyData:
    """Degreewise homology with representatives; rejects d∘d ≠ 0"""
    c.check()
    splittings = _split_degrees(c)
    return HomologyData(
        dims={n: s.harmonic.cols for n, s in splittings.items()},
        representatives={n: s.harmonic for n, s in splittings.items()},
        boundaries={n: s.boundary for n, s in splittings.items()},
    )


def homology_ranks(c: GradedKComplex, degrees: Optional[Iterable[int]] = None) -> Dict[int, int]:
    """dim H_n from ranks alone; no bases are built"""
    wanted = list(degrees) if degrees is not None else c.degrees
    ranks = {}

    def rank_of(n: int) -> int:
        if n not in ranks:
            ranks[n] = c.differential(n).rank()
        return ranks[n]

    return {n: c.dim(n) - rank_of(n) - rank_of(n + 1) for n in wanted}


@dataclass(frozen=True, eq=False)
class Contraction:
    """Deformation retract (i, p, h) of ``big`` onto ``small``.

    ``i[n]``: small_n → big_n, ``p[n]``: big_n → small_n, ``h[n]``: big_n → big_{n+1}.
    Missing entries are zero maps.
    """

    big: GradedKComplex
    small: GradedKComplex
    i: Mapping[int, Gf2Matrix]
    p: Mapping[int, Gf2Matrix]
    h: Mapping[int, Gf2Matrix]

    def incl(self, n: int) -> Gf2Matrix:
        return self.i.get(n) or Gf2Matrix.zeros(self.big.dim(n), self.small.dim(n))

    def proj(self, n: int) -> Gf2Matrix:
        return self.p.get(n) or Gf2Matrix.zeros(self.small.dim(n), self.big.dim(n))

    def homotopy(self, n: int) -> Gf2Matrix:
        return self.h.get(n) or Gf2Matrix.zeros(self.big.dim(n + 1), self.big.dim(n))

    def verify(self) -> List[str]:
        """Names of the identities that fail, degree by degree; empty when all hold"""
        failures = []
        big, small = self.big, self.small
        for n in sorted(set(big.degrees) | set(small.degrees)):
            i, p, h = self.incl(n), self.proj(n), self.homotopy(n)
            if p @ i != Gf2Matrix.identity(small.dim(n)):
                failures.append(f"p∘i = Id fails in degree {n}")
            lhs = Gf2Matrix.identity(big.dim(n)) + i @ p
            rhs = big.differential(n + 1) @ h + self.homotopy(n - 1) @ big.differential(n)
            if lhs != rhs:
                failures.append(f"Id - i∘p = dh + hd fails in degree {n}")
            if big.differential(n) @ i != self.incl(n - 1) @ small.differential(n):
                failures.append(f"i is not a chain map in degree {n}")
            if self.proj(n - 1) @ big.differential(n) != small.differential(n) @ p:
                failures.append(f"p is not a chain map in degree {n}")
            if not (h @ i).is_zero():
                failures.append(f"h∘i = 0 fails in degree {n}")
            if not (self.proj(n + 1) @ h).is_zero():
                failures.append(f"p∘h = 0 fails in degree {n}")
            if not (self.homotopy(n + 1) @ h).is_zero():
                failures.append(f"h∘h = 0 fails in degree {n}")
        return failures

    def global_maps(self) -> Tuple[Gf2Matrix, Gf2Matrix, Gf2Matrix]:
        """Block matrices of i, p, h in the degree-ascending global bases"""
        return (
            assemble_global(self.small, self.big, {n: self.incl(n) for n in self.small.degrees}, 0),
            assemble_global(self.big, self.small, {n: self.proj(n) for n in self.big.degrees}, 0),
            assemble_global(self.big, self.big, {n: self.homotopy(n) for n in self.big.degrees}, 1),
        )


def build_contraction(c: GradedKComplex) -> Contraction:
    """Contraction of ``c`` onto its homology (zero differential on the small side).

    Each C_n is split as B_n ⊕ H_n ⊕ L_n with L_n spanned by standard vectors
    at the rref pivots of d_n; h sends the boundary d(l) back to l and kills
    H_n ⊕ L_n, which gives the side conditions h∘i = p∘h = h∘h = 0 directly.
    """
    c.check()
    splittings = _split_degrees(c)
    small = GradedKComplex({n: s.harmonic.cols for n, s in splittings.items()})
    i, p, h = {}, {}, {}

    for n, s in splittings.items():
        frame = Gf2Matrix.hstack([s.boundary, s.harmonic, s.lift], rows=c.dim(n))
        coordinates = frame.inverse()
        nb, nh = s.boundary.cols, s.harmonic.cols
        i[n] = s.harmonic
        p[n] = coordinates.select_rows(range(nb, nb + nh))
        h[n] = s.lift_above @ coordinates.select_rows(range(nb))

    logger.debug(f"Built contraction onto homology of total dimension {small.total_dim}")
    return Contraction(big=c, small=small, i=i, p=p, h=h)
