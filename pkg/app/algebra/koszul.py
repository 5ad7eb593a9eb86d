"""
Twisted tensor products and the transfer engine.

``cobar_omega`` builds Λ ⊗ H with differential Σ t_i ⊗ x_i, ``bar_beta`` builds
S_c ⊗ C with differential 1 ⊗ ∂ + Σ sigma_i ⊗ T_i. Both minimal models run the
same core: contract a Λ-module onto its homology, tensor the contraction with
S_c (weight-truncated), perturb by Σ sigma_i ⊗ T_i and read off the transferred
differential, then dualise to a semifree S-module.

All degrees follow ``graded.DEGREE_CONVENTIONS``.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from app.algebra.dg_module import (
    DgLambdaModule,
    DgSModule,
    FreenessCertificate,
    HomologyModule,
    Window,
    as_window,
    certify_free,
    default_window,
    dual_homology,
    homology_dims_in_window,
    homology_of_s_module,
    validate_lambda_module,
    validate_s_module,
)
from app.algebra.errors import (
    BoundsExceededError,
    DimensionMismatchError,
    InternalAssertionError,
    InvalidComplexError,
    InvalidModuleError,
    TerminationBoundExceeded,
)
from app.algebra.gf2 import (
    Contraction,
    Gf2Matrix,
    GradedKComplex,
    assemble_global,
    build_contraction,
    homology_dims,
    homology_ranks,
    split_global,
)
from app.algebra.graded import GradedPoly, Monomial, indices_of, monomials_of_weight, monomials_up_to

logger = logging.getLogger(__name__)


# Cobar side: Λ ⊗ H

def cobar_omega(h: HomologyModule) -> DgLambdaModule:
    """Λ ⊗ H with d(t(I)⊗v) = Σ_{i∉I} t(I∪{i}) ⊗ x_i·v; t(I)⊗v sits in degree deg v"""
    if h.side != "S":
        raise DimensionMismatchError("cobar_omega needs x_i acting on an S-side homology module")
    problems = h.action_problems()
    if problems:
        raise InvalidComplexError(f"inconsistent action matrices: {problems[0]}")

    r, size = h.r, 2 ** h.r
    degrees = sorted(n for n, v in h.dims.items() if v)
    dims = {n: h.dim(n) * size for n in degrees}
    names = {
        n: tuple(
            f"h{n}_{k}" if mask == 0 else "t{" + ",".join(map(str, indices_of(mask))) + "}" + f".h{n}_{k}"
            for k in range(h.dim(n)) for mask in range(size)
        )
        for n in degrees
    }

    d = {}
    for n in degrees:
        if not h.dim(n - 1):
            continue
        out = np.zeros((dims[n - 1], dims[n]), dtype=np.int64)
        for i in range(1, r + 1):
            x = h.action(i, n).to_array()
            bit = 1 << (i - 1)
            for mask in range(size):
                if mask & bit:
                    continue
                for col in range(h.dim(n)):
                    for row in np.nonzero(x[:, col])[0]:
                        out[row * size + (mask | bit), col * size + mask] += 1
        d[n] = Gf2Matrix.from_array(out)

    actions = []
    for i in range(r):
        bit = 1 << i
        actions.append({
            n: Gf2Matrix.from_entries(
                dims[n], dims[n],
                ((k * size + (mask | bit), k * size + mask)
                 for k in range(h.dim(n)) for mask in range(size) if not mask & bit),
            )
            for n in degrees
        })

    complex_ = GradedKComplex(dims, d)
    if complex_.square_zero_failures():
        raise InvalidComplexError("cobar differential does not square to zero; x_i actions must commute")
    module = DgLambdaModule(r, names, complex_, tuple(actions))
    validate_lambda_module(module).raise_if_invalid("cobar construction")
    logger.debug(f"Cobar construction of total dimension {complex_.total_dim}")
    return module


# Bar side: S_c^{≤W} ⊗ V

@dataclass(frozen=True, eq=False)
class CoalgebraTensor:
    """S_c^{≤W} ⊗ V. Slot (m, k) holds γ_m ⊗ V_k in total degree |m| + k.

    ``blocks[N][(m, k)]`` is the offset of that slot inside degree N.
    """

    r: int
    weight: int
    factor: GradedKComplex
    complex: GradedKComplex
    blocks: Dict[int, Dict[Tuple[Monomial, int], int]]

    @staticmethod
    def layout(r: int, weight: int, factor: GradedKComplex) -> Tuple[Dict[int, int], Dict[int, Dict[Tuple[Monomial, int], int]]]:
        blocks: Dict[int, Dict[Tuple[Monomial, int], int]] = {}
        dims: Dict[int, int] = {}
        if not factor.degrees:
            return dims, blocks
        for total in range(factor.degrees[0], factor.degrees[-1] + weight + 1):
            slots, position = {}, 0
            for w in range(weight + 1):
                k = total - w
                if not factor.dim(k):
                    continue
                for m in monomials_of_weight(r, w):
                    slots[(m, k)] = position
                    position += factor.dim(k)
            if position:
                blocks[total] = slots
                dims[total] = position
        return dims, blocks

    @classmethod
    def build(cls, r: int, weight: int, factor: GradedKComplex,
              t_action: Optional[Sequence[Mapping[int, Gf2Matrix]]] = None) -> "CoalgebraTensor":
        """Tensor with d = 1⊗d_V, plus Σ sigma_i⊗T_i when ``t_action`` is given"""
        dims, blocks = cls.layout(r, weight, factor)
        skeleton = cls(r, weight, factor, GradedKComplex(dims), blocks)
        d = lift_map(skeleton, skeleton, {n: factor.differential(n) for n in factor.degrees}, -1)
        if t_action is not None:
            twist = lift_sigma(skeleton, t_action)
            d = {n: d.get(n, _zero_block(skeleton, n, -1)) + twist.get(n, _zero_block(skeleton, n, -1))
                 for n in set(d) | set(twist)}
        return cls(r, weight, factor, GradedKComplex(dims, d), blocks)

    def slot_index(self, total: int, m: Monomial, k: int, j: int) -> int:
        return self.blocks[total][(m, k)] + j

    def valid_degrees(self) -> List[int]:
        """Degrees where homology of the truncation equals that of the full tensor"""
        if not self.factor.degrees:
            return []
        top = self.factor.degrees[0] + self.weight - 1
        return [n for n in self.complex.degrees if n <= top]

    def weight_zero_part(self) -> GradedKComplex:
        one = Monomial.one(self.r)
        d = {}
        for n in self.factor.degrees:
            if n - 1 not in self.factor.dims or n not in self.blocks:
                continue
            src = self.blocks[n][(one, n)]
            tgt = self.blocks[n - 1][(one, n - 1)]
            block = self.complex.differential(n).to_array()
            rows, cols = self.factor.dim(n - 1), self.factor.dim(n)
            d[n] = Gf2Matrix.from_array(block[tgt:tgt + rows, src:src + cols].reshape(rows, cols))
        return GradedKComplex(dict(self.factor.dims), d)


def _zero_block(t: CoalgebraTensor, n: int, shift: int) -> Gf2Matrix:
    return Gf2Matrix.zeros(t.complex.dim(n + shift), t.complex.dim(n))


def lift_map(source: CoalgebraTensor, target: CoalgebraTensor,
             maps: Mapping[int, Gf2Matrix], shift: int) -> Dict[int, Gf2Matrix]:
    """1 ⊗ f for f: V_k → V'_{k+shift}, per total degree of the source"""
    out = {}
    for total, slots in source.blocks.items():
        if total + shift not in target.blocks:
            continue
        tgt_slots = target.blocks[total + shift]
        dense = np.zeros((target.complex.dim(total + shift), source.complex.dim(total)), dtype=np.uint8)
        for (m, k), offset in slots.items():
            f = maps.get(k)
            key = (m, k + shift)
            if f is None or key not in tgt_slots or f.rows == 0 or f.cols == 0:
                continue
            row = tgt_slots[key]
            dense[row:row + f.rows, offset:offset + f.cols] = f.to_array()
        out[total] = Gf2Matrix.from_array(dense)
    return out


def lift_sigma(tensor: CoalgebraTensor, t_action: Sequence[Mapping[int, Gf2Matrix]]) -> Dict[int, Gf2Matrix]:
    """Σ_i sigma_i ⊗ T_i: γ_m⊗v ↦ Σ_i γ_{m/x_i} ⊗ T_i v"""
    out = {}
    for total, slots in tensor.blocks.items():
        if total - 1 not in tensor.blocks:
            continue
        tgt_slots = tensor.blocks[total - 1]
        dense = np.zeros((tensor.complex.dim(total - 1), tensor.complex.dim(total)), dtype=np.int64)
        for (m, k), offset in slots.items():
            for i in range(1, tensor.r + 1):
                quotient = m.divide(i)
                t = t_action[i - 1].get(k)
                if quotient is None or t is None or (quotient, k) not in tgt_slots:
                    continue
                row = tgt_slots[(quotient, k)]
                dense[row:row + t.rows, offset:offset + t.cols] += t.to_array()
        out[total] = Gf2Matrix.from_array(dense)
    return out


def bar_beta(c: DgLambdaModule, weight: int) -> CoalgebraTensor:
    """S_c^{≤weight} ⊗ C with differential 1⊗∂ + Σ sigma_i⊗T_i"""
    if weight < 0:
        raise BoundsExceededError(f"weight bound must be non-negative, got {weight}")
    tensor = CoalgebraTensor.build(c.r, weight, c.complex, c.t_action)
    failures = tensor.complex.square_zero_failures()
    if failures:
        raise InvalidComplexError(f"bar differential does not square to zero in degrees {failures}")
    return tensor


# Perturbation lemma

@dataclass(frozen=True, eq=False)
class Perturbation:
    target: GradedKComplex
    delta: Dict[int, Gf2Matrix]
    filtration_bound: int

    def global_matrix(self) -> Gf2Matrix:
        return assemble_global(self.target, self.target, self.delta, -1)


@dataclass(frozen=True, eq=False)
class TransferResult:
    """Perturbed retract: maps are global block matrices in degree-ascending bases"""

    big: GradedKComplex
    small: GradedKComplex
    incl: Gf2Matrix
    proj: Gf2Matrix
    homotopy: Gf2Matrix
    series_length: int

    def as_contraction(self) -> Contraction:
        return Contraction(
            big=self.big,
            small=self.small,
            i=split_global(self.incl, self.small, self.big, 0),
            p=split_global(self.proj, self.big, self.small, 0),
            h=split_global(self.homotopy, self.big, self.big, 1),
        )

    def verify(self) -> List[str]:
        return self.as_contraction().verify()


def perturbed_transfer(base: Contraction, delta: Perturbation) -> TransferResult:
    """Basic perturbation lemma, characteristic 2:

    A = δ Σ_k (hδ)^k,  d' = d + pAi,  i' = i + hAi,  p' = p + pAh,  h' = h + hAh.
    """
    big, small = base.big, base.small
    i, p, h = base.global_maps()
    d_big = big.global_differential()
    dlt = delta.global_matrix()

    if not ((d_big + dlt) @ (d_big + dlt)).is_zero():
        raise InvalidComplexError("perturbed differential does not square to zero")

    step = h @ dlt
    power = Gf2Matrix.identity(big.total_dim)
    series = power
    length = 1 if big.total_dim else 0
    while True:
        power = step @ power
        if power.is_zero():
            break
        length += 1
        if length > delta.filtration_bound:
            raise TerminationBoundExceeded(
                f"(h·δ)^k is still nonzero after {delta.filtration_bound} terms"
            )
        series = series + power

    a = dlt @ series
    d_small = small.global_differential() + p @ a @ i
    new_small = GradedKComplex(dict(small.dims), split_global(d_small, small, small, -1))
    perturbed_big = GradedKComplex(
        dict(big.dims), split_global(d_big + dlt, big, big, -1)
    )
    logger.debug(f"Perturbation series of length {length} on a complex of dimension {big.total_dim}")
    return TransferResult(
        big=perturbed_big,
        small=new_small,
        incl=i + h @ a @ i,
        proj=p + p @ a @ h,
        homotopy=h + h @ a @ h,
        series_length=length,
    )


def twist_components(result: TransferResult, small: CoalgebraTensor) -> Dict[Monomial, Gf2Matrix]:
    """f_m: the γ_1-component of d'(γ_m ⊗ -), as a global matrix on the homology factor"""
    d = result.small.global_differential().to_array()
    factor = small.factor
    offsets = small.complex.offsets()
    factor_offsets = factor.offsets()
    one = Monomial.one(small.r)
    size = factor.total_dim

    out = {}
    for w in range(1, small.weight + 1):
        for m in monomials_of_weight(small.r, w):
            f = np.zeros((size, size), dtype=np.uint8)
            for k in factor.degrees:
                total = k + w
                if total not in small.blocks or (m, k) not in small.blocks[total]:
                    continue
                col = offsets[total] + small.blocks[total][(m, k)]
                target_k = total - 1
                if (one, target_k) not in small.blocks.get(total - 1, {}):
                    continue
                row = offsets[total - 1] + small.blocks[total - 1][(one, target_k)]
                rows, cols = factor.dim(target_k), factor.dim(k)
                f[factor_offsets[target_k]:factor_offsets[target_k] + rows,
                  factor_offsets[k]:factor_offsets[k] + cols] = d[row:row + rows, col:col + cols]
            if f.any():
                out[m] = Gf2Matrix.from_array(f)
    return out


# Minimal models

@dataclass
class Provenance:
    construction: str
    series_length: int
    filtration_bound: int
    weight_bound: int
    source_homology: Dict[int, int]
    window: Optional[List[int]] = None
    basis_maps: Dict[int, str] = field(default_factory=dict)
    extra: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class TwistedModel:
    module: DgSModule
    provenance: Provenance

    @property
    def rank(self) -> int:
        return self.module.rank

    @property
    def twist(self) -> Tuple[Tuple[GradedPoly, ...], ...]:
        return self.module.diff

    def is_minimal(self) -> bool:
        return all(not poly.constant_term for _, _, poly in self.module.nonzero_entries())

    def twist_weights(self) -> List[int]:
        return sorted({m.weight for _, _, poly in self.module.nonzero_entries() for m in poly.terms})


def _model_from_components(r: int, factor: GradedKComplex, components: Mapping[Monomial, Gf2Matrix]) -> DgSModule:
    """Dual S-module on the homology: ∂(φ_a) = Σ_b (Σ_m f_m[a][b]·m) φ_b"""
    generators = [(f"h{k}_{j}", -k) for k in factor.degrees for j in range(factor.dim(k))]
    entries: Dict[Tuple[int, int], set] = {}
    for m, f in components.items():
        for a, b in zip(*np.nonzero(f.to_array())):
            entries.setdefault((int(b), int(a)), set()).symmetric_difference_update({m})
    polys = {key: GradedPoly(r, frozenset(terms)) for key, terms in entries.items() if terms}
    return DgSModule.build(r, generators, polys)


def _transfer_core(c: DgLambdaModule, construction: str, window: Optional[Window] = None,
                   height: Optional[int] = None) -> TwistedModel:
    """Transfer along the perturbation lemma; the series may not outgrow ``height``,
    by default the degree range of c with one margin on each side"""
    from app.config import settings

    base = build_contraction(c.complex)
    failures = base.verify()
    if failures:
        raise InternalAssertionError(f"contraction identities failed: {failures[0]}")

    span = (c.degrees[-1] - c.degrees[0]) if c.degrees else 0
    weight = span + 2
    bound = min(weight + 1, settings.perturbation_bound)

    big = CoalgebraTensor.build(c.r, weight, c.complex)
    small = CoalgebraTensor.build(c.r, weight, base.small)
    lifted = Contraction(
        big=big.complex,
        small=small.complex,
        i=lift_map(small, big, base.i, 0),
        p=lift_map(big, small, base.p, 0),
        h=lift_map(big, big, base.h, 1),
    )
    delta = Perturbation(big.complex, lift_sigma(big, c.t_action), bound)
    result = perturbed_transfer(lifted, delta)
    height = span + 2 if height is None else height
    if result.series_length > height:
        raise InternalAssertionError(
            f"perturbation series of length {result.series_length} exceeds the window height {height}"
        )
    components = twist_components(result, small)
    module = _model_from_components(c.r, base.small, components)

    report = validate_s_module(module)
    if not report.valid:
        raise InternalAssertionError(f"transferred model is not a dg-S-module: {report.problems[0]}")

    provenance = Provenance(
        construction=construction,
        series_length=result.series_length,
        filtration_bound=bound,
        weight_bound=weight,
        source_homology={k: base.small.dim(k) for k in base.small.degrees if base.small.dim(k)},
        window=window.as_list() if window is not None else None,
        basis_maps={k: base.incl(k).dump() for k in base.small.degrees if base.small.dim(k)},
    )
    model = TwistedModel(module, provenance)
    if not model.is_minimal():
        raise InternalAssertionError("transferred model has a differential entry with nonzero constant term")
    logger.info(
        f"{construction} model of rank {model.rank}, twist weights {model.twist_weights()}, "
        f"series length {result.series_length}"
    )
    return model


def minimal_hirsch_brown(c: DgLambdaModule, certificate: Optional[FreenessCertificate] = None,
                         window: Optional[Union[Window, Sequence[int]]] = None) -> TwistedModel:
    """S ⊗ H(C)^∨ with the differential transferred from S_c ⊗ C"""
    if certificate is None:
        certificate = certify_free(c)
    window = as_window(window) if window is not None else None
    model = _transfer_core(c, "hirsch-brown", window)
    if window is not None:
        homology_dims_in_window(model.module, window)
    return model


def carlsson_minimal(n: DgSModule, window: Union[Window, Sequence[int]]) -> TwistedModel:
    """Model through H(N)^∨ → Ω_κ → contraction onto its homology → transfer"""
    window = as_window(window)
    homology = homology_of_s_module(n, window)
    omega = cobar_omega(dual_homology(homology))
    model = _transfer_core(omega, "carlsson", window, height=window.height)
    model.provenance.extra["omega_dims"] = dict(omega.complex.dims)
    model.provenance.extra["omega_differential_zero"] = all(
        omega.complex.differential(k).is_zero() for k in omega.degrees
    )
    return model


def model_homology_dims(model: TwistedModel, window: Optional[Union[Window, Sequence[int]]] = None) -> Dict[int, int]:
    window = as_window(window) if window is not None else default_window(model.module)
    return homology_dims_in_window(model.module, window)


@dataclass
class OracleComparison:
    degrees: List[int]
    model: Dict[int, int]
    oracle: Dict[int, int]

    @property
    def agree(self) -> bool:
        return all(self.model.get(n, 0) == self.oracle.get(n, 0) for n in self.degrees)


def compare_model_with_oracle(model: TwistedModel, oracle: Union[DgLambdaModule, DgSModule],
                              window: Optional[Union[Window, Sequence[int]]] = None) -> OracleComparison:
    """Hirsch-Brown: H_n(model) against H_{-n}(bar_beta(C)); Carlsson: H_n(model) against H_n(N)"""
    if isinstance(oracle, DgLambdaModule):
        model_dims = model_homology_dims(model, window)
        tensor = bar_beta(oracle, model.provenance.weight_bound)
        valid = tensor.valid_degrees()
        bar_dims = homology_ranks(tensor.complex, valid)
        degrees = [n for n in sorted(model_dims) if -n in bar_dims]
        return OracleComparison(degrees, model_dims, {n: bar_dims[-n] for n in degrees})

    if window is None:
        raise DimensionMismatchError("comparison with an S-module needs a window")
    window = as_window(window)
    model_dims = homology_dims_in_window(model.module, window)
    oracle_dims = homology_dims_in_window(oracle, window)
    return OracleComparison(window.interior, model_dims, oracle_dims)


# A∞ transfer at arity ≤ 3

@dataclass
class AinftyProducts:
    m2: Gf2Matrix
    m3: Gf2Matrix
    m2_associative: bool
    stasheff_arity4: bool


def _product_checks(complex_: GradedKComplex, product: Gf2Matrix) -> List[str]:
    size = complex_.total_dim
    identity = Gf2Matrix.identity(size)
    d = complex_.global_differential()
    problems = []
    if product.shape != (size, size * size):
        problems.append(f"product has shape {product.shape}, expected {(size, size * size)}")
        return problems
    if product @ product.kron(identity) != product @ identity.kron(product):
        problems.append("product is not associative")
    if d @ product != product @ (d.kron(identity) + identity.kron(d)):
        problems.append("product is not a chain map")
    return problems


def transfer_ainfty_products(complex_: GradedKComplex, product: Gf2Matrix,
                             base: Optional[Contraction] = None, max_arity: int = 3) -> AinftyProducts:
    """m2 = pμ(i⊗i), m3 = pμ(hμ(i⊗i) ⊗ i) + pμ(i ⊗ hμ(i⊗i)) on the homology"""
    if max_arity > 3:
        raise BoundsExceededError("transferred products are computed up to arity 3")
    problems = _product_checks(complex_, product)
    if problems:
        raise InvalidModuleError(f"cannot transfer: {problems[0]}", problems)

    base = base or build_contraction(complex_)
    i, p, h = base.global_maps()
    mu = product
    ii = i.kron(i)
    inner = h @ mu @ ii
    m2 = p @ mu @ ii
    m3 = p @ mu @ inner.kron(i) + p @ mu @ i.kron(inner)

    check_ainfty_relations(m2, m3)
    return AinftyProducts(m2, m3, True, True)


def check_ainfty_relations(m2: Gf2Matrix, m3: Gf2Matrix) -> None:
    """Associativity of m2 and the arity-4 Stasheff relation on homology"""
    one = Gf2Matrix.identity(m2.rows)
    if m2 @ m2.kron(one) != m2 @ one.kron(m2):
        raise InternalAssertionError("transferred m2 is not associative on homology")
    # with zero differential on H the arity-4 relation involves m2 and m3 only
    stasheff = (
        m2 @ m3.kron(one) + m2 @ one.kron(m3)
        + m3 @ m2.kron(one).kron(one) + m3 @ one.kron(m2).kron(one) + m3 @ one.kron(one).kron(m2)
    )
    if not stasheff.is_zero():
        raise InternalAssertionError("transferred m2, m3 violate the arity-4 Stasheff relation")


def cup_product_oracle(complex_: GradedKComplex, product: Gf2Matrix) -> Gf2Matrix:
    """Products of cycle representatives re-expressed in the homology basis"""
    data = homology_dims(complex_)
    offsets = complex_.offsets()
    degrees = complex_.degrees
    size = complex_.total_dim
    reps = np.zeros((size, 0), dtype=np.uint8)
    frame_blocks, rep_rows = [], []
    position = 0
    rep_columns = []
    for n in degrees:
        block = np.zeros((size, data.dims[n]), dtype=np.uint8)
        if data.dims[n]:
            block[offsets[n]:offsets[n] + complex_.dim(n)] = data.representatives[n].to_array()
        rep_columns.append(block)
        boundary = np.zeros((size, data.boundaries[n].cols), dtype=np.uint8)
        if data.boundaries[n].cols:
            boundary[offsets[n]:offsets[n] + complex_.dim(n)] = data.boundaries[n].to_array()
        frame_blocks += [boundary, block]
        position += data.boundaries[n].cols
        rep_rows += list(range(position, position + data.dims[n]))
        position += data.dims[n]
    reps = Gf2Matrix.from_array(np.hstack(rep_columns)) if rep_columns else Gf2Matrix.zeros(size, 0)
    frame = Gf2Matrix.from_array(np.hstack(frame_blocks)) if frame_blocks else Gf2Matrix.zeros(size, 0)
    products = product @ reps.kron(reps)
    coords = frame.solve(products)
    return coords.select_rows(rep_rows)
