from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
import logging
import random

from app.algebra.dg_module import (
    DgSModule,
    Window,
    as_window,
    default_window,
    homology_of_s_module,
    reduce_mod_augmentation,
    validate_s_module,
)
from app.algebra.errors import InternalAssertionError, InvalidModuleError, WindowError
from app.algebra.gf2 import Gf2Matrix, homology_ranks
from app.algebra.graded import GradedPoly, Monomial, indices_of, monomials_of_weight
from app.algebra.koszul import cobar_omega
from app.config import settings

logger = logging.getLogger(__name__)

SATISFIED = "satisfied"
PARITY_VIOLATED = "parity hypothesis violated"
ZERO_HOMOLOGY = "hypothesis not met: zero homology"
WINDOW_FAILURE = "window failure"

FAMILIES = ("semifree", "regular")


# Instances

def koszul_module(r: int, shift: int = 0, suffix: str = "",
                  forms: Optional[Sequence[GradedPoly]] = None) -> DgSModule:
    """Koszul complex on x1..xr, or on ``forms``: generators e{I} in one degree,
    ∂e{I} = Σ_{i∈I} x_i e{I∖i}"""
    generators = [("e{" + ",".join(map(str, indices_of(mask))) + "}" + suffix, shift) for mask in range(2 ** r)]
    entries = {}
    for mask in range(2 ** r):
        for i in indices_of(mask):
            form = forms[i - 1] if forms is not None else GradedPoly.variable(r, i)
            entries[(mask ^ (1 << (i - 1)), mask)] = form
    return DgSModule.build(r, generators, entries)


def cone_module(r: int, exponents: Sequence[int]) -> DgSModule:
    """S·e0 ⊕ S·e1 with ∂e1 = x^exponents · e0"""
    monomial = Monomial(tuple(int(e) for e in exponents))
    if monomial.r != r:
        raise InvalidModuleError(f"cone needs {r} exponents, got {len(exponents)}")
    generators = [("e0", 0), ("e1", 1 - monomial.weight)]
    return DgSModule.build(r, generators, {(0, 1): GradedPoly.of(r, [monomial])})


def _random_poly(rng: random.Random, r: int, weight: int) -> GradedPoly:
    monomials = monomials_of_weight(r, weight)
    chosen = [m for m in monomials if rng.random() < 0.5] or [rng.choice(monomials)]
    return GradedPoly.of(r, chosen)


def _poly_matmul(r: int, a: List[List[GradedPoly]], b: List[List[GradedPoly]]) -> List[List[GradedPoly]]:
    n = len(a)
    out = [[GradedPoly.zero(r) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if not a[i][k]:
                continue
            for j in range(n):
                if b[k][j]:
                    out[i][j] = out[i][j] + a[i][k] * b[k][j]
    return out


def _gauge(m: DgSModule, rng: random.Random, density: float = 0.3, max_weight: int = 1) -> DgSModule:
    """φ∂φ⁻¹ for a random unitriangular degree-0 automorphism φ with entries of weight ≤ max_weight"""
    r, n = m.r, m.rank
    order = list(range(n))
    rng.shuffle(order)
    nilpotent = [[GradedPoly.zero(r) for _ in range(n)] for _ in range(n)]
    for i, b in enumerate(order):
        for a in order[:i]:
            w = m.degree_of(a) - m.degree_of(b)
            if 0 <= w <= max_weight and rng.random() < density:
                nilpotent[a][b] = _random_poly(rng, r, w)

    one = GradedPoly.one(r)
    identity = [[one if i == j else GradedPoly.zero(r) for j in range(n)] for i in range(n)]
    phi = [[identity[i][j] + nilpotent[i][j] for j in range(n)] for i in range(n)]
    inverse, power = identity, identity
    for _ in range(n):
        power = _poly_matmul(r, power, nilpotent)
        inverse = [[inverse[i][j] + power[i][j] for j in range(n)] for i in range(n)]

    diff = _poly_matmul(r, _poly_matmul(r, phi, [list(row) for row in m.diff]), inverse)
    return DgSModule(r, m.generators, tuple(tuple(row) for row in diff))


def _linear_forms(rng: random.Random, r: int) -> List[GradedPoly]:
    """r linearly independent linear forms"""
    while True:
        rows = [[rng.randrange(2) for _ in range(r)] for _ in range(r)]
        if Gf2Matrix.from_rows(rows).rank() == r:
            break
    return [GradedPoly.of(r, [Monomial.variable(r, j + 1) for j in range(r) if row[j]]) for row in rows]


def _shuffle(m: DgSModule, rng: random.Random) -> DgSModule:
    """Same module with its generators listed in a random order as g0, g1, ..."""
    order = list(range(m.rank))
    rng.shuffle(order)
    position = {old: new for new, old in enumerate(order)}
    generators = [(f"g{k}", m.degree_of(old)) for k, old in enumerate(order)]
    entries = {(position[a], position[b]): poly for a, b, poly in m.nonzero_entries()}
    return DgSModule.build(m.r, generators, entries)


def generate_semifree(r: int, m: int, spread: Optional[int] = None, seed: int = 0,
                      density: Optional[float] = None, max_poly_degree: Optional[int] = None) -> DgSModule:
    """Random semifree module of rank m built from Koszul blocks and contractible pairs.

    Each Koszul block sits on r random independent linear forms and adds one
    copy of k to H(M); contractible pairs u, v with ∂v = u add nothing. A
    random S-basis change with entries of weight ≤ ``max_poly_degree`` and the
    generator order then hide the blocks. Shifts share one parity except
    occasionally the last block. When m - copies·2^r is odd a free generator
    is left over and the homology is infinite, so such seeds fail the window.
    """
    if r < 1:
        raise InvalidModuleError(f"r must be at least 1, got {r}")
    if m < 1:
        raise InvalidModuleError(f"rank must be at least 1, got {m}")
    spread = settings.random_degree_spread if spread is None else spread
    density = settings.random_density if density is None else density
    max_poly_degree = settings.random_max_poly_degree if max_poly_degree is None else max_poly_degree

    rng = random.Random(seed)
    copies = rng.randint(1, m // 2 ** r) if m >= 2 ** r else 0
    parity = rng.randrange(2)
    shifts = [parity + 2 * rng.randint(-(spread // 2), spread // 2) for _ in range(copies)]
    if copies > 1 and rng.random() < 0.15:
        shifts[-1] += 1

    generators: List[Tuple[str, int]] = []
    entries: Dict[Tuple[int, int], GradedPoly] = {}
    for c, shift in enumerate(shifts):
        block = koszul_module(r, shift, suffix=f"_{c}", forms=_linear_forms(rng, r))
        offset = len(generators)
        generators += [(g.name, g.degree) for g in block.generators]
        entries.update({(offset + a, offset + b): poly for a, b, poly in block.nonzero_entries()})
    for k in range((m - len(generators)) // 2):
        degree = rng.randint(-spread, spread)
        generators += [(f"u{k}", degree), (f"v{k}", degree + 1)]
        entries[(len(generators) - 2, len(generators) - 1)] = GradedPoly.one(r)
    if len(generators) < m:
        generators.append(("w", rng.randint(-spread, spread)))

    module = _gauge(DgSModule.build(r, generators, entries), rng, density, max_poly_degree)
    module = _shuffle(module, rng)
    report = validate_s_module(module)
    if not report.valid:
        raise InternalAssertionError(f"random semifree instance is not a dg-S-module: {report.problems[0]}")
    return module


def generate_regular(r: int, seed: int = 0) -> DgSModule:
    """Shifted Koszul complexes plus contractible pairs, scrambled by a random automorphism.

    Homology is one copy of k per Koszul summand; shifts are even unless the
    seed draws a mixed-parity instance.
    """
    rng = random.Random(seed)
    copies = rng.randint(1, 2)
    shifts = [rng.choice((-2, 0, 2)) for _ in range(copies)]
    if rng.random() < 0.2:
        shifts[-1] += 1

    generators: List[Tuple[str, int]] = []
    entries: Dict[Tuple[int, int], GradedPoly] = {}
    for c, shift in enumerate(shifts):
        block = koszul_module(r, shift, suffix=f"_{c}")
        offset = len(generators)
        generators += [(g.name, g.degree) for g in block.generators]
        entries.update({(offset + a, offset + b): poly for a, b, poly in block.nonzero_entries()})
    for k in range(rng.randint(0, 2)):
        degree = rng.randint(min(shifts), max(shifts))
        generators += [(f"u{k}", degree), (f"v{k}", degree + 1)]
        entries[(len(generators) - 2, len(generators) - 1)] = GradedPoly.one(r)

    module = _gauge(DgSModule.build(r, generators, entries), rng)
    report = validate_s_module(module)
    if not report.valid:
        raise InternalAssertionError(f"scrambled instance is not a dg-S-module: {report.problems[0]}")
    return module


def generate_instance(family: str, r: int, m: int, seed: int) -> DgSModule:
    if family == "semifree":
        return generate_semifree(r, m, seed=seed)
    if family == "regular":
        return generate_regular(r, seed)
    raise InvalidModuleError(f"unknown instance family {family!r}; choose from {', '.join(FAMILIES)}")


# Reports

@dataclass
class RankReport:
    r: int
    rank: int
    bound: int
    window: List[int]
    verdict: str
    seed: Optional[int] = None
    homology: Dict[int, int] = field(default_factory=dict)
    parity: Optional[str] = None
    quotient_homology_dim: Optional[int] = None
    omega_dim: Optional[int] = None
    detail: Optional[str] = None

    @property
    def homology_dim(self) -> int:
        return sum(self.homology.values())

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ParityReport:
    r: int
    homology_dim: int
    omega_dim: int
    omega_differential_zero: bool
    quotient_homology_dim: int

    @property
    def holds(self) -> bool:
        expected = (2 ** self.r) * self.homology_dim
        return self.omega_differential_zero and self.omega_dim == expected == self.quotient_homology_dim

    def to_dict(self) -> dict:
        return {**asdict(self), "holds": self.holds}


def _parity_label(classes: List[int]) -> Optional[str]:
    if not classes:
        return None
    if len(classes) > 1:
        return "mixed"
    return "even" if classes[0] == 0 else "odd"


def quotient_homology_dim(m: DgSModule) -> int:
    """dim H(k ⊗_S M)"""
    return sum(homology_ranks(reduce_mod_augmentation(m)).values())


def parity_equality_check(m: DgSModule, window: Optional[Union[Window, Sequence[int]]] = None) -> ParityReport:
    """Ω_κH(M) has zero differential and dimension 2^r·dim H(M) = dim H(k ⊗_S M)"""
    window = as_window(window) if window is not None else default_window(m)
    homology = homology_of_s_module(m, window)
    classes = homology.parity_classes()
    if not classes:
        raise InvalidModuleError("parity check needs nonzero homology")
    if len(classes) > 1:
        raise InvalidModuleError(f"parity check needs homology in one parity, found degrees {homology.degrees}")

    omega = cobar_omega(homology)
    report = ParityReport(
        r=m.r,
        homology_dim=homology.total_dim,
        omega_dim=omega.complex.total_dim,
        omega_differential_zero=all(omega.complex.differential(n).is_zero() for n in omega.degrees),
        quotient_homology_dim=quotient_homology_dim(m),
    )
    if not report.omega_differential_zero:
        raise InternalAssertionError("Ω_κH(M) has a nonzero differential although H(M) sits in one parity")
    if report.omega_dim != (2 ** m.r) * report.homology_dim:
        raise InternalAssertionError(
            f"dim Ω_κH(M) = {report.omega_dim} differs from 2^{m.r}·{report.homology_dim}"
        )
    if report.quotient_homology_dim != report.omega_dim:
        raise InternalAssertionError(
            f"dim H(k⊗M) = {report.quotient_homology_dim} differs from dim Ω_κH(M) = {report.omega_dim}"
        )
    return report


def rank_check(m: DgSModule, window: Optional[Union[Window, Sequence[int]]] = None,
               seed: Optional[int] = None) -> RankReport:
    """rank_S M against 2^r; window failures are reported, not raised"""
    validate_s_module(m).raise_if_invalid("S-module")
    window = as_window(window) if window is not None else default_window(m)
    report = RankReport(r=m.r, rank=m.rank, bound=2 ** m.r, window=window.as_list(), verdict=WINDOW_FAILURE, seed=seed)
    try:
        homology = homology_of_s_module(m, window)
    except WindowError as e:
        report.detail = str(e)
        return report

    report.homology = {n: v for n, v in sorted(homology.dims.items()) if v}
    report.parity = _parity_label(homology.parity_classes())
    report.quotient_homology_dim = quotient_homology_dim(m)
    if not report.homology:
        report.verdict = ZERO_HOMOLOGY
        return report
    if report.parity == "mixed":
        report.verdict = PARITY_VIOLATED
        return report

    parity = parity_equality_check(m, window)
    report.omega_dim = parity.omega_dim
    if not report.rank >= report.quotient_homology_dim >= report.bound:
        raise InternalAssertionError(
            f"rank {report.rank} ≥ dim H(k⊗M) {report.quotient_homology_dim} ≥ 2^{m.r} fails"
        )
    report.verdict = SATISFIED
    return report


def _run_instance(job: Tuple[str, int, int, int]) -> dict:
    family, r, m, seed = job
    module = generate_instance(family, r, m, seed)
    return rank_check(module, seed=seed).to_dict()


def render_reports(reports: Iterable[Union[RankReport, dict]]) -> str:
    rows = [report.to_dict() if isinstance(report, RankReport) else report for report in reports]
    header = f"{'seed':>6}  {'r':>2}  {'rank':>5}  {'dim H':>6}  {'dim H(k⊗M)':>11}  {'2^r':>4}  verdict"
    lines = [header, "-" * len(header)]
    for row in rows:
        quotient = row.get("quotient_homology_dim")
        lines.append(
            f"{str(row.get('seed', '')):>6}  {row['r']:>2}  {row['rank']:>5}  "
            f"{sum(row.get('homology', {}).values()):>6}  {'' if quotient is None else quotient:>11}  "
            f"{row['bound']:>4}  {row['verdict']}"
        )
    return "\n".join(lines)


class RankService:
    """Rank checks on single modules and seeded batches"""

    def check(self, module: DgSModule, window: Optional[Sequence[int]] = None,
              seed: Optional[int] = None) -> RankReport:
        logger.info(f"Rank check: r={module.r}, rank={module.rank}, window={window}")
        report = rank_check(module, window, seed)
        logger.info(f"Rank check verdict: {report.verdict}")
        return report

    def check_random(self, r: int, m: int, seed: int, window: Optional[Sequence[int]] = None,
                     family: str = "semifree") -> RankReport:
        return self.check(generate_instance(family, r, m, seed), window, seed)

    def batch(self, seeds: Iterable[int], r: int, m: int, family: str = "semifree",
              jobs: Optional[int] = None) -> List[dict]:
        """Reports for every seed, sorted by seed; identical for any number of workers"""
        jobs = settings.batch_jobs if jobs is None else jobs
        work = [(family, r, m, seed) for seed in sorted(set(seeds))]
        logger.info(f"Batch of {len(work)} {family} instances (r={r}, m={m}) on {jobs} worker(s)")
        if jobs <= 1:
            results = [_run_instance(job) for job in work]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_run_instance, work))
        results.sort(key=lambda row: row["seed"])

        counts: Dict[str, int] = {}
        for row in results:
            counts[row["verdict"]] = counts.get(row["verdict"], 0) + 1
        logger.info(f"Batch verdicts: {counts}")
        return results
