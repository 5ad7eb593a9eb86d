from dataclasses import asdict
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union
import logging

from app.algebra.dg_module import (
    DgLambdaModule,
    DgSModule,
    FreenessCertificate,
    as_window,
    certify_free,
    default_window,
    euler_identity_check,
    homology_of_lambda_module,
    homology_of_s_module,
    lambda_module_from_dict,
    s_module_from_dict,
    s_module_to_dict,
)
from app.algebra.equivariant import (
    FreeGComplex,
    builtin,
    cochain_algebra,
    interchange_defects,
    parse_complex,
    to_lambda_module,
)
from app.algebra.koszul import (
    OracleComparison,
    TwistedModel,
    carlsson_minimal,
    compare_model_with_oracle,
    cup_product_oracle,
    minimal_hirsch_brown,
    transfer_ainfty_products,
)

logger = logging.getLogger(__name__)

Window = Optional[Sequence[int]]


def load_lambda_source(
    doc: Mapping[str, Any],
) -> Tuple[DgLambdaModule, Optional[FreenessCertificate], Optional[FreeGComplex]]:
    """A complex document (has 'cells') or a Λ-module document; no certificate when it is not free"""
    if "cells" in doc:
        x = parse_complex(doc)
        module, certificate = to_lambda_module(x)
        return module, certificate, x
    module, certificate = lambda_module_from_dict(doc)
    return module, certificate, None


def model_to_dict(model: TwistedModel, comparison: Optional[OracleComparison] = None) -> Dict[str, Any]:
    provenance = asdict(model.provenance)
    provenance["source_homology"] = {str(k): v for k, v in provenance["source_homology"].items()}
    provenance["basis_maps"] = {str(k): v for k, v in provenance["basis_maps"].items()}
    extra = provenance.pop("extra")
    if "omega_dims" in extra:
        extra["omega_dims"] = {str(k): v for k, v in extra["omega_dims"].items()}
    provenance.update(extra)
    out: Dict[str, Any] = {
        "module": s_module_to_dict(model.module),
        "rank": model.rank,
        "minimal": model.is_minimal(),
        "twist_weights": model.twist_weights(),
        "provenance": provenance,
    }
    if comparison is not None:
        out["oracle"] = {
            "degrees": comparison.degrees,
            "model": {str(n): comparison.model.get(n, 0) for n in comparison.degrees},
            "oracle": {str(n): comparison.oracle.get(n, 0) for n in comparison.degrees},
            "agree": comparison.agree,
        }
    return out


def render_model(model: TwistedModel) -> str:
    lines = [f"{model.provenance.construction} model: rank {model.rank}, twist weights {model.twist_weights()}"]
    for g in model.module.generators:
        lines.append(f"  {g.name:<12} degree {g.degree}")
    for a, b, poly in model.module.nonzero_entries():
        lines.append(f"  ∂ {model.module.generators[b].name} ∋ ({poly})·{model.module.generators[a].name}")
    return "\n".join(lines)


class ModelService:
    """Homology reports and minimal models"""

    def homology(self, module: Union[DgSModule, Mapping[str, Any]], window: Window = None) -> Dict[str, Any]:
        module = s_module_from_dict(module) if isinstance(module, Mapping) else module
        window = as_window(window) if window is not None else default_window(module)
        h = homology_of_s_module(module, window)
        logger.info(f"Homology of rank-{module.rank} module in {window.as_list()}: total {h.total_dim}")
        return {
            "r": module.r,
            "window": window.as_list(),
            "dims": {str(n): v for n, v in sorted(h.dims.items()) if v},
            "total": h.total_dim,
            "parity_classes": h.parity_classes(),
        }

    def hirsch_brown(self, source: Union[FreeGComplex, Mapping[str, Any]],
                     window: Window = None) -> Tuple[TwistedModel, OracleComparison]:
        if isinstance(source, FreeGComplex):
            module, certificate = to_lambda_module(source)
        else:
            module, certificate, _ = load_lambda_source(source)
        logger.info(f"Hirsch-Brown model of a free Λ-module of dimension {module.complex.total_dim}")
        model = minimal_hirsch_brown(module, certificate, window)
        comparison = compare_model_with_oracle(model, module, window)
        if not comparison.agree:
            logger.error(f"Model homology {comparison.model} disagrees with the bar oracle {comparison.oracle}")
        return model, comparison

    def carlsson(self, source: Union[DgSModule, Mapping[str, Any]],
                 window: Window = None) -> Tuple[TwistedModel, OracleComparison]:
        module = s_module_from_dict(source) if isinstance(source, Mapping) else source
        window = as_window(window) if window is not None else default_window(module)
        logger.info(f"Carlsson model of a rank-{module.rank} module in {window.as_list()}")
        model = carlsson_minimal(module, window)
        comparison = compare_model_with_oracle(model, module, window)
        if not comparison.agree:
            logger.error(f"Model homology {comparison.model} disagrees with H(N) {comparison.oracle}")
        return model, comparison

    def euler(self, source: Union[FreeGComplex, Mapping[str, Any]]) -> Dict[str, Any]:
        if isinstance(source, FreeGComplex):
            module, certificate = to_lambda_module(source)
        else:
            module, certificate, _ = load_lambda_source(source)
        if certificate is None:
            certificate = certify_free(module)
        report = euler_identity_check(module, certificate)
        logger.info(f"Euler identity: χ(C)={report.chi_c}, χ(k⊗C)={report.chi_quotient}, holds={report.identity_holds}")
        return asdict(report)

    def lambda_homology(self, source: Union[FreeGComplex, Mapping[str, Any]]) -> Dict[str, Any]:
        if isinstance(source, FreeGComplex):
            module, _ = to_lambda_module(source)
        else:
            module, _, _ = load_lambda_source(source)
        h = homology_of_lambda_module(module)
        return {
            "r": module.r,
            "dims": {str(n): v for n, v in sorted(h.dims.items()) if v},
            "total": h.total_dim,
            "parity_classes": h.parity_classes(),
        }

    def products(self, x: FreeGComplex) -> Dict[str, Any]:
        """Transferred m2, m3 on cohomology, the cup-product oracle and coproduct checks"""
        algebra = cochain_algebra(x)
        products = transfer_ainfty_products(algebra.complex, algebra.product)
        oracle = cup_product_oracle(algebra.complex, algebra.product)
        checks = interchange_defects(x)
        return {
            "m2_matches_cup_product": products.m2 == oracle,
            "m2_associative": products.m2_associative,
            "stasheff_arity4": products.stasheff_arity4,
            "m3_zero": products.m3.is_zero(),
            "coassociative": checks.coassociative,
            "coproduct_chain_map": checks.chain_map,
            "group_equivariant": checks.group_equivariant,
            "t_equivariant": checks.t_equivariant,
        }

    def builtin_complex(self, name: str, r: int = 1, n: int = 1) -> FreeGComplex:
        return builtin(name, r, n)
