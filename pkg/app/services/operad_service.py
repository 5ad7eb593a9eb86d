from typing import Any, Dict, List, Optional
import logging

from app.algebra.errors import BoundsExceededError
from app.algebra.operad import (
    DEFAULT_SYSTEM,
    RULES,
    AssociativeOperad,
    ExteriorOperad,
    Operad,
    WTildeOperad,
    bar_homology,
    irreducible_trees,
    pbw_certificate,
    tree_to_path_sequence,
    wtilde_basis,
)

logger = logging.getLogger(__name__)

OPERADS = ("wtilde", "as", "lambda")


def make_operad(name: str, r: int) -> Operad:
    if name == "wtilde":
        return WTildeOperad(r)
    if name == "as":
        return AssociativeOperad()
    if name == "lambda":
        return ExteriorOperad(r)
    raise BoundsExceededError(f"unknown operad {name!r}; choose from {', '.join(OPERADS)}")


class OperadService:
    """Path-sequence bases, bar homology tables and PBW certificates"""

    def basis(self, n: int, r: int) -> Dict[str, Any]:
        elements = wtilde_basis(n, r)
        reading = {str(p) for p in elements}
        rewriting, stray = set(), []
        for tree in irreducible_trees(n, r):
            sequence = tree_to_path_sequence(tree)
            if sequence is None:
                stray.append(str(tree))
            else:
                rewriting.add(str(sequence))
        matches = rewriting == reading and not stray
        if not matches:
            logger.error(f"Path-sequence reading and rewriting disagree at n={n}, r={r}")
        out: Dict[str, Any] = {
            "n": n,
            "r": r,
            "size": len(elements),
            "elements": [str(p) for p in elements],
            "matches_rewriting": matches,
        }
        if not matches:
            out["reading_only"] = sorted(reading - rewriting)
            out["rewriting_only"] = sorted(rewriting - reading) + sorted(stray)
        return out

    def koszul_table(self, n: int, a: int, r: int = 1, operad: str = "wtilde") -> Dict[str, Any]:
        """dim K^(w)(arity) for 1 ≤ w ≤ n and 1 ≤ arity ≤ a, plus the full homology of each cell"""
        target = make_operad(operad, r)
        rows: List[Dict[str, Any]] = []
        for weight in range(1, n + 1):
            for arity in range(1, a + 1):
                result = bar_homology(target, weight, arity)
                rows.append({
                    "weight": weight,
                    "arity": arity,
                    "koszul_dual_dim": result.koszul_dual_dim,
                    "homology": {str(k): v for k, v in sorted(result.dims.items()) if v},
                })
        logger.info(f"Bar homology table of {target.name} up to weight {n}, arity {a}")
        return {"operad": target.name, "r": r, "rows": rows}

    def pbw(self, n: int, r: int, without: Optional[str] = None) -> Dict[str, Any]:
        system = DEFAULT_SYSTEM
        if without is not None:
            if without not in RULES:
                raise BoundsExceededError(f"unknown rule {without!r}; choose from {', '.join(RULES)}")
            system = system.without(without)
        report = pbw_certificate(n, r, system)
        return {
            "n": n,
            "r": r,
            "rules": sorted(system.rules),
            "pairs_checked": report.pairs_checked,
            "passed": report.passed,
            "failures": report.failures[:20],
            "failure_count": len(report.failures),
            "reducible_basis_elements": report.reducible_basis_elements,
        }


def render_basis(table: Dict[str, Any]) -> str:
    lines = [f"W~ basis, n={table['n']}, r={table['r']}: {table['size']} elements"]
    lines += [f"{k + 1:>4}  {text}" for k, text in enumerate(table["elements"])]
    if not table["matches_rewriting"]:
        lines.append("rewriting disagrees with the path-sequence reading")
    return "\n".join(lines)


def render_koszul(table: Dict[str, Any]) -> str:
    lines = [f"K({table['operad']})", f"{'weight':>6}  {'arity':>5}  {'dim K':>5}  homology"]
    for row in table["rows"]:
        lines.append(f"{row['weight']:>6}  {row['arity']:>5}  {row['koszul_dual_dim']:>5}  {row['homology']}")
    return "\n".join(lines)
