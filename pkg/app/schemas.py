from pydantic import BaseModel, Field, field_validator
from typing import Any, Dict, List, Optional


# Input documents
class GeneratorItem(BaseModel):
    name: str
    degree: int


class SModuleFile(BaseModel):
    r: int = Field(ge=0)
    generators: List[GeneratorItem]
    differential: List[List[str]]

    @field_validator('differential')
    @classmethod
    def check_square(cls, v, info):
        gens = info.data.get('generators')
        if gens is not None and (len(v) != len(gens) or any(len(row) != len(gens) for row in v)):
            raise ValueError(f"differential must be a {len(gens)}x{len(gens)} matrix")
        return v


class LambdaModuleFile(SModuleFile):
    action: Optional[Dict[str, Any]] = None


class CellItem(BaseModel):
    name: str
    dim: int = Field(ge=0)
    vertices: Optional[List[str]] = None


class ComplexFile(BaseModel):
    r: int = Field(ge=0)
    cells: List[CellItem]
    action: Dict[str, Dict[str, str]] = {}
    boundary: Dict[str, List[List[str]]] = {}


class WindowedRequest(BaseModel):
    window: Optional[List[int]] = Field(default=None, min_length=2, max_length=2)


class HomologyRequest(WindowedRequest):
    module: SModuleFile


class HirschBrownRequest(WindowedRequest):
    complex: Optional[ComplexFile] = None
    module: Optional[LambdaModuleFile] = None
    builtin: Optional[str] = None
    r: int = 1
    n: int = 1


class CarlssonRequest(WindowedRequest):
    module: SModuleFile


class RankCheckRequest(WindowedRequest):
    module: Optional[SModuleFile] = None
    r: Optional[int] = Field(default=None, ge=1)
    m: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    family: str = "semifree"


# Responses
class HomologyResponse(BaseModel):
    r: int
    window: Optional[List[int]] = None
    dims: Dict[str, int]
    total: int
    parity_classes: List[int]


class TwistedModelResponse(BaseModel):
    module: Dict[str, Any]
    rank: int
    minimal: bool
    twist_weights: List[int]
    provenance: Dict[str, Any]
    oracle: Optional[Dict[str, Any]] = None


class RankReportResponse(BaseModel):
    r: int
    rank: int
    bound: int
    window: List[int]
    verdict: str
    seed: Optional[int] = None
    homology: Dict[int, int] = {}
    parity: Optional[str] = None
    quotient_homology_dim: Optional[int] = None
    omega_dim: Optional[int] = None
    detail: Optional[str] = None


class ParityCheckResponse(BaseModel):
    r: int
    homology_dim: int
    omega_dim: int
    omega_differential_zero: bool
    quotient_homology_dim: int
    holds: bool


class EulerReportResponse(BaseModel):
    chi_c: int
    chi_homology: int
    chi_quotient: int
    group_order: int
    homology_dim: int
    identity_holds: bool
    parity_hypothesis: bool
    homology_dim_equals_abs_chi: bool


class OperadBasisResponse(BaseModel):
    n: int
    r: int
    size: int
    elements: List[str]
    matches_rewriting: bool
    reading_only: Optional[List[str]] = None
    rewriting_only: Optional[List[str]] = None


class KoszulRow(BaseModel):
    weight: int
    arity: int
    koszul_dual_dim: int
    homology: Dict[str, int]


class KoszulTableResponse(BaseModel):
    operad: str
    r: int
    rows: List[KoszulRow]


class PbwResponse(BaseModel):
    n: int
    r: int
    rules: List[str]
    pairs_checked: int
    passed: bool
    failures: List[str]
    failure_count: int
    reducible_basis_elements: List[str]


class PresetResponse(BaseModel):
    name: str
    kind: str
    description: str = ""
    r: int
    cells: Optional[int] = None
    dims: Optional[Dict[str, int]] = None
    rank: Optional[int] = None
    window: Optional[List[int]] = None


class HealthResponse(BaseModel):
    status: str
    version: str
    presets: int


class ErrorResponse(BaseModel):
    error: str
    detail: str
    exit_code: int
