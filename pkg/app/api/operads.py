from fastapi import APIRouter, Query
from typing import Optional
import logging

from app.schemas import KoszulTableResponse, OperadBasisResponse, PbwResponse
from app.services import OperadService

router = APIRouter(prefix="/operads", tags=["operads"])
logger = logging.getLogger(__name__)
operad_service = OperadService()


@router.get("/basis", response_model=OperadBasisResponse)
def get_basis(n: int = Query(..., ge=1), r: int = Query(1, ge=1)):
    """Path-sequence basis of W~(n)"""
    return operad_service.basis(n, r)


@router.get("/koszul", response_model=KoszulTableResponse)
def get_koszul_table(
    n: int = Query(..., ge=1),
    a: int = Query(..., ge=1),
    r: int = Query(1, ge=1),
    operad: str = "wtilde"
):
    """
    Bar homology table

    - **n**: largest weight
    - **a**: largest arity
    - **operad**: wtilde, as or lambda
    """
    return operad_service.koszul_table(n, a, r, operad)


@router.get("/pbw", response_model=PbwResponse)
def get_pbw(n: int = Query(..., ge=1), r: int = Query(1, ge=1), without: Optional[str] = None):
    """PBW certificate, optionally with one rewriting rule removed"""
    return operad_service.pbw(n, r, without)
