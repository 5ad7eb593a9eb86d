from fastapi import APIRouter, HTTPException
import logging

from app.schemas import RankCheckRequest, RankReportResponse
from app.services import RankService
from app.algebra.dg_module import s_module_from_dict

router = APIRouter(prefix="/rank", tags=["rank"])
logger = logging.getLogger(__name__)
rank_service = RankService()


@router.post("/check", response_model=RankReportResponse)
def check_rank(request: RankCheckRequest):
    """
    Compare rank_S M with 2^r

    - **module**: a module document, or
    - **r**, **m**, **seed**, **family**: a generated instance
    """
    if request.module is not None:
        module = s_module_from_dict(request.module.model_dump())
        report = rank_service.check(module, request.window)
    elif request.r is not None and request.m is not None:
        report = rank_service.check_random(request.r, request.m, request.seed, request.window, request.family)
    else:
        raise HTTPException(status_code=422, detail="Give a module or r and m")
    return report.to_dict()
