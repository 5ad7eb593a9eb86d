from fastapi import APIRouter
import logging

from app.schemas import HomologyRequest, HomologyResponse
from app.services import ModelService

router = APIRouter(prefix="/homology", tags=["homology"])
logger = logging.getLogger(__name__)
model_service = ModelService()


@router.post("/", response_model=HomologyResponse)
def compute_homology(request: HomologyRequest):
    """
    Homology of a semifree dg-S-module in a degree window

    - **window**: [lo, hi]; computed from the module when omitted
    """
    logger.info(f"Homology request for a rank-{len(request.module.generators)} module")
    return model_service.homology(request.module.model_dump(), request.window)
