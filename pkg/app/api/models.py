from fastapi import APIRouter, HTTPException
import logging

from app.schemas import CarlssonRequest, HirschBrownRequest, TwistedModelResponse
from app.services import ModelService
from app.services.model_service import model_to_dict

router = APIRouter(prefix="/models", tags=["models"])
logger = logging.getLogger(__name__)
model_service = ModelService()


@router.post("/hirsch-brown", response_model=TwistedModelResponse)
def hirsch_brown(request: HirschBrownRequest):
    """
    Minimal Hirsch-Brown model of a free (Z/2)^r-complex

    Give exactly one of **complex**, **module** (Λ-module document, free or with an action) or **builtin**.
    """
    sources = [s for s in (request.complex, request.module, request.builtin) if s is not None]
    if len(sources) != 1:
        raise HTTPException(status_code=422, detail="Give exactly one of complex, module or builtin")

    if request.builtin is not None:
        source = model_service.builtin_complex(request.builtin, request.r, request.n)
    else:
        source = sources[0].model_dump(exclude_none=True)
    model, comparison = model_service.hirsch_brown(source, request.window)
    return model_to_dict(model, comparison)


@router.post("/carlsson", response_model=TwistedModelResponse)
def carlsson(request: CarlssonRequest):
    """Carlsson minimal model of a semifree dg-S-module"""
    model, comparison = model_service.carlsson(request.module.model_dump(), request.window)
    return model_to_dict(model, comparison)
