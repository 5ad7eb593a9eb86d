from fastapi import APIRouter, HTTPException
from typing import List
import logging

from app.schemas import PresetResponse
from app.services import preset_service

router = APIRouter(prefix="/presets", tags=["presets"])
logger = logging.getLogger(__name__)


@router.get("/", response_model=List[PresetResponse])
def get_presets():
    """All loaded presets"""
    return [preset_service.get(name).summary() for name in preset_service.names()]


@router.get("/{name}", response_model=PresetResponse)
def get_preset(name: str):
    """A single preset by name"""
    preset = preset_service.get(name)
    if not preset:
        raise HTTPException(status_code=404, detail="Preset not found")
    return preset.summary()
