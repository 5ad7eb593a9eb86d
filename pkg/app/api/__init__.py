# API package initialization
from app.api.homology import router as homology_router
from app.api.models import router as models_router
from app.api.rank import router as rank_router
from app.api.operads import router as operads_router
from app.api.presets import router as presets_router

__all__ = ['homology_router', 'models_router', 'rank_router', 'operads_router', 'presets_router']
