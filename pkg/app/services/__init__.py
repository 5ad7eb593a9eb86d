# Services package initialization
from app.services.model_service import ModelService
from app.services.operad_service import OperadService
from app.services.preset_service import PresetService, preset_service
from app.services.rank_service import RankService

__all__ = ['ModelService', 'OperadService', 'PresetService', 'preset_service', 'RankService']
