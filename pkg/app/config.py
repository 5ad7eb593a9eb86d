from pydantic_settings import BaseSettings
from pydantic import field_validator
from typing import List, Union


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    # API
    api_host: str = "0.0.0.0"
    api_port: int = 8000
    api_reload: bool = False
    cors_origins: Union[str, List[str]] = "*"

    @field_validator('cors_origins', mode='before')
    @classmethod
    def parse_cors_origins(cls, v):
        """Parse CORS origins from comma-separated string or list"""
        if isinstance(v, list):
            return v
        if isinstance(v, str):
            if v == "*":
                return ["*"]
            return [origin.strip() for origin in v.split(',') if origin.strip()]
        return ["*"]

    # Windows and perturbation
    window_padding: int = 2
    perturbation_bound: int = 64

    # Random instances
    random_density: float = 0.3
    random_max_poly_degree: int = 3
    random_degree_spread: int = 2
    batch_jobs: int = 1

    # Operad bounds
    operad_max_weight: int = 6
    operad_max_arity: int = 5
    bar_max_weight: int = 4
    bar_max_arity: int = 4
    basis_max_size: int = 16  # n * r
    pbw_max_size: int = 9  # n * r

    # Logging
    log_level: str = "INFO"

    @field_validator('log_level', mode='before')
    @classmethod
    def normalize_log_level(cls, v):
        return str(v).upper()

    # Presets
    presets_config_path: str = "presets.yaml"

    class Config:
        env_file = ".env"
        case_sensitive = False


# Global settings instance
settings = Settings()
