from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import json
import logging

import yaml

from app.algebra.dg_module import DgSModule, s_module_from_dict
from app.algebra.equivariant import FreeGComplex, builtin, parse_complex
from app.algebra.errors import AlgebraError, SchemaError
from app.config import settings
from app.services.rank_service import cone_module, koszul_module

logger = logging.getLogger(__name__)


@dataclass
class Preset:
    name: str
    kind: str
    description: str
    value: Union[FreeGComplex, DgSModule]
    window: Optional[List[int]] = None

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name, "kind": self.kind, "description": self.description}
        if isinstance(self.value, FreeGComplex):
            out["r"] = self.value.r
            out["cells"] = len(self.value.cells)
            out["dims"] = {str(n): v for n, v in sorted(self.value.dims().items())}
        else:
            out["r"] = self.value.r
            out["rank"] = self.value.rank
        if self.window is not None:
            out["window"] = self.window
        return out


def _resolve(entry: Dict[str, Any], base: Path) -> Preset:
    name, kind = entry["name"], entry["kind"]
    description = entry.get("description", "")
    window = entry.get("window")
    if "file" in entry:
        with open(base / entry["file"], "r", encoding="utf-8") as f:
            doc = json.load(f)
        value = parse_complex(doc) if kind == "complex" else s_module_from_dict(doc)
    elif kind == "complex":
        value = builtin(entry["builtin"], int(entry.get("r", 1)), int(entry.get("n", 1)))
    elif kind == "module" and entry.get("module") == "koszul":
        value = koszul_module(int(entry["r"]))
    elif kind == "module" and entry.get("module") == "cone":
        value = cone_module(int(entry["r"]), entry["exponents"])
    else:
        raise SchemaError(f"preset {name!r} has no usable source")
    return Preset(name, kind, description, value, window)


class PresetService:
    """Named complexes and modules from the YAML catalogue"""

    def __init__(self):
        self.presets: Dict[str, Preset] = {}

    def load(self, path: Optional[Union[str, Path]] = None) -> Dict[str, Preset]:
        config_path = Path(path or settings.presets_config_path)
        if not config_path.exists():
            logger.warning(f"Presets file not found: {config_path}")
            return self.presets

        with open(config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
        if not config or "presets" not in config:
            logger.warning("No presets found in config file")
            return self.presets

        for entry in config["presets"]:
            try:
                preset = _resolve(entry, config_path.parent)
            except (AlgebraError, KeyError, TypeError, ValueError, OSError) as e:
                logger.error(f"Skipping preset {entry.get('name', entry) if isinstance(entry, dict) else entry}: {e}")
                continue
            self.presets[preset.name] = preset
            logger.info(f"Loaded preset: {preset.name}")
        return self.presets

    def get(self, name: str) -> Optional[Preset]:
        return self.presets.get(name)

    def names(self) -> List[str]:
        return sorted(self.presets)


preset_service = PresetService()
