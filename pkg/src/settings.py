"""
Converter Settings

All tunables of a conversion run. Defaults reproduce the published conversion
settings (simulation step 0.01 s, CommonRoad step 0.1 s, 60 s horizon).
Values are read from an optional JSON file (``--config`` or the
``OSC2CR_CONFIG`` environment variable, ``.env`` supported) and then
overridden by CLI flags.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.errors import ConversionError

logger = logging.getLogger("osc2cr.settings")

CONFIG_ENV_VAR = "OSC2CR_CONFIG"

EdgeName = Literal["rising", "falling", "risingOrFalling", "none"]


class GoalSettings(BaseModel):
    """Recipe for the planning-problem goal region."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    length_factor: float = Field(3.0, gt=0)
    width_factor: float = Field(2.0, gt=0)
    time_window_fraction: float = Field(0.8, ge=0, le=1)
    orientation_margin: float = Field(0.35, ge=0)
    velocity_margin: Optional[float] = Field(None, ge=0)


class ConverterSettings(BaseModel):
    """Settings for one conversion run."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    # simulation
    dt_sim: float = Field(0.01, gt=0)
    t_max: float = Field(60.0, gt=0)
    default_condition_edge: EdgeName = "rising"
    parameters: Dict[str, str] = Field(default_factory=dict)

    # map
    sampling_step: float = Field(1.0, gt=0)
    lane_types: Tuple[str, ...] = ("driving",)

    # commonroad
    dt_cr: float = Field(0.1, gt=0)
    ego_name: Optional[str] = None
    goal: GoalSettings = GoalSettings()
    author: Optional[str] = None
    affiliation: str = ""
    source: str = "OpenSCENARIO"
    date: Optional[str] = None
    country_code: str = "ZAM"
    commonroad_version: str = "2023.1"

    # outputs
    render: bool = False
    trace_csv: bool = False

    @model_validator(mode="after")
    def _check_horizon(self) -> "ConverterSettings":
        if self.t_max < self.dt_sim:
            raise ValueError(f"t_max ({self.t_max}) must be >= dt_sim ({self.dt_sim})")
        return self

    def sim_config(self):
        from src.simulation.state import SimConfig
        return SimConfig(dt_sim=self.dt_sim, t_max=self.t_max)


def load_settings(path: Optional[Path] = None, **overrides: Any) -> ConverterSettings:
    """
    Build settings from defaults, an optional JSON file and keyword overrides.

    Args:
        path: JSON file; falls back to the OSC2CR_CONFIG environment variable
        overrides: field values that win over the file (None values are skipped)

    Returns:
        Validated settings
    """
    load_dotenv()

    data: Dict[str, Any] = {}
    config_path = path or os.getenv(CONFIG_ENV_VAR)
    if config_path:
        config_path = Path(config_path)
        try:
            data = json.loads(config_path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConversionError(f"cannot read config file: {e}", source=str(config_path)) from e
        except json.JSONDecodeError as e:
            raise ConversionError(f"invalid JSON: {e.msg}", source=str(config_path), line=e.lineno) from e
        logger.info(f"Loaded settings from {config_path}")

    data.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return ConverterSettings.model_validate(data)
    except ValidationError as e:
        raise ConversionError(f"invalid settings: {e}", source=str(config_path) if config_path else None) from e
