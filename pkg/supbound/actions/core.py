import importlib
import inspect
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional

from pydantic import BaseModel

from supbound import settings

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


class ActionConfiguration(BaseModel):
    seed: int = settings.DEFAULT_SEED
    output_format: OutputFormat = OutputFormat.TEXT

    class Config:
        extra = "forbid"


class GenericActionConfiguration(ActionConfiguration):
    pass


class ActionResult(BaseModel):
    exit_code: int = EXIT_OK
    result: Dict[str, Any] = {}
    text: str = ""
    diagnostic: Optional[str] = None


class CommandOutput(BaseModel):
    """Envelope printed by ``--json``."""
    schema_version: int = settings.JSON_SCHEMA_VERSION
    command: str
    exit_code: int
    result: Dict[str, Any] = {}

    class Config:
        json_encoders = {Fraction: str}

    def render(self) -> str:
        return self.json(sort_keys=True, indent=2) + "\n"


def discover_actions(module_name, prefix):
    action_handlers = {}

    module = importlib.import_module(module_name)
    all_members = inspect.getmembers(module)

    for name, func in all_members:
        if name.startswith(prefix) and inspect.isfunction(func):
            key = name[len(prefix):].replace("_", "-")
            if (config_annotation := inspect.signature(func).parameters.get("action_config").annotation) != inspect._empty:
                config_model = config_annotation
            else:
                config_model = GenericActionConfiguration
            action_handlers[key] = (func, config_model)

    return action_handlers


def get_actions():
    return list(discover_actions(module_name="supbound.actions.handlers", prefix="action_").keys())
