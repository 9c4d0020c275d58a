import logging
import time
import traceback

import pydantic

from supbound.actions import action_handlers
from supbound.actions.core import EXIT_USAGE, ActionResult
from supbound.services.errors import ActionNotFound, SupboundError
from supbound.services.utils import jsonable

logger = logging.getLogger(__name__)


def _one_line(exc: Exception) -> str:
    if isinstance(exc, pydantic.ValidationError):
        parts = []
        for error in exc.errors():
            location = ".".join(str(loc) for loc in error["loc"]).replace("_", "-")
            parts.append(f"{location}: {error['msg']}")
        return "invalid options: " + "; ".join(parts)
    return str(exc).splitlines()[0] if str(exc) else type(exc).__name__


def _handle_error(exc: Exception, action_id: str, config_data=None, exit_code=EXIT_USAGE) -> ActionResult:
    """
    Logs the error and builds the error payload returned to the caller.
    Input problems are expected and logged quietly; anything else gets a full traceback.
    """
    message = f"Error in action '{action_id}': {type(exc).__name__}: {exc}"
    if isinstance(exc, (SupboundError, OSError, pydantic.ValidationError)):
        logger.debug(message, exc_info=True)
    else:
        logger.exception(message)

    error_details = {
        "action_id": action_id,
        "config_data": jsonable(config_data or {}),
        "error": _one_line(exc),
        "error_type": type(exc).__name__,
    }
    if not isinstance(exc, (SupboundError, OSError, pydantic.ValidationError)):
        error_details["error_traceback"] = traceback.format_exc()
    if (filename := getattr(exc, "filename", None)) is not None:
        error_details["filename"] = str(filename)
    for attribute in ("line", "column"):
        if (value := getattr(exc, attribute, None)) is not None:
            error_details[attribute] = value

    return ActionResult(
        exit_code=exit_code,
        result={"error_details": error_details},
        diagnostic=f"supbound {action_id}: {error_details['error']}",
    )


def execute_action(action_id: str, config_data: dict = None) -> ActionResult:
    logger.info(f"Executing action '{action_id}'...")
    config_data = config_data or {}

    try:  # There must be one action handler implemented for the action
        handler, config_model = action_handlers[action_id]
    except KeyError:
        return _handle_error(ActionNotFound(f"Action '{action_id}' is not supported"), action_id, config_data)

    try:  # Parse the action configuration
        parsed_config = config_model.parse_obj(config_data)
    except pydantic.ValidationError as e:
        return _handle_error(e, action_id, config_data)

    try:
        start_time = time.monotonic()
        result = handler(action_config=parsed_config)
    except Exception as e:
        return _handle_error(e, action_id, config_data)

    execution_time = time.monotonic() - start_time
    logger.info(f"Action '{action_id}' executed successfully in {execution_time:.2f} seconds (exit {result.exit_code}).")
    return result
