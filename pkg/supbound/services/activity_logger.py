import logging
from enum import Enum
from functools import wraps
from typing import Any, Dict, Optional

from pydantic import BaseModel


logger = logging.getLogger(__name__)


class ActivityEventType(str, Enum):
    STARTED = "action_started"
    COMPLETE = "action_complete"
    FAILED = "action_failed"
    CUSTOM = "action_custom_log"


class ActivityEvent(BaseModel):
    event_type: ActivityEventType
    action_id: str
    config_data: Dict[str, Any] = {}
    title: Optional[str] = None
    level: str = "INFO"
    data: Optional[Dict[str, Any]] = None
    error: Optional[str] = None


def publish_event(event: ActivityEvent):
    """Emit an activity event as a structured log record on the ``supbound.activity`` channel."""
    level = logging.getLevelName(event.level)
    if not isinstance(level, int):
        level = logging.INFO
    message = event.title or f"{event.event_type.value}: {event.action_id}"
    logging.getLogger("supbound.activity").log(level, message, extra={"activity": event.dict()})
    return event


def log_action_activity(action_id: str, title: str, level="INFO", config_data: dict = None, data: dict = None):
    """
        Helper to record a custom activity entry from inside an action handler.
        :param action_id: str id of the action being executed
        :param title: A human-readable string describing the activity
        :param level: The level of the log, e.g. DEBUG, INFO, WARNING, ERROR
        :param data: Any extra data to be logged as a dict
        :return: The published event
        """
    logger.debug(f"Logging custom activity: {title}. Action: {action_id}.")
    return publish_event(
        ActivityEvent(
            event_type=ActivityEventType.CUSTOM,
            action_id=action_id,
            config_data=config_data or {},
            title=title,
            level=level,
            data=data,
        )
    )


def activity_logger(on_start=True, on_completion=True, on_error=True):
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            action_id = func.__name__.replace("action_", "", 1).replace("_", "-")
            action_config = kwargs.get("action_config")
            config_data = action_config.dict() if action_config else {}
            if on_start:
                publish_event(
                    ActivityEvent(
                        event_type=ActivityEventType.STARTED,
                        action_id=action_id,
                        config_data=config_data,
                        level="DEBUG",
                    )
                )
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                if on_error:
                    publish_event(
                        ActivityEvent(
                            event_type=ActivityEventType.FAILED,
                            action_id=action_id,
                            config_data=config_data,
                            level="DEBUG",
                            error=str(e),
                        )
                    )
                raise e
            else:
                if on_completion:
                    publish_event(
                        ActivityEvent(
                            event_type=ActivityEventType.COMPLETE,
                            action_id=action_id,
                            config_data=config_data,
                            level="DEBUG",
                            data={"exit_code": getattr(result, "exit_code", None)},
                        )
                    )
                return result
        return wrapper
    return decorator
