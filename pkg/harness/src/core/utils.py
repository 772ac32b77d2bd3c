import contextvars
import logging
import threading

from frameshrink.log import StructuredMessage, _m  # noqa: F401
from pythonjsonlogger import jsonlogger

from core.config import settings

logger = logging.getLogger(__name__)

# Current experiment coordinates, e.g. "compare sigma=4 trial=3"
context = contextvars.ContextVar("context", default="frameshrink")

TEXT_FORMAT = (
    "Name: %(name)s | Time: %(asctime)s | Level: %(levelname)s | File: %(filename)s"
    " | Function: %(funcName)s | Line: %(lineno)s | Process: %(process)d"
    " | Context: %(context)s | Message: %(message)s"
)
JSON_FORMAT = "%(name)s %(asctime)s %(levelname)s %(filename)s %(funcName)s %(context)s %(message)s"


class ContextFilter(logging.Filter):
    """
    This is a filter which injects contextual information into the log.
    """

    def filter(self, record):
        record.context = context.get() or "Default"
        return True


def get_extra_info(extra: dict) -> dict:
    return {
        "context": context.get(),
        "thread": threading.current_thread().name,
        **extra,
    }


def configure_logs_of_other_modules():
    handler = logging.StreamHandler()
    handler.addFilter(ContextFilter())
    if settings.LOG_FORMAT.lower() == "json":
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))

    logging.basicConfig(level=settings.LOG_LEVEL.upper(), handlers=[handler], force=True)

    if logging.getLogger().level > logging.DEBUG:
        # one line per solve and per thresholding call otherwise
        logging.getLogger("frameshrink.solver").setLevel(logging.WARNING)
        logging.getLogger("frameshrink.prox").setLevel(logging.ERROR)
