"""Defines logging capability for the mesh QoE scheduler."""

import logging
import os
from typing import Any, Dict, List, Optional

LOG_LEVEL_ENV = "MESH_QOE_LOG_LEVEL"
PACKAGE_LOGGER = "mesh_qoe_scheduler"

LOG_DEBUG = "debug"
LOG_INFO = "info"
LOG_WARNING = "warning"
LOG_FAILURE = "failure"

_logger_to_level_choices = {
    logging.DEBUG: LOG_DEBUG,
    logging.INFO: LOG_INFO,
    logging.WARNING: LOG_WARNING,
    logging.ERROR: LOG_FAILURE,
    logging.CRITICAL: LOG_FAILURE,
}
_level_choices_to_logger = {
    LOG_DEBUG: logging.DEBUG,
    LOG_INFO: logging.INFO,
    LOG_WARNING: logging.WARNING,
    LOG_FAILURE: logging.ERROR,
}


class RunLog:
    """Ordered record of the messages logged while scheduling or sweeping.

    A `RunLog` plays the role of a result object: anything logged through a
    `LoggingMixin` or a `TraceHandler` is appended here so that it can be
    written out next to the run's results. Structured per-round scheduling
    records are kept separately in `rounds`.
    """

    def __init__(self):
        """Create an empty log."""
        self.entries: List[Dict[str, Any]] = []
        self.rounds: List[Dict[str, Any]] = []

    def log(self, message: str, level_choice: str = LOG_INFO, obj: Any = None):
        """Append a message."""
        entry = {"level": level_choice, "message": message}
        if obj is not None:
            entry["obj"] = str(obj)
        self.entries.append(entry)

    def add_round(self, record: Dict[str, Any]):
        """Append one structured scheduling-round record."""
        self.rounds.append(record)

    def as_dict(self) -> Dict[str, Any]:
        """JSON-ready view of the log."""
        return {"rounds": list(self.rounds), "messages": list(self.entries)}


class TraceHandler(logging.Handler):
    """TraceHandler is a logging handler that will copy logged messages to a RunLog."""

    def __init__(self, run_log: RunLog):
        """Initialize the TraceHandler.

        Args:
            run_log (RunLog): The RunLog that logs should be copied to.
        """
        super().__init__()
        self.run_log = run_log

    def emit(self, record: logging.LogRecord) -> None:
        """Copy the log record to the RunLog.

        Args:
            record (logging.LogRecord): Information to be logged
        """
        level = _logger_to_level_choices.get(record.levelno, LOG_INFO)
        self.run_log.log(self.format(record), level_choice=level)


def get_logger(name: str, run_log: Optional[RunLog] = None) -> logging.Logger:
    """Retrieve the named logger, optionally copying its records to a RunLog.

    Args:
        name (str): Logger name, normally the module `__name__`.
        run_log (RunLog, optional): Log that should receive copies of the records.

    Returns:
        logging.Logger: the named logger.
    """
    logger = logging.getLogger(name)
    if run_log is not None:
        logger.addHandler(TraceHandler(run_log))
    return logger


def configure_logging(level: Optional[str] = None) -> int:
    """Set the package log level from `level` or the MESH_QOE_LOG_LEVEL environment variable.

    Unknown level names fall back to WARNING.

    Returns:
        int: the numeric level that was applied.
    """
    name = (level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        numeric = logging.WARNING
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(numeric)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        logger.addHandler(handler)
    return numeric


class LoggingMixin:
    """Use this class anywhere messages need to go both to the module logger and to a run log."""

    run_log: Optional[RunLog] = None
    failed = False

    def _log(self, obj, message, level_choice=LOG_INFO):
        """Log a message. Do not call this method directly; use one of the log_* wrappers below."""
        logger = logging.getLogger(self.__class__.__module__)
        logger.log(_level_choices_to_logger[level_choice], message)
        if self.run_log is not None:
            self.run_log.log(message, level_choice=level_choice, obj=obj)

    def log(self, message):
        """Log a generic message which is not associated with a particular object."""
        self._log(None, message, level_choice=LOG_INFO)

    def log_debug(self, message):
        """Log a debug message which is not associated with a particular object."""
        self._log(None, message, level_choice=LOG_DEBUG)

    def log_info(self, obj=None, message=None):
        """Log an informational message."""
        self._log(obj, message, level_choice=LOG_INFO)

    def log_warning(self, obj=None, message=None):
        """Log a warning."""
        self._log(obj, message, level_choice=LOG_WARNING)

    def log_failure(self, obj=None, message=None):
        """Log a failure. Calling this method will automatically mark the object as failed."""
        self._log(obj, message, level_choice=LOG_FAILURE)
        self.failed = True
