"""Test run logs and the logging mixin."""

import logging
import os
import unittest
from unittest import mock

from mesh_qoe_scheduler.logging import (
    LOG_FAILURE,
    LOG_INFO,
    LoggingMixin,
    RunLog,
    TraceHandler,
    configure_logging,
    get_logger,
)


class Reporter(LoggingMixin):
    """A LoggingMixin user."""

    def __init__(self, run_log=None):
        self.run_log = run_log


class TestLoggingMixin(unittest.TestCase):
    """Test LoggingMixin."""

    def test_messages_reach_run_log(self):
        run_log = RunLog()
        reporter = Reporter(run_log)
        reporter.log("hello")
        reporter.log_info(obj="cell 3", message="started")
        self.assertEqual(
            [
                {"level": LOG_INFO, "message": "hello"},
                {"level": LOG_INFO, "message": "started", "obj": "cell 3"},
            ],
            run_log.entries,
        )

    def test_failure_marks_failed(self):
        run_log = RunLog()
        reporter = Reporter(run_log)
        self.assertFalse(reporter.failed)
        reporter.log_failure(message="seed 4 failed")
        self.assertTrue(reporter.failed)
        self.assertEqual(LOG_FAILURE, run_log.entries[-1]["level"])

    def test_without_run_log(self):
        reporter = Reporter()
        reporter.log_warning(message="nobody listens")
        self.assertFalse(reporter.failed)


class TestRunLog(unittest.TestCase):
    """Test RunLog."""

    def test_as_dict(self):
        run_log = RunLog()
        run_log.add_round({"round": 1, "apps": [0], "quotas": {0: 2}, "placements": [[0, 0, 0]]})
        run_log.log("done")
        got = run_log.as_dict()
        self.assertEqual(1, got["rounds"][0]["round"])
        self.assertEqual("done", got["messages"][0]["message"])

    def test_trace_handler(self):
        run_log = RunLog()
        logger = get_logger("mesh_qoe_scheduler.tests.trace", run_log)
        try:
            logger.handle(logging.LogRecord("x", logging.ERROR, __file__, 1, "broken %s", ("link",), None))
        finally:
            for handler in list(logger.handlers):
                if isinstance(handler, TraceHandler):
                    logger.removeHandler(handler)
        self.assertEqual([{"level": LOG_FAILURE, "message": "broken link"}], run_log.entries)


class TestConfigureLogging(unittest.TestCase):
    """Test configure_logging."""

    def test_explicit_level(self):
        self.assertEqual(logging.DEBUG, configure_logging("debug"))

    def test_environment_level(self):
        with mock.patch.dict(os.environ, {"MESH_QOE_LOG_LEVEL": "info"}):
            self.assertEqual(logging.INFO, configure_logging())

    def test_unknown_level(self):
        self.assertEqual(logging.WARNING, configure_logging("chatty"))
