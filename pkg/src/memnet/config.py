import logging
import os
from concurrent.futures import ThreadPoolExecutor

from memnet.errors import InvalidArgument

__doc__ = """Process settings read from the environment

MEMNET_THREADS      upper bound on worker threads used for fan-out loops
MEMNET_LOG_LEVEL    default logging level of the command line (WARNING)
"""

__all__ = ["Settings", "settings", "executor"]

logger = logging.getLogger(__name__)


class Settings:
    """
    Immutable bag of process-wide options
    """

    default_max_threads = 8
    default_log_level = "WARNING"

    def __init__(self, threads=None, log_level=None):
        """
        :param threads: worker thread cap (None selects cpu count, capped)
        :param log_level: logging level name
        """
        if threads is None:
            threads = min(os.cpu_count() or 1, self.default_max_threads)
        if not isinstance(threads, int) or threads < 1:
            raise InvalidArgument(f"thread count must be a positive integer, got {threads!r}")
        self.threads = threads
        self.log_level = (log_level or self.default_log_level).upper()
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise InvalidArgument(f"unknown log level {log_level!r}")

    @classmethod
    def from_env(cls, environ=None):
        environ = os.environ if environ is None else environ
        threads = environ.get("MEMNET_THREADS")
        if threads is not None:
            try:
                threads = int(threads)
            except ValueError:
                raise InvalidArgument(f"MEMNET_THREADS must be an integer, got {threads!r}")
        return cls(threads=threads, log_level=environ.get("MEMNET_LOG_LEVEL"))

    def __repr__(self):
        return f"Settings(threads={self.threads}, log_level={self.log_level!r})"


_settings = None


def settings():
    """Return the lazily created process-wide settings."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
        logger.debug("loaded %r", _settings)
    return _settings


def executor(jobs):
    """
    Thread pool sized for the given number of jobs, never above Settings.threads
    """
    return ThreadPoolExecutor(max_workers=max(1, min(settings().threads, jobs)))
