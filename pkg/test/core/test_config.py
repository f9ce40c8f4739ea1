import unittest

from memnet.config import Settings, executor
from memnet.errors import InvalidArgument

__doc__ = """Unit tests for environment settings
"""


class TestSettings(unittest.TestCase):
    def test_from_env(self):
        settings = Settings.from_env({"MEMNET_THREADS": "3", "MEMNET_LOG_LEVEL": "info"})
        self.assertEqual(3, settings.threads)
        self.assertEqual("INFO", settings.log_level)

    def test_defaults(self):
        settings = Settings.from_env({})
        self.assertGreaterEqual(settings.threads, 1)
        self.assertLessEqual(settings.threads, Settings.default_max_threads)
        self.assertEqual("WARNING", settings.log_level)

    def test_invalid_values_raise(self):
        self.assertRaises(InvalidArgument, Settings.from_env, {"MEMNET_THREADS": "many"})
        self.assertRaises(InvalidArgument, Settings.from_env, {"MEMNET_THREADS": "0"})
        self.assertRaises(InvalidArgument, Settings.from_env, {"MEMNET_LOG_LEVEL": "chatty"})

    def test_executor_runs_jobs(self):
        with executor(4) as pool:
            self.assertEqual([1, 4, 9], list(pool.map(lambda v: v * v, [1, 2, 3])))


if __name__ == "__main__":
    unittest.main()
