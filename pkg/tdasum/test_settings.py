"""
Test settings for tdasum.
Separate settings for testing to ensure clean test environment.
"""

from .settings import *  # noqa: F401,F403

DEBUG = False

# Use in-memory SQLite for faster tests
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    }
}

SECRET_KEY = "test-secret-key-for-testing-only"

# Keep test runs deterministic regardless of the caller's environment
TDASUM_THREADS = 1
TDASUM_GRID_SIZE = 512
TDASUM_GRID_PADDING = 0.05
TDASUM_LOESS_FRACTION = 0.001
TDASUM_LOESS_MIN_NEIGHBOURS = 13
TDASUM_HOMOLOGY_METHOD = "reduction"
TDASUM_RECORD_RUNS = False

# Quiet library logging during tests
LOGGING["loggers"]["core"]["level"] = "ERROR"  # noqa: F405
