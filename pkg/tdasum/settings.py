"""
Django settings for the tdasum project.

The project has no web surface: Django provides configuration, logging,
the management-command CLI and the optional run registry.

Every TDASUM_* value can be overridden from the environment or from a
``.env`` file at the project root.
"""

from pathlib import Path
import os

import dj_database_url
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / ".env")


def env_flag(name, default="False"):
    return os.environ.get(name, default).strip().lower() in ("1", "true", "yes", "on")


# Not used for anything cryptographic; Django refuses to start without one.
SECRET_KEY = os.environ.get("SECRET_KEY", "tdasum-insecure-local-key")

DEBUG = env_flag("DEBUG")

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "core",
]

MIDDLEWARE = []


# Database
# Only used by the run registry (TDASUM_RECORD_RUNS).

if "DATABASE_URL" in os.environ:
    DATABASES = {
        "default": dj_database_url.parse(os.environ.get("DATABASE_URL"))
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "db.sqlite3",
        }
    }

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True


# Computation defaults

TDASUM_THREADS = int(os.environ.get("TDASUM_THREADS", "1"))

TDASUM_GRID_SIZE = int(os.environ.get("TDASUM_GRID_SIZE", "512"))
TDASUM_GRID_PADDING = float(os.environ.get("TDASUM_GRID_PADDING", "0.05"))

TDASUM_LOESS_FRACTION = float(os.environ.get("TDASUM_LOESS_FRACTION", "0.001"))
TDASUM_LOESS_MIN_NEIGHBOURS = int(os.environ.get("TDASUM_LOESS_MIN_NEIGHBOURS", "13"))

# "reduction" (boundary matrix reduction) or "union_find" (dual-graph fast path)
TDASUM_HOMOLOGY_METHOD = os.environ.get("TDASUM_HOMOLOGY_METHOD", "reduction")

# Persist run manifests in DATABASES as well as next to the outputs.
TDASUM_RECORD_RUNS = env_flag("TDASUM_RECORD_RUNS")

TDASUM_LOG_LEVEL = os.environ.get("TDASUM_LOG_LEVEL", "WARNING").upper()


# Logging configuration

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "core": {
            "handlers": ["console"],
            "level": TDASUM_LOG_LEVEL,
            "propagate": False,
        },
    },
}
