"""
Django settings for the netpercolate project.

Analytics and the Monte Carlo oracle are driven through management commands
(``python manage.py analyze|simulate|sweep|split_edge``); there is no HTTP
surface and no database.

Everything environment-specific is read from ``os.environ`` after loading an
optional ``.env`` file.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals (signing); nothing here is secret.
SECRET_KEY = os.environ.get("SECRET_KEY", "netpercolate-local-development")

DEBUG = os.environ.get("DEBUG", "TRUE") != "FALSE"

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "rest_framework",
    "graph_service",
    "degree_service",
    "genfunc_service",
    "outbreak_service",
    "epidemic_service",
    "simulation_service",
]

# No models anywhere in the project.
DATABASES = {}

TIME_ZONE = "UTC"

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Simulation parallelism. Trials are celery tasks; without a broker they run
# eagerly in this process, otherwise a worker started with
# ``celery -A config worker`` picks them up with this concurrency.
NETPERCOLATE_THREADS = int(
    os.environ.get("NETPERCOLATE_THREADS", os.cpu_count() or 1)
)

NETPERCOLATE_LOG_LEVEL = os.environ.get("NETPERCOLATE_LOG_LEVEL", "INFO")

NETPERCOLATE = {
    # Reachable sets above max(GIANT_CUTOFF_MIN, N ** (2 / 3)) count as giant.
    "GIANT_CUTOFF_MIN": 100,
    "SEEDS_PER_GRAPH": 1000,
    "EDGE_SEEDS_PER_CLASS": 200,
    "DEFAULT_TRIALS": 20,
    "DEFAULT_SEED": 0,
}

CELERY_BROKER_URL = os.environ.get("CELERY_BROKER_URL", "")
CELERY_RESULT_BACKEND = os.environ.get("CELERY_RESULT_BACKEND", "")
CELERY_TASK_ALWAYS_EAGER = not CELERY_BROKER_URL
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_WORKER_CONCURRENCY = NETPERCOLATE_THREADS

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "netpercolate": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "netpercolate",
        },
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": NETPERCOLATE_LOG_LEVEL,
            "propagate": False,
        }
        for app in INSTALLED_APPS[1:] + ["config"]
    },
}
