"""Celery app that runs Monte Carlo trials.

With no CELERY_BROKER_URL every task runs eagerly in the calling process;
otherwise start workers with ``celery -A config worker``.
"""

import os

from celery import Celery

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")

app = Celery("netpercolate")

app.config_from_object("django.conf:settings", namespace="CELERY")

# run_trial lives in simulation_service/utils.py
app.autodiscover_tasks(["simulation_service"], related_name="utils")

app.conf.broker_connection_retry_on_startup = True
# one trial is seconds of work; do not let a worker hoard them
app.conf.worker_prefetch_multiplier = 1
