from django.apps import AppConfig


class EpidemicServiceConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "epidemic_service"
