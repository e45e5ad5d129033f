from django.apps import AppConfig


class OutbreakServiceConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "outbreak_service"
