from django.apps import AppConfig


class DegreeServiceConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "degree_service"
