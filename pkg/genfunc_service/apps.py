from django.apps import AppConfig


class GenfuncServiceConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "genfunc_service"
