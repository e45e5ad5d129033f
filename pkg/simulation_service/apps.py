from django.apps import AppConfig


class SimulationServiceConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "simulation_service"
