from django.apps import AppConfig


class GraphServiceConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "graph_service"
