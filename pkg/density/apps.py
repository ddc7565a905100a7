from django.apps import AppConfig


class DensityConfig(AppConfig):
    name = "density"
