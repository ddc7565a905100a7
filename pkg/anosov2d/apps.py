from django.apps import AppConfig


class Anosov2dConfig(AppConfig):
    name = "anosov2d"
