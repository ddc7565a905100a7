from django.apps import AppConfig


class Homeo1dConfig(AppConfig):
    name = "homeo1d"
