from django.apps import AppConfig


class SymbolicConfig(AppConfig):
    name = "symbolic"
