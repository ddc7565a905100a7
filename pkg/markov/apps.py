from django.apps import AppConfig


class MarkovConfig(AppConfig):
    name = "markov"
