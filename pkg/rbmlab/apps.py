from django.apps import AppConfig


class RbmLabConfig(AppConfig):
    name = "rbmlab"
    verbose_name = "Band matrix laboratory"
