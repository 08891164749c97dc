from django.apps import AppConfig


class KripkeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'kripke'
