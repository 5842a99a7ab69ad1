from django.apps import AppConfig


class PhaselessConfig(AppConfig):
    name = 'phaseless'
    verbose_name = "Phaseless inverse scattering"
