from django.apps import AppConfig


class EconometricsConfig(AppConfig):
    name = "econometrics"
    verbose_name = "Econometric diagnostics and ARMA-GARCH"
