from rest_framework import serializers

from core.serializers import MarkedFloatField


class DescriptiveSummarySerializer(serializers.Serializer):
    count = serializers.IntegerField()
    mean = MarkedFloatField()
    std = MarkedFloatField()
    min = MarkedFloatField()
    q5 = MarkedFloatField()
    q25 = MarkedFloatField()
    q50 = MarkedFloatField()
    q75 = MarkedFloatField()
    q95 = MarkedFloatField()
    max = MarkedFloatField()
    skewness = MarkedFloatField()
    kurtosis = MarkedFloatField()


class JarqueBeraSerializer(serializers.Serializer):
    statistic = MarkedFloatField()
    normality_rejected = serializers.BooleanField()


class AdfResultSerializer(serializers.Serializer):
    statistic = MarkedFloatField()
    lag_order = serializers.IntegerField()
    unit_root_rejected = serializers.BooleanField()


class LjungBoxSerializer(serializers.Serializer):
    lag = serializers.IntegerField()
    statistic = MarkedFloatField()
    p_value = MarkedFloatField()


class GarchFitSerializer(serializers.Serializer):
    orders = serializers.SerializerMethodField()
    innovation = serializers.SerializerMethodField()
    parameters = serializers.SerializerMethodField()
    persistence = MarkedFloatField(source="garch.persistence")
    log_likelihood = MarkedFloatField()
    bic = MarkedFloatField()

    def get_orders(self, fit):
        return {
            "p": fit.arma.p,
            "q": fit.arma.q,
            "n": len(fit.garch.alpha),
            "m": len(fit.garch.beta),
        }

    def get_innovation(self, fit):
        return "normal" if fit.garch.df is None else "student_t"

    def get_parameters(self, fit):
        return {name: float(value) for name, value in fit.parameter_table().items()}
