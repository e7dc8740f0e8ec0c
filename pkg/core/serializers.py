import math

from django.conf import settings
from rest_framework import serializers

MODEL_NAMES = ("arma_garch", "cross_signal", "lstm", "rf", "svr", "knn")

CV_MODEL_NAMES = ("rf", "knn", "svr", "lstm")

SEARCHABLE_MODEL_NAMES = ("knn", "rf", "svr")


class MarkedFloatField(serializers.FloatField):
    """Float that renders infinities as strings and NaN as null."""

    def to_representation(self, value):
        if value is None:
            return None
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return value

    def to_internal_value(self, data):
        if data in ("Infinity", "-Infinity"):
            return math.inf if data == "Infinity" else -math.inf
        return super().to_internal_value(data)


class SearchBlockSerializer(serializers.Serializer):
    enabled = serializers.BooleanField(default=False)
    budget = serializers.IntegerField(min_value=1, required=False)
    folds = serializers.IntegerField(min_value=2, required=False)
    spaces = serializers.DictField(
        child=serializers.DictField(child=serializers.ListField()),
        required=False,
    )

    def validate_spaces(self, spaces):
        unknown = sorted(set(spaces) - set(SEARCHABLE_MODEL_NAMES))
        if unknown:
            raise serializers.ValidationError(
                f"no search space for models {unknown}"
            )
        return spaces


class RunConfigSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField(required=False)
    source = serializers.CharField(required=False, allow_blank=False)
    model = serializers.ChoiceField(
        choices=[*MODEL_NAMES, "all"], required=False
    )
    split = serializers.FloatField(required=False)
    strategies = serializers.ListField(
        child=serializers.ChoiceField(
            choices=settings.OILSIGNAL["STRATEGIES"]
        ),
        allow_empty=False,
        required=False,
    )
    seed = serializers.IntegerField(min_value=0, required=False)
    out = serializers.CharField(required=False)
    k = serializers.IntegerField(min_value=2, required=False)
    search = SearchBlockSerializer(required=False)
    params = serializers.DictField(child=serializers.DictField(), required=False)

    def validate_schema_version(self, value):
        if value != settings.OILSIGNAL["SCHEMA_VERSION"]:
            raise serializers.ValidationError(
                f"unsupported schema version {value}"
            )
        return value

    def validate_split(self, value):
        if not 0 < value < 1:
            raise serializers.ValidationError(
                "split must lie strictly between 0 and 1"
            )
        return value

    def validate_params(self, value):
        unknown = sorted(set(value) - set(MODEL_NAMES))
        if unknown:
            raise serializers.ValidationError(
                f"parameters given for unknown models {unknown}"
            )
        return value
