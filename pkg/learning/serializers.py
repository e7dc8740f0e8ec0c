from rest_framework import serializers

from core.serializers import MarkedFloatField
from learning.search import FAMILIES


class SearchTrialSerializer(serializers.Serializer):
    index = serializers.IntegerField()
    params = serializers.DictField()
    score = MarkedFloatField(allow_null=True)
    fold_scores = serializers.ListField(child=MarkedFloatField())
    error = serializers.CharField(allow_null=True)


class SearchResultSerializer(serializers.Serializer):
    family = serializers.CharField()
    scoring = serializers.SerializerMethodField()
    best_params = serializers.DictField()
    best_score = MarkedFloatField()
    trials = SearchTrialSerializer(many=True)

    def get_scoring(self, result):
        return FAMILIES[result.family].scoring

