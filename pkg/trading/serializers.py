from rest_framework import serializers

from core.serializers import MarkedFloatField


class PerformanceReportSerializer(serializers.Serializer):
    sharpe_ratio = MarkedFloatField(allow_null=True)
    profit_factor = MarkedFloatField(allow_null=True)
    max_drawdown = MarkedFloatField()
    monthly_returns = serializers.DictField(child=MarkedFloatField())


class DrawdownProfitSerializer(serializers.Serializer):
    max_drawdown = MarkedFloatField()
    max_profit = MarkedFloatField(allow_null=True)
    total_return = MarkedFloatField()


class ConfusionMatrixSerializer(serializers.Serializer):
    tp = serializers.IntegerField()
    fp = serializers.IntegerField()
    fn = serializers.IntegerField()
    tn = serializers.IntegerField()


class ClassMetricsSerializer(serializers.Serializer):
    precision = MarkedFloatField()
    recall = MarkedFloatField()
    f1 = MarkedFloatField()
    support = serializers.IntegerField()
    undefined = serializers.ListField(child=serializers.CharField())


class ClassReportSerializer(serializers.Serializer):
    accuracy = MarkedFloatField()
    classes = serializers.DictField(child=ClassMetricsSerializer())


class ExtremeBucketSerializer(serializers.Serializer):
    level = MarkedFloatField()
    lower = MarkedFloatField()
    upper = MarkedFloatField()
    count = serializers.IntegerField()
    correct = serializers.IntegerField()
    accuracy = MarkedFloatField(allow_null=True)
    undefined = serializers.SerializerMethodField()

    def get_undefined(self, bucket):
        return bucket.count == 0


class ExtremeAccuracySerializer(serializers.Serializer):
    regular = MarkedFloatField()
    total = serializers.IntegerField()
    buckets = ExtremeBucketSerializer(many=True)


class PermutationImportanceSerializer(serializers.Serializer):
    baseline = MarkedFloatField()
    drops = serializers.DictField(child=MarkedFloatField())
    shares = serializers.DictField(child=MarkedFloatField())
    uniform = serializers.BooleanField()


class CvFoldSerializer(serializers.Serializer):
    index = serializers.IntegerField()
    accuracy = MarkedFloatField(allow_null=True)
    sharpe_only_long = MarkedFloatField(allow_null=True)
    sharpe_long_short = MarkedFloatField(allow_null=True)
    error = serializers.CharField(allow_null=True)


class CvResultSerializer(serializers.Serializer):
    folds = CvFoldSerializer(many=True)
    means = serializers.DictField(child=MarkedFloatField(allow_null=True))
    incomplete = serializers.BooleanField()
    completed = serializers.IntegerField()
