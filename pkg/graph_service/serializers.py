from rest_framework import serializers

from degree_service.models import MAX_CLASSES


class SplitEdgeConfigSerializer(serializers.Serializer):
    graph = serializers.CharField()
    edge = serializers.IntegerField(min_value=0)
    p = serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0),
        min_length=1,
        max_length=MAX_CLASSES,
        required=False,
    )
