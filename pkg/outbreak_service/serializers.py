from rest_framework import serializers

OUTBREAK_REPORT_SCHEMA = {
    "type": "object",
    "required": ["det_a", "supercritical", "e_s_by_class", "e_s_node"],
    "additionalProperties": False,
    "properties": {
        "det_a": {"type": "number"},
        "supercritical": {"type": "boolean"},
        "e_s_by_class": {
            "type": ["array", "null"],
            "items": {"type": "number", "minimum": 1},
        },
        "e_s_node": {"type": ["number", "null"], "minimum": 1},
    },
}


class OutbreakReportSerializer(serializers.Serializer):
    """Read-only view of an OutbreakReport; expectations are null when
    the system is supercritical."""

    det_a = serializers.FloatField()
    supercritical = serializers.BooleanField()
    e_s_by_class = serializers.ListField(child=serializers.FloatField())
    e_s_node = serializers.FloatField()
