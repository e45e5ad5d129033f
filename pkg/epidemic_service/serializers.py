from rest_framework import serializers

from degree_service.models import MAX_CLASSES
from outbreak_service.serializers import OUTBREAK_REPORT_SCHEMA

EPIDEMIC_REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "p_ep",
        "f",
        "converged",
        "iterations",
        "h_forward",
        "h_dual",
    ],
    "additionalProperties": False,
    "properties": {
        "p_ep": {"type": "number", "minimum": 0, "maximum": 1},
        "f": {"type": "number", "minimum": 0, "maximum": 1},
        "converged": {"type": "boolean"},
        "iterations": {"type": "integer", "minimum": 0},
        "h_forward": {
            "type": "array",
            "items": {"type": "number", "minimum": 0, "maximum": 1},
        },
        "h_dual": {
            "type": "array",
            "items": {"type": "number", "minimum": 0, "maximum": 1},
        },
    },
}

ANALYSIS_SCHEMA = {
    "type": "object",
    "required": ["outbreak", "epidemic"],
    "properties": {
        "outbreak": OUTBREAK_REPORT_SCHEMA,
        "epidemic": EPIDEMIC_REPORT_SCHEMA,
    },
}

SWEEP_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["s", "p_ep"],
        "additionalProperties": False,
        "properties": {
            "s": {"type": "number", "minimum": 0},
            "p_ep": {"type": "number", "minimum": 0, "maximum": 1},
        },
    },
}


def probability_list(**kwargs):
    return serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0),
        min_length=1,
        max_length=MAX_CLASSES,
        **kwargs,
    )


class EpidemicReportSerializer(serializers.Serializer):
    p_ep = serializers.FloatField()
    f = serializers.FloatField()
    converged = serializers.BooleanField()
    iterations = serializers.IntegerField()
    h_forward = serializers.ListField(
        child=serializers.FloatField(), source="h_forward.h"
    )
    h_dual = serializers.ListField(
        child=serializers.FloatField(), source="h_dual.h"
    )


class AnalyzeConfigSerializer(serializers.Serializer):
    """One input source plus the occupation probabilities.

    The source is an edge-list file, a distribution JSON file, Poisson
    means, or a network size with per-class edge probabilities.
    """

    graph = serializers.CharField(required=False)
    distribution = serializers.CharField(required=False)
    lam = serializers.ListField(
        child=serializers.FloatField(min_value=0.0),
        min_length=1,
        max_length=MAX_CLASSES,
        required=False,
    )
    network_size = serializers.IntegerField(min_value=1, required=False)
    q = probability_list(required=False)
    p = probability_list()

    def validate(self, data):
        sources = [
            name
            for name in ("graph", "distribution", "lam", "network_size")
            if name in data
        ]
        if len(sources) != 1:
            raise serializers.ValidationError(
                "give exactly one of --graph, --distribution, --lambda or "
                "--network-size"
            )
        if ("network_size" in data) != ("q" in data):
            raise serializers.ValidationError(
                "--network-size and --q go together"
            )
        classes = len(data.get("lam") or data.get("q") or data["p"])
        if len(data["p"]) != classes:
            raise serializers.ValidationError(
                {"p": f"expected {classes} probabilities, one per class"}
            )
        return data


class SweepConfigSerializer(serializers.Serializer):
    s_from = serializers.FloatField(min_value=0.0)
    s_step = serializers.FloatField()
    s_to = serializers.FloatField(min_value=0.0)
    format = serializers.ChoiceField(choices=["csv", "json"], default="csv")

    def validate(self, data):
        if data["s_step"] <= 0.0:
            raise serializers.ValidationError({"s_step": "must be positive"})
        if data["s_from"] > data["s_to"]:
            raise serializers.ValidationError("--s-from exceeds --s-to")
        return data
