import logging

import numpy as np
from rest_framework import serializers

from degree_service.models import (
    MAX_CLASSES,
    NORMALIZATION_TOLERANCE,
    DegreeVector,
    JointDegreeDistribution,
)
from degree_service.utils import out_stats, stats

logger = logging.getLogger(__name__)

# Inputs may be rounded; anything closer to 1 than this is renormalized.
INPUT_SUM_TOLERANCE = 1e-9
BALANCE_TOLERANCE = 1e-9

DISTRIBUTION_SCHEMA = {
    "type": "object",
    "required": ["classes", "entries"],
    "properties": {
        "classes": {"type": "integer", "minimum": 1, "maximum": MAX_CLASSES},
        "entries": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["in", "out", "p"],
                "properties": {
                    "in": {"type": "array", "items": {"type": "integer"}},
                    "out": {"type": "array", "items": {"type": "integer"}},
                    "p": {"type": "number", "minimum": 0, "maximum": 1},
                },
            },
        },
    },
}


class DegreeEntrySerializer(serializers.Serializer):
    p = serializers.FloatField(min_value=0.0, max_value=1.0)

    def get_fields(self):
        fields = super().get_fields()
        # "in" is a keyword, so both degree fields are declared here.
        for key in ("in", "out"):
            fields[key] = serializers.ListField(
                child=serializers.IntegerField(min_value=0)
            )
        return fields


class DistributionSerializer(serializers.Serializer):
    classes = serializers.IntegerField(min_value=1, max_value=MAX_CLASSES)
    entries = DegreeEntrySerializer(many=True, allow_empty=False)

    def validate(self, data):
        classes = data["classes"]
        for entry in data["entries"]:
            if len(entry["in"]) != classes or len(entry["out"]) != classes:
                raise serializers.ValidationError(
                    f"every entry needs {classes} in- and out-degrees"
                )
        total = sum(entry["p"] for entry in data["entries"])
        if abs(total - 1.0) > INPUT_SUM_TOLERANCE:
            raise serializers.ValidationError(
                f"entry probabilities sum to {total}, not 1"
            )
        return data

    def to_distribution(self) -> JointDegreeDistribution:
        data = self.validated_data
        table = {}
        for entry in data["entries"]:
            vector = DegreeVector(entry["in"], entry["out"])
            table[vector] = table.get(vector, 0.0) + entry["p"]

        total = sum(table.values())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            logger.warning(
                "renormalizing distribution input summing to %r", total
            )
            table = {vector: p / total for vector, p in table.items()}
        dist = JointDegreeDistribution(data["classes"], table)

        # every edge has two ends, so a realizable table balances per class
        z_in, z_out = stats(dist).z_by_class, out_stats(dist).z_by_class
        if not np.allclose(z_in, z_out, rtol=0.0, atol=BALANCE_TOLERANCE):
            logger.warning(
                "mean in-degrees %s differ from mean out-degrees %s; "
                "no graph has this degree table",
                z_in,
                z_out,
            )
        return dist

    def to_representation(self, instance: JointDegreeDistribution):
        return {
            "classes": instance.n_classes,
            "entries": [
                {
                    "in": list(vector.in_by_class),
                    "out": list(vector.out_by_class),
                    "p": probability,
                }
                for vector, probability in instance.table.items()
            ],
        }
