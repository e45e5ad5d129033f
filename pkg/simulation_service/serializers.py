from django.conf import settings
from rest_framework import serializers

from degree_service.models import MAX_CLASSES
from simulation_service.models import MAX_SEED, SimConfig

ESTIMATE_SCHEMA = {
    "type": "object",
    "required": ["value", "standard_error", "samples"],
    "additionalProperties": False,
    "properties": {
        "value": {"type": ["number", "null"], "minimum": 0},
        "standard_error": {"type": ["number", "null"], "minimum": 0},
        "samples": {"type": "integer", "minimum": 0},
    },
}

SIM_ESTIMATES_SCHEMA = {
    "type": "object",
    "required": [
        "mean_outbreak",
        "p_ep_hat",
        "f_hat",
        "n_graphs",
        "mean_outbreak_by_class",
    ],
    "additionalProperties": False,
    "properties": {
        "mean_outbreak": ESTIMATE_SCHEMA,
        "p_ep_hat": ESTIMATE_SCHEMA,
        "f_hat": ESTIMATE_SCHEMA,
        "n_graphs": {"type": "integer", "minimum": 1},
        "mean_outbreak_by_class": {"type": "array", "items": ESTIMATE_SCHEMA},
    },
}

TRIAL_CSV_HEADER = (
    "trial",
    "gscc",
    "gin",
    "gout",
    "mean_small_outbreak",
    "max_outbreak",
)


class EstimateSerializer(serializers.Serializer):
    value = serializers.FloatField()
    standard_error = serializers.FloatField()
    samples = serializers.IntegerField()


class SimEstimatesSerializer(serializers.Serializer):
    mean_outbreak = EstimateSerializer()
    p_ep_hat = EstimateSerializer()
    f_hat = EstimateSerializer()
    n_graphs = serializers.IntegerField()
    mean_outbreak_by_class = EstimateSerializer(many=True)


def trial_rows(estimates):
    """Per-trial CSV rows; a trial without small outbreaks leaves the
    mean empty."""
    for trial in estimates.trials:
        mean = trial.mean_small_outbreak
        yield (
            trial.trial,
            trial.gscc,
            trial.gin,
            trial.gout,
            "" if mean is None else f"{mean:.6f}",
            trial.max_outbreak,
        )


class SimulateConfigSerializer(serializers.Serializer):
    n_nodes = serializers.IntegerField(min_value=1)
    lam = serializers.ListField(
        child=serializers.FloatField(min_value=0.0),
        min_length=1,
        max_length=MAX_CLASSES,
    )
    p = serializers.ListField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0),
        min_length=1,
        max_length=MAX_CLASSES,
    )
    trials = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(
        min_value=0, max_value=MAX_SEED, required=False
    )
    seeds_per_graph = serializers.IntegerField(min_value=1, required=False)
    edge_seeds_per_class = serializers.IntegerField(
        min_value=0, required=False
    )
    format = serializers.ChoiceField(choices=["json", "csv"], default="json")

    def validate(self, data):
        if len(data["lam"]) != len(data["p"]):
            raise serializers.ValidationError(
                {"p": f"expected {len(data['lam'])} probabilities"}
            )
        return data


def to_sim_config(data: dict) -> SimConfig:
    """SimConfig from validated simulate parameters, settings filling gaps."""
    defaults = settings.NETPERCOLATE
    return SimConfig(
        n_nodes=data["n_nodes"],
        lam=data["lam"],
        p=data["p"],
        trials=data.get("trials", defaults["DEFAULT_TRIALS"]),
        seed=data.get("seed", defaults["DEFAULT_SEED"]),
        seeds_per_graph=data.get(
            "seeds_per_graph", defaults["SEEDS_PER_GRAPH"]
        ),
        edge_seeds_per_class=data.get(
            "edge_seeds_per_class", defaults["EDGE_SEEDS_PER_CLASS"]
        ),
    )
