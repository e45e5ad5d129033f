from config.commands import NetPercolateCommand, render_csv, render_json
from simulation_service.serializers import (
    TRIAL_CSV_HEADER,
    SimEstimatesSerializer,
    SimulateConfigSerializer,
    to_sim_config,
    trial_rows,
)
from simulation_service.utils import estimate


class Command(NetPercolateCommand):
    help = (
        "Monte Carlo estimates of outbreak size, epidemic probability and "
        "affected fraction on multi-class Erdos-Renyi graphs."
    )
    config_serializer = SimulateConfigSerializer
    config_aliases = {"lambda": "lam"}
    formats = ("json", "csv")

    def add_command_arguments(self, parser):
        parser.add_argument("--n-nodes", type=int, help="Nodes per graph.")
        parser.add_argument(
            "--lambda",
            dest="lam",
            type=float,
            nargs="+",
            help="Per-class mean out-degrees.",
        )
        parser.add_argument(
            "--p",
            type=float,
            nargs="+",
            help="Per-class occupation probabilities.",
        )
        parser.add_argument("--trials", type=int, help="Graphs to generate.")
        parser.add_argument("--seed", type=int)
        parser.add_argument(
            "--seeds-per-graph",
            type=int,
            help="Random outbreak seeds measured on every graph.",
        )
        parser.add_argument(
            "--edge-seeds-per-class",
            type=int,
            help="Random occupied edges per class followed on every graph.",
        )

    def run(self, params):
        estimates = estimate(to_sim_config(params))
        if params["format"] == "csv":
            return render_csv(TRIAL_CSV_HEADER, trial_rows(estimates))
        return render_json(SimEstimatesSerializer(estimates).data)
