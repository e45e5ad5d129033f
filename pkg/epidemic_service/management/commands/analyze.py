import logging

from config.commands import NetPercolateCommand, read_json, render_json
from degree_service.serializers import DistributionSerializer
from degree_service.utils import empirical_distribution
from epidemic_service.serializers import (
    AnalyzeConfigSerializer,
    EpidemicReportSerializer,
)
from epidemic_service.utils import analyze, er_params_from_network_size
from genfunc_service.models import GenFunc
from genfunc_service.utils import from_distribution, from_poisson
from graph_service.utils import read_edge_list
from outbreak_service.serializers import OutbreakReportSerializer

logger = logging.getLogger(__name__)


def load_generating_function(params: dict) -> GenFunc:
    """Unoccupied generating function for whichever source was given."""
    if "graph" in params:
        graph = read_edge_list(params["graph"])
        logger.info("read %s", graph)
        return from_distribution(empirical_distribution(graph))
    if "distribution" in params:
        serializer = DistributionSerializer(
            data=read_json(params["distribution"])
        )
        serializer.is_valid(raise_exception=True)
        return from_distribution(serializer.to_distribution())
    if "lam" in params:
        return from_poisson(params["lam"])
    er_params = er_params_from_network_size(
        params["network_size"], params["q"], params["p"]
    )
    return from_poisson(er_params.lam)


class Command(NetPercolateCommand):
    help = (
        "Expected outbreak sizes, epidemic probability and affected "
        "fraction for a graph, a degree distribution or Erdos-Renyi "
        "parameters."
    )
    config_serializer = AnalyzeConfigSerializer
    config_aliases = {"lambda": "lam"}

    def add_command_arguments(self, parser):
        parser.add_argument("--graph", help="Edge-list file (v1 format).")
        parser.add_argument(
            "--distribution", help="Joint degree distribution JSON file."
        )
        parser.add_argument(
            "--lambda",
            dest="lam",
            type=float,
            nargs="+",
            help="Per-class Poisson mean degrees.",
        )
        parser.add_argument(
            "--network-size",
            type=int,
            help="Network size N; the class-i mean degree is N * q_i.",
        )
        parser.add_argument(
            "--q", type=float, nargs="+", help="Per-class edge probabilities."
        )
        parser.add_argument(
            "--p",
            type=float,
            nargs="+",
            help="Per-class occupation probabilities.",
        )

    def run(self, params):
        g0 = load_generating_function(params)
        outbreak, epidemic = analyze(g0, params["p"])
        return render_json(
            {
                "outbreak": OutbreakReportSerializer(outbreak).data,
                "epidemic": EpidemicReportSerializer(epidemic).data,
            }
        )
