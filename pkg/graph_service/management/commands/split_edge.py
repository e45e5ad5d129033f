import io
import logging

from config.commands import NetPercolateCommand, render_json
from epidemic_service.serializers import EpidemicReportSerializer
from epidemic_service.utils import edge_failure_epidemic
from graph_service.serializers import SplitEdgeConfigSerializer
from graph_service.utils import read_edge_list, split_edge, write_edge_list

logger = logging.getLogger(__name__)


class Command(NetPercolateCommand):
    help = (
        "Replace one edge u->v by u->z->v. Writes the new edge list, or with "
        "--p the epidemic report for the failure of z."
    )
    config_serializer = SplitEdgeConfigSerializer

    def add_command_arguments(self, parser):
        parser.add_argument("--graph", help="Edge-list file (v1 format).")
        parser.add_argument("--edge", type=int, help="Index of the edge.")
        parser.add_argument(
            "--p",
            type=float,
            nargs="+",
            help="Per-class occupation probabilities.",
        )

    def run(self, params):
        graph = read_edge_list(params["graph"])
        if "p" in params:
            report = edge_failure_epidemic(graph, params["edge"], params["p"])
            return render_json(EpidemicReportSerializer(report).data)

        split, new_node = split_edge(graph, params["edge"])
        logger.info("edge %d now passes node %d", params["edge"], new_node)
        buffer = io.StringIO()
        write_edge_list(split, buffer)
        return buffer.getvalue().rstrip("\n")
