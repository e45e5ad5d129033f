import math

from django.core.management.base import CommandError

from config.commands import (
    USAGE_ERROR,
    NetPercolateCommand,
    render_csv,
    render_json,
)
from epidemic_service.models import ERParams
from epidemic_service.serializers import SweepConfigSerializer
from epidemic_service.utils import er_closed_form

GRID_DIGITS = 10


def sweep_grid(s_from: float, s_step: float, s_to: float) -> list[float]:
    """from + k * step up to and including `to`, free of drift."""
    steps = math.floor((s_to - s_from) / s_step + 1e-9)
    return [round(s_from + k * s_step, GRID_DIGITS) for k in range(steps + 1)]


def epidemic_probability(s: float) -> float:
    return er_closed_form(ERParams((s,), (1.0,))).p_ep


def parse_range(text: str) -> dict:
    try:
        s_from, s_step, s_to = (float(part) for part in text.split(":"))
    except ValueError:
        raise CommandError(
            f"expected a from:step:to range, got {text!r}",
            returncode=USAGE_ERROR,
        )
    return {"s_from": s_from, "s_step": s_step, "s_to": s_to}


class Command(NetPercolateCommand):
    help = "Erdos-Renyi epidemic probability over a grid of s values."
    config_serializer = SweepConfigSerializer
    formats = ("csv", "json")

    def add_command_arguments(self, parser):
        parser.add_argument(
            "range", nargs="?", help="Grid as from:step:to, e.g. 1.0:0.05:2.0"
        )
        parser.add_argument("--s-from", type=float)
        parser.add_argument("--s-step", type=float)
        parser.add_argument("--s-to", type=float)

    def load_parameters(self, options):
        if options.get("range"):
            options = dict(options)
            for name, value in parse_range(options["range"]).items():
                if options.get(name) is None:
                    options[name] = value
        return super().load_parameters(options)

    def run(self, params):
        grid = sweep_grid(params["s_from"], params["s_step"], params["s_to"])
        rows = [(s, epidemic_probability(s)) for s in grid]
        if params["format"] == "json":
            return render_json([{"s": s, "p_ep": p_ep} for s, p_ep in rows])
        return render_csv(
            ("s", "p_ep"), ((f"{s:.6f}", f"{p:.6f}") for s, p in rows)
        )
