import csv
import io
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework import exceptions as drf_exceptions
from rest_framework import serializers
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from config.exceptions import DomainError, NumericError

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
NUMERIC_ERROR = 1


def read_json(path: str):
    """Parse a JSON document from disk; any failure is a usage error."""
    try:
        with open(path, "rb") as stream:
            return JSONParser().parse(stream)
    except OSError as error:
        raise CommandError(
            f"cannot read {path}: {error.strerror}", returncode=USAGE_ERROR
        )
    except drf_exceptions.ParseError as error:
        raise CommandError(f"{path}: {error.detail}", returncode=USAGE_ERROR)


def render_json(data) -> str:
    return JSONRenderer().render(data, renderer_context={"indent": 2}).decode()


def render_csv(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().rstrip("\n")


class NetPercolateCommand(BaseCommand):
    """Flags, an optional JSON config file and one output document.

    Subclasses declare their flags in add_command_arguments, validate the
    merged parameters with config_serializer and return the rendered text
    from run(). Command flags must default to None so that a flag given on
    the command line can be told apart from one left to the config file.
    """

    config_serializer: type[serializers.Serializer]
    formats = ("json",)
    # JSON config keys that differ from the option dest they fill
    config_aliases = {}

    def add_arguments(self, parser):
        parser.add_argument(
            "--config", help="JSON file supplying any of the flags below."
        )
        parser.add_argument(
            "--output", "-o", help="Write the result here instead of stdout."
        )
        if len(self.formats) > 1:
            parser.add_argument("--format", choices=self.formats)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            params = self.load_parameters(options)
            text = self.run(params)
        except serializers.ValidationError as error:
            raise CommandError(
                _describe(error.detail), returncode=USAGE_ERROR
            )
        except DomainError as error:
            raise CommandError(str(error), returncode=USAGE_ERROR)
        except OSError as error:
            raise CommandError(
                f"{error.filename}: {error.strerror}", returncode=USAGE_ERROR
            )
        except NumericError as error:
            raise CommandError(str(error), returncode=NUMERIC_ERROR)
        self.write(text, options.get("output"))

    def load_parameters(self, options) -> dict:
        fields = self.config_serializer().fields
        data = {}
        if options.get("config"):
            config = read_json(options["config"])
            if not isinstance(config, dict):
                raise CommandError(
                    "the config file must hold a JSON object",
                    returncode=USAGE_ERROR,
                )
            for key, value in config.items():
                name = key.lstrip("-").replace("-", "_")
                name = self.config_aliases.get(name, name)
                if name not in fields:
                    raise CommandError(
                        f"unknown config key {key!r}", returncode=USAGE_ERROR
                    )
                data[name] = value
        for name in fields:
            if options.get(name) is not None:
                data[name] = options[name]
        logger.debug("%s parameters: %s", self.__module__, data)

        serializer = self.config_serializer(data=data)
        serializer.is_valid(raise_exception=True)
        return serializer.validated_data

    def run(self, params: dict) -> str:
        raise NotImplementedError

    def write(self, text: str, output: str | None) -> None:
        if output:
            Path(output).write_text(text + "\n", encoding="utf-8")
            logger.info("wrote %s", output)
        else:
            self.stdout.write(text)


def _describe(detail) -> str:
    """Flatten DRF error details into one line per offending field."""
    if isinstance(detail, dict):
        return "; ".join(
            f"{field}: {_describe(errors)}" if field != "non_field_errors"
            else _describe(errors)
            for field, errors in detail.items()
        )
    if isinstance(detail, list):
        return " ".join(_describe(item) for item in detail)
    return str(detail)
