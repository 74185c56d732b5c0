"""
Shared plumbing for the tdasum management commands.

A command implements ``run(**options)`` and returns the files it wants to
write as a mapping of file name to writer. Nothing is written until ``run``
has returned, so a failing command leaves its output directory untouched.
Every successful run also writes ``manifest.json`` next to its outputs.
"""

import argparse
import logging
import time
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError, DjangoHelpFormatter

from core import __version__
from core.domain import MetricSpec, MetricWeight, SummaryKind, parse_metric_p
from core.exceptions import BadConfig, TdaError
from core.fileio import file_digest, read_config, read_curve, write_json

logger = logging.getLogger(__name__)

# Django's own options, left out of manifests
BASE_OPTIONS = {
    "settings", "pythonpath", "traceback", "no_color", "force_color", "skip_checks", "verbosity", "stdout", "stderr",
}

USAGE_ERROR = 2
DATA_ERROR = 3


class TdaHelpFormatter(DjangoHelpFormatter, argparse.ArgumentDefaultsHelpFormatter):
    """Django's help layout with every flag's default appended."""


def positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def non_negative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def unit_interval(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return value


def metric_exponent(text):
    try:
        value = parse_metric_p(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'inf', got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _cast_like(default, text):
    text = text.strip()
    if isinstance(default, bool):
        lowered = text.lower()
        if lowered in ("1", "true", "yes"):
            return True
        if lowered in ("0", "false", "no"):
            return False
        raise ValueError(f"{text!r} is not true or false")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


class TdaCommand(BaseCommand):
    """Base class: output directory, thread cap, seed, manifest and exit codes."""

    stochastic = False

    def create_parser(self, prog_name, subcommand, **kwargs):
        kwargs.setdefault("formatter_class", TdaHelpFormatter)
        return super().create_parser(prog_name, subcommand, **kwargs)

    def add_arguments(self, parser):
        parser.add_argument("--out-dir", default="results", help="directory receiving every output file")
        parser.add_argument(
            "--threads", type=positive_int, default=None,
            help="worker threads; falls back to TDASUM_THREADS",
        )
        if self.stochastic:
            parser.add_argument("--seed", type=non_negative_int, required=True, help="seed of every random draw")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    @staticmethod
    def add_metric_arguments(parser, p="2", weight=MetricWeight.UNIT):
        parser.add_argument("--metric-p", type=metric_exponent, default=p, help="exponent p of the metric; 'inf' for sup")
        parser.add_argument(
            "--metric-weight", choices=MetricWeight.values, default=str(weight),
            help="weight function: unit, or the pointwise standard deviation",
        )

    @staticmethod
    def add_kind_argument(parser):
        parser.add_argument(
            "--kind", choices=SummaryKind.values, default=SummaryKind.LANDSCAPE,
            help="kind recorded for curves read from CSV",
        )

    @staticmethod
    def metric_from(options):
        return MetricSpec(p=options["metric_p"], weight=options["metric_weight"])

    def read_curves(self, paths, kind):
        self.inputs.extend(paths)
        return [read_curve(path, kind) for path in paths]

    def read_config(self, path):
        self.inputs.append(path)
        return read_config(path)

    def merge_config(self, options, defaults):
        """Values from ``--config`` fill every option still at its default; explicit flags win.

        Keys use the option names with underscores. Problems are collected into one BadConfig.
        """
        merged = {key: options[key] for key in defaults}
        if options.get("config") is None:
            return merged
        errors = {}
        for key, text in self.read_config(options["config"]).items():
            if key not in defaults:
                errors[key] = ["unknown key"]
                continue
            if options[key] != defaults[key]:
                continue
            try:
                merged[key] = _cast_like(defaults[key], text)
            except ValueError as exc:
                errors[key] = [str(exc)]
        if errors:
            raise BadConfig(errors)
        return merged

    def usage_error(self, message):
        return CommandError(message, returncode=USAGE_ERROR)

    def run(self, **options):
        raise NotImplementedError("subclasses of TdaCommand must provide a run() method")

    def handle(self, *args, **options):
        if options.get("verbosity", 1) >= 2:
            logging.getLogger("core").setLevel(logging.DEBUG)
        self.inputs = []
        self.threads = options.get("threads")
        self.summary = {}
        self.seed = options.get("seed")
        started = time.monotonic()
        try:
            outputs = self.run(**options)
        except TdaError as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=exc.exit_code) from exc
        except FileNotFoundError as exc:
            raise CommandError(str(exc), returncode=DATA_ERROR) from exc
        except ValueError as exc:
            raise CommandError(str(exc), returncode=DATA_ERROR) from exc

        out_dir = Path(options["out_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        written = {}
        for name, writer in outputs.items():
            path = out_dir / name
            writer(path)
            written[name] = file_digest(path)
        manifest = {
            "command": self.command_name,
            "options": {k: v for k, v in sorted(options.items()) if k not in BASE_OPTIONS},
            "seed": self.seed,
            "version": __version__,
            "inputs": {str(path): file_digest(path) for path in self.inputs},
            "outputs": written,
            "wall_time": round(time.monotonic() - started, 6),
        }
        write_json(manifest, out_dir / "manifest.json")
        if settings.TDASUM_RECORD_RUNS:
            self.record(manifest, out_dir)
        logger.info("%s wrote %d files to %s", self.command_name, len(written), out_dir)

        for key, value in self.summary.items():
            self.stdout.write(f"{key}: {value}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(written)} files to {out_dir}"))

    @property
    def command_name(self):
        return self.__module__.rsplit(".", 1)[-1]

    def record(self, manifest, out_dir):
        from core.models import RunManifest

        RunManifest.objects.create(
            command=manifest["command"],
            options=manifest["options"],
            seed=manifest["seed"],
            version=manifest["version"],
            inputs=manifest["inputs"],
            outputs=manifest["outputs"],
            out_dir=str(out_dir),
            wall_time=manifest["wall_time"],
        )
