import logging

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from numerics.backends import get_backend
from schedule.engine import InfeasibleScheduleError

from cli.exports import column_schema, export
from cli.runs import INFEASIBLE, RunManifest, parse_config, usage_error
from cli.serializers import CURVE, DENSITY, EXPORT, ORBIT


logger = logging.getLogger(__name__)

PARAMS = ("stage", "block", "points", "x", "y", "steps", "bins")


class Command(BaseCommand):
    help = "Write plot data (curve, orbit or density) as CSV"

    def add_arguments(self, parser):
        parser.add_argument("what", choices=[CURVE, ORBIT, DENSITY])
        parser.add_argument("--schedule", help="schedule.json from build_schedule")
        parser.add_argument("--stages", type=int, help="Build a fresh schedule with this many blocks instead")
        parser.add_argument("--profile", choices=["toy", "strict"])
        parser.add_argument("--backend", choices=["exact", "float"])
        parser.add_argument("--precision", type=int)
        parser.add_argument("--stage", type=int, help="Stage n of H_n (curve) or Y_N (orbit)")
        parser.add_argument("--block", type=int, help="Block t of z_t (density)")
        parser.add_argument("--points", type=int, help="Grid points of the curve")
        parser.add_argument("--x", type=float, help="Orbit seed, first coordinate")
        parser.add_argument("--y", type=float, help="Orbit seed, second coordinate")
        parser.add_argument("--steps", type=int, help="Orbit length")
        parser.add_argument("--bins", type=int, help="Histogram bins of the density")
        parser.add_argument("--out", help="Output directory (default GOLDEN_OUTPUT_DIR)")

    def handle(self, *args, **options):
        params = {key: options[key] for key in PARAMS if options.get(key) is not None}
        config = parse_config(EXPORT, {
            **{key: options.get(key) for key in ("what", "schedule", "stages", "profile", "backend", "precision", "out")},
            "params": params,
        })
        try:
            schedule = config.load_schedule()
        except InfeasibleScheduleError as exc:
            raise CommandError(f"infeasible: {exc}", returncode=INFEASIBLE)
        except (OSError, ValueError, serializers.ValidationError) as exc:
            raise usage_error(exc)

        directory = config.output_dir()
        backend = None
        if config.backend == "exact" or config.precision:
            backend = get_backend(config.backend, config.precision)
        try:
            path = export(config.what, schedule, directory, config.params, backend)
        except ValueError as exc:
            logger.warning("export_rejected what=%s reason=%s", config.what, exc)
            raise usage_error(exc)

        manifest = RunManifest(config)
        manifest.add(path, columns=column_schema(config.what))
        manifest.write(directory)
        self.stdout.write(self.style.SUCCESS(f"Wrote {config.what} data to {path}."))
